"""
Driven Jaynes-Cummings engine: analytic inversion and lineshapes plus a
truncated-Fock numerical oracle.
"""
__version__ = "0.1.0"
