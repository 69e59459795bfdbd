"""
Model - physical parameters and initial-state description for the driven JCM
Holds ModelParams/DerivedParams, the field specification, truncation policy and
the small pure helpers (Rabi frequency, thermal weights) shared by the analytic
engine and the numerical oracle. Units: hbar = 1, frequencies in units of g.
"""
import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple, Union

import numpy as np

from utils.jcm.errors import (
    ConstrictionViolated,
    InvalidFieldSpec,
    InvalidPolicy,
    NegativeRate,
    NonPositiveCoupling,
    TruncationCapExceeded,
)

CONSTRICTION_RTOL = 1e-9


@dataclass(frozen=True)
class ModelParams:
    """All frequencies and couplings of the lab-frame driven Hamiltonian"""
    omega_c: float                   # cavity mode frequency
    omega_eg: float                  # atomic transition frequency
    g: float                         # atom-cavity coupling
    zeta: float = 0.0                # classical field - atom coupling
    xi: float = 0.0                  # classical field - cavity coupling
    omega_0: Optional[float] = None  # drive frequency, fixed by the constriction

    @property
    def is_driven(self) -> bool:
        return self.zeta > 0

    def with_detuning(self, delta: float) -> "ModelParams":
        """Copy with omega_eg = omega_c + delta, re-validated"""
        if self.omega_c + delta <= 0:
            raise NegativeRate(
                f"Detuning {delta} makes omega_eg non-positive for omega_c={self.omega_c}",
                value=delta, limit=-self.omega_c,
            )
        return validate_params(replace(self, omega_eg=self.omega_c + delta, omega_0=None))

    @classmethod
    def from_lineshape(cls, g: float, alpha: float, delta: float,
                       omega_c: float = 0.4, xi: float = 0.2) -> "ModelParams":
        """
        Full parameter set realising (g, alpha, delta) for oracle lineshape checks

        zeta = alpha * g; xi is dropped when alpha = 0 so the model is undriven.
        """
        zeta = alpha * g
        resonant = validate_params(cls(
            omega_c=omega_c,
            omega_eg=omega_c,
            g=g,
            zeta=zeta,
            xi=xi if zeta > 0 else 0.0,
        ))
        return resonant.with_detuning(delta)


@dataclass(frozen=True)
class DerivedParams:
    delta_c: float    # omega_c - omega_0 = g xi / zeta
    delta_eg: float   # omega_eg - omega_0
    delta: float      # omega_eg - omega_c
    alpha: float      # zeta / g


@dataclass(frozen=True)
class Thermal:
    """Thermal cavity field with mean photon number n_bar"""
    n_bar: float

    def __post_init__(self):
        if not math.isfinite(self.n_bar) or self.n_bar < 0:
            raise InvalidFieldSpec(f"Thermal n_bar must be finite and >= 0, got {self.n_bar}",
                                   value=self.n_bar, limit=0.0)

    @property
    def label(self) -> str:
        return f"nbar-{self.n_bar:g}"


@dataclass(frozen=True)
class Fock:
    """Fock cavity field with exactly k photons"""
    k: int

    def __post_init__(self):
        if isinstance(self.k, bool) or int(self.k) != self.k or self.k < 0:
            raise InvalidFieldSpec(f"Fock photon number must be an integer >= 0, got {self.k}",
                                   value=self.k, limit=0)
        object.__setattr__(self, "k", int(self.k))

    @property
    def label(self) -> str:
        return f"fock-{self.k}"


FieldSpec = Union[Thermal, Fock]


@dataclass(frozen=True)
class TruncationPolicy:
    epsilon: float = 1e-12
    max_terms: int = 4096

    def __post_init__(self):
        if not (0 < self.epsilon < 1):
            raise InvalidPolicy(f"epsilon must lie in (0, 1), got {self.epsilon}",
                                value=self.epsilon)
        if int(self.max_terms) != self.max_terms or self.max_terms < 16:
            raise InvalidPolicy(f"max_terms must be an integer >= 16, got {self.max_terms}",
                                value=self.max_terms, limit=16)

    def tightened(self, factor: float) -> "TruncationPolicy":
        return TruncationPolicy(epsilon=self.epsilon * factor, max_terms=self.max_terms)


@dataclass(frozen=True)
class TruncationReport:
    terms: int          # number of series terms kept
    tail_bound: float   # bound on the neglected mass


def validate_params(raw: ModelParams) -> ModelParams:
    """
    Check a raw parameter set and fix omega_0 from the constriction

    Args:
        raw: ModelParams with omega_0 either None or an explicit value to cross-check

    Returns:
        ModelParams with omega_0 = omega_c - g*xi/zeta (omega_c when zeta = 0)

    Raises:
        NegativeRate: non-finite or negative rates, non-positive omega_c / omega_eg
        NonPositiveCoupling: g <= 0 while the atom is driven
        ConstrictionViolated: explicit omega_0 disagreeing with the constriction
    """
    for name in ("omega_c", "omega_eg", "g", "zeta", "xi"):
        value = getattr(raw, name)
        if value is None or not math.isfinite(value):
            raise NegativeRate(f"{name} must be a finite number, got {value}", value=value)
    for name in ("omega_c", "omega_eg"):
        if getattr(raw, name) <= 0:
            raise NegativeRate(f"{name} must be > 0, got {getattr(raw, name)}",
                               value=getattr(raw, name), limit=0.0)
    for name in ("zeta", "xi"):
        if getattr(raw, name) < 0:
            raise NegativeRate(f"{name} must be >= 0, got {getattr(raw, name)}",
                               value=getattr(raw, name), limit=0.0)
    if raw.g < 0:
        raise NegativeRate(f"g must be >= 0, got {raw.g}", value=raw.g, limit=0.0)
    if raw.zeta > 0 and raw.g <= 0:
        raise NonPositiveCoupling(
            f"g must be > 0 when the atom is driven (zeta={raw.zeta}); alpha = zeta/g is undefined",
            value=raw.g, limit=0.0,
        )

    if raw.zeta == 0:
        # drive terms vanish; omega_0 carries no physics
        return replace(raw, omega_0=raw.omega_c)

    omega_0 = raw.omega_c - raw.g * raw.xi / raw.zeta
    if raw.omega_0 is not None:
        if not math.isfinite(raw.omega_0) or not math.isclose(
                raw.omega_0, omega_0, rel_tol=CONSTRICTION_RTOL, abs_tol=CONSTRICTION_RTOL):
            raise ConstrictionViolated(
                f"omega_0={raw.omega_0} contradicts omega_c - g*xi/zeta = {omega_0}",
                value=raw.omega_0, limit=omega_0,
            )
    return replace(raw, omega_0=omega_0)


def derive(params: ModelParams) -> DerivedParams:
    """Detunings and displacement amplitude of a validated parameter set"""
    omega_0 = params.omega_c if params.omega_0 is None else params.omega_0
    if params.zeta > 0:
        delta_c = params.g * params.xi / params.zeta
        alpha = params.zeta / params.g
    else:
        delta_c = 0.0
        alpha = 0.0
    return DerivedParams(
        delta_c=delta_c,
        delta_eg=params.omega_eg - omega_0,
        delta=params.omega_eg - params.omega_c,
        alpha=alpha,
    )


def rabi_frequency(delta, g, n):
    """
    Omega_n = sqrt(delta^2/4 + g^2 n)

    Works elementwise when n (or delta) is an array. Even in delta by construction.
    """
    value = np.sqrt(np.square(delta) / 4.0 + np.square(g) * np.asarray(n, dtype=float))
    return float(value) if np.ndim(value) == 0 else value


def thermal_weights(n_bar: float, policy: Optional[TruncationPolicy] = None) -> Tuple[np.ndarray, TruncationReport]:
    """
    Geometric photon-number weights p_k = n_bar^k / (1 + n_bar)^(k+1)

    Truncated at the first K whose tail mass (n_bar/(1+n_bar))^K is below epsilon.

    Raises:
        InvalidFieldSpec: n_bar < 0
        TruncationCapExceeded: K would exceed policy.max_terms
    """
    policy = policy or TruncationPolicy()
    Thermal(n_bar)
    if n_bar == 0:
        return np.ones(1), TruncationReport(terms=1, tail_bound=0.0)

    ratio = n_bar / (1.0 + n_bar)
    terms = max(1, math.ceil(math.log(policy.epsilon) / math.log(ratio)))
    # guard against the ceil landing exactly on the boundary
    while ratio ** terms >= policy.epsilon:
        terms += 1
    if terms > policy.max_terms:
        raise TruncationCapExceeded(
            f"Thermal distribution with n_bar={n_bar} needs {terms} terms for epsilon={policy.epsilon}",
            value=terms, limit=policy.max_terms, context={"n_bar": n_bar},
        )

    k = np.arange(terms)
    weights = np.exp(k * math.log(ratio)) / (1.0 + n_bar)
    return weights, TruncationReport(terms=terms, tail_bound=ratio ** terms)


def displacement_margin(alpha: float) -> int:
    """Extra Fock levels needed past k_max to hold a displaced column"""
    return 10 + math.ceil(alpha * alpha + 10.0 * alpha + 10.0)


def recommended_cutoff(k_max: int, alpha: float) -> int:
    """Auto-selected oracle Fock cutoff for initial photon numbers up to k_max"""
    return int(k_max) + displacement_margin(alpha)
