"""
Oracle - independent numerical evolution of the driven JCM in a truncated Fock space
Two propagation paths are provided:
  * lab frame: fixed-step RK4 on the time-dependent driven Hamiltonian
  * transformed frame: D(alpha), exact eigen-decomposition propagator of the
    standard JCM Hamiltonian, D(alpha)^dagger
Basis ordering: (|0,g>, ..., |N-1,g>, |0,e>, ..., |N-1,e>), i.e. index = atom*N + n.
"""
import math
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid
from scipy.linalg import eigh, expm

from utils.jcm.analytic import InversionSeries
from utils.jcm.errors import (
    CutoffTooSmall,
    InsufficientSamples,
    InvalidGrid,
    LeakageExceeded,
    NormDrift,
    OperatorCheckFailed,
)
from utils.jcm.helpers import debug_print
from utils.jcm.model import (
    FieldSpec,
    Fock,
    ModelParams,
    Thermal,
    TruncationPolicy,
    derive,
    rabi_frequency,
    recommended_cutoff,
    thermal_weights,
)

MIN_AVERAGE_SAMPLES = 1000

SIGMA_Z = np.diag([-1.0, 1.0])
SIGMA_PLUS = np.array([[0.0, 0.0], [1.0, 0.0]])   # |e><g|
SIGMA_MINUS = SIGMA_PLUS.T
ATOM_IDENTITY = np.eye(2)


@dataclass
class OracleSettings:
    """Numerical knobs of the oracle; defaults mirror jcm_config.json"""
    method: str = "transformed"
    cutoff: Optional[int] = None
    trajectory_epsilon: float = 1e-8
    leakage_threshold: float = 1e-8
    norm_drift_threshold: float = 1e-7
    max_step_product: float = 0.05
    hermitian_tolerance: float = 1e-13
    unitarity_tolerance: float = 1e-10
    time_average_window_g: float = 2000.0
    time_average_samples: int = 200000
    time_chunk: int = 4096


@dataclass
class QuantumStateVector:
    """Truncated atom (x) field state at a given time"""
    cutoff: int
    amplitudes: np.ndarray
    time: float = 0.0

    @classmethod
    def basis(cls, n: int, excited: bool, cutoff: int) -> "QuantumStateVector":
        """The product state |n, e> (excited) or |n, g>"""
        _check_cutoff(cutoff)
        if not 0 <= n < cutoff:
            raise CutoffTooSmall(f"Fock level {n} does not fit below cutoff {cutoff}",
                                 value=cutoff, limit=n + 1)
        amplitudes = np.zeros(2 * cutoff, dtype=complex)
        amplitudes[int(excited) * cutoff + n] = 1.0
        return cls(cutoff=cutoff, amplitudes=amplitudes, time=0.0)

    @property
    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    @property
    def leakage(self) -> float:
        """Occupation of the highest retained Fock level"""
        top = self.amplitudes[[self.cutoff - 1, 2 * self.cutoff - 1]]
        return float(np.sum(np.abs(top) ** 2))

    def sigma_z(self) -> float:
        populations = np.abs(self.amplitudes) ** 2
        return float(populations[self.cutoff:].sum() - populations[:self.cutoff].sum())


@dataclass
class OperatorMatrix:
    """Dense operator on the truncated space"""
    matrix: np.ndarray
    hermitian: bool = False

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def hermiticity_residual(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def unitarity_residual(self) -> float:
        product = self.matrix.conj().T @ self.matrix
        return float(np.max(np.abs(product - np.eye(self.dimension))))


def check_operator(operator: OperatorMatrix, name: str, settings: OracleSettings) -> None:
    """
    Hamiltonians must be Hermitian and propagators unitary within the configured tolerances

    Raises:
        OperatorCheckFailed: residual above settings.hermitian_tolerance / unitarity_tolerance
    """
    if operator.hermitian:
        residual, limit, kind = operator.hermiticity_residual(), settings.hermitian_tolerance, "Hermitian"
    else:
        residual, limit, kind = operator.unitarity_residual(), settings.unitarity_tolerance, "unitary"
    if not residual <= limit:
        raise OperatorCheckFailed(f"{name} is not {kind}: residual {residual:.3e}",
                                  value=residual, limit=limit, context={"operator": name})


def _check_cutoff(cutoff: int) -> None:
    if int(cutoff) != cutoff or cutoff < 2:
        raise CutoffTooSmall(f"Fock cutoff must be an integer >= 2, got {cutoff}",
                             value=cutoff, limit=2)


def annihilation(cutoff: int) -> np.ndarray:
    """Truncated a with <n-1|a|n> = sqrt(n)"""
    return np.diag(np.sqrt(np.arange(1, cutoff, dtype=float)), k=1)


def _lift(atom_op: np.ndarray, field_op: np.ndarray) -> np.ndarray:
    return np.kron(atom_op, field_op)


def _static_parts(params: ModelParams, cutoff: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Split the lab Hamiltonian into H(t) = H_s + e^{i w0 t} A + e^{-i w0 t} A^dagger

    H_s = w_eg/2 sigma_z + w_c n + g(sigma_+ a + sigma_- a^dagger), A = zeta sigma_- + xi a.
    An undriven atom (zeta = 0) switches the whole drive off, xi included.
    """
    a = annihilation(cutoff)
    field_identity = np.eye(cutoff)
    static = (params.omega_eg / 2.0 * _lift(SIGMA_Z, field_identity)
              + params.omega_c * _lift(ATOM_IDENTITY, a.T @ a)
              + params.g * (_lift(SIGMA_PLUS, a) + _lift(SIGMA_MINUS, a.T)))
    xi = params.xi if params.is_driven else 0.0
    drive = (params.zeta * _lift(SIGMA_MINUS, field_identity)
             + xi * _lift(ATOM_IDENTITY, a))
    return static.astype(complex), drive.astype(complex)


def _drive_frequency(params: ModelParams) -> float:
    return params.omega_c if params.omega_0 is None else params.omega_0


def build_h_lab(params: ModelParams, t: float, cutoff: int) -> OperatorMatrix:
    """Lab-frame driven Hamiltonian at time t"""
    _check_cutoff(cutoff)
    static, drive = _static_parts(params, cutoff)
    phase = np.exp(1j * _drive_frequency(params) * t)
    matrix = static + phase * drive + np.conj(phase) * drive.conj().T
    return OperatorMatrix(matrix=matrix, hermitian=True)


def build_h_jc(params: ModelParams, cutoff: int) -> OperatorMatrix:
    """Transformed-frame standard JCM Hamiltonian dc n + deg/2 sigma_z + g(sigma_+ a + sigma_- a^dagger)"""
    _check_cutoff(cutoff)
    derived = derive(params)
    a = annihilation(cutoff)
    matrix = (derived.delta_c * _lift(ATOM_IDENTITY, a.T @ a)
              + derived.delta_eg / 2.0 * _lift(SIGMA_Z, np.eye(cutoff))
              + params.g * (_lift(SIGMA_PLUS, a) + _lift(SIGMA_MINUS, a.T)))
    return OperatorMatrix(matrix=matrix.astype(complex), hermitian=True)


def displacement_matrix(alpha: float, cutoff: int) -> OperatorMatrix:
    """Field-space D(alpha) = exp[alpha (a^dagger - a)] of the truncated generator"""
    _check_cutoff(cutoff)
    a = annihilation(cutoff)
    return OperatorMatrix(matrix=expm(alpha * (a.T - a)).astype(complex), hermitian=False)


def jc_block_propagator(params: ModelParams, n: int, t: float) -> np.ndarray:
    """
    Closed-form exp(-i t H_JC) on the doublet (|n,e>, |n+1,g>)

    Diagonal entries cos(W t) -/+ i (delta/2) sin(W t)/W, off-diagonal
    -i g sqrt(n+1) sin(W t)/W, with W = Omega_{n+1}, times the manifold phase
    exp(-i dc t (n + 1/2)).
    """
    derived = derive(params)
    omega = rabi_frequency(derived.delta, params.g, n + 1)
    cos_term = math.cos(omega * t)
    sinc_term = math.sin(omega * t) / omega if omega > 0 else t
    half_delta = derived.delta / 2.0
    coupling = -1j * params.g * math.sqrt(n + 1) * sinc_term
    block = np.array([
        [cos_term - 1j * half_delta * sinc_term, coupling],
        [coupling, cos_term + 1j * half_delta * sinc_term],
    ])
    return np.exp(-1j * derived.delta_c * t * (n + 0.5)) * block


class EigenPropagator:
    """
    exp(-i t H) through the Hermitian eigen-decomposition H = V diag(E) V^dagger
    """

    def __init__(self, hamiltonian: OperatorMatrix):
        self.energies, self.vectors = eigh(hamiltonian.matrix)

    def operator(self, t: float) -> OperatorMatrix:
        phases = np.exp(-1j * self.energies * t)
        return OperatorMatrix(matrix=(self.vectors * phases) @ self.vectors.conj().T)

    def apply(self, t: float, states: np.ndarray) -> np.ndarray:
        coefficients = self.vectors.conj().T @ states
        phases = np.exp(-1j * self.energies * t)
        return self.vectors @ (phases.reshape((-1,) + (1,) * (coefficients.ndim - 1)) * coefficients)


def _transformed_operators(params: ModelParams, cutoff: int,
                           settings: OracleSettings) -> Tuple[np.ndarray, "EigenPropagator"]:
    """Lifted D(alpha) and the JC eigen-propagator, both checked before use"""
    field_displacement = displacement_matrix(derive(params).alpha, cutoff)
    hamiltonian = build_h_jc(params, cutoff)
    check_operator(field_displacement, "D(alpha)", settings)
    check_operator(hamiltonian, "H_JC", settings)
    propagator = EigenPropagator(hamiltonian)
    check_operator(OperatorMatrix(matrix=propagator.vectors), "JC eigenbasis", settings)
    return _lift(ATOM_IDENTITY, field_displacement.matrix), propagator


def _check_time_grid(t_grid: Sequence[float]) -> np.ndarray:
    times = np.asarray(t_grid, dtype=float).ravel()
    if times.size == 0:
        raise InvalidGrid("Time grid is empty")
    if not np.all(np.isfinite(times)) or np.any(np.diff(times) < 0) or times[0] < 0:
        raise InvalidGrid("Time grid must be finite, ascending and start at t >= 0")
    return times


def step_bound(params: ModelParams, cutoff: int) -> float:
    """Upper estimate of the lab Hamiltonian's spectral radius"""
    root = math.sqrt(cutoff)
    return (params.omega_eg / 2.0 + params.omega_c * cutoff + 2.0 * params.g * root
            + 2.0 * params.zeta + 2.0 * params.xi * root)


def _lab_stepper(params: ModelParams, states: np.ndarray, times: np.ndarray, cutoff: int,
                 settings: OracleSettings) -> Iterator[np.ndarray]:
    """
    Classical RK4 on i d psi/dt = H(t) psi for a batch of column states

    The states are psi(0); a grid starting after 0 is integrated up to its first
    time before anything is yielded. No renormalisation is applied.
    """
    check_operator(build_h_lab(params, float(times[0]), cutoff), "H_lab", settings)
    static, drive = _static_parts(params, cutoff)
    drive_dagger = drive.conj().T
    omega_0 = _drive_frequency(params)
    max_step = settings.max_step_product / step_bound(params, cutoff)

    def derivative(t: float, psi: np.ndarray) -> np.ndarray:
        phase = np.exp(1j * omega_0 * t)
        return -1j * ((static + phase * drive + np.conj(phase) * drive_dagger) @ psi)

    def advance(psi: np.ndarray, start: float, stop: float) -> np.ndarray:
        span = stop - start
        if span <= 0:
            return psi
        substeps = max(1, math.ceil(span / max_step - 1e-12))
        h = span / substeps
        for step in range(substeps):
            t = start + step * h
            k1 = derivative(t, psi)
            k2 = derivative(t + h / 2, psi + h / 2 * k1)
            k3 = derivative(t + h / 2, psi + h / 2 * k2)
            k4 = derivative(t + h, psi + h * k3)
            psi = psi + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        return psi

    current = 0.0
    psi = states.astype(complex)
    for target in times:
        psi = advance(psi, current, float(target))
        current = float(target)
        yield psi


def _check_trajectory(psi: np.ndarray, weights: np.ndarray, cutoff: int, t: float,
                      settings: OracleSettings, check_norm: bool) -> Tuple[float, float]:
    """Weighted top-level leakage and worst per-trajectory norm drift of a batch"""
    populations = np.abs(psi) ** 2
    leakage = float((populations[cutoff - 1] + populations[2 * cutoff - 1]) @ weights)
    drift = float(np.max(np.abs(populations.sum(axis=0) - 1.0)))
    if leakage > settings.leakage_threshold:
        raise LeakageExceeded(
            f"Top Fock level holds {leakage:.3e} at t={t:g}; raise the cutoff above {cutoff}",
            value=leakage, limit=settings.leakage_threshold, context={"t": t, "cutoff": cutoff},
        )
    if check_norm and drift > settings.norm_drift_threshold:
        raise NormDrift(
            f"Norm drifted by {drift:.3e} at t={t:g}; reduce max_step_product",
            value=drift, limit=settings.norm_drift_threshold, context={"t": t},
        )
    return leakage, drift


def evolve_lab(params: ModelParams, initial: QuantumStateVector, t_grid: Sequence[float],
               settings: Optional[OracleSettings] = None) -> List[QuantumStateVector]:
    """
    Direct RK4 integration of the lab-frame Schroedinger equation

    Raises:
        NormDrift: norm moved by more than settings.norm_drift_threshold
        LeakageExceeded: top Fock level occupied above settings.leakage_threshold
    """
    settings = settings or OracleSettings()
    times = _check_time_grid(t_grid)
    cutoff = initial.cutoff
    _check_cutoff(cutoff)

    trajectory = []
    column = initial.amplitudes.reshape(-1, 1)
    for t, psi in zip(times, _lab_stepper(params, column, times, cutoff, settings)):
        _check_trajectory(psi, np.ones(1), cutoff, t, settings, check_norm=True)
        trajectory.append(QuantumStateVector(cutoff=cutoff, amplitudes=psi[:, 0].copy(), time=float(t)))
    return trajectory


def evolve_transformed(params: ModelParams, initial: QuantumStateVector, t_grid: Sequence[float],
                       settings: Optional[OracleSettings] = None) -> List[QuantumStateVector]:
    """
    psi(t) = D(alpha)^dagger U_JC(t) D(alpha) psi(0), U_JC from the eigen-decomposition

    The frame rotation T is left out: it commutes with sigma_z and only changes
    phases of the Fock amplitudes.
    """
    settings = settings or OracleSettings()
    times = _check_time_grid(t_grid)
    cutoff = initial.cutoff
    _check_cutoff(cutoff)

    displacement, propagator = _transformed_operators(params, cutoff, settings)
    displaced = displacement @ initial.amplitudes

    trajectory = []
    for t in times:
        psi = displacement.conj().T @ propagator.apply(t, displaced)
        _check_trajectory(psi.reshape(-1, 1), np.ones(1), cutoff, t, settings, check_norm=False)
        trajectory.append(QuantumStateVector(cutoff=cutoff, amplitudes=psi, time=float(t)))
    return trajectory


def _initial_ensemble(field: FieldSpec, cutoff: Optional[int], alpha: float,
                      settings: OracleSettings, policy: TruncationPolicy) -> Tuple[np.ndarray, np.ndarray, int]:
    """Photon numbers and weights of the pure |k, e> trajectories, and the cutoff to use"""
    if isinstance(field, Fock):
        photons, weights = np.array([field.k]), np.ones(1)
    else:
        trajectory_policy = TruncationPolicy(
            epsilon=max(settings.trajectory_epsilon, policy.epsilon), max_terms=policy.max_terms)
        weights, _ = thermal_weights(field.n_bar, trajectory_policy)
        photons = np.arange(len(weights))

    cutoff = cutoff or recommended_cutoff(int(photons.max()), alpha)
    _check_cutoff(cutoff)
    unrepresented = float(weights[photons >= cutoff - 1].sum())
    if unrepresented > settings.leakage_threshold:
        raise LeakageExceeded(
            f"Initial field puts {unrepresented:.3e} of its mass at or above the top level of cutoff {cutoff}",
            value=unrepresented, limit=settings.leakage_threshold, context={"cutoff": cutoff},
        )
    keep = photons < cutoff - 1
    return photons[keep], weights[keep], cutoff


def _excited_columns(photons: np.ndarray, cutoff: int) -> np.ndarray:
    states = np.zeros((2 * cutoff, len(photons)), dtype=complex)
    states[cutoff + photons, np.arange(len(photons))] = 1.0
    return states


def _transformed_expectations(params: ModelParams, states: np.ndarray, weights: np.ndarray,
                              times: np.ndarray, cutoff: int,
                              settings: OracleSettings) -> Tuple[np.ndarray, float]:
    """
    Weighted <sigma_z>(t) and worst leakage for a diagonal mixture of pure trajectories

    With c_k = V^dagger D psi_k and R = sum_k w_k c_k c_k^dagger, any observable O gives
    <O>(t) = u(t)^dagger (O_eig * R^T) u(t), u = exp(-i E t), O_eig = (D^dagger V)^dagger O (D^dagger V).
    """
    displacement, propagator = _transformed_operators(params, cutoff, settings)
    frame = displacement.conj().T @ propagator.vectors

    coefficients = propagator.vectors.conj().T @ (displacement @ states)
    mixture = (coefficients * weights) @ coefficients.conj().T

    sigma_kernel = (frame.conj().T @ _lift(SIGMA_Z, np.eye(cutoff)) @ frame) * mixture.T
    top_rows = frame[[cutoff - 1, 2 * cutoff - 1]]

    values = np.empty(times.size)
    worst_leakage = 0.0
    for start in range(0, times.size, settings.time_chunk):
        chunk = times[start:start + settings.time_chunk]
        phases = np.exp(-1j * np.outer(chunk, propagator.energies))
        values[start:start + chunk.size] = np.einsum(
            "ti,ij,tj->t", phases.conj(), sigma_kernel, phases, optimize=True).real
        leakage = sum(np.abs((phases * row) @ coefficients) ** 2 @ weights for row in top_rows)
        worst_leakage = max(worst_leakage, float(leakage.max()))
        if worst_leakage > settings.leakage_threshold:
            raise LeakageExceeded(
                f"Top Fock level holds {worst_leakage:.3e}; raise the cutoff above {cutoff}",
                value=worst_leakage, limit=settings.leakage_threshold, context={"cutoff": cutoff},
            )
    return values, worst_leakage


def inversion_numeric(params: ModelParams, field: FieldSpec, t_grid: Sequence[float],
                      cutoff: Optional[int] = None, settings: Optional[OracleSettings] = None,
                      policy: Optional[TruncationPolicy] = None,
                      method: Optional[str] = None) -> InversionSeries:
    """
    <sigma_z>(t) = sum_k p_k <psi_k(t)|sigma_z|psi_k(t)>, psi_k(0) = |k, e>

    Args:
        params: validated ModelParams
        field: Thermal or Fock initial field
        t_grid: ascending times starting at t >= 0
        cutoff: Fock dimension N; auto-selected from the field when None
        settings: OracleSettings
        policy: truncation policy (its epsilon floors the trajectory tail)
        method: "transformed" (eigen-decomposition) or "lab" (RK4), default from settings
    """
    settings = settings or OracleSettings()
    policy = policy or TruncationPolicy()
    method = method or settings.method
    times = _check_time_grid(t_grid)
    alpha = derive(params).alpha

    photons, weights, cutoff = _initial_ensemble(field, cutoff or settings.cutoff, alpha, settings, policy)
    states = _excited_columns(photons, cutoff)
    debug_print(f"🔬 Oracle ({method}): {len(photons)} trajectories, cutoff N={cutoff}, {times.size} samples")

    if method == "transformed":
        values, leakage = _transformed_expectations(params, states, weights, times, cutoff, settings)
        drift = 0.0
    elif method == "lab":
        values = np.empty(times.size)
        leakage = drift = 0.0
        sigma_diag = np.concatenate([-np.ones(cutoff), np.ones(cutoff)])
        for index, (t, psi) in enumerate(zip(times, _lab_stepper(params, states, times, cutoff, settings))):
            step_leakage, step_drift = _check_trajectory(psi, weights, cutoff, t, settings, check_norm=True)
            leakage, drift = max(leakage, step_leakage), max(drift, step_drift)
            values[index] = float((sigma_diag @ (np.abs(psi) ** 2)) @ weights)
    else:
        raise ValueError(f"Unknown oracle method: {method}")

    return InversionSeries(
        times=times, values=values, params=params, field=field,
        diagnostics={
            "method": method,
            "cutoff": cutoff,
            "trajectories": int(len(photons)),
            "weight_captured": float(weights.sum()),
            "max_leakage": leakage,
            "max_norm_drift": drift,
        },
    )


def time_average_numeric(series: InversionSeries, window: float) -> float:
    """
    Trapezoidal mean of <sigma_z> over [0, window]

    Raises:
        InsufficientSamples: grid does not cover [0, window] or has < 1000 samples in it
    """
    times, values = np.asarray(series.times), np.asarray(series.values)
    span_tolerance = 1e-9 * max(1.0, window)
    if times.size == 0 or times[0] > span_tolerance or times[-1] < window - span_tolerance:
        raise InsufficientSamples(
            f"Series must cover [0, {window}]", value=(float(times[0]), float(times[-1])) if times.size else None,
        )
    inside = times <= window + span_tolerance
    if inside.sum() < MIN_AVERAGE_SAMPLES:
        raise InsufficientSamples(
            f"Time average needs >= {MIN_AVERAGE_SAMPLES} samples in the window, got {int(inside.sum())}",
            value=int(inside.sum()), limit=MIN_AVERAGE_SAMPLES,
        )
    t, v = times[inside], values[inside]
    return float(trapezoid(v, t) / (t[-1] - t[0]))


def lineshape_numeric(field: FieldSpec, g: float, alpha: float, delta: float,
                      settings: Optional[OracleSettings] = None,
                      policy: Optional[TruncationPolicy] = None,
                      omega_c: float = 0.4, xi: float = 0.2,
                      cutoff: Optional[int] = None) -> Tuple[float, InversionSeries]:
    """
    Numeric W(delta): long-time average of the oracle inversion

    W is even in delta, so a negative delta is realised at |delta|.
    """
    settings = settings or OracleSettings()
    params = ModelParams.from_lineshape(g, alpha, abs(delta), omega_c=omega_c, xi=xi)
    window = settings.time_average_window_g / g
    times = np.linspace(0.0, window, settings.time_average_samples)
    series = inversion_numeric(params, field, times, cutoff=cutoff, settings=settings,
                               policy=policy, method="transformed")
    series.diagnostics["window"] = window
    return time_average_numeric(series, window), series
