"""
Analytic engine - closed-form atomic inversion and lineshapes of the driven JCM
The driven problem reduces to the standard JCM acting on the displaced field
D(alpha) rho_F D(alpha)^dagger, so every quantity is a sum over the displaced
photon distribution P(m) weighted by the n = m+1 Rabi manifold.
"""
from dataclasses import dataclass, field as dataclass_field
from typing import Optional, Sequence, Tuple

import numpy as np

from utils.jcm.errors import (
    BoundsViolation,
    InvalidGrid,
    NonPositiveCoupling,
    TruncationCapExceeded,
)
from utils.jcm.model import (
    FieldSpec,
    Fock,
    ModelParams,
    Thermal,
    TruncationPolicy,
    TruncationReport,
    derive,
    thermal_weights,
)
from utils.jcm.specfun import field_weights

TIME_CHUNK = 4096


@dataclass
class InversionSeries:
    """Sampled <sigma_z>(t) with the inputs that produced it"""
    times: np.ndarray
    values: np.ndarray
    params: ModelParams
    field: FieldSpec
    truncation_report: Optional[TruncationReport] = None
    diagnostics: dict = dataclass_field(default_factory=dict)

    def check_bounds(self, slack: float = 1e-9) -> None:
        if self.values.size and (self.values.max() > 1 + slack or self.values.min() < -1 - slack):
            raise BoundsViolation(
                f"<sigma_z> left [-1, 1]: range [{self.values.min()}, {self.values.max()}]",
                value=(float(self.values.min()), float(self.values.max())), limit=(-1.0, 1.0),
            )


@dataclass
class LineshapeCurve:
    """Sampled W(delta) over a detuning grid"""
    deltas: np.ndarray
    values: np.ndarray
    g: float
    alpha: float
    field: FieldSpec
    truncation_report: Optional[TruncationReport] = None

    def check_bounds(self, slack: float = 1e-9) -> None:
        if self.values.size and (self.values.min() < -slack or self.values.max() >= 1 + slack):
            raise BoundsViolation(
                f"W left [0, 1): range [{self.values.min()}, {self.values.max()}]",
                value=(float(self.values.min()), float(self.values.max())), limit=(0.0, 1.0),
            )


def _outer_cut(weights: np.ndarray, policy: TruncationPolicy) -> Tuple[np.ndarray, TruncationReport]:
    """Keep weights until their running sum reaches 1 - epsilon"""
    cumulative = np.cumsum(weights)
    reached = np.flatnonzero(cumulative >= 1.0 - policy.epsilon)
    terms = int(reached[0]) + 1 if reached.size else len(weights)
    return weights[:terms], TruncationReport(
        terms=terms, tail_bound=max(0.0, 1.0 - float(cumulative[terms - 1])))


def _geometric_distribution(n_bar: float, policy: TruncationPolicy) -> Tuple[np.ndarray, TruncationReport]:
    """Undisplaced thermal distribution, cut with the same rule as the displaced one"""
    weights, _ = thermal_weights(n_bar, policy.tightened(0.25))
    return _outer_cut(weights, policy)


def _inversion_sum(distribution: np.ndarray, delta: float, g: float, t) -> np.ndarray:
    """
    sum_m P(m) [delta^2/4 + g^2 (m+1) cos(2 Omega_{m+1} t)] / Omega_{m+1}^2

    A manifold with Omega = 0 (g = 0 and delta = 0) contributes its full weight.
    """
    times = np.atleast_1d(np.asarray(t, dtype=float))
    coupling = g * g * (np.arange(len(distribution)) + 1.0)
    detuning = delta * delta / 4.0
    omega_sq = detuning + coupling
    frozen = omega_sq == 0.0
    safe_omega_sq = np.where(frozen, 1.0, omega_sq)
    omega = np.sqrt(safe_omega_sq)
    static = np.where(frozen, 1.0, detuning / safe_omega_sq) @ distribution
    swing = np.where(frozen, 0.0, coupling / safe_omega_sq) * distribution

    result = np.empty(times.shape)
    for start in range(0, times.size, TIME_CHUNK):
        chunk = times[start:start + TIME_CHUNK]
        result[start:start + TIME_CHUNK] = static + np.cos(2.0 * np.outer(chunk, omega)) @ swing
    return result


def _lineshape_sum(distribution: np.ndarray, delta, g: float) -> np.ndarray:
    """sum_m P(m) (delta / 2 Omega_{m+1})^2, exactly 0 at delta = 0"""
    deltas = np.atleast_1d(np.asarray(delta, dtype=float))
    delta_sq = np.square(deltas)[:, None]
    manifold = 4.0 * g * g * (np.arange(len(distribution)) + 1.0)[None, :]
    return (delta_sq / (delta_sq + manifold)) @ distribution


def _scalar_or_array(values: np.ndarray, like):
    return float(values[0]) if np.ndim(like) == 0 else values


def _require_coupling(g: float) -> None:
    if not g > 0:
        raise NonPositiveCoupling(f"g must be > 0 for the driven formulas, got {g}", value=g, limit=0.0)


def inversion_thermal(params: ModelParams, n_bar: float, t, policy: Optional[TruncationPolicy] = None):
    """
    <sigma_z>(t) for a thermal field and an excited atom under the driven JCM

    Args:
        params: validated ModelParams
        n_bar: mean thermal photon number
        t: time or array of times
        policy: series truncation policy
    """
    policy = policy or TruncationPolicy()
    _require_coupling(params.g)
    derived = derive(params)
    distribution, _ = field_weights(Thermal(n_bar), derived.alpha, policy)
    return _scalar_or_array(_inversion_sum(distribution, derived.delta, params.g, t), t)


def inversion_undriven(params: ModelParams, n_bar: float, t, policy: Optional[TruncationPolicy] = None):
    """Standard JCM inversion (alpha = 0) with geometric weights; g = 0 is allowed"""
    policy = policy or TruncationPolicy()
    distribution, _ = _geometric_distribution(n_bar, policy)
    delta = params.omega_eg - params.omega_c
    return _scalar_or_array(_inversion_sum(distribution, delta, params.g, t), t)


def inversion_fock(params: ModelParams, k: int, t, policy: Optional[TruncationPolicy] = None):
    """<sigma_z>(t) when the cavity starts in the Fock state |k>"""
    policy = policy or TruncationPolicy()
    _require_coupling(params.g)
    derived = derive(params)
    distribution, _ = field_weights(Fock(k), derived.alpha, policy)
    return _scalar_or_array(_inversion_sum(distribution, derived.delta, params.g, t), t)


def inversion_series(params: ModelParams, field: FieldSpec, times: Sequence[float],
                     policy: Optional[TruncationPolicy] = None) -> InversionSeries:
    """Inversion trace over a caller-supplied time grid; undriven form when zeta = 0"""
    policy = policy or TruncationPolicy()
    times = np.asarray(times, dtype=float)
    derived = derive(params)

    if isinstance(field, Thermal) and not params.is_driven:
        distribution, report = _geometric_distribution(field.n_bar, policy)
    else:
        _require_coupling(params.g)
        distribution, report = field_weights(field, derived.alpha, policy)

    values = _inversion_sum(distribution, derived.delta, params.g, times)
    return InversionSeries(times=times, values=values, params=params, field=field,
                           truncation_report=report)


def lineshape_thermal(g: float, alpha: float, n_bar: float, delta,
                      policy: Optional[TruncationPolicy] = None):
    """Time-averaged inversion W(delta) for a thermal field under the driven JCM"""
    policy = policy or TruncationPolicy()
    _require_coupling(g)
    distribution, _ = field_weights(Thermal(n_bar), alpha, policy)
    return _scalar_or_array(_lineshape_sum(distribution, delta, g), delta)


def lineshape_undriven(g: float, n_bar: float, delta, policy: Optional[TruncationPolicy] = None):
    policy = policy or TruncationPolicy()
    _require_coupling(g)
    distribution, _ = _geometric_distribution(n_bar, policy)
    return _scalar_or_array(_lineshape_sum(distribution, delta, g), delta)


def lineshape_fock(g: float, alpha: float, k: int, delta, policy: Optional[TruncationPolicy] = None):
    """W(delta) for a Fock field |k>, using the symmetric displaced-number overlap"""
    policy = policy or TruncationPolicy()
    _require_coupling(g)
    distribution, _ = field_weights(Fock(k), alpha, policy)
    return _scalar_or_array(_lineshape_sum(distribution, delta, g), delta)


def _check_delta_grid(delta_grid) -> np.ndarray:
    deltas = np.asarray(delta_grid, dtype=float).ravel()
    if deltas.size == 0:
        raise InvalidGrid("Detuning grid is empty")
    if not np.all(np.isfinite(deltas)):
        raise InvalidGrid("Detuning grid contains non-finite values")
    if np.any(np.diff(deltas) < 0):
        raise InvalidGrid("Detuning grid must be sorted ascending")
    return deltas


def sweep_lineshape(field: FieldSpec, g: float, alpha: float, delta_grid,
                    policy: Optional[TruncationPolicy] = None) -> LineshapeCurve:
    """
    W over a detuning grid for any field specification

    The photon distribution does not depend on delta, so it is built once and
    every grid point is evaluated from it; the output order is the grid order.
    """
    policy = policy or TruncationPolicy()
    _require_coupling(g)
    deltas = _check_delta_grid(delta_grid)

    try:
        if isinstance(field, Thermal) and alpha == 0:
            distribution, report = _geometric_distribution(field.n_bar, policy)
        else:
            distribution, report = field_weights(field, alpha, policy)
    except TruncationCapExceeded as e:
        raise e.with_context(delta_min=float(deltas[0]), delta_max=float(deltas[-1]))

    values = _lineshape_sum(distribution, deltas, g)
    return LineshapeCurve(deltas=deltas, values=values, g=g, alpha=alpha, field=field,
                          truncation_report=report)


def oscillation_amplitude(series: InversionSeries) -> float:
    """Peak-to-peak swing of <sigma_z> after t = 0"""
    tail = series.values[series.times > series.times[0]]
    if tail.size == 0:
        return 0.0
    return float(tail.max() - tail.min())
