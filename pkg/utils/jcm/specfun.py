"""
Special functions for the driven JCM
Associated Laguerre polynomials and displaced-number-state overlaps
|<m|D(alpha)|k>|^2, plus the displaced photon distributions built from them.
"""
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.special import gammaln, xlogy

from utils.jcm.errors import TruncationCapExceeded
from utils.jcm.helpers import debug_print
from utils.jcm.model import (
    Fock,
    FieldSpec,
    Thermal,
    TruncationPolicy,
    TruncationReport,
    displacement_margin,
    thermal_weights,
)

# entries whose log upper bound sits this far below log(epsilon) are returned as 0
UNDERFLOW_MARGIN = 20.0


@dataclass(frozen=True)
class OverlapTable:
    """P(m|k; alpha) for 0 <= m <= m_max, 0 <= k <= k_max"""
    alpha: float
    values: np.ndarray

    @property
    def m_max(self) -> int:
        return self.values.shape[0] - 1

    @property
    def k_max(self) -> int:
        return self.values.shape[1] - 1

    def column(self, k: int) -> np.ndarray:
        return self.values[:, k]


def laguerre_assoc(n: int, a: int, x: float) -> float:
    """
    L_n^(a)(x) by forward recurrence in the degree

    L_0 = 1, L_1 = 1 + a - x, (n+1) L_{n+1} = (2n+1+a-x) L_n - (n+a) L_{n-1}
    """
    if n < 0 or a < 0:
        raise ValueError(f"degree and superscript must be >= 0, got n={n}, a={a}")
    previous, current = 1.0, 1.0 + a - x
    if n == 0:
        return previous
    for j in range(1, n):
        previous, current = current, ((2 * j + 1 + a - x) * current - (j + a) * previous) / (j + 1)
    return current


def _scaled_laguerre(n_max: int, a_max: int, x: float) -> np.ndarray:
    """
    Table of L_n^(a)(x) / C(n+a, n) for n <= n_max, a <= a_max

    The binomial scaling keeps every entry within exp(x/2) in magnitude, so large
    index gaps never overflow. Recurrence:
    (n+1+a) l_{n+1} = (2n+1+a-x) l_n - n l_{n-1}, l_0 = 1, l_1 = (1+a-x)/(1+a)
    """
    a = np.arange(a_max + 1, dtype=float)
    table = np.empty((n_max + 1, a_max + 1))
    table[0] = 1.0
    if n_max >= 1:
        table[1] = (1.0 + a - x) / (1.0 + a)
    for n in range(1, n_max):
        table[n + 1] = ((2 * n + 1 + a - x) * table[n] - n * table[n - 1]) / (n + 1 + a)
    return table


def _overlap_values(m, k, alpha: float, epsilon: float = 1e-12) -> np.ndarray:
    """
    Vectorized P(m|k; alpha) = e^{-x} x^d hi!/(lo! d!^2) * l_lo^(d)(x)^2

    with x = alpha^2, lo = min(m, k), hi = max(m, k), d = |m - k|; evaluated in
    log space and symmetric in (m, k) by construction.
    """
    m, k = np.broadcast_arrays(np.asarray(m, dtype=np.int64), np.asarray(k, dtype=np.int64))
    lo = np.minimum(m, k)
    hi = np.maximum(m, k)
    gap = hi - lo
    x = float(alpha) ** 2

    log_prefactor = (-x + gammaln(hi + 1.0) - gammaln(lo + 1.0)
                     - 2.0 * gammaln(gap + 1.0) + xlogy(gap, x))
    # |l| <= e^{x/2}, so log_prefactor + x bounds log P from above
    negligible = log_prefactor + x < math.log(epsilon) - UNDERFLOW_MARGIN

    if lo.size == 0:
        return np.zeros(lo.shape)
    scaled = _scaled_laguerre(int(lo.max()), int(gap.max()), x)
    # the square of l alone can overflow at large x; combine in log space
    with np.errstate(divide="ignore", over="ignore", under="ignore", invalid="ignore"):
        values = np.exp(log_prefactor + 2.0 * np.log(np.abs(scaled[lo, gap])))
    return np.where(negligible, 0.0, values)


def displaced_number_overlap(m: int, k: int, alpha: float, epsilon: float = 1e-12) -> float:
    """Probability |<m|D(alpha)|k>|^2 for real alpha >= 0"""
    if m < 0 or k < 0:
        raise ValueError(f"Fock indices must be >= 0, got m={m}, k={k}")
    return float(_overlap_values(m, k, alpha, epsilon))


def overlap_table(m_max: int, k_max: int, alpha: float, epsilon: float = 1e-12) -> OverlapTable:
    m = np.arange(m_max + 1)[:, None]
    k = np.arange(k_max + 1)[None, :]
    return OverlapTable(alpha=float(alpha), values=_overlap_values(m, k, alpha, epsilon))


def displaced_thermal_weight(m: int, n_bar: float, alpha: float,
                             policy: Optional[TruncationPolicy] = None) -> float:
    """
    P(m) of the displaced thermal state D(alpha) rho_th D(alpha)^dagger

    The inner k sum stops once the geometric tail mass falls below epsilon.
    """
    policy = policy or TruncationPolicy()
    weights, _ = thermal_weights(n_bar, policy)
    overlaps = _overlap_values(m, np.arange(len(weights)), alpha, policy.epsilon)
    return float(overlaps @ weights)


def displaced_distribution(weights: np.ndarray, alpha: float,
                           policy: Optional[TruncationPolicy] = None) -> Tuple[np.ndarray, TruncationReport]:
    """
    Photon distribution P(m) = sum_k w_k P(m|k; alpha) of a diagonal field state

    Rows are added until the accumulated mass reaches 1 - epsilon; the table
    grows by doubling the displacement margin until that happens or the
    policy cap is hit.

    Raises:
        TruncationCapExceeded: mass 1 - epsilon not reached within max_terms rows
    """
    policy = policy or TruncationPolicy()
    weights = np.asarray(weights, dtype=float)
    k_count = len(weights)
    k_index = np.arange(k_count)[None, :]
    margin = displacement_margin(alpha)
    previous_total = -np.inf

    while True:
        rows = min(k_count + margin, policy.max_terms)
        table = _overlap_values(np.arange(rows)[:, None], k_index, alpha, policy.epsilon)
        distribution = table @ weights
        cumulative = np.cumsum(distribution)

        reached = np.flatnonzero(cumulative >= 1.0 - policy.epsilon)
        if reached.size:
            terms = int(reached[0]) + 1
            return distribution[:terms], TruncationReport(
                terms=terms, tail_bound=max(0.0, 1.0 - float(cumulative[terms - 1])))

        total = float(cumulative[-1])
        if total - previous_total <= policy.epsilon * 1e-3:
            # no mass left to collect; round-off keeps the sum just under 1 - epsilon
            debug_print(f"[yellow]⚠️ displaced distribution saturated at 1 - {1.0 - total:.3e}[/yellow]")
            return distribution, TruncationReport(terms=rows, tail_bound=max(0.0, 1.0 - total))
        if rows >= policy.max_terms:
            raise TruncationCapExceeded(
                f"Displaced distribution (alpha={alpha}) reached only mass {total:.15f} "
                f"within {rows} terms",
                value=rows, limit=policy.max_terms, context={"alpha": alpha},
            )
        previous_total = total
        margin *= 2


def field_weights(field: FieldSpec, alpha: float,
                  policy: Optional[TruncationPolicy] = None) -> Tuple[np.ndarray, TruncationReport]:
    """Displaced photon distribution for a thermal or Fock initial field"""
    policy = policy or TruncationPolicy()
    if isinstance(field, Thermal):
        # inner truncation spends a quarter of the budget, the outer sum the rest
        weights, _ = thermal_weights(field.n_bar, policy.tightened(0.25))
    elif isinstance(field, Fock):
        weights = np.zeros(field.k + 1)
        weights[field.k] = 1.0
    else:
        raise TypeError(f"Unsupported field specification: {field!r}")
    try:
        return displaced_distribution(weights, alpha, policy)
    except TruncationCapExceeded as e:
        raise e.with_context(field=field.label)
