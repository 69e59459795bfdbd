#!/usr/bin/env python3
"""
Associated Laguerre polynomials, displaced-number overlaps and displaced distributions
"""
import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal
from scipy.special import eval_genlaguerre
from scipy.stats import poisson

from utils.jcm.errors import TruncationCapExceeded
from utils.jcm.model import Fock, Thermal, TruncationPolicy, thermal_weights
from utils.jcm.oracle import displacement_matrix
from utils.jcm.specfun import (
    displaced_distribution,
    displaced_number_overlap,
    displaced_thermal_weight,
    field_weights,
    laguerre_assoc,
    overlap_table,
)


def test_laguerre_matches_scipy():
    for n, a, x in [(0, 0, 0.3), (1, 2, 0.49), (5, 0, 1.7), (12, 3, 4.0), (30, 7, 0.49)]:
        assert_allclose(laguerre_assoc(n, a, x), eval_genlaguerre(n, a, x), rtol=1e-10, atol=1e-12)


def test_laguerre_low_orders():
    assert laguerre_assoc(0, 4, 2.5) == 1.0
    assert_allclose(laguerre_assoc(1, 4, 2.5), 1 + 4 - 2.5)
    assert_allclose(laguerre_assoc(2, 0, 1.0), 0.5 * (1.0 - 4.0 + 2.0))


def test_vacuum_overlap_is_poisson():
    alpha = 1.3
    assert_allclose(displaced_number_overlap(0, 0, alpha), math.exp(-alpha ** 2), rtol=1e-14)
    m = np.arange(25)
    column = overlap_table(24, 0, alpha).column(0)
    assert_allclose(column, poisson.pmf(m, alpha ** 2), rtol=1e-12, atol=1e-300)


def test_overlap_symmetric_and_trivial_at_zero_alpha():
    for m, k in [(0, 3), (5, 2), (17, 40)]:
        assert displaced_number_overlap(m, k, 0.7) == displaced_number_overlap(k, m, 0.7)
    table = overlap_table(10, 10, 0.0)
    assert_array_equal(table.values, np.eye(11))


def test_overlap_matches_displacement_matrix():
    cutoff = 120
    for alpha in (0.7, 2.0):
        dense = np.abs(displacement_matrix(alpha, cutoff).matrix[:41, :41]) ** 2
        table = overlap_table(40, 40, alpha)
        assert_allclose(table.values, dense, rtol=0, atol=1e-10)


def test_overlap_columns_normalised():
    table = overlap_table(200, 10, 2.0)
    assert_allclose(table.values.sum(axis=0), np.ones(11), rtol=0, atol=1e-10)
    assert (table.m_max, table.k_max) == (200, 10)


def test_displaced_fock_moments():
    # <n> of D(alpha)|k> is k + alpha^2
    distribution, report = field_weights(Fock(20), 5.0)
    m = np.arange(len(distribution))
    assert_allclose(distribution.sum(), 1.0, atol=1e-11)
    assert_allclose(m @ distribution, 45.0, rtol=1e-9)
    assert report.tail_bound <= 1e-11


def test_large_displacement_does_not_overflow():
    distribution, _ = field_weights(Fock(0), 10.0)
    assert np.all(np.isfinite(distribution))
    assert_allclose(np.arange(len(distribution)) @ distribution, 100.0, rtol=1e-9)


def test_displaced_thermal_weight_vacuum_limit():
    for m in range(6):
        assert_allclose(displaced_thermal_weight(m, 0.0, 0.7), poisson.pmf(m, 0.49), rtol=1e-12)


def test_displaced_thermal_weights_sum_to_one():
    total = sum(displaced_thermal_weight(m, 0.1, 0.7) for m in range(80))
    assert abs(total - 1.0) < 1e-12


def test_thermal_weight_without_drive_matches_closed_form():
    for m in range(10):
        assert_allclose(displaced_thermal_weight(m, 4.0, 0.0), 0.2 * 0.8 ** m, rtol=1e-12)


def test_displaced_thermal_distribution_sums_to_one():
    policy = TruncationPolicy()
    distribution, report = field_weights(Thermal(4.0), 0.7, policy)
    assert 1.0 - distribution.sum() <= policy.epsilon + 1e-14
    assert report.terms == len(distribution)
    # mean photon number of a displaced thermal state is n_bar + alpha^2
    assert_allclose(np.arange(len(distribution)) @ distribution, 4.49, rtol=1e-9)


def test_vacuum_thermal_equals_fock_zero():
    thermal, _ = field_weights(Thermal(0.0), 0.7)
    fock, _ = field_weights(Fock(0), 0.7)
    assert_array_equal(thermal, fock)


def test_undisplaced_thermal_is_geometric():
    distribution, _ = field_weights(Thermal(4.0), 0.0)
    weights, _ = thermal_weights(4.0, TruncationPolicy().tightened(0.25))
    assert_array_equal(distribution, weights[:len(distribution)])


def test_cap_reports_field():
    try:
        field_weights(Fock(0), 10.0, TruncationPolicy(max_terms=32))
    except TruncationCapExceeded as e:
        assert e.context["field"] == "fock-0"
        assert e.limit == 32
        assert "field=fock-0" in str(e)
    else:
        raise AssertionError("TruncationCapExceeded not raised")


def test_distribution_of_explicit_weights():
    weights = np.array([0.5, 0.0, 0.5])
    distribution, _ = displaced_distribution(weights, 0.0)
    assert_array_equal(distribution, weights)


if __name__ == "__main__":
    from script_checks import run_all_tests
    sys.exit(0 if run_all_tests("Special Functions", dict(globals())) else 1)
