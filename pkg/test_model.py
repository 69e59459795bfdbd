#!/usr/bin/env python3
"""
Model parameter validation, derived detunings and thermal weights
"""
import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import numpy as np
from numpy.testing import assert_allclose

from utils.jcm.errors import (
    ConstrictionViolated,
    InvalidFieldSpec,
    InvalidPolicy,
    NegativeRate,
    NonPositiveCoupling,
    TruncationCapExceeded,
)
from utils.jcm.model import (
    Fock,
    ModelParams,
    Thermal,
    TruncationPolicy,
    derive,
    rabi_frequency,
    recommended_cutoff,
    thermal_weights,
    validate_params,
)

REFERENCE_SET = dict(omega_c=0.4, omega_eg=0.9, g=1.0, zeta=0.7, xi=0.2)


def expect_raises(error_type, func, *args, **kwargs):
    try:
        func(*args, **kwargs)
    except error_type as e:
        return e
    raise AssertionError(f"{error_type.__name__} not raised")


def test_constriction_fixes_drive_frequency():
    params = validate_params(ModelParams(**REFERENCE_SET))
    assert_allclose(params.omega_0, 0.4 - 0.2 / 0.7, rtol=1e-14)
    assert_allclose(params.omega_0, 0.1142857142857143, rtol=1e-12)


def test_derived_reference_set():
    derived = derive(validate_params(ModelParams(**REFERENCE_SET)))
    assert_allclose(derived.delta_c, 0.2857142857142857, rtol=1e-12)
    assert_allclose(derived.delta, 0.5, rtol=1e-14)
    assert_allclose(derived.alpha, 0.7, rtol=1e-14)
    assert_allclose(derived.delta_eg, 0.9 - (0.4 - 0.2 / 0.7), rtol=1e-14)


def test_undriven_convention():
    params = validate_params(ModelParams(omega_c=0.4, omega_eg=0.9, g=1.0, zeta=0.0, xi=0.3))
    assert params.omega_0 == 0.4
    assert not params.is_driven
    derived = derive(params)
    assert derived.alpha == 0.0 and derived.delta_c == 0.0
    assert_allclose(derived.delta, 0.5)


def test_zero_coupling_with_drive_rejected():
    error = expect_raises(NonPositiveCoupling, validate_params,
                          ModelParams(omega_c=0.4, omega_eg=0.9, g=0.0, zeta=0.5))
    assert error.exit_code == 2


def test_explicit_drive_frequency_is_cross_checked():
    ok = validate_params(ModelParams(**REFERENCE_SET, omega_0=0.4 - 0.2 / 0.7))
    assert_allclose(ok.omega_0, 0.4 - 0.2 / 0.7)
    error = expect_raises(ConstrictionViolated, validate_params, ModelParams(**REFERENCE_SET, omega_0=0.2))
    assert error.value == 0.2


def test_negative_and_non_finite_rates_rejected():
    for bad in (dict(xi=-0.1), dict(zeta=-1.0), dict(omega_c=0.0), dict(omega_eg=-1.0),
                dict(g=float("nan")), dict(omega_c=float("inf"))):
        expect_raises(NegativeRate, validate_params, ModelParams(**{**REFERENCE_SET, **bad}))


def test_with_detuning_revalidates():
    params = validate_params(ModelParams(**REFERENCE_SET))
    shifted = params.with_detuning(2.0)
    assert_allclose(shifted.omega_eg, 2.4)
    assert_allclose(derive(shifted).delta, 2.0)
    assert_allclose(shifted.omega_0, params.omega_0)
    expect_raises(NegativeRate, params.with_detuning, -0.5)


def test_from_lineshape_builds_matching_params():
    params = ModelParams.from_lineshape(g=2.0, alpha=0.7, delta=3.0)
    derived = derive(params)
    assert_allclose(derived.alpha, 0.7, rtol=1e-14)
    assert_allclose(derived.delta, 3.0, rtol=1e-14)
    undriven = ModelParams.from_lineshape(g=1.0, alpha=0.0, delta=3.0)
    assert undriven.zeta == 0.0 and undriven.xi == 0.0


def test_detuning_copy_keeps_drive():
    resonant = ModelParams.from_lineshape(g=1.0, alpha=0.5, delta=0.0)
    shifted = resonant.with_detuning(1.5)
    assert shifted == ModelParams.from_lineshape(g=1.0, alpha=0.5, delta=1.5)
    assert (shifted.zeta, shifted.xi, shifted.omega_c) == (resonant.zeta, resonant.xi, resonant.omega_c)
    try:
        ModelParams.from_lineshape(g=1.0, alpha=0.5, delta=-1.0)
    except NegativeRate as e:
        assert e.exit_code == 2
    else:
        raise AssertionError("NegativeRate not raised")


def test_rabi_frequency():
    assert_allclose(rabi_frequency(0.5, 1.0, 1), math.sqrt(1.0625), rtol=1e-15)
    assert rabi_frequency(-3.0, 2.0, 4) == rabi_frequency(3.0, 2.0, 4)
    n = np.arange(1, 6)
    assert_allclose(rabi_frequency(0.0, 1.0, n), np.sqrt(n))
    assert isinstance(rabi_frequency(1.0, 1.0, 2), float)


def test_thermal_weights_vacuum():
    weights, report = thermal_weights(0.0)
    assert weights.tolist() == [1.0]
    assert report.terms == 1 and report.tail_bound == 0.0


def test_thermal_weights_geometric_and_truncated():
    policy = TruncationPolicy(epsilon=1e-12)
    weights, report = thermal_weights(4.0, policy)
    assert_allclose(weights[:3], [0.2, 0.16, 0.128], rtol=1e-13)
    assert report.tail_bound < policy.epsilon
    assert 0.8 ** (report.terms - 1) >= policy.epsilon
    assert_allclose(weights.sum(), 1.0 - report.tail_bound, rtol=1e-13)


def test_thermal_weights_cap():
    error = expect_raises(TruncationCapExceeded, thermal_weights, 15.0, TruncationPolicy(max_terms=16))
    assert error.exit_code == 3
    assert error.limit == 16


def test_field_specs_validate():
    expect_raises(InvalidFieldSpec, Thermal, -0.5)
    expect_raises(InvalidFieldSpec, Thermal, float("inf"))
    expect_raises(InvalidFieldSpec, Fock, -1)
    expect_raises(InvalidFieldSpec, Fock, 1.5)
    assert Fock(3.0).k == 3
    assert Thermal(0.1).label == "nbar-0.1"
    assert Fock(10).label == "fock-10"


def test_truncation_policy_validates():
    expect_raises(InvalidPolicy, TruncationPolicy, epsilon=0.0)
    expect_raises(InvalidPolicy, TruncationPolicy, epsilon=1.5)
    expect_raises(InvalidPolicy, TruncationPolicy, max_terms=4)
    assert TruncationPolicy(epsilon=1e-12).tightened(0.25).epsilon == 2.5e-13


def test_recommended_cutoff():
    assert recommended_cutoff(0, 0.0) == 20
    assert recommended_cutoff(3, 0.7) == 31


if __name__ == "__main__":
    from script_checks import run_all_tests
    sys.exit(0 if run_all_tests("Model Parameters", dict(globals())) else 1)
