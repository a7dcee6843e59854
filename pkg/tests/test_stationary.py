import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nonradlab.core import derive_params
from nonradlab.rk import IntegrationError
from nonradlab.stationary import (
    StationaryConfig,
    asymptotic_z,
    asymptotic_z_prime,
    check_ladder_bounds,
    evaluate_rescaled,
    ladder,
    ode_residual,
    rescaled_derivative,
    singular_steady_state,
    singular_steady_state_residual,
    solve_stationary,
    stationary_sidecar,
)
from oracles import oracle_blowup_radius, rk4_stationary

# Frozen after agreeing with the RK4 extrapolation oracle to 1e-9.
R_MINUS_P4 = 0.79446589550446


def test_seed_matches_asymptotic_form(stationary_focusing, stationary_defocusing):
    for prof in (stationary_focusing, stationary_defocusing):
        assert prof.r[-1] == prof.R_inf
        assert prof.z[-1] == asymptotic_z(prof.R_inf, prof.params)
        assert prof.z_prime[-1] == asymptotic_z_prime(prof.R_inf, prof.params)
        assert prof.z_at(2 * prof.R_inf) == asymptotic_z(2 * prof.R_inf, prof.params)


def test_defocusing_profile_is_decreasing_and_convex(stationary_defocusing):
    prof = stationary_defocusing
    assert np.all(np.diff(prof.z) < 0)
    assert np.all(prof.z > 1.0)
    assert np.all(prof.z_prime < 0)


def test_focusing_profile_is_increasing_below_one(stationary_focusing):
    prof = stationary_focusing
    assert np.all(prof.z < 1.0)
    assert np.all(prof.z_prime > 0)
    assert prof.R_minus is None


def test_blowup_bracket(stationary_defocusing):
    lo, hi = stationary_defocusing.R_minus
    assert lo <= hi
    assert hi - lo <= 1e-8 * lo
    assert lo == pytest.approx(R_MINUS_P4, rel=1e-9)
    assert lo >= 4.0**-6
    assert stationary_defocusing.r[0] >= lo


def test_blowup_radius_matches_oracle(stationary_defocusing):
    ref = oracle_blowup_radius(4.0)
    assert stationary_defocusing.R_minus[0] == pytest.approx(ref, rel=1e-8)


@pytest.mark.parametrize("zeta,radii", [(1, [1e-3, 0.01, 1.0, 100.0]), (-1, [0.85, 1.0, 10.0])])
def test_profile_matches_rk4_oracle(zeta, radii, stationary_focusing, stationary_defocusing):
    prof = stationary_focusing if zeta == 1 else stationary_defocusing
    for r in radii:
        rs, zs = rk4_stationary(float(zeta), 4.0, 1e4, r, 1e30, 20_000)
        assert prof.z_at(r) == pytest.approx(zs[-1], rel=1e-9)


def test_halving_tolerances_changes_little(p4, stationary_defocusing):
    tight = solve_stationary(-1, p4, StationaryConfig(rtol=5e-11, atol=5e-13))
    assert tight.R_minus[0] == pytest.approx(stationary_defocusing.R_minus[0], rel=1e-6)
    rq = np.array([0.9, 2.0, 50.0])
    assert np.allclose(tight.z_at(rq), stationary_defocusing.z_at(rq), rtol=1e-6)


def test_ode_residual_small(stationary_focusing, stationary_defocusing):
    assert np.max(ode_residual(stationary_focusing)) < 1e-7
    assert np.max(ode_residual(stationary_defocusing)) < 1e-6


def test_ladder_values_at_p4(p4):
    rungs = ladder(3, p4)
    assert [r.beta_k for r in rungs] == [0.0, 1.0, 5.0, 21.0]
    assert rungs[1].c_k == pytest.approx(2.0, rel=1e-14)
    assert rungs[2].c_k == pytest.approx(5 * 6 * 2.0**4, rel=1e-14)


@given(st.floats(min_value=3.01, max_value=4.99), st.integers(min_value=0, max_value=12))
def test_ladder_exponents_match_closed_form(p, k):
    rung = ladder(k, derive_params(p))[k]
    pf = Fraction(p)
    exact = float((pf - 3) * (pf**k - 1) / (pf - 1))
    assert abs(rung.beta_k - exact) <= 4 * math.ulp(exact)
    assert abs(rung.beta_closed_form - exact) <= 4 * math.ulp(exact)


def test_ladder_reports_log_beyond_six(p4):
    rungs = ladder(12, p4)
    assert all(r.c_k is None for r in rungs[7:])
    assert all(math.isfinite(r.log_c_k) for r in rungs)
    with pytest.raises(ValueError):
        ladder(13, p4)


def test_ladder_bounds_hold(stationary_defocusing):
    checks = check_ladder_bounds(stationary_defocusing, 3)
    assert [c.k for c in checks] == [0, 1, 2, 3]
    assert all(c.min_relative_margin >= -1e-9 for c in checks)


def test_ladder_bounds_reject_focusing(stationary_focusing):
    with pytest.raises(ValueError):
        check_ladder_bounds(stationary_focusing, 2)


def test_rescaled_profile(stationary_focusing, stationary_defocusing):
    x = np.array([1.0, 3.0, 20.0])
    assert np.array_equal(evaluate_rescaled(stationary_focusing, 0.0, x), np.zeros(3))
    assert np.allclose(evaluate_rescaled(stationary_focusing, 1.0, x), stationary_focusing.z_at(x) / x, rtol=1e-15)
    assert np.allclose(
        evaluate_rescaled(stationary_focusing, -2.0, x), -evaluate_rescaled(stationary_focusing, 2.0, x), rtol=0
    )
    # U_C(x) ~ C / x far out
    assert evaluate_rescaled(stationary_focusing, 2.0, 1e6) * 1e6 == pytest.approx(2.0, rel=1e-3)
    with pytest.raises(ValueError):
        evaluate_rescaled(stationary_defocusing, 1.0, 0.5)
    with pytest.raises(ValueError):
        evaluate_rescaled(stationary_focusing, 1.0, -1.0)


def test_rescaled_derivative_matches_differences(stationary_focusing):
    x, h = np.array([1.5, 4.0, 30.0]), 1e-5
    fd = (evaluate_rescaled(stationary_focusing, 1.7, x + h) - evaluate_rescaled(stationary_focusing, 1.7, x - h)) / (2 * h)
    assert np.allclose(rescaled_derivative(stationary_focusing, 1.7, x), fd, rtol=1e-6)


def test_singular_state_residual():
    for p in (3.2, 4.0, 4.8):
        pr = derive_params(p, 1)
        r = np.geomspace(1e-3, 1e3, 1000)
        assert np.max(singular_steady_state_residual(r, pr)) <= 1e-12
        assert singular_steady_state(1.0, pr) == pr.c_p


def test_error_cases(p4, p4_focusing):
    with pytest.raises(IntegrationError):
        solve_stationary(1, p4_focusing, StationaryConfig(r_min=1e-12, Z_max=1e-3))
    with pytest.raises(IntegrationError):
        solve_stationary(-1, p4, StationaryConfig(r_min=0.9, z_switch=1e6, Z_max=1e6))
    with pytest.raises(ValueError):
        solve_stationary(1, p4_focusing, StationaryConfig(R_inf=0.5))


def test_sidecar(stationary_defocusing, stationary_focusing):
    side = stationary_sidecar(stationary_defocusing)
    assert side["R_minus_lo"] == stationary_defocusing.R_minus[0]
    assert stationary_sidecar(stationary_focusing)["R_minus_hi"] is None
