import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nonradlab.channel_diagnostics import (
    characteristic_residual,
    characteristic_tail_bound,
    corrected_trapezoid,
    decay_report,
    derivative4,
    energy_identity_residual,
    exterior_energy,
    exterior_total_energy,
    fit_far_field_constant,
    pointwise_bound_check,
    power_law_tail,
    projection_from_arrays,
    projection_onto_generator,
    weighted_sup,
)
from nonradlab.exterior_wave import (
    WaveConfig,
    bump_data,
    bump_velocity_primitive,
    evolve,
    make_initial_state,
    self_similar_data,
    stationary_data,
)
from nonradlab.stationary import evaluate_rescaled, rescaled_derivative


def _snapshot(params, u0, u1, *, R0=1.0, dr=2.0**-6, r_max=200.0):
    cfg = WaveConfig(params, R0=R0, dr=dr, T_max=0.0, r_max=r_max, extension="none")
    return evolve(make_initial_state(u0, u1, cfg), 0.0).snapshots[0]


def _zeros(r):
    return np.zeros_like(np.asarray(r, dtype=float))


def _inverse_r(c):
    def u0(r):
        return c / np.asarray(r, dtype=float)

    return u0


@pytest.fixture(scope="module")
def zero_traj(p4):
    cfg = WaveConfig(p4, R0=1.0, dr=2.0**-5, T_max=2.0, r_max=10.0)
    return evolve(make_initial_state(_zeros, _zeros, cfg), 2.0)


@pytest.fixture(scope="module")
def linear_bump_run(p4):
    # outgoing bump in the exterior; the nonlinearity is far below rounding
    c, wd, amp = 4.0, 1.0, 1e-4
    cfg = WaveConfig(p4, R0=1.0, dr=2.0**-6, T_max=8.0, r_max=24.0)
    st = make_initial_state(*bump_data(c, wd, amp), cfg, u1_primitive=bump_velocity_primitive(c, wd, amp))
    return evolve(st, 8.0, 1)


def test_quadrature_helpers():
    h = 0.1
    x = np.arange(0, 21) * h
    assert np.allclose(derivative4(x**4 - x, h), 4 * x**3 - 1, atol=1e-11)
    assert corrected_trapezoid(x**3, h) == pytest.approx(2.0**4 / 4, rel=1e-13)
    r = np.linspace(10.0, 100.0, 901)
    tail, fit = power_law_tail(r, 3 * r**-2.0)
    assert tail == pytest.approx(3 / 100.0, rel=1e-10)
    assert power_law_tail(r, np.zeros_like(r)) == (0.0, None)
    with pytest.raises(ValueError):
        power_law_tail(r, r**-0.5)
    with pytest.raises(ValueError):
        derivative4(np.ones(4), 0.1)


def test_zero_state(zero_traj):
    for snap in zero_traj.snapshots:
        assert exterior_energy(snap, 1.0) == 0.0
        assert energy_identity_residual(snap, 1.0) == 0.0
        assert pointwise_bound_check(snap) == 0.0
    lam, cos = projection_onto_generator(zero_traj.snapshots[0], 2.0)
    assert lam == 0.0 and math.isnan(cos)
    assert characteristic_residual(zero_traj, 3.0, 0.0, 2.0) == 0.0
    assert weighted_sup(zero_traj) == 0.0


def test_empty_window_raises(zero_traj):
    snap = zero_traj.snapshots[-1]
    with pytest.raises(ValueError, match="empty"):
        exterior_energy(snap, 20.0)
    with pytest.raises(ValueError):
        exterior_energy(snap, 1.0, window=(2.5, 5.0))
    with pytest.raises(ValueError):
        projection_onto_generator(snap, 2.01)


def test_identity_for_inverse_r(p4):
    snap = _snapshot(p4, _inverse_r(1.0), _zeros, dr=2.0**-7)
    assert energy_identity_residual(snap, 1.0) <= 1e-8


def test_identity_converges_for_smooth_data(p4):
    res = []
    for dr in (2.0**-5, 2.0**-6):

        def u0(r):
            return np.exp(-((r - 4.0) ** 2)) / r

        snap = _snapshot(p4, u0, _zeros, dr=dr, r_max=30.0)
        res.append(energy_identity_residual(snap, 1.0))
    assert res[1] <= 10 * (2.0**-6) ** 2
    assert res[1] < res[0]


@pytest.mark.parametrize("R", [1.0, 4.0, 25.0])
def test_projection_of_generator_multiple(p4, R):
    snap = _snapshot(p4, _inverse_r(2.5), _zeros)
    lam, cos = projection_onto_generator(snap, R)
    assert lam == pytest.approx(2.5, rel=1e-12)
    assert cos == pytest.approx(1.0, abs=1e-6)


def test_projection_of_velocity_data_vanishes(p4, a_star):
    snap = _snapshot(p4, *self_similar_data(a_star, p4), R0=0.5)
    lam, cos = projection_onto_generator(snap, 1.0)
    assert lam == 0.0 and cos == 0.0


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=1e-3, max_value=1e3))
def test_projection_angle_is_scale_invariant(c):
    r = np.linspace(1.0, 200.0, 19901)
    u = np.exp(-r / 20) / r + 0.3 / r
    u_r = -np.exp(-r / 20) * (1 / (20 * r) + 1 / r**2) - 0.3 / r**2
    u_t = np.sin(r) / r**2
    lam1, cos1 = projection_from_arrays(r, u, u_r, u_t, 1.0)
    lamc, cosc = projection_from_arrays(r, c * u, c * u_r, c * u_t, 1.0)
    assert abs(cosc - cos1) <= 1e-12
    assert lamc == pytest.approx(c * lam1, rel=1e-14)
    assert abs(cos1) <= 1 + 1e-12


def test_rescaled_family_angle_follows_scaling(stationary_focusing):
    p = stationary_focusing.params.p
    C, R = 1.5, 2.0
    s = C ** ((p - 1) / (p - 3))

    def cos_at(C_, R_):
        r = np.linspace(R_, 400.0 * R_, 40000)
        u = evaluate_rescaled(stationary_focusing, C_, r)
        return projection_from_arrays(r, u, rescaled_derivative(stationary_focusing, C_, r), 0 * r, R_)[1]

    assert cos_at(C, R) == pytest.approx(cos_at(1.0, R / s), abs=1e-6)


def test_pointwise_bound(p4, run1):
    snap = _snapshot(p4, _inverse_r(1.0), _zeros)
    assert abs(pointwise_bound_check(snap)) <= 1e-6

    def u0(r):
        return np.exp(-((r - 4.0) ** 2)) / r + 0.1 / r**2

    assert pointwise_bound_check(_snapshot(p4, u0, _zeros)) >= -1e-6
    for snap in run1[10][0].snapshots:
        assert pointwise_bound_check(snap) >= -1e-6


def test_characteristic_residual_on_linear_run(linear_bump_run):
    assert characteristic_residual(linear_bump_run, 4.5, 0.0, 8.0) <= 1e-12
    assert characteristic_residual(linear_bump_run, 3.0, 1.0, 6.0) <= 1e-12


def test_characteristic_validation(linear_bump_run, p4):
    with pytest.raises(ValueError):
        characteristic_residual(linear_bump_run, 1.5, 1.0, 6.0)
    with pytest.raises(ValueError):
        characteristic_residual(linear_bump_run, 4.5, 0.0, 8.1)
    cfg = WaveConfig(p4, R0=1.0, dr=2.0**-5, T_max=1.0, lam=0.5, r_max=10.0)
    half = evolve(make_initial_state(*bump_data(4.0, 1.0, 1e-4), cfg), 1.0)
    with pytest.raises(ValueError, match="lambda"):
        characteristic_residual(half, 4.5, 0.0, 1.0)


def test_tail_bound_formula():
    # p = 4: p*beta = 8/3, so 2 eps^4 r^{-2/3} / (2/3)
    assert characteristic_tail_bound(1.0, 4.0, 8.0) == pytest.approx(3.0 * 8.0 ** (-2 / 3))


def test_bump_without_forcing_radiates(linear_bump_run):
    rep = decay_report(linear_bump_run, 0.5)
    assert rep.verdict == "radiating"
    assert np.all(rep.E_ext >= 0)


def test_self_similar_run_is_nonradiative(long_run):
    rep = decay_report(long_run[0], 0.5, t_range=(10.0, 50.0))
    assert rep.verdict == "nonradiative-consistent"
    assert np.all(np.abs(rep.cos_angle[np.isfinite(rep.cos_angle)]) <= 1 + 1e-12)


def test_decay_exponent_stable_under_refinement(p4, a_star):
    exps = []
    for k in (5, 6):
        cfg = WaveConfig(p4, R0=0.5, dr=2.0**-k, T_max=20.0, r_max=50.5)
        traj = evolve(make_initial_state(*self_similar_data(a_star, p4), cfg), 20.0, 2 ** (k + 1))
        exps.append(decay_report(traj, 0.5, t_range=(5.0, 20.0)).decay_fit.exponent)
    assert abs(exps[0] - exps[1]) <= 0.02


def test_static_energy_is_constant_in_fixed_window(p4_focusing, stationary_focusing):
    cfg = WaveConfig(p4_focusing, R0=1.0, dr=2.0**-10, T_max=10.0, r_max=40.0)
    traj = evolve(make_initial_state(*stationary_data(stationary_focusing, 1.0), cfg), 10.0, 1024)
    E = np.array([exterior_energy(s, 1.0, window=(12.0, 29.0)) for s in traj.snapshots])
    assert np.max(np.abs(E / E[0] - 1)) <= 1e-6


def test_static_far_field_constant(static_run):
    traj, _ = static_run
    for C_true in (1.0,):
        C, expo = fit_far_field_constant(traj.snapshots[-1], 1.0)
        assert C == pytest.approx(C_true, rel=1e-3)
        assert expo <= 2 - traj.snapshots[0].params.p + 0.1
    rep = decay_report(traj, 1.0)
    assert rep.C_fit == pytest.approx(1.0, rel=1e-3)


def test_total_energy_positive(static_run):
    snap = static_run[0].snapshots[0]
    assert exterior_total_energy(snap, 1.0) > 0


def test_report_serialization(linear_bump_run):
    rep = decay_report(linear_bump_run, 0.5)
    data = json.loads(rep.to_json())
    assert data["verdict"] == "radiating"
    assert len(data["E_ext"]) == len(rep.times)
    rows = rep.to_csv().strip().split("\n")
    assert rows[0] == "t,E_ext,lambda,cos_angle"
    assert len(rows) == len(rep.times) + 1
    assert float(rows[1].split(",")[1]) == rep.E_ext[0]


def test_report_needs_snapshots(zero_traj, p4):
    cfg = WaveConfig(p4, R0=1.0, dr=0.1, T_max=0.0, r_max=10.0)
    traj = evolve(make_initial_state(_zeros, _zeros, cfg), 0.0)
    with pytest.raises(ValueError, match="4 snapshots"):
        decay_report(traj, 1.0)
