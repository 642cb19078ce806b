import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgattract.model import GridSpec, check_gap_condition, force
from kgattract.multifreq import (
    ConstructionError,
    LinearDegenerateParams,
    WideGapParams,
    aligned_grid,
    build_linear_degenerate,
    build_wide_gap,
    eval_multifreq,
    eval_multifreq_dt,
    initial_state,
    residual_report,
    wide_gap_threshold,
)


def _one_sided_slope(params, X, t, side):
    # fourth-order one-sided difference from inside one smooth branch
    h = 1e-3 * side
    xs = X + h * np.arange(1, 6)
    v = eval_multifreq(params, xs, t)
    v0 = eval_multifreq(params, np.array([X + 1e-15 * side]), t)[..., 0]
    c = np.array([-25 / 12, 4, -3, 4 / 3, -1 / 4])
    return (c[0] * v0 + c[1] * v[..., 0] + c[2] * v[..., 1] + c[3] * v[..., 2] + c[4] * v[..., 3]) / h


def _fd_jump_residual(params):
    t = np.linspace(0, 2 * math.pi / params.omega, 17)
    out = []
    for o in params.model().oscillators:
        X = o.position
        right = _one_sided_slope(params, X, t, +1)
        left = _one_sided_slope(params, X, t, -1)
        val = eval_multifreq(params, np.array([X]), t)[:, 0]
        out.append(np.max(np.abs(-right + left - force(o.coeffs, val).real)))
    return out


# ---------------------------------------------------------------- wide gap


def test_wide_gap_example():
    p = build_wide_gap(1.0, math.pi, 0.0, 1.0)
    assert p.omega == pytest.approx(math.sqrt(2) / 3, abs=1e-15)
    assert p.kappa1 == pytest.approx(math.sqrt(7) / 3, abs=1e-15)
    assert p.k3 == pytest.approx(1.0, abs=1e-14)
    assert p.A > 0 and p.B > 0
    assert max(abs(v) for v in p.algebraic_residuals().values()) <= 1e-10
    assert max(residual_report(p)) <= 1e-10 * p.scale()
    # independent check: finite differences of the evaluator, not the closed forms
    assert max(_fd_jump_residual(p)) <= 1e-7


def test_wide_gap_rejections():
    with pytest.raises(ConstructionError, match="pi/"):
        build_wide_gap(1.0, 1.0, 0.0, 1.0)
    thr = wide_gap_threshold(1.0)
    assert thr == pytest.approx(1.1107207345, abs=1e-9)
    with pytest.raises(ConstructionError):
        build_wide_gap(1.0, thr, 0.0, 1.0)
    with pytest.raises(ConstructionError, match="no nonzero amplitude"):
        build_wide_gap(1.0, math.pi, 0.0, -1.0)


def test_wide_gap_large_alpha_negative_beta():
    p = build_wide_gap(1.0, math.pi, 5.0, -1.0)
    assert p.A > 0
    assert max(residual_report(p)) <= 1e-10 * p.scale()
    # the potential then has a positive leading coefficient
    coeffs = p.model().oscillators[0].coeffs
    assert coeffs[-1] > 0


def test_wide_gap_violates_gap_condition():
    # beta < 0 makes both oscillators strictly nonlinear, so the condition applies and fails
    p = build_wide_gap(1.0, math.pi, 5.0, -1.0)
    gc = check_gap_condition(p.model())
    assert not gc.holds
    assert gc.lhs == pytest.approx(3 * p.omega, rel=1e-14)


def test_wide_gap_symmetry_about_midpoint():
    p = build_wide_gap(1.0, math.pi, 0.0, 1.0)
    x = np.linspace(-5, 5 + math.pi, 401)
    t = np.array([0.3, 1.7, 4.2])
    np.testing.assert_allclose(eval_multifreq(p, x, t), eval_multifreq(p, p.L - x, t), atol=1e-13)


# ---------------------------------------------------------------- linear degeneration


def test_linear_degenerate_example():
    p = build_linear_degenerate(1.0, 0.25, 1.0, 1.0)
    assert p.kappa3 == pytest.approx(math.sqrt(0.4375), abs=1e-15)
    assert p.kappa3 == pytest.approx(0.661438, abs=1e-6)
    assert max(abs(v) for v in p.algebraic_residuals().values()) <= 1e-10 * p.scale()
    assert max(residual_report(p)) <= 1e-10 * p.scale()
    assert max(_fd_jump_residual(p)) <= 1e-7
    # the second oscillator is linear: F = -gamma psi
    assert p.model().oscillators[1].coeffs == (0.0, -p.gamma / 2)


def test_linear_degenerate_fixed_A_mode():
    p = build_linear_degenerate(1.0, 0.25, 1.0, 1.0, alpha=None, A=0.5)
    assert p.A == 0.5
    assert max(residual_report(p)) <= 1e-10 * p.scale()
    q = build_linear_degenerate(1.0, 0.25, 1.0, 1.0, alpha=p.alpha)
    assert (q.A, q.B) == pytest.approx((p.A, p.B), rel=1e-9)


def test_linear_degenerate_rejections():
    with pytest.raises(ConstructionError):
        build_linear_degenerate(1.0, 1.0 / 3.0, 1.0, 1.0)
    with pytest.raises(ConstructionError):
        build_linear_degenerate(1.0, 0.25, 1.0, 0.0)
    with pytest.raises(ConstructionError):
        build_linear_degenerate(1.0, 0.25, -1.0, 1.0)


def test_cubic_amplitude_vanishes_when_sum_vanishes():
    from kgattract.multifreq import cubic_amplitude

    assert cubic_amplitude(1.0, 0.7, -0.7, 0.66) == 0.0


# ---------------------------------------------------------------- evaluators


@pytest.fixture(scope="module")
def both():
    return [build_wide_gap(1.0, math.pi, 0.0, 1.0), build_linear_degenerate(1.0, 0.25, 1.0, 1.0)]


def test_zero_at_t0_and_half_period(both):
    x = np.linspace(-10, 10, 1001)
    for p in both:
        assert np.all(eval_multifreq(p, x, 0.0) == 0)
        assert abs(eval_multifreq(p, np.array([0.0]), math.pi / p.omega)[0]) <= 1e-14


def test_continuity_in_x(both):
    for p in both:
        for X in (0.0, p.L):
            lo = eval_multifreq(p, np.array([X - 1e-12]), 0.9)[0]
            hi = eval_multifreq(p, np.array([X + 1e-12]), 0.9)[0]
            assert abs(lo - hi) <= 1e-10


def test_time_derivative(both):
    x = np.linspace(-3, 6, 91)
    h = 1e-5
    for p in both:
        fd = (eval_multifreq(p, x, 1.3 + h) - eval_multifreq(p, x, 1.3 - h)) / (2 * h)
        np.testing.assert_allclose(eval_multifreq_dt(p, x, 1.3), fd, atol=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.floats(-4, 7))
def test_two_line_dft(x0):
    for p in (build_wide_gap(1.0, math.pi, 0.0, 1.0), build_linear_degenerate(1.0, 0.25, 1.0, 1.0)):
        n = 64
        t = np.arange(n) * (2 * math.pi / p.omega / n)
        spec = np.abs(np.fft.fft(eval_multifreq(p, np.array([x0]), t)[:, 0]))
        peak = spec.max()
        if peak < 1e-12:
            continue
        other = np.delete(spec, [1, 3, n - 3, n - 1])
        assert other.max() <= 1e-10 * peak


def test_residual_grows_with_perturbation(both):
    for p in both:
        r1 = max(residual_report(dataclasses.replace(p, A=p.A + 1e-3)))
        r2 = max(residual_report(dataclasses.replace(p, A=p.A + 2e-3)))
        assert r1 > 1e-5
        assert 1.6 <= r2 / r1 <= 2.4


def test_zero_params_zero_residual():
    z = WideGapParams(1.0, math.pi, math.sqrt(2) / 3, 0.0, 1.0, 0.0, 0.0)
    assert residual_report(z) == [0.0, 0.0]
    zl = LinearDegenerateParams(1.0, 0.25, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0)
    assert max(residual_report(zl)) == 0.0


def test_initial_state_and_aligned_grid(both):
    for p in both:
        g = aligned_grid(p, 20.0, 0.01)
        assert g.x[g.node_index(p.L)] == pytest.approx(p.L, abs=1e-12)
        assert abs(g.dx - 0.01) < 0.01 * 0.01
        s = initial_state(p, g)
        assert np.all(s.psi == 0)
        assert np.abs(s.pi).max() > 0
        assert isinstance(g, GridSpec)
