from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from corrbound import tfim
from corrbound.bound_core import AverageMode, DimensionlessCouplings as P
from corrbound.errors import InvalidN, UnsupportedMode

LN2 = math.log(2)
couplings = st.builds(P, st.floats(0, 4), st.floats(0, 4))


def quad_mean(f):
    """Independent oracle: QUADPACK on [0, pi], divided by pi."""
    v, _ = quad(f, 0, math.pi, epsabs=1e-13, epsrel=1e-13, limit=200)
    return v / math.pi


def lam(K, C, w):
    return math.sqrt(max(K * K + C * C - 2 * K * C * math.cos(w), 0.0))


# -- dispersion and exact thermodynamics --------------------------------------


def test_dispersion_examples():
    p = P(1.3, 0.4)
    assert tfim.dispersion(p, 0.0) == pytest.approx(0.9, abs=1e-15)
    assert tfim.dispersion(p, math.pi) == pytest.approx(1.7, abs=1e-15)
    assert tfim.dispersion(P(2, 2), math.pi) == pytest.approx(4.0, abs=1e-15)


@given(couplings, st.floats(1e-3, math.pi))
@settings(max_examples=100, deadline=None)
def test_dispersion_lower_bound(p, w):
    d = float(tfim.dispersion(p, w))
    assert d >= abs(p.K - p.C) - 1e-12
    if p.K * p.C > 1e-3:
        assert d > abs(p.K - p.C)


def test_ln_Z_limits():
    assert tfim.ln_Z_per_spin(P(0, 1.7)) == pytest.approx(math.log(2 * math.cosh(1.7)), abs=1e-12)
    assert tfim.ln_Z_per_spin(P(1.7, 0)) == pytest.approx(math.log(2 * math.cosh(1.7)), abs=1e-12)


@pytest.mark.parametrize("K,C", [(1, 1), (0.5, 2), (2, 0.5), (3, 3)])
def test_ln_Z_against_second_quadrature(K, C):
    ref = LN2 + quad_mean(lambda w: math.log(math.cosh(lam(K, C, w))))
    assert tfim.ln_Z_per_spin(P(K, C)) == pytest.approx(ref, abs=1e-10)


@given(couplings)
@settings(max_examples=40, deadline=None)
def test_ln_Z_at_least_ln2(p):
    assert tfim.ln_Z_per_spin(p) >= LN2


def test_beta_avg_H_limits():
    assert tfim.beta_avg_H_per_spin(P(0, 1.2)) == pytest.approx(-1.2 * math.tanh(1.2), abs=1e-12)
    assert tfim.beta_avg_H_per_spin(P(0, 0)) == 0.0


@pytest.mark.parametrize("K,C", [(1, 1), (0.5, 2), (2, 0.3)])
def test_beta_avg_H_from_temperature_derivative(K, C):
    f = lambda t: tfim.ln_Z_per_spin(P(t * K, t * C))  # noqa: E731
    d = 1e-4
    # d ln Z / dt at t = 1 equals -beta <H>; 5-point stencil
    deriv = (f(1 - 2 * d) - 8 * f(1 - d) + 8 * f(1 + d) - f(1 + 2 * d)) / (12 * d)
    assert tfim.beta_avg_H_per_spin(P(K, C)) == pytest.approx(-deriv, abs=1e-6)


def test_sigma_z_limits():
    assert tfim.sigma_z_mean(P(0, 0.8)) == pytest.approx(math.tanh(0.8), abs=1e-12)
    assert tfim.sigma_z_mean(P(1.4, 0)) == pytest.approx(0, abs=1e-12)


def test_sigma_z_is_field_derivative_on_grid():
    grid = np.arange(0.25, 3.01, 0.25)
    for K in grid:
        for C in grid:
            f = lambda c: tfim.ln_Z_per_spin(P(K, c), tol=1e-13)  # noqa: E731
            h = 1e-3
            d = (f(C - 2 * h) - 8 * f(C - h) + 8 * f(C + h) - f(C + 2 * h)) / (12 * h)
            assert tfim.sigma_z_mean(P(K, C)) == pytest.approx(d, abs=1e-7), (K, C)


def test_sigma_z_at_critical_line():
    # K = C: removable 0/0 at w = 0 must not break the quadrature
    v = tfim.sigma_z_mean(P(1.5, 1.5))
    ref = quad_mean(lambda w: (1.5 - 1.5 * math.cos(w)) * math.tanh(lam(1.5, 1.5, w)) / lam(1.5, 1.5, w)
                    if w > 0 else 0.0)
    assert v == pytest.approx(ref, abs=1e-10)


# -- finite spectrum -----------------------------------------------------------


def test_finite_spectrum_endpoints():
    p = P(1.2, 0.5)
    modes = tfim.finite_spectrum(p, 8)
    assert len(modes) == 8
    k = np.arange(-3, 5)
    assert modes[list(k).index(0)] == pytest.approx(0.7, abs=1e-15)
    assert modes[-1] == pytest.approx(1.7, abs=1e-15)


@pytest.mark.parametrize("N", [2, 5, 7, 0])
def test_finite_spectrum_invalid_N(N):
    with pytest.raises(InvalidN):
        tfim.finite_spectrum(P(1, 1), N)


def test_riemann_sum_convergence():
    # the periodic integrand makes the mode sum converge exponentially; at
    # K = C = 40 the nearest complex singularity is close enough to the real
    # axis that the decay is visible above round-off over this range of N
    p = P(40, 40)
    ref = tfim.ln_Z_per_spin(p, tol=1e-12)
    devs = [abs(tfim.finite_ln_Z_per_spin(p, N) - ref) for N in (64, 128, 256, 512)]
    assert all(a > b for a, b in zip(devs, devs[1:]))
    p = P(1, 1)
    assert abs(tfim.finite_ln_Z_per_spin(p, 512) - tfim.ln_Z_per_spin(p)) < 1e-4


# -- mean field ----------------------------------------------------------------


def test_residual_trivial_root():
    assert tfim.self_consistency_residual(P(1.5, 0), 0.0) == 0.0


def test_zero_field_reduction():
    # for C = 0 and s > 0 the equation is tanh(K s) = (1 + s^2)/2
    for s in tfim.solve_s(P(1.5, 0)).branches:
        if s > 0:
            assert math.tanh(1.5 * s) == pytest.approx((1 + s * s) / 2, abs=1e-12)


def test_two_positive_roots_at_K15():
    s = np.linspace(1e-6, 1, 400_001)
    r = np.tanh(1.5 * s) - (1 + s * s) / 2
    idx = np.nonzero(r[:-1] * r[1:] < 0)[0]
    oracle = s[idx]
    pos = [b for b in tfim.solve_s(P(1.5, 0)).branches if b > 0]
    assert len(pos) == len(oracle) == 2
    assert pos == pytest.approx(list(oracle), abs=1e-5)
    assert pos == pytest.approx([0.48, 0.84], abs=0.01)


def test_below_threshold_only_trivial():
    assert tfim.solve_s(P(1.0, 0)).branches == (0.0,)
    assert not tfim.has_ordered_branch(1.0)
    assert tfim.has_ordered_branch(2.0)


@given(couplings)
@settings(max_examples=60, deadline=None)
def test_branch_residuals_small(p):
    sol = tfim.solve_s(p)
    assert sol.converged
    assert sol.principal in sol.branches
    for b in sol.branches:
        assert -1 <= b <= 1
        assert abs(float(tfim.self_consistency_residual(p, b))) <= 1e-10


@given(st.floats(0, 4))
@settings(max_examples=40, deadline=None)
def test_zero_field_branches_symmetric(K):
    br = tfim.solve_s(P(K, 0)).branches
    assert np.allclose(sorted(br), sorted(-b for b in br), atol=1e-12)


@given(couplings, st.floats(-1, 1))
@settings(max_examples=100, deadline=None)
def test_ab_product_normalized(p, s):
    assert abs(2 * float(tfim.ab_product(p, s))) <= 1 + 1e-15


def test_ab_product_examples():
    assert tfim.ab_product(P(0, 1), 0.3) == 0
    # displayed formula at C = 0: -K |s| K / (K^2 + s^2 K^2) = -|s| / (1 + s^2)
    assert float(tfim.ab_product(P(2, 0), 1.0)) == pytest.approx(-0.5, abs=1e-15)
    assert float(tfim.ab_product(P(2, 0), 0.5)) == pytest.approx(-0.4, abs=1e-15)
    assert float(tfim.ab_product(P(2, 0), 0.0)) == 0.0


@pytest.mark.xfail(strict=True, reason="the displayed product has C + R = 0 at C = s = 0, so it is 0, not -1/2")
def test_ab_product_zero_field_zero_s_is_minus_half():
    assert float(tfim.ab_product(P(2, 0), 0.0)) == pytest.approx(-0.5, abs=1e-15)


def test_ab_product_tiny_coupling():
    v = float(tfim.ab_product(P(5e-324, 0), 0.0))
    assert math.isfinite(v)


def _sigma_x_in_field(hx, hz):
    """<sx> in exp(hx sx + hz sz)/Z from a 2x2 eigendecomposition."""
    sx = np.array([[0, 1], [1, 0]])
    sz = np.diag([1.0, -1.0])
    w, v = np.linalg.eigh(hx * sx + hz * sz)
    rho = (v * np.exp(w - w.max())) @ v.T
    rho /= np.trace(rho)
    return float(np.trace(rho @ sx))


def test_rhs_at_unit_s_is_mean_field_sigma_x():
    # with s = 1 the transverse field sK equals K, so the displayed <sx>
    # coincides with the true two-level average
    for K, C in [(1.0, 0.5), (2.0, 1.0), (0.7, 2.0)]:
        assert float(tfim.self_consistency_rhs(P(K, C), 1.0)) == pytest.approx(
            _sigma_x_in_field(K, C), abs=1e-13
        )


def test_rhs_is_minus_two_ab_tanh_R():
    for K, C, s in [(1.0, 0.5, 0.3), (2.0, 1.0, 0.8), (0.7, 2.0, -0.1)]:
        R = math.hypot(C, s * K)
        ab = -K * (C + R) / (K * K + (C + R) ** 2)
        assert float(tfim.self_consistency_rhs(P(K, C), s)) == pytest.approx(-2 * ab * math.tanh(R), abs=1e-14)


def test_mf_ln_Z_examples():
    assert tfim.mf_ln_Z_per_spin(P(1.3, 0.8), 0.0) == pytest.approx(math.log(2 * math.cosh(0.8)), abs=1e-14)
    assert tfim.mf_ln_Z_per_spin(P(1.3, 0), 1.0) == pytest.approx(math.log(2 * math.cosh(1.3)), abs=1e-14)
    R = math.hypot(0.8, 0.4 * 1.3)
    assert tfim.mf_ln_Z_per_spin(P(1.3, 0.8), 0.4) == pytest.approx(
        math.log(math.exp(R) + math.exp(-R)), abs=1e-14
    )


# -- bound ---------------------------------------------------------------------


def test_bound_zero_coupling_grid():
    for C in np.arange(0, 3.01, 0.25):
        assert abs(tfim.bound_per_spin(P(0, C)).bound) <= 1e-10


def test_bound_term_by_term():
    K, C = 1.0, 0.0  # below K_c: principal s = 0
    rep = tfim.bound_per_spin(P(K, C))
    assert rep.s == 0.0
    ref = (
        0.0
        - quad_mean(lambda w: math.log(math.cosh(lam(K, C, w))))
        + quad_mean(lambda w: lam(K, C, w) * math.tanh(lam(K, C, w)))
    )
    assert rep.bound == pytest.approx(ref, abs=1e-10)
    K, C = 0.8, 1.3
    rep = tfim.bound_per_spin(P(K, C))
    s = rep.s
    ref = (
        math.log(math.cosh(math.hypot(C, s * K)))
        - quad_mean(lambda w: math.log(math.cosh(lam(K, C, w))))
        + quad_mean(lambda w: lam(K, C, w) * math.tanh(lam(K, C, w)))
        - K * s * s
        - C * quad_mean(lambda w: (C - K * math.cos(w)) * math.tanh(lam(K, C, w)) / lam(K, C, w))
    )
    assert rep.bound == pytest.approx(ref, abs=1e-10)


def test_bound_only_paper_mode():
    with pytest.raises(UnsupportedMode):
        tfim.bound_per_spin(P(1, 1), AverageMode.EXACT)


def test_principal_minimizes_bound():
    p = P(2.0, 0.2)
    sol = tfim.solve_s(p)
    values = {b: tfim.bound_per_spin(p, solution=sol).bound for b in sol.branches}
    from corrbound.bound_core import correlation_bound

    values = {b: correlation_bound(tfim.MODEL, p, b, AverageMode.PAPER_FAITHFUL).bound for b in sol.branches}
    assert values[sol.principal] == pytest.approx(min(values.values()), abs=1e-12)


def test_large_K_on_critical_line():
    # oracle: plain iteration of s <- <sx>(s) written out from a, b
    K = C = 20.0
    s = 0.5
    for _ in range(500):
        R = math.hypot(C, s * K)
        s = 2 * K * (C + R) / (K * K + (C + R) ** 2) * math.tanh(R)
    rep = tfim.bound_per_spin(P(K, C))
    assert rep.s == pytest.approx(s, abs=1e-10)
    assert s == pytest.approx(0.743, abs=0.01)
    assert rep.bound / K > 0


def test_asymptotic_bound():
    assert tfim.asymptotic_bound_large_K(P(10, 1), 1.0) == 0
    assert tfim.asymptotic_bound_large_K(P(10, 1), 0.0) == 0
    assert tfim.asymptotic_bound_large_K(P(10, 1), 0.5) == 2.5


def test_critical_K():
    kc = tfim.critical_K_at_zero_field(tol=1e-4)
    assert 1.35 <= kc <= 1.40
    assert kc == pytest.approx(1.37, abs=0.01)
    with pytest.raises(ValueError):
        tfim.critical_K_at_zero_field(tol=0)


def test_fixed_point_reaches_outer_branch():
    assert tfim.fixed_point_s(P(1.5, 0)) == pytest.approx(max(tfim.solve_s(P(1.5, 0)).branches), abs=1e-10)


# -- validity region -------------------------------------------------------------


@pytest.mark.xfail(strict=True, reason="the self-consistency map keeps s inside [-1, 1] at C = 1; "
                                       "no out-of-range root exists at K = 8")
def test_validity_scan_K8_invalid():
    row = tfim.validity_region_scan([P(8, 1)])[0]
    assert not row.mf_valid


def test_validity_scan_small_K():
    row = tfim.validity_region_scan([P(0.5, 1)])[0]
    assert row.mf_valid
    assert 0 <= row.bound < 0.1


def test_validity_scan_order_and_empty():
    grid = [P(k, c) for k in (0.5, 1, 2) for c in (0.5, 1)]
    rows = tfim.validity_region_scan(grid)
    assert [(r.K, r.C) for r in rows] == [(p.K, p.C) for p in grid]
    with pytest.raises(ValueError):
        tfim.validity_region_scan([])


def test_region_K_above_C_has_larger_bound():
    for scale in (2.0, 4.0, 8.0):
        above = tfim.bound_per_spin(P(scale, scale / 4)).bound
        below = tfim.bound_per_spin(P(scale / 4, scale)).bound
        assert above > below


def test_triviality_crossing_on_critical_line():
    # along C = K the bound per spin grows without limit, so it must cross ln 2
    kc = None
    lo, hi = 1.0, 50.0
    f = lambda K: tfim.bound_per_spin(P(K, K)).bound - LN2  # noqa: E731
    assert f(lo) < 0 < f(hi)
    for _ in range(60):
        kc = 0.5 * (lo + hi)
        lo, hi = (kc, hi) if f(kc) < 0 else (lo, kc)
    assert 5 < kc < 20
    assert tfim.crossing_K_for_triviality(1.0) is None
