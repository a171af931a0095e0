"""Transverse-field Ising chain in the thermodynamic limit.

beta H = -K sum sx_i sx_(i+1) - C sum sz_i. The exact free energy follows
from the free-fermion dispersion Lambda(phi) = sqrt(K^2 + C^2 - 2KC cos phi);
the trial state is the product of single-spin states in the field
(s K, C). All quantities here are per spin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .bound_core import (
    AverageMode,
    BoundReport,
    DimensionlessCouplings,
    MeanFieldSolution,
    _scan_roots,
    correlation_bound,
)
from .errors import InvalidN, NonConvergence, UnsupportedMode
from .numerics import fixed_point, log_cosh, mean_over_0_pi, solve_bracketed

LN2 = math.log(2.0)
QUAD_TOL = 1e-10
SCAN_INTERVALS = 2000
ROOT_TOL = 1e-13


def dispersion(p: DimensionlessCouplings, phi):
    """Mode energy Lambda(phi) in units of kT."""
    K, C = p.K, p.C
    lam2 = K * K + C * C - 2.0 * K * C * np.cos(phi)
    # at phi = 0 round-off can push (K - C)^2 slightly negative
    return np.sqrt(np.maximum(lam2, (K - C) ** 2))


def ln_Z_per_spin(p: DimensionlessCouplings, tol: float = QUAD_TOL) -> float:
    return LN2 + mean_over_0_pi(lambda w: log_cosh(dispersion(p, w)), tol=tol)


def beta_avg_H_per_spin(p: DimensionlessCouplings, tol: float = QUAD_TOL) -> float:
    def f(w):
        lam = dispersion(p, w)
        return lam * np.tanh(lam)

    return -mean_over_0_pi(f, tol=tol)


def _tanhc(x):
    """tanh(x)/x with the removable point x = 0 filled in."""
    x = np.asarray(x, dtype=float)
    out = np.ones_like(x)
    nz = np.abs(x) > 1e-8
    out[nz] = np.tanh(x[nz]) / x[nz]
    # 1 - x^2/3 is exact to double precision below 1e-8
    out[~nz] = 1.0 - x[~nz] ** 2 / 3.0
    return out


def sigma_z_mean(p: DimensionlessCouplings, tol: float = QUAD_TOL) -> float:
    """<sz> per spin, (1/pi) int (C - K cos w) tanh(Lambda)/Lambda dw."""

    def f(w):
        return (p.C - p.K * np.cos(w)) * _tanhc(dispersion(p, w))

    return mean_over_0_pi(f, tol=tol)


def finite_spectrum(p: DimensionlessCouplings, N: int) -> np.ndarray:
    """Fermion mode energies for k = -N/2 + 1, ..., N/2 (boundary term dropped)."""
    if N < 4 or N % 2:
        raise InvalidN(f"N must be an even integer >= 4, got {N}")
    k = np.arange(-N // 2 + 1, N // 2 + 1)
    return dispersion(p, 2.0 * math.pi * k / N)


def finite_ln_Z_per_spin(p: DimensionlessCouplings, N: int) -> float:
    """Riemann-sum analogue of :func:`ln_Z_per_spin` over the finite modes."""
    modes = finite_spectrum(p, N)
    return LN2 + float(np.mean(log_cosh(modes)))


def _mf_radius(p, s):
    return np.sqrt(p.C * p.C + np.asarray(s, dtype=float) ** 2 * p.K * p.K)


def ab_product(p: DimensionlessCouplings, s):
    """Product of the real mean-field eigenvector amplitudes a*b."""
    s = np.asarray(s, dtype=float)
    if p.K == 0:
        return np.zeros_like(s)
    cr = p.C + _mf_radius(p, s)
    # scale by the larger of K and C + R so tiny couplings do not underflow
    m = np.maximum(p.K, cr)
    k, u = p.K / m, cr / m
    return -k * u / (k * k + u * u)


def self_consistency_rhs(p: DimensionlessCouplings, s):
    """<sx> in the mean-field state, -2 ab tanh R.

    The expression depends on s only through s^2. At C = 0 the chain is
    symmetric under sx -> -sx, so there the map is continued as an odd
    function of s; otherwise it is used as written.
    """
    s = np.asarray(s, dtype=float)
    rhs = -2.0 * ab_product(p, s) * np.tanh(_mf_radius(p, s))
    if p.C == 0:
        rhs = np.sign(s) * rhs
    return rhs


def self_consistency_residual(p: DimensionlessCouplings, s):
    return np.asarray(s, dtype=float) - self_consistency_rhs(p, s)


def _branch_objective(p, s):
    # s-dependent part of bound_per_spin; the quadrature terms are common
    return float(log_cosh(_mf_radius(p, s))) - p.K * s * s


def solve_s(p: DimensionlessCouplings, n_scan: int = SCAN_INTERVALS) -> MeanFieldSolution:
    """All mean-field magnetizations s in [-1, 1] for the point ``p``.

    The principal branch minimizes the resulting bound; ties go to the
    larger |s|. ``out_of_range_detected`` is raised when the residual at
    s = +1 or s = -1 has the sign that forces a root beyond the Bloch
    ball, or when no root was bracketed at all.
    """
    res = lambda s: self_consistency_residual(p, s)  # noqa: E731
    branches = _scan_roots(res, -1.0, 1.0, n_scan, ROOT_TOL)
    r_hi = float(res(np.array([1.0]))[0])
    r_lo = float(res(np.array([-1.0]))[0])
    out_of_range = r_hi < 0 or r_lo > 0 or not branches
    if branches:
        principal = min(branches, key=lambda b: (round(_branch_objective(p, b), 12), -abs(b), -b))
    else:
        principal = 0.0
    return MeanFieldSolution(
        branches=tuple(branches),
        principal=float(principal),
        residuals=tuple(float(res(np.array([b]))[0]) for b in branches),
        converged=bool(branches),
        out_of_range_detected=bool(out_of_range),
    )


def mf_ln_Z_per_spin(p: DimensionlessCouplings, s) -> float:
    return LN2 + float(log_cosh(_mf_radius(p, s)))


class TFIMModel:
    """Per-spin adapter for :mod:`corrbound.bound_core`.

    Only the paper-faithful mode exists: the exact thermal <sx> of the
    chain is not available in closed form, so <sx>_H is replaced by s.
    """

    normalization = "per_spin"
    n_sites = 1
    modes = frozenset({AverageMode.PAPER_FAITHFUL})

    def ln_Z(self, p):
        return ln_Z_per_spin(p)

    def beta_avg_H(self, p):
        return beta_avg_H_per_spin(p)

    def ln_Z_mf(self, p, s):
        return mf_ln_Z_per_spin(p, s)

    def beta_avg_Hmf(self, p, s, mode):
        if mode is not AverageMode.PAPER_FAITHFUL:
            raise UnsupportedMode("thermodynamic-limit <sx> is only available as <sx> = s")
        return -p.K * s * s - p.C * sigma_z_mean(p)

    def mean_field(self, p, mode):
        return solve_s(p)


MODEL = TFIMModel()


def bound_per_spin(
    p: DimensionlessCouplings,
    mode: AverageMode = AverageMode.PAPER_FAITHFUL,
    solution: MeanFieldSolution | None = None,
) -> BoundReport:
    if solution is None:
        solution = solve_s(p)
    return correlation_bound(MODEL, p, solution.principal, mode, solution=solution)


def asymptotic_bound_large_K(p: DimensionlessCouplings, s: float) -> float:
    """Large-K limit K (s - s^2) of the per-spin bound at fixed C."""
    return p.K * (s - s * s)


def has_ordered_branch(K: float, zero_tol: float = 1e-8) -> bool:
    sol = solve_s(DimensionlessCouplings(K, 0.0))
    return any(abs(b) > zero_tol for b in sol.branches)


def critical_K_at_zero_field(tol: float = 1e-4, lo: float = 1.0, hi: float = 2.0,
                             max_iter: int = 200) -> float:
    """Smallest K at which a nonzero mean field exists for C = 0."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    if has_ordered_branch(lo) or not has_ordered_branch(hi):
        raise NonConvergence(f"existence threshold not bracketed by [{lo}, {hi}]")
    for _ in range(max_iter):
        if hi - lo <= tol:
            return 0.5 * (lo + hi)
        mid = 0.5 * (lo + hi)
        if has_ordered_branch(mid):
            hi = mid
        else:
            lo = mid
    raise NonConvergence("bisection on K did not reach the requested tolerance")


def fixed_point_s(p: DimensionlessCouplings, s0: float = 0.5, tol: float = 1e-12) -> float:
    """Iterate s <- <sx>_MF(s) from ``s0``; converges to the outermost stable branch."""
    return fixed_point(lambda s: float(self_consistency_rhs(p, s)), s0, tol=tol).root


@dataclass(frozen=True)
class ValidityRow:
    K: float
    C: float
    s: float
    bound: float
    mf_valid: bool
    trivial: bool


def validity_region_scan(grid: Iterable[DimensionlessCouplings]) -> list[ValidityRow]:
    rows = []
    for p in grid:
        rep = bound_per_spin(p)
        rows.append(ValidityRow(p.K, p.C, rep.s, rep.bound, rep.mf_valid, rep.trivial))
    if not rows:
        raise ValueError("empty grid")
    return rows


def crossing_K_for_triviality(C: float, K_lo: float = 0.0, K_hi: float = 50.0) -> float | None:
    """K at which the per-spin bound first exceeds ln 2 along fixed C, if any."""
    f = lambda K: bound_per_spin(DimensionlessCouplings(K, C)).bound - LN2  # noqa: E731
    if f(K_hi) <= 0:
        return None
    return solve_bracketed(f, K_lo, K_hi, tol=1e-6, polish=False).root
