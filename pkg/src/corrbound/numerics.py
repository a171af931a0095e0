"""Numerical kernel: quadrature on [0, pi], root finding, fixed points,
finite differences and entropy functionals on small density matrices.

Every routine here is a pure function of its arguments.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    BadBracket,
    DimensionMismatch,
    NonConvergence,
    NotDensityMatrix,
)

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
EIG_CLIP = 1e-12

_GL_ORDER = 20
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(_GL_ORDER)


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    est_error: float
    nodes_used: int


@dataclass(frozen=True)
class RootResult:
    root: float
    residual: float
    iterations: int
    converged: bool


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Dense Hermitian, unit-trace, positive semidefinite matrix.

    Validation happens on construction, so any instance can be handed to
    the entropy functions without further checks.
    """

    data: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.data)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise NotDensityMatrix(f"expected a square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise NotDensityMatrix("matrix has non-finite entries")
        herm = np.max(np.abs(a - a.conj().T))
        if herm > HERMITIAN_TOL:
            raise NotDensityMatrix(f"not Hermitian (max deviation {herm:.3e})")
        tr = np.trace(a).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise NotDensityMatrix(f"trace is {tr!r}, expected 1")
        lmin = np.linalg.eigvalsh(a).min()
        if lmin < -PSD_TOL:
            raise NotDensityMatrix(f"negative eigenvalue {lmin:.3e}")
        object.__setattr__(self, "data", a)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.data)


def as_density_matrix(rho) -> DensityMatrix:
    if isinstance(rho, DensityMatrix):
        return rho
    return DensityMatrix(np.asarray(rho))


# ---------------------------------------------------------------------------
# quadrature


def _eval(f, x: np.ndarray) -> np.ndarray:
    try:
        y = np.asarray(f(x), dtype=float)
    except TypeError:  # scalar-only callable
        y = None
    if y is None or y.shape != x.shape:
        y = np.array([float(f(xi)) for xi in x])
    return y


def _gl_panel(f, a: float, b: float) -> float:
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    y = _eval(f, mid + half * _GL_NODES)
    if not np.all(np.isfinite(y)):
        raise ValueError(f"integrand is not finite on [{a}, {b}]")
    return half * float(np.dot(_GL_WEIGHTS, y))


def integrate_0_pi(
    f: Callable[[np.ndarray], np.ndarray],
    tol: float = 1e-10,
    max_nodes: int = 2**16,
) -> QuadratureResult:
    """Integrate ``f`` over [0, pi] with adaptive composite Gauss-Legendre panels.

    ``f`` should accept a numpy array of abscissae; scalar-only callables
    work too but are evaluated point by point. Each panel is compared with
    the sum over its two halves; the panel with the largest discrepancy is
    split until the summed discrepancy drops below ``tol``. The endpoints
    are never evaluated, so integrands with removable singularities at
    0 or pi are fine.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")

    def refine(a, b):
        m = 0.5 * (a + b)
        left = _gl_panel(f, a, m)
        right = _gl_panel(f, m, b)
        return left, right

    nodes = 3 * _GL_ORDER
    whole = _gl_panel(f, 0.0, math.pi)
    left, right = refine(0.0, math.pi)
    err = abs(whole - (left + right))
    # heap entries: (-err, a, b, left, right)
    heap = [(-err, 0.0, math.pi, left, right)]
    total_err = err
    while total_err > tol:
        if nodes + 4 * _GL_ORDER > max_nodes:
            raise NonConvergence(
                f"quadrature error {total_err:.3e} above tol {tol:.1e} "
                f"after {nodes} nodes"
            )
        neg_err, a, b, left, right = heapq.heappop(heap)
        total_err += neg_err
        m = 0.5 * (a + b)
        for lo, hi, coarse in ((a, m, left), (m, b, right)):
            l2, r2 = refine(lo, hi)
            e = abs(coarse - (l2 + r2))
            heapq.heappush(heap, (-e, lo, hi, l2, r2))
            total_err += e
        nodes += 4 * _GL_ORDER
        # guard against round-off drift in the running sum
        total_err = max(total_err, 0.0)
    # sum small panels first for a reproducible, accurate total
    pieces = sorted(((e[1], e[3] + e[4]) for e in heap))
    value = math.fsum(v for _, v in pieces)
    est = math.fsum(-e[0] for e in heap)
    return QuadratureResult(value=value, est_error=est, nodes_used=nodes)


def mean_over_0_pi(f, tol: float = 1e-10) -> float:
    """(1/pi) times the integral of ``f`` over [0, pi]."""
    return integrate_0_pi(f, tol=tol * math.pi).value / math.pi


def log_cosh(x):
    """ln cosh x without overflow for large |x|."""
    a = np.abs(np.asarray(x, dtype=float))
    return a + np.log1p(np.exp(-2.0 * a)) - math.log(2.0)


# ---------------------------------------------------------------------------
# scalar equations


def solve_bracketed(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-12,
    polish: bool = True,
    fprime: Callable[[float], float] | None = None,
    max_iter: int = 500,
) -> RootResult:
    """Find a root of ``f`` in [lo, hi] by bisection with optional Newton steps.

    The bracket is maintained throughout, so Newton steps only ever speed
    things up: a step that leaves the bracket, or fails to halve the
    residual, is replaced by a bisection step. Iteration stops once
    ``|f(x)| <= tol`` or the bracket is narrower than ``tol``.
    """
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    flo = float(f(lo))
    fhi = float(f(hi))
    if flo * fhi > 0:
        raise BadBracket(f"f({lo}) = {flo:.3e} and f({hi}) = {fhi:.3e} have the same sign")
    if flo == 0.0:
        return RootResult(lo, 0.0, 0, True)
    if fhi == 0.0:
        return RootResult(hi, 0.0, 0, True)

    a, b, fa = lo, hi, flo
    x = 0.5 * (a + b)
    fx = float(f(x))
    for it in range(1, max_iter + 1):
        if fx == 0.0 or abs(fx) <= tol:
            return RootResult(x, fx, it, True)
        if fa * fx < 0:
            b = x
        else:
            a, fa = x, fx
        if b - a <= tol:
            xm = 0.5 * (a + b)
            fm = float(f(xm))
            return RootResult(xm, fm, it, True)

        x_new = None
        if polish:
            if fprime is not None:
                d = float(fprime(x))
            else:
                dx = 1e-7 * max(1.0, abs(x))
                d = (float(f(x + dx)) - float(f(x - dx))) / (2 * dx)
            if d != 0.0 and math.isfinite(d):
                cand = x - fx / d
                if a < cand < b:
                    x_new = cand
        if x_new is None:
            x_new = 0.5 * (a + b)
        f_new = float(f(x_new))
        if polish and abs(f_new) > 0.5 * abs(fx) and x_new != 0.5 * (a + b):
            # Newton stalled; fall back to the midpoint of the updated bracket
            x_new = 0.5 * (a + b)
            f_new = float(f(x_new))
        x, fx = x_new, f_new
    return RootResult(x, fx, max_iter, abs(fx) <= tol)


def fixed_point(
    g: Callable[[float], float],
    x0: float,
    damping: float = 1.0,
    tol: float = 1e-12,
    max_iter: int = 10_000,
) -> RootResult:
    """Damped iteration x <- (1 - damping) x + damping g(x)."""
    if not 0.0 < damping <= 1.0:
        raise ValueError("damping must lie in (0, 1]")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    x = float(x0)
    for it in range(max_iter + 1):
        gx = float(g(x))
        r = x - gx
        if abs(r) <= tol:
            return RootResult(x, r, it, True)
        if it == max_iter:
            break
        x = (1.0 - damping) * x + damping * gx
    raise NonConvergence(f"fixed point not reached in {max_iter} iterations (last residual {r:.3e})")


def first_derivative(f: Callable[[float], float], x: float, h: float) -> float:
    """Central 5-point estimate of f'(x)."""
    return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h)


def second_derivative(f: Callable[[float], float], x: float, h: float) -> float:
    """Central 5-point estimate of f''(x), error O(h^4)."""
    if not h > 0:
        raise ValueError("h must be positive")
    f0 = f(x)
    near = (f(x - h) - f0) + (f(x + h) - f0)
    far = (f(x - 2 * h) - f0) + (f(x + 2 * h) - f0)
    return (16 * near - far) / (12 * h * h)


# ---------------------------------------------------------------------------
# entropies


def _xlogx(p: np.ndarray) -> np.ndarray:
    # x ln x -> 0 continuously, so tiny eigenvalues are kept rather than cut;
    # only negative round-off is clipped
    p = np.clip(p, 0.0, 1.0)
    out = np.zeros_like(p)
    mask = p > 0.0
    out[mask] = p[mask] * np.log(p[mask])
    return out


def von_neumann_entropy(rho) -> float:
    """S(rho) = -tr rho ln rho in nats."""
    rho = as_density_matrix(rho)
    return float(-np.sum(_xlogx(rho.eigenvalues())))


def relative_entropy(sigma, rho) -> float:
    """S(sigma || rho) = tr sigma (ln sigma - ln rho) in nats.

    Returns ``math.inf`` when sigma has weight outside the support of rho.
    """
    sigma = as_density_matrix(sigma)
    rho = as_density_matrix(rho)
    if sigma.dim != rho.dim:
        raise DimensionMismatch(f"dimensions differ: {sigma.dim} vs {rho.dim}")
    mu, v = np.linalg.eigh(rho.data)
    # diagonal of sigma in rho's eigenbasis
    w = np.real(np.einsum("ij,ik,kj->j", v.conj(), sigma.data, v))
    support = mu > EIG_CLIP
    if np.sum(w[~support]) > PSD_TOL:
        return math.inf
    cross = float(np.sum(w[support] * np.log(mu[support])))
    neg_entropy = float(np.sum(_xlogx(sigma.eigenvalues())))
    value = neg_entropy - cross
    # round-off only; a genuinely negative value would signal a bug upstream
    return 0.0 if -1e-13 < value < 0.0 else value


def relative_entropy_to_product(rho, factors: Sequence) -> float:
    """S(rho || sigma_1 x ... x sigma_n) = -S(rho) - sum_i tr rho_i ln sigma_i.

    Equivalent to :func:`relative_entropy` against the assembled product
    state, but only ever takes logarithms of the small local factors, so
    it stays accurate when the product state has tiny eigenvalues.
    """
    rho = as_density_matrix(rho)
    factors = [as_density_matrix(f) for f in factors]
    dims = [f.dim for f in factors]
    if int(np.prod(dims)) != rho.dim:
        raise DimensionMismatch(f"factor dims {dims} do not multiply to {rho.dim}")
    cross = 0.0
    for i, sig in enumerate(factors):
        local = partial_trace(rho, dims, i)
        mu, v = np.linalg.eigh(sig.data)
        w = np.real(np.einsum("ij,ik,kj->j", v.conj(), local.data, v))
        support = mu > EIG_CLIP
        if np.sum(w[~support]) > PSD_TOL:
            return math.inf
        cross += float(np.sum(w[support] * np.log(mu[support])))
    value = -von_neumann_entropy(rho) - cross
    return 0.0 if -1e-13 < value < 0.0 else value


def partial_trace(rho, dims: Sequence[int], keep) -> DensityMatrix:
    """Reduced state on the subsystem(s) ``keep`` (an index or list of indices)."""
    rho = as_density_matrix(rho)
    dims = [int(d) for d in dims]
    if int(np.prod(dims)) != rho.dim:
        raise DimensionMismatch(f"local dims {dims} do not multiply to {rho.dim}")
    keep_list = [keep] if np.isscalar(keep) else list(keep)
    n = len(dims)
    for k in keep_list:
        if not 0 <= k < n:
            raise DimensionMismatch(f"site {k} out of range for {n} subsystems")
    keep_list = sorted(set(keep_list))
    traced = [i for i in range(n) if i not in keep_list]
    t = rho.data.reshape(dims + dims)
    # contract traced axes pairwise, highest first so indices stay valid
    for i in sorted(traced, reverse=True):
        nrem = t.ndim // 2
        t = np.trace(t, axis1=i, axis2=i + nrem)
    d = int(np.prod([dims[k] for k in keep_list]))
    return DensityMatrix(t.reshape(d, d))
