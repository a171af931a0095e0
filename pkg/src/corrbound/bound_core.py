"""Relative-entropy bound on total correlations of a thermal state.

For a thermal state rho = exp(-H)/Z (energies in units of kT) and any
product trial state rho_MF = exp(-H_MF)/Z_MF,

    S(rho || rho_MF) = ln Z_MF - ln Z + <H_MF - H>_H >= I(rho) >= E(rho),

so the right-hand side is an upper bound on the multiparty mutual
information and hence on the relative entropy of entanglement. Models plug
into :func:`correlation_bound` through the small duck-typed interface
described by :class:`ThermalModel`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Any, Protocol

import numpy as np

from .errors import UnsupportedMode
from .numerics import first_derivative, log_cosh, second_derivative, solve_bracketed

LN2 = math.log(2.0)


@dataclass(frozen=True)
class DimensionlessCouplings:
    """Coupling point (K, C) = (J / 2kT, B / kT)."""

    K: float
    C: float

    def __post_init__(self):
        K, C = float(self.K), float(self.C)
        if not (math.isfinite(K) and math.isfinite(C)):
            raise ValueError(f"couplings must be finite, got K={K}, C={C}")
        if K < 0 or C < 0:
            raise ValueError(f"couplings must be non-negative, got K={K}, C={C}")
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "C", C)

    @classmethod
    def unchecked(cls, K: float, C: float) -> "DimensionlessCouplings":
        """Build a point outside the physical quadrant.

        Only for finite-difference stencils and symmetry checks, which need
        to step across C = 0.
        """
        obj = object.__new__(cls)
        object.__setattr__(obj, "K", float(K))
        object.__setattr__(obj, "C", float(C))
        return obj

    def with_C(self, C: float) -> "DimensionlessCouplings":
        return DimensionlessCouplings.unchecked(self.K, C)

    @classmethod
    def from_physical(cls, J: float, B: float, T: float) -> "DimensionlessCouplings":
        """Convert (J, B, T) with k_B = 1."""
        if not T > 0:
            raise ValueError("temperature must be positive")
        return cls(J / (2.0 * T), B / T)


class AverageMode(enum.Enum):
    PAPER_FAITHFUL = "paper"
    EXACT = "exact"
    SELF_CONSISTENT = "self-consistent"

    @classmethod
    def parse(cls, text: str) -> "AverageMode":
        key = text.strip().lower().replace("_", "-")
        aliases = {"paperfaithful": "paper", "paper-faithful": "paper",
                   "selfconsistent": "self-consistent"}
        key = aliases.get(key, key)
        for m in cls:
            if m.value == key:
                return m
        raise ValueError(f"unknown averaging mode {text!r}")


@dataclass(frozen=True)
class MeanFieldSolution:
    """Roots of a mean-field self-consistency equation."""

    branches: tuple[float, ...]
    principal: float
    residuals: tuple[float, ...] = ()
    converged: bool = True
    out_of_range_detected: bool = False

    @property
    def valid(self) -> bool:
        return self.converged and not self.out_of_range_detected and abs(self.principal) <= 1.0


@dataclass(frozen=True)
class BoundReport:
    params: DimensionlessCouplings
    s: Any
    ln_z_mf: float
    ln_z: float
    beta_gap: float
    bound: float
    normalization: str
    trivial: bool
    mf_valid: bool
    mode: AverageMode
    n_sites: int = 1

    @property
    def per_spin(self) -> float:
        return self.bound if self.normalization == "per_spin" else self.bound / self.n_sites


class ThermalModel(Protocol):
    """What :func:`correlation_bound` needs from a model.

    All energies are dimensionless (multiplied by beta). ``normalization``
    is ``"total"`` or ``"per_spin"`` and applies to every callable.
    Models that can also average in the mean-field state provide
    ``beta_avg_H_in_mf`` and ``beta_avg_Hmf_in_mf``; these are optional
    and only needed by :func:`bogoliubov_sandwich`.
    """

    normalization: str
    n_sites: int
    modes: frozenset

    def ln_Z(self, p: DimensionlessCouplings) -> float: ...

    def beta_avg_H(self, p: DimensionlessCouplings) -> float: ...

    def ln_Z_mf(self, p: DimensionlessCouplings, s) -> float: ...

    def beta_avg_Hmf(self, p: DimensionlessCouplings, s, mode: AverageMode) -> float: ...

    def mean_field(self, p: DimensionlessCouplings, mode: AverageMode) -> MeanFieldSolution: ...


def _s_magnitude(s) -> float:
    return float(np.linalg.norm(np.atleast_1d(np.asarray(s, dtype=float))))


def correlation_bound(
    model: ThermalModel,
    p: DimensionlessCouplings,
    s,
    mode: AverageMode,
    solution: MeanFieldSolution | None = None,
) -> BoundReport:
    """Assemble ln Z_MF - ln Z + beta<H_MF - H>_H for trial field ``s``.

    Large values are flagged as trivial (per-spin value above ln 2) rather
    than rejected. ``solution`` carries solver metadata into ``mf_valid``.
    """
    if mode not in model.modes:
        raise UnsupportedMode(f"{type(model).__name__} does not support {mode.value!r} averaging")
    ln_z_mf = float(model.ln_Z_mf(p, s))
    ln_z = float(model.ln_Z(p))
    beta_gap = float(model.beta_avg_Hmf(p, s, mode)) - float(model.beta_avg_H(p))
    bound = ln_z_mf - ln_z + beta_gap
    n = 1 if model.normalization == "per_spin" else model.n_sites
    mf_valid = _s_magnitude(s) <= 1.0 + 1e-12
    if solution is not None:
        mf_valid = mf_valid and solution.converged and not solution.out_of_range_detected
    return BoundReport(
        params=p,
        s=s,
        ln_z_mf=ln_z_mf,
        ln_z=ln_z,
        beta_gap=beta_gap,
        bound=bound,
        normalization=model.normalization,
        trivial=bound / n > LN2,
        mf_valid=bool(mf_valid),
        mode=mode,
        n_sites=model.n_sites,
    )


def evaluate_bound(model: ThermalModel, p: DimensionlessCouplings, mode: AverageMode) -> BoundReport:
    """Solve the model's mean field at ``p`` and assemble the bound."""
    sol = model.mean_field(p, mode)
    return correlation_bound(model, p, sol.principal, mode, solution=sol)


def bogoliubov_sandwich(model: ThermalModel, p: DimensionlessCouplings, s) -> tuple[float, float, float]:
    """Return (<H - H_MF>_H, ln Z_MF - ln Z, <H - H_MF>_{H_MF}).

    Positivity of both relative entropies between rho and rho_MF forces
    lower <= middle <= upper.
    """
    if not (hasattr(model, "beta_avg_H_in_mf") and hasattr(model, "beta_avg_Hmf_in_mf")):
        raise UnsupportedMode(f"{type(model).__name__} cannot average in the mean-field state")
    if AverageMode.EXACT not in model.modes:
        raise UnsupportedMode(f"{type(model).__name__} has no exact thermal averages")
    lower = model.beta_avg_H(p) - model.beta_avg_Hmf(p, s, AverageMode.EXACT)
    middle = model.ln_Z_mf(p, s) - model.ln_Z(p)
    upper = model.beta_avg_H_in_mf(p, s) - model.beta_avg_Hmf_in_mf(p, s)
    return float(lower), float(middle), float(upper)


def susceptibility_gap(model: ThermalModel, p: DimensionlessCouplings, h: float, mode: AverageMode) -> float:
    """Second C-derivative of the bound plus that of beta<H_MF - H>_H.

    This is the susceptibility difference between the mean-field and the
    exact treatment when the trial state is the closest separable one.
    The mean field is re-solved at every stencil point.
    """

    def report(C):
        return evaluate_bound(model, p.with_C(C), mode)

    cache: dict[float, BoundReport] = {}

    def get(C):
        if C not in cache:
            cache[C] = report(C)
        return cache[C]

    d2_bound = second_derivative(lambda C: get(C).bound, p.C, h)
    d2_gap = second_derivative(lambda C: get(C).beta_gap, p.C, h)
    return d2_bound + d2_gap


def fluctuation_validity(model: ThermalModel, p: DimensionlessCouplings, h: float = 1e-3,
                         zero_tol: float = 1e-9) -> float:
    """kT chi / M^2 computed as (d^2 ln Z/dC^2) / (d ln Z/dC)^2.

    Small values mean fluctuations are small and mean field is trustworthy.
    Returns ``math.inf`` when the magnetization vanishes.
    """

    def lnz(C):
        return model.ln_Z(p.with_C(C))

    m = first_derivative(lnz, p.C, h)
    if abs(m) <= zero_tol:
        return math.inf
    chi = second_derivative(lnz, p.C, h)
    return chi / (m * m)


# ---------------------------------------------------------------------------
# classical 1D Ising warm-up


def _scan_roots(residual, lo: float, hi: float, n: int, tol: float) -> list[float]:
    """All sign changes of a vectorized ``residual`` on [lo, hi], bisected."""
    grid = np.linspace(lo, hi, n + 1)
    vals = np.asarray(residual(grid), dtype=float)
    roots: list[float] = []
    for i in range(n):
        a, b = grid[i], grid[i + 1]
        fa, fb = vals[i], vals[i + 1]
        if fa == 0.0:
            roots.append(float(a))
        elif fa * fb < 0:
            r = solve_bracketed(lambda x: float(residual(np.array([x]))[0]), a, b, tol=tol)
            roots.append(float(r.root))
    if vals[-1] == 0.0:
        roots.append(float(grid[-1]))
    out: list[float] = []
    for r in sorted(roots):
        if not out or r - out[-1] > 10 * tol:
            out.append(r)
    return out


def classical_ising_residual(p: DimensionlessCouplings, s):
    return np.asarray(s) - np.tanh(p.K * np.asarray(s) + p.C)


def classical_ising_mf_solve(p: DimensionlessCouplings, n_scan: int = 2000,
                             tol: float = 1e-13) -> MeanFieldSolution:
    """All roots of s = tanh(K s + C) in [-1, 1]; principal is the largest."""
    branches = _scan_roots(lambda s: classical_ising_residual(p, s), -1.0, 1.0, n_scan, tol)
    residuals = tuple(float(classical_ising_residual(p, b)) for b in branches)
    principal = max(branches) if branches else 0.0
    return MeanFieldSolution(
        branches=tuple(branches),
        principal=principal,
        residuals=residuals,
        converged=bool(branches),
        out_of_range_detected=False,
    )


def classical_ising_has_ordered_branch(K: float, n_scan: int = 2000, zero_tol: float = 1e-8) -> bool:
    sol = classical_ising_mf_solve(DimensionlessCouplings(K, 0.0), n_scan=n_scan)
    return any(abs(b) > zero_tol for b in sol.branches)


class ClassicalIsingModel:
    """Classical chain beta H = -K sum s_i s_(i+1) - C sum s_i, per spin.

    The exact free energy comes from the 2x2 transfer matrix; the trial
    state is the product measure with field K s + C.
    """

    normalization = "per_spin"
    n_sites = 1
    modes = frozenset({AverageMode.EXACT})

    @staticmethod
    def _q(p):
        return math.sqrt(math.sinh(p.C) ** 2 + math.exp(-4.0 * p.K))

    def ln_Z(self, p):
        return p.K + math.log(math.cosh(p.C) + self._q(p))

    def magnetization(self, p):
        return math.sinh(p.C) / self._q(p)

    def bond_correlation(self, p):
        q = self._q(p)
        return 1.0 - 2.0 * math.exp(-4.0 * p.K) / (q * (math.cosh(p.C) + q))

    def beta_avg_H(self, p):
        return -p.K * self.bond_correlation(p) - p.C * self.magnetization(p)

    def ln_Z_mf(self, p, s):
        return LN2 + float(log_cosh(p.K * s + p.C))

    def beta_avg_Hmf(self, p, s, mode):
        return -(p.K * s + p.C) * self.magnetization(p)

    def mean_field(self, p, mode):
        return classical_ising_mf_solve(p)
