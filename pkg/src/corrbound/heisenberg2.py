"""Two antiferromagnetically coupled qubits in a uniform field.

beta H = C (sz_1 + sz_2) + K sigma_1 . sigma_2, so the four levels are the
triplet (2C + K, K, -2C + K) and the singlet (-3K). Closed forms are used
wherever they exist; 4x4 matrices only where a trace is the definition.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .bound_core import (
    AverageMode,
    BoundReport,
    DimensionlessCouplings,
    MeanFieldSolution,
    correlation_bound,
)
from .errors import InternalInconsistency
from .numerics import (
    DensityMatrix,
    log_cosh,
    partial_trace,
    solve_bracketed,
    von_neumann_entropy,
)

LN2 = math.log(2.0)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)

# product basis |uu>, |ud>, |du>, |dd> with sz|u> = +|u>
_S2 = 1.0 / math.sqrt(2.0)
EIGENVECTORS = np.array(
    [
        [1, 0, 0, 0],  # triplet, both up
        [0, _S2, _S2, 0],  # triplet, m = 0
        [0, 0, 0, 1],  # triplet, both down
        [0, _S2, -_S2, 0],  # singlet
    ],
    dtype=complex,
)
LEVEL_NAMES = ("triplet_up", "triplet_zero", "triplet_down", "singlet")


class MeanFieldAnsatz3(NamedTuple):
    s_x: float = 0.0
    s_y: float = 0.0
    s_z: float = 0.0

    def check(self) -> "MeanFieldAnsatz3":
        if any(abs(v) > 1.0 for v in self) or sum(v * v for v in self) > 1.0 + 1e-9:
            raise ValueError(f"mean spin {tuple(self)} outside the Bloch ball")
        return self


class HeisenbergThermo(NamedTuple):
    beta_energies: np.ndarray
    ln_z: float
    populations: np.ndarray


def _ansatz(s) -> MeanFieldAnsatz3:
    if isinstance(s, MeanFieldAnsatz3):
        return s
    if np.ndim(s) == 0:
        return MeanFieldAnsatz3(0.0, 0.0, float(s))
    return MeanFieldAnsatz3(*map(float, s))


def spectrum(p: DimensionlessCouplings) -> np.ndarray:
    """beta-energies in the order of :data:`LEVEL_NAMES`."""
    K, C = p.K, p.C
    return np.array([2 * C + K, K, -2 * C + K, -3 * K])


def ln_Z(p: DimensionlessCouplings) -> float:
    """ln[2 (e^-K cosh 2C + e^K cosh 2K)], evaluated in log space."""
    K, C = p.K, p.C
    return LN2 + float(np.logaddexp(-K + log_cosh(2 * C), K + log_cosh(2 * K)))


def thermo(p: DimensionlessCouplings) -> HeisenbergThermo:
    e = spectrum(p)
    lz = ln_Z(p)
    return HeisenbergThermo(e, lz, np.exp(-e - lz))


def thermal_state(p: DimensionlessCouplings) -> DensityMatrix:
    pops = thermo(p).populations
    rho = np.einsum("i,ij,ik->jk", pops, EIGENVECTORS, EIGENVECTORS.conj())
    return DensityMatrix(rho)


def beta_hamiltonian(p: DimensionlessCouplings) -> np.ndarray:
    """beta H as a 4x4 matrix, assembled from its spectral decomposition."""
    e = spectrum(p)
    return np.einsum("i,ij,ik->jk", e, EIGENVECTORS, EIGENVECTORS.conj())


def mutual_information_closed_form(p: DimensionlessCouplings) -> float:
    """I = sum p ln p - 2 sum q ln q from the populations alone."""
    pops = thermo(p).populations
    p_uu, p_t0, p_dd, p_s = pops
    q_up = p_uu + 0.5 * (p_t0 + p_s)
    q_dn = p_dd + 0.5 * (p_t0 + p_s)

    def xlogx(x):
        return x * math.log(x) if x > 0 else 0.0

    return sum(xlogx(x) for x in pops) - 2 * (xlogx(q_up) + xlogx(q_dn))


def mutual_information(p: DimensionlessCouplings, check_tol: float = 1e-9) -> float:
    """2 S(rho_1) - S(rho) in nats, cross-checked against the closed form."""
    rho = thermal_state(p)
    s1 = von_neumann_entropy(partial_trace(rho, [2, 2], 0))
    s2 = von_neumann_entropy(partial_trace(rho, [2, 2], 1))
    value = s1 + s2 - von_neumann_entropy(rho)
    closed = mutual_information_closed_form(p)
    if abs(value - closed) > check_tol:
        raise InternalInconsistency(
            f"mutual information routes disagree at {p}: {value!r} vs {closed!r}"
        )
    return value


def mf_ln_Z(p: DimensionlessCouplings, s) -> float:
    """2 ln(2 cosh R) with R = sqrt((C + s_z K)^2 + (s_x^2 + s_y^2) K^2)."""
    a = _ansatz(s)
    R = math.hypot(p.C + a.s_z * p.K, math.hypot(a.s_x, a.s_y) * p.K)
    return 2.0 * (LN2 + float(log_cosh(R)))


def mf_single_site_hamiltonian(p: DimensionlessCouplings, s) -> np.ndarray:
    a = _ansatz(s)
    return (p.C + p.K * a.s_z) * SZ + p.K * a.s_x * SX + p.K * a.s_y * SY


def mf_hamiltonian(p: DimensionlessCouplings, s) -> np.ndarray:
    h = mf_single_site_hamiltonian(p, s)
    return np.kron(h, I2) + np.kron(I2, h)


def mf_state(p: DimensionlessCouplings, s) -> DensityMatrix:
    h = mf_single_site_hamiltonian(p, s)
    w, v = np.linalg.eigh(h)
    w = np.exp(-(w - w.min()))
    r1 = (v * (w / w.sum())) @ v.conj().T
    return DensityMatrix(np.kron(r1, r1))


def beta_avg_H(p: DimensionlessCouplings) -> float:
    th = thermo(p)
    return float(np.dot(th.populations, th.beta_energies))


def sz_mean(p: DimensionlessCouplings, mode: AverageMode = AverageMode.EXACT) -> float:
    """Single-spin mean field s_z.

    PAPER_FAITHFUL uses -e^-K sinh 2C / Z, which is half the thermal value;
    EXACT takes tr(sz x 1 rho); SELF_CONSISTENT solves s = -tanh(C + K s).
    """
    K, C = p.K, p.C
    if mode is AverageMode.PAPER_FAITHFUL:
        # e^-K sinh(2C) / Z with the exponentials folded into the log
        if C == 0:
            return 0.0
        mag = math.exp(-K + abs(2 * C) + math.log1p(-math.exp(-4 * abs(C))) - LN2 - ln_Z(p))
        return -math.copysign(mag, C)
    if mode is AverageMode.EXACT:
        rho = thermal_state(p).data
        return float(np.real(np.trace(np.kron(SZ, I2) @ rho)))
    if mode is AverageMode.SELF_CONSISTENT:
        r = solve_bracketed(lambda s: s + math.tanh(C + K * s), -1.0, 1.0, tol=1e-14)
        return r.root
    raise ValueError(mode)


def beta_avg_Hmf(p: DimensionlessCouplings, s, mode: AverageMode = AverageMode.EXACT) -> float:
    """beta <H_MF> in the true thermal state.

    PAPER_FAITHFUL reproduces -(2/Z)(C + K s_z) e^-K sinh 2C, which carries
    the same factor 1/2 as the paper-faithful s_z. The other modes take the
    trace exactly; SELF_CONSISTENT only changes how s was obtained.
    """
    a = _ansatz(s)
    if mode is AverageMode.PAPER_FAITHFUL:
        if a.s_x or a.s_y:
            raise ValueError("the closed form assumes s_x = s_y = 0")
        return (p.C + p.K * a.s_z) * sz_mean(p, AverageMode.PAPER_FAITHFUL) * 2.0
    rho = thermal_state(p).data
    return float(np.real(np.trace(mf_hamiltonian(p, a) @ rho)))


def beta_avg_H_in_mf(p: DimensionlessCouplings, s) -> float:
    return float(np.real(np.trace(beta_hamiltonian(p) @ mf_state(p, s).data)))


def beta_avg_Hmf_in_mf(p: DimensionlessCouplings, s) -> float:
    return float(np.real(np.trace(mf_hamiltonian(p, s) @ mf_state(p, s).data)))


def level_crossing_field(K) -> float:
    """Field C* = 2K where the fully polarized triplet meets the singlet."""
    K = K.K if isinstance(K, DimensionlessCouplings) else float(K)
    if not K > 0:
        raise ValueError("level crossing needs K > 0")
    return 2.0 * K


def ground_level(p: DimensionlessCouplings) -> str:
    e = spectrum(p)
    return LEVEL_NAMES[int(np.argmin(e))]


class Heisenberg2Model:
    """Adapter exposing this module to :mod:`corrbound.bound_core`."""

    normalization = "total"
    n_sites = 2
    modes = frozenset(AverageMode)

    def ln_Z(self, p):
        return ln_Z(p)

    def beta_avg_H(self, p):
        return beta_avg_H(p)

    def ln_Z_mf(self, p, s):
        return mf_ln_Z(p, s)

    def beta_avg_Hmf(self, p, s, mode):
        return beta_avg_Hmf(p, s, mode)

    def beta_avg_H_in_mf(self, p, s):
        return beta_avg_H_in_mf(p, s)

    def beta_avg_Hmf_in_mf(self, p, s):
        return beta_avg_Hmf_in_mf(p, s)

    def mean_field(self, p, mode):
        s = sz_mean(p, mode)
        return MeanFieldSolution(branches=(s,), principal=s, residuals=(0.0,))


MODEL = Heisenberg2Model()


def bound(p: DimensionlessCouplings, mode: AverageMode = AverageMode.EXACT) -> BoundReport:
    sol = MODEL.mean_field(p, mode)
    return correlation_bound(MODEL, p, sol.principal, mode, solution=sol)
