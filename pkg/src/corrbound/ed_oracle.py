"""Brute-force exact diagonalization for short spin chains (N <= 12).

Hamiltonians are built directly in units of kT from Kronecker products,
so thermal states need no separate temperature. Everything here is dense
and slow on purpose; it exists to check the closed forms elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import logsumexp

from . import tfim
from .bound_core import AverageMode, DimensionlessCouplings, MeanFieldSolution
from .errors import DimensionMismatch, DimensionTooLarge, InternalInconsistency
from .numerics import (
    DensityMatrix,
    partial_trace,
    relative_entropy_to_product,
    von_neumann_entropy,
)

MAX_SITES = 12
IDENTITY_TOL = 1e-8

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class ChainSpec:
    n_sites: int
    model: str  # "tfim" | "heisenberg"
    boundary: str  # "open" | "periodic"
    couplings: DimensionlessCouplings

    def __post_init__(self):
        if self.model not in ("tfim", "heisenberg"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.boundary not in ("open", "periodic"):
            raise ValueError(f"unknown boundary {self.boundary!r}")
        if self.n_sites < 1:
            raise ValueError("need at least one site")
        if self.n_sites > MAX_SITES:
            raise DimensionTooLarge(f"{self.n_sites} sites exceeds the limit of {MAX_SITES}")
        if self.boundary == "periodic" and self.n_sites < 3:
            raise ValueError("periodic chains need at least 3 sites")

    @property
    def dim(self) -> int:
        return 2**self.n_sites

    def bonds(self) -> list[tuple[int, int]]:
        n = self.n_sites
        out = [(i, i + 1) for i in range(n - 1)]
        if self.boundary == "periodic":
            out.append((n - 1, 0))
        return out


class ThermalState(NamedTuple):
    rho: DensityMatrix
    ln_z: float


class BoundTerms(NamedTuple):
    ln_z_mf: float
    ln_z: float
    beta_gap: float
    relative_entropy_direct: float

    @property
    def assembled(self) -> float:
        return self.ln_z_mf - self.ln_z + self.beta_gap


def site_operator(op: np.ndarray, site: int, n: int) -> np.ndarray:
    mats = [np.eye(2, dtype=op.dtype)] * n
    mats[site] = op
    return reduce(np.kron, mats)


def bond_operator(op: np.ndarray, i: int, j: int, n: int) -> np.ndarray:
    """op_i op_j as one Kronecker product (no dense matmul)."""
    mats = [np.eye(2, dtype=op.dtype)] * n
    mats[i] = op
    mats[j] = op
    return reduce(np.kron, mats)


def _popcount(idx: np.ndarray) -> np.ndarray:
    return np.array([bin(int(k)).count("1") for k in idx])


def _field_sum(op, n):
    return sum(site_operator(op, i, n) for i in range(n))


def build_hamiltonian(spec: ChainSpec) -> np.ndarray:
    """beta H for the chain.

    tfim:       -K sum sx_i sx_j - C sum sz_i
    heisenberg:  C sum sz_i + K sum sigma_i . sigma_j
    """
    n = spec.n_sites
    K, C = spec.couplings.K, spec.couplings.C
    if spec.model == "tfim":
        # sx_i sx_j flips bits i and j; sz is diagonal. Site 0 is the leading bit.
        idx = np.arange(spec.dim)
        H = np.zeros((spec.dim, spec.dim))
        for i, j in spec.bonds():
            H[idx, idx ^ ((1 << (n - 1 - i)) | (1 << (n - 1 - j)))] -= K
        H[idx, idx] -= C * (n - 2 * _popcount(idx))
        return H
    H = np.zeros((spec.dim, spec.dim), dtype=complex)
    for i, j in spec.bonds():
        for op in (SX, SY, SZ):
            H += K * bond_operator(op, i, j, n)
    H += C * _field_sum(SZ, n)
    return 0.5 * (H + H.conj().T)


def _mf_site_term(spec: ChainSpec, s) -> np.ndarray:
    K, C = spec.couplings.K, spec.couplings.C
    if spec.model == "tfim":
        return -float(s) * K * SX - C * SZ
    sx, sy, sz = (0.0, 0.0, float(s)) if np.ndim(s) == 0 else map(float, s)
    return (C + K * sz) * SZ + K * sx * SX + K * sy * SY


def mean_field_hamiltonian(spec: ChainSpec, s) -> np.ndarray:
    """Sum of identical single-site mean-field terms.

    tfim: -s K sx - C sz per site. heisenberg: (C + K s_z) sz + K s_x sx
    + K s_y sy per site, with ``s`` either s_z or (s_x, s_y, s_z).
    """
    H = _field_sum(_mf_site_term(spec, s), spec.n_sites)
    return H.real.astype(float) if spec.model == "tfim" else H


def thermal_density(H_beta: np.ndarray) -> ThermalState:
    """exp(-H)/Z from the eigendecomposition, with ln Z via logsumexp."""
    H_beta = np.asarray(H_beta)
    if np.max(np.abs(H_beta - H_beta.conj().T)) > 1e-12:
        raise ValueError("Hamiltonian is not Hermitian")
    e, v = np.linalg.eigh(H_beta)
    ln_z = float(logsumexp(-e))
    w = np.exp(-e - ln_z)
    rho = (v * w) @ v.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return ThermalState(DensityMatrix(rho), ln_z)


def ln_partition(H_beta: np.ndarray) -> float:
    return float(logsumexp(-np.linalg.eigvalsh(H_beta)))


def _tfim_ln_partition(H_beta: np.ndarray, n: int) -> float:
    """ln Z using the spin-flip parity sectors, which the tfim chain never mixes."""
    odd = _popcount(np.arange(2**n)) % 2 == 1
    e = [np.linalg.eigvalsh(H_beta[np.ix_(m, m)]) for m in (odd, ~odd)]
    return float(logsumexp(-np.concatenate(e)))


def multiparty_mutual_info(rho, n_sites: int) -> float:
    """sum_i S(rho_i) - S(rho) over single sites."""
    rho = rho if isinstance(rho, DensityMatrix) else DensityMatrix(np.asarray(rho))
    if rho.dim != 2**n_sites:
        raise DimensionMismatch(f"state of dimension {rho.dim} is not {n_sites} qubits")
    dims = [2] * n_sites
    singles = sum(von_neumann_entropy(partial_trace(rho, dims, i)) for i in range(n_sites))
    return singles - von_neumann_entropy(rho)


def single_site_mean(rho: DensityMatrix, op: np.ndarray, site: int, n: int) -> float:
    return float(np.real(np.trace(site_operator(op, site, n) @ rho.data)))


def exact_bound_terms(spec: ChainSpec, s) -> BoundTerms:
    """ln Z_MF, ln Z, <H_MF - H>_H and S(rho || rho_MF) by direct traces.

    Raises InternalInconsistency if ln Z_MF - ln Z + <H_MF - H>_H differs
    from the relative entropy evaluated from its definition. The direct
    route takes logarithms of the single-site mean-field states, never of
    Hamiltonians or partition functions.
    """
    H = build_hamiltonian(spec)
    Hmf = mean_field_hamiltonian(spec, s)
    rho, ln_z = thermal_density(H)
    ln_z_mf = ln_partition(Hmf)
    beta_gap = float(np.real(np.trace((Hmf - H) @ rho.data)))
    site_state = thermal_density(_mf_site_term(spec, s)).rho
    direct = relative_entropy_to_product(rho, [site_state] * spec.n_sites)
    terms = BoundTerms(ln_z_mf, ln_z, beta_gap, direct)
    if abs(terms.assembled - direct) > IDENTITY_TOL:
        raise InternalInconsistency(
            f"relative-entropy identity violated by {terms.assembled - direct:.3e} for {spec}"
        )
    return terms


def sandwich_terms(spec: ChainSpec, s) -> tuple[float, float, float]:
    """(<H - H_MF>_H, ln Z_MF - ln Z, <H - H_MF>_{H_MF}) by direct traces."""
    H = build_hamiltonian(spec)
    Hmf = mean_field_hamiltonian(spec, s)
    rho, ln_z = thermal_density(H)
    rho_mf, ln_z_mf = thermal_density(Hmf)
    D = H - Hmf
    lower = float(np.real(np.trace(D @ rho.data)))
    upper = float(np.real(np.trace(D @ rho_mf.data)))
    return lower, ln_z_mf - ln_z, upper


class ConvergenceRow(NamedTuple):
    n_sites: int
    ed_per_spin: float
    limit_per_spin: float
    deviation: float


def convergence_check(p: DimensionlessCouplings, n_list: Sequence[int]) -> list[ConvergenceRow]:
    """Compare ln Z / N of periodic TFIM chains with the infinite-chain value."""
    limit = tfim.ln_Z_per_spin(p)
    rows = []
    last = 0
    for n in n_list:
        if n <= last or n % 2:
            raise ValueError("n_list must be increasing even integers")
        last = n
        spec = ChainSpec(n, "tfim", "periodic", p)
        ed = _tfim_ln_partition(build_hamiltonian(spec), n) / n
        rows.append(ConvergenceRow(n, ed, limit, abs(ed - limit)))
    return rows


class EDChainModel:
    """Whole-chain adapter for :mod:`corrbound.bound_core` (total normalization).

    The mean field for tfim comes from the thermodynamic-limit solver; for
    heisenberg it is the exact single-site <sz> of the chain.
    """

    normalization = "total"
    modes = frozenset({AverageMode.EXACT})

    def __init__(self, n_sites: int, model: str = "tfim", boundary: str | None = None):
        if boundary is None:
            boundary = "periodic" if n_sites >= 3 else "open"
        self.n_sites = n_sites
        self.model = model
        self.boundary = boundary

    def spec(self, p) -> ChainSpec:
        return ChainSpec(self.n_sites, self.model, self.boundary, p)

    def _state(self, p):
        return thermal_density(build_hamiltonian(self.spec(p)))

    def ln_Z(self, p):
        return ln_partition(build_hamiltonian(self.spec(p)))

    def beta_avg_H(self, p):
        H = build_hamiltonian(self.spec(p))
        return float(np.real(np.trace(H @ self._state(p).rho.data)))

    def ln_Z_mf(self, p, s):
        return ln_partition(mean_field_hamiltonian(self.spec(p), s))

    def beta_avg_Hmf(self, p, s, mode):
        Hmf = mean_field_hamiltonian(self.spec(p), s)
        return float(np.real(np.trace(Hmf @ self._state(p).rho.data)))

    def _mf_state(self, p, s):
        return thermal_density(mean_field_hamiltonian(self.spec(p), s)).rho

    def beta_avg_H_in_mf(self, p, s):
        H = build_hamiltonian(self.spec(p))
        return float(np.real(np.trace(H @ self._mf_state(p, s).data)))

    def beta_avg_Hmf_in_mf(self, p, s):
        Hmf = mean_field_hamiltonian(self.spec(p), s)
        return float(np.real(np.trace(Hmf @ self._mf_state(p, s).data)))

    def mean_field(self, p, mode):
        if self.model == "tfim":
            return tfim.solve_s(DimensionlessCouplings.unchecked(p.K, p.C))
        rho = self._state(p).rho
        sz = single_site_mean(rho, SZ, 0, self.n_sites)
        return MeanFieldSolution(branches=(sz,), principal=sz, residuals=(0.0,))

    def mutual_information(self, p) -> float:
        return multiparty_mutual_info(self._state(p).rho, self.n_sites)


def ed_check(spec: ChainSpec) -> dict:
    """Identity residual, mutual information and bound at the solver's mean field."""
    model = EDChainModel(spec.n_sites, spec.model, spec.boundary)
    p = spec.couplings
    s = model.mean_field(p, AverageMode.EXACT).principal
    terms = exact_bound_terms(spec, s)
    rho, _ = thermal_density(build_hamiltonian(spec))
    return {
        "n_sites": spec.n_sites,
        "model": spec.model,
        "boundary": spec.boundary,
        "K": p.K,
        "C": p.C,
        "s": float(s),
        "identity_residual": abs(terms.assembled - terms.relative_entropy_direct),
        "mutual_info": multiparty_mutual_info(rho, spec.n_sites),
        "bound": terms.assembled,
    }
