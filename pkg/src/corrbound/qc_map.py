"""Single qubit -> classical Ising chain via Trotter slicing.

Each of N imaginary-time slices contributes a factor 1 - beta H / N, whose
matrix elements in the sz basis are written as A exp(B u u' + (h/2)(u + u')).
The trace of the N-th power is a periodic classical chain and tends to the
quantum partition function with an O(1/N) error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveDelta, TrotterDomainError


@dataclass(frozen=True)
class QubitHamiltonian:
    """H = [[E, -Delta], [-Delta, -E]] in the basis (u = +1, u = -1)."""

    E: float
    Delta: float

    def __post_init__(self):
        if not math.isfinite(self.E) or not math.isfinite(self.Delta):
            raise ValueError("E and Delta must be finite")
        if not self.Delta > 0:
            raise NonPositiveDelta(f"Delta must be positive for a real coupling, got {self.Delta}")

    def matrix(self) -> np.ndarray:
        return np.array([[self.E, -self.Delta], [-self.Delta, -self.E]], dtype=float)


@dataclass(frozen=True)
class ClassicalMapCoefficients:
    A: float
    B_cl: float
    h: float
    N: int
    beta: float


def coefficients(H: QubitHamiltonian, beta: float, N: int) -> ClassicalMapCoefficients:
    if not beta > 0:
        raise ValueError("beta must be positive")
    if int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N}")
    if not H.Delta > 0:
        raise NonPositiveDelta(f"Delta must be positive, got {H.Delta}")
    bE = beta * H.E
    if N <= abs(bE):
        raise TrotterDomainError(f"need N > beta|E| = {abs(bE)}, got N = {N}")
    bD = beta * H.Delta
    A = math.sqrt(bD / N) * (1.0 - (bE / N) ** 2) ** 0.25
    B_cl = 0.25 * math.log((N * N - bE * bE) / (bD * bD))
    h = 0.5 * math.log((N - bE) / (N + bE))
    return ClassicalMapCoefficients(A, B_cl, h, int(N), float(beta))


def transfer_matrix(c: ClassicalMapCoefficients) -> np.ndarray:
    u = np.array([1.0, -1.0])
    return c.A * np.exp(c.B_cl * np.outer(u, u) + 0.5 * c.h * (u[:, None] + u[None, :]))


def trotter_factor(H: QubitHamiltonian, beta: float, N: int) -> np.ndarray:
    """1 - beta H / N, the matrix the transfer matrix must reproduce."""
    return np.eye(2) - beta * H.matrix() / N


def classical_partition(c: ClassicalMapCoefficients) -> float:
    """tr T^N for the periodic chain."""
    mu = np.linalg.eigvalsh(transfer_matrix(c))
    return float(np.sum(mu ** c.N))


def quantum_partition(H: QubitHamiltonian, beta: float) -> float:
    return 2.0 * math.cosh(beta * math.hypot(H.E, H.Delta))


def trotter_error(H: QubitHamiltonian, beta: float, N: int) -> float:
    return abs(classical_partition(coefficients(H, beta, N)) - quantum_partition(H, beta))
