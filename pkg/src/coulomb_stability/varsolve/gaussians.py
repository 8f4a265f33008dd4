"""Explicitly correlated Gaussians for L = 0 states of N = 3, 4 particles.

Coordinates are the N-1 vectors ``y_k = r_{k+1} - r_1``.  With the centre of
mass at rest the kinetic energy is ``1/2 p^T Lam p`` with
``Lam_kl = x_1 + delta_kl x_{k+1}``, which stays finite when some inverse
masses vanish.  A basis function is ``exp(-1/2 y^T A y)`` (per Cartesian
component) with ``A`` symmetric positive definite; all matrix elements below
are for normalized functions.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Optional

import numpy as np

from ..systems import ParticleSystem

_SQRT_2_OVER_PI = np.sqrt(2.0 / np.pi)


class NotPositiveDefinite(ValueError):
    pass


def kinetic_matrix(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    d = len(x) - 1
    return np.full((d, d), x[0]) + np.diag(x[1:])


def pair_vectors(n: int) -> tuple[list[tuple[int, int]], np.ndarray]:
    """Pairs (i, j) and the rows ``w`` with ``r_j - r_i = w . y``."""
    pairs = list(combinations(range(n), 2))
    w = np.zeros((len(pairs), n - 1))
    for p, (i, j) in enumerate(pairs):
        w[p, j - 1] += 1.0
        if i > 0:
            w[p, i - 1] -= 1.0
    return pairs, w


@dataclass(frozen=True)
class CorrelatedGaussian:
    A: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("A must be square")
        A = 0.5 * (A + A.T)
        if np.linalg.eigvalsh(A)[0] <= 0:
            raise NotPositiveDefinite("correlated Gaussian needs a positive definite form")
        object.__setattr__(self, "A", A)

    @classmethod
    def from_pairs(cls, n: int, coeffs: Mapping[tuple[int, int], float]) -> "CorrelatedGaussian":
        """``exp(-1/2 sum a_ij r_ij^2)`` from pair coefficients ``a_ij >= 0``."""
        pairs, w = pair_vectors(n)
        A = np.zeros((n - 1, n - 1))
        for p, ij in enumerate(pairs):
            a = coeffs.get(ij, 0.0)
            if a < 0:
                raise ValueError("pair coefficients must be non-negative")
            A += a * np.outer(w[p], w[p])
        return cls(A)


def pair_forms(coeffs: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Stack of ``A = sum_p a_p w_p w_p^T`` for rows of pair coefficients ``(k, npairs)``."""
    return np.einsum("kp,pi,pj->kij", coeffs, w, w)


@dataclass
class MatrixElements:
    overlap: float
    kinetic: float
    coulomb: dict  # pair -> q_i q_j <1/r_ij>

    @property
    def hamiltonian(self) -> float:
        return self.kinetic + sum(self.coulomb.values())


def _dets_logs(As: np.ndarray) -> np.ndarray:
    sign, logdet = np.linalg.slogdet(As)
    if np.any(sign <= 0):
        raise NotPositiveDefinite("form is not positive definite")
    return logdet


def row_elements(As, A, logdet_As, logdet_A, lam, w, qq):
    """Overlap, kinetic and potential of one Gaussian ``A`` against a stack ``As``.

    Returns arrays of shape ``(k,)``.  ``qq`` holds the pair charge products
    in the order of ``w``.
    """
    d = A.shape[0]
    B = As + A
    logdet_B = _dets_logs(B)
    Binv = np.linalg.inv(B)
    S = np.exp(1.5 * d * np.log(2.0) + 0.75 * (logdet_As + logdet_A) - 1.5 * logdet_B)
    # tr(A_k Lam A B^-1)
    LA = lam @ A
    T = 1.5 * S * np.einsum("kij,jl,kli->k", As, LA, Binv)
    c = np.einsum("pi,kij,pj->kp", w, Binv, w)
    V = S * _SQRT_2_OVER_PI * (np.asarray(qq) / np.sqrt(c)).sum(axis=1)
    return S, T, V


def matrix_elements(g1: CorrelatedGaussian, g2: CorrelatedGaussian, sys: ParticleSystem) -> MatrixElements:
    n = sys.n
    if g1.A.shape != (n - 1, n - 1) or g2.A.shape != g1.A.shape:
        raise ValueError(f"forms must be {(n - 1, n - 1)} for a {n}-body system")
    pairs, w = pair_vectors(n)
    lam = kinetic_matrix(sys.x)
    A1 = g1.A[None]
    l1 = _dets_logs(A1)
    l2 = _dets_logs(g2.A[None])[0]
    B = A1 + g2.A
    lB = _dets_logs(B)
    Binv = np.linalg.inv(B)[0]
    d = n - 1
    S = float(np.exp(1.5 * d * np.log(2.0) + 0.75 * (l1[0] + l2) - 1.5 * lB[0]))
    T = 1.5 * S * float(np.trace(g1.A @ lam @ g2.A @ Binv))
    coul = {}
    for p, (i, j) in enumerate(pairs):
        c = float(w[p] @ Binv @ w[p])
        coul[(i, j)] = sys.q[i] * sys.q[j] * S * _SQRT_2_OVER_PI / np.sqrt(c)
    return MatrixElements(S, T, coul)


class Basis:
    """Growing set of Gaussians with cached overlap and Hamiltonian matrices."""

    def __init__(self, sys: ParticleSystem, capacity: int = 64):
        self.sys = sys
        self.n = sys.n
        self.pairs, self.w = pair_vectors(sys.n)
        self.qq = np.array([sys.q[i] * sys.q[j] for i, j in self.pairs])
        self.lam = kinetic_matrix(sys.x)
        d = sys.n - 1
        self._A = np.zeros((capacity, d, d))
        self._logdet = np.zeros(capacity)
        self._S = np.zeros((capacity, capacity))
        self._H = np.zeros((capacity, capacity))
        self.size = 0

    def __len__(self):
        return self.size

    @property
    def forms(self) -> np.ndarray:
        return self._A[: self.size]

    @property
    def S(self) -> np.ndarray:
        return self._S[: self.size, : self.size]

    @property
    def H(self) -> np.ndarray:
        return self._H[: self.size, : self.size]

    def diagonal(self, A: np.ndarray, logdet: Optional[float] = None) -> float:
        if logdet is None:
            logdet = _dets_logs(A[None])[0]
        _, T, V = row_elements(A[None], A, np.array([logdet]), logdet, self.lam, self.w, self.qq)
        return float(T[0] + V[0])

    def row(self, A: np.ndarray, logdet: float) -> tuple[np.ndarray, np.ndarray]:
        """Overlaps and Hamiltonian elements of ``A`` with the current members."""
        if self.size == 0:
            return np.zeros(0), np.zeros(0)
        S, T, V = row_elements(self.forms, A, self._logdet[: self.size], logdet, self.lam, self.w, self.qq)
        return S, T + V

    def _grow(self):
        cap = 2 * self._A.shape[0]
        d = self.n - 1
        A = np.zeros((cap, d, d))
        A[: self.size] = self.forms
        ld = np.zeros(cap)
        ld[: self.size] = self._logdet[: self.size]
        S = np.zeros((cap, cap))
        H = np.zeros((cap, cap))
        S[: self.size, : self.size] = self.S
        H[: self.size, : self.size] = self.H
        self._A, self._logdet, self._S, self._H = A, ld, S, H

    def append(self, A: np.ndarray, s_row=None, h_row=None, h_diag=None) -> None:
        A = np.asarray(A, dtype=float)
        logdet = _dets_logs(A[None])[0]
        if s_row is None:
            s_row, h_row = self.row(A, logdet)
        if h_diag is None:
            h_diag = self.diagonal(A, logdet)
        if self.size == self._A.shape[0]:
            self._grow()
        k = self.size
        self._A[k] = A
        self._logdet[k] = logdet
        self._S[k, :k] = self._S[:k, k] = s_row
        self._H[k, :k] = self._H[:k, k] = h_row
        self._S[k, k] = 1.0
        self._H[k, k] = h_diag
        self.size += 1

    def subset(self, keep) -> "Basis":
        keep = list(keep)
        out = Basis(self.sys, capacity=max(len(keep), 1))
        idx = np.asarray(keep, dtype=int)
        out._A[: len(keep)] = self._A[idx]
        out._logdet[: len(keep)] = self._logdet[idx]
        out._S[: len(keep), : len(keep)] = self.S[np.ix_(idx, idx)]
        out._H[: len(keep), : len(keep)] = self.H[np.ix_(idx, idx)]
        out.size = len(keep)
        return out

    @classmethod
    def from_forms(cls, sys: ParticleSystem, forms) -> "Basis":
        b = cls(sys, capacity=max(len(forms), 1))
        for A in forms:
            b.append(A.A if isinstance(A, CorrelatedGaussian) else A)
        return b
