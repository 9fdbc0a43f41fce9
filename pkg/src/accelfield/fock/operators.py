"""Sparse realization of mode, number and generator operators on a FockBasis."""
from __future__ import annotations

from dataclasses import dataclass
import weakref

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..quadform import GridMismatch, QuadraticForm
from .basis import FockBasis

HERMITIAN_RTOL = 1e-12


def sparse_norm(X) -> float:
    return float(spla.norm(X)) if sp.issparse(X) else float(np.linalg.norm(X))


@dataclass
class FockOperator:
    matrix: sp.csr_matrix
    basis: FockBasis
    label: str = ""
    ref: str = "plumbing"
    hermitian: bool = False

    def __post_init__(self):
        self.matrix = sp.csr_matrix(self.matrix, dtype=complex)
        if self.matrix.shape != (self.basis.dim, self.basis.dim):
            raise ValueError(f"{self.label}: shape {self.matrix.shape} does not match basis")

    def dag(self) -> "FockOperator":
        return FockOperator(self.matrix.conj().T.tocsr(), self.basis, f"{self.label}^+", self.ref,
                            self.hermitian)

    def norm(self) -> float:
        return sparse_norm(self.matrix)

    def hermiticity_defect(self) -> float:
        return sparse_norm(self.matrix - self.matrix.conj().T)

    def check_hermitian(self, rtol=HERMITIAN_RTOL) -> bool:
        return self.hermiticity_defect() <= rtol * max(self.norm(), 1e-300)

    def expectation(self, psi) -> complex:
        psi = np.asarray(psi)
        return complex(np.vdot(psi, self.matrix @ psi))

    def apply(self, psi) -> np.ndarray:
        return self.matrix @ np.asarray(psi)

    def _wrap(self, M, label):
        return FockOperator(M, self.basis, label)

    def __matmul__(self, other):
        return self._wrap(self.matrix @ other.matrix, f"{self.label} {other.label}")

    def __add__(self, other):
        return self._wrap(self.matrix + other.matrix, f"{self.label}+{other.label}")

    def __sub__(self, other):
        return self._wrap(self.matrix - other.matrix, f"{self.label}-{other.label}")

    def __rmul__(self, z):
        return FockOperator(z * self.matrix, self.basis, self.label, self.ref,
                            self.hermitian and np.isreal(z))


def commutator(X, Y):
    """Matrix commutator for FockOperators or raw sparse matrices."""
    if isinstance(X, FockOperator):
        return X._wrap(X.matrix @ Y.matrix - Y.matrix @ X.matrix, f"[{X.label},{Y.label}]")
    return X @ Y - Y @ X


def anticommutator(X, Y):
    if isinstance(X, FockOperator):
        return X._wrap(X.matrix @ Y.matrix + Y.matrix @ X.matrix, f"{{{X.label},{Y.label}}}")
    return X @ Y + Y @ X


class ModeOperators:
    """``a_j``, ``a_j^+`` and ``N_j`` on a truncated basis.

    ``a_j^+`` sends states with ``sum n = n_max`` to zero, so canonical
    commutators hold exactly only on ``sum n <= n_max - 1``.
    """

    def __init__(self, basis: FockBasis):
        self.basis = basis
        M = basis.grid.M
        states = basis.states
        self.a = []
        for j in range(M):
            cols = np.nonzero(states[:, j] > 0)[0]
            lowered = states[cols].copy()
            lowered[:, j] -= 1
            rows = np.fromiter((basis.index[tuple(s)] for s in lowered.tolist()),
                               dtype=np.int64, count=len(cols))
            vals = np.sqrt(states[cols, j].astype(float))
            self.a.append(sp.csr_matrix((vals.astype(complex), (rows, cols)),
                                        shape=(basis.dim, basis.dim)))
        self.adag = [x.conj().T.tocsr() for x in self.a]
        self.N = [sp.diags(states[:, j].astype(complex)).tocsr() for j in range(M)]
        self.identity = sp.identity(basis.dim, dtype=complex, format="csr")
        self._hop = {}

    @property
    def M(self) -> int:
        return self.basis.grid.M

    def hop(self, j: int, k: int) -> sp.csr_matrix:
        """``a_j^+ a_k`` (cached)."""
        key = (j, k)
        if key not in self._hop:
            self._hop[key] = (self.adag[j] @ self.a[k]).tocsr()
        return self._hop[key]

    def bilinear(self, A) -> sp.csr_matrix:
        """``sum_jk A_jk a_j^+ a_k``."""
        out = sp.csr_matrix((self.basis.dim, self.basis.dim), dtype=complex)
        for j, k in zip(*np.nonzero(np.asarray(A))):
            out = out + A[j, k] * self.hop(j, k)
        return out


_MODE_CACHE: "weakref.WeakKeyDictionary[FockBasis, ModeOperators]" = weakref.WeakKeyDictionary()


def mode_operators(basis: FockBasis) -> ModeOperators:
    ops = _MODE_CACHE.get(basis)
    if ops is None:
        ops = _MODE_CACHE[basis] = ModeOperators(basis)
    return ops


@dataclass
class NumberOperators:
    n_omega: list
    n_total: FockOperator


def number_operators(basis: FockBasis) -> NumberOperators:
    ops = mode_operators(basis)
    dnu = basis.grid.dnu
    n_omega = [FockOperator(N / dnu, basis, f"n_omega[{j + 1}]", "number density", True)
               for j, N in enumerate(ops.N)]
    n_total = FockOperator(sum(ops.N), basis, "n", "total number", True)
    return NumberOperators(n_omega, n_total)


def realize(Q: QuadraticForm, basis: FockBasis) -> FockOperator:
    """Sparse matrix of a quadratic form, assembled in normal order.

    ``sym(a_j^+ a_k) = a_j^+ a_k + delta_jk / 2``; pair terms are products of
    truncated ladder matrices, exact between sectors inside the cap.
    """
    if Q.grid != basis.grid:
        raise GridMismatch("form and basis use different grids")
    ops = mode_operators(basis)
    out = ops.bilinear(Q.A)
    const = 0.5 * np.trace(Q.A) + Q.c
    B, C = Q.B, Q.C
    for j, k in zip(*np.nonzero(B)):
        out = out + 0.5 * B[j, k] * (ops.adag[j] @ ops.adag[k])
    for j, k in zip(*np.nonzero(C)):
        out = out + 0.5 * C[j, k] * (ops.a[j] @ ops.a[k])
    out = out + const * ops.identity
    return FockOperator(out, basis, Q.label or "Q", "quadratic form", Q.is_hermitian())
