"""Coefficient-level algebra of quadratic forms in the mode operators.

A form is stored as ``Q = 1/2 xi^T H xi + c`` with ``xi = (a_1..a_M, a_1^+..a_M^+)``
and ``H`` complex symmetric.  Because ``H`` is symmetric the product is the
Weyl-symmetrized one, so vacuum contributions stay inside the form and the
commutator of two forms is again a form with no extra c-number::

    [1/2 xi^T H1 xi, 1/2 xi^T H2 xi] = 1/2 xi^T (H1 J H2 - H2 J H1) xi

where ``J`` is the canonical commutator matrix ``[xi_a, xi_b] = J_ab``.
Blocks of ``H`` in the usual notation::

    Q = sum_jk A_jk (a_j^+ a_k + a_k a_j^+)/2
        + 1/2 sum_jk B_jk a_j^+ a_k^+ + 1/2 sum_jk C_jk a_j a_k + c
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .grid import DerivativeStencil, FrequencyGrid, central_weights


class GridMismatch(ValueError):
    pass


@lru_cache(maxsize=32)
def _symplectic(M: int) -> np.ndarray:
    J = np.zeros((2 * M, 2 * M))
    J[:M, M:] = np.eye(M)
    J[M:, :M] = -np.eye(M)
    return J


def _swap(M: int) -> np.ndarray:
    P = np.zeros((2 * M, 2 * M))
    P[:M, M:] = np.eye(M)
    P[M:, :M] = np.eye(M)
    return P


@dataclass
class QuadraticForm:
    grid: FrequencyGrid
    H: np.ndarray
    c: complex = 0.0
    clipped: bool = False
    label: str = ""

    def __post_init__(self):
        M = self.grid.M
        self.H = np.asarray(self.H, dtype=complex)
        if self.H.shape != (2 * M, 2 * M):
            raise ValueError(f"H must be {2 * M}x{2 * M}, got {self.H.shape}")

    # --- blocks -------------------------------------------------------
    @property
    def A(self) -> np.ndarray:
        """Coefficient of the symmetrized ``a_j^+ a_k``."""
        M = self.grid.M
        return self.H[M:, :M]

    @property
    def B(self) -> np.ndarray:
        """Pair-creation block (coefficient of ``a_j^+ a_k^+ / 2``)."""
        M = self.grid.M
        return self.H[M:, M:]

    @property
    def C(self) -> np.ndarray:
        """Pair-annihilation block (coefficient of ``a_j a_k / 2``)."""
        M = self.grid.M
        return self.H[:M, :M]

    @classmethod
    def from_blocks(cls, grid, A=None, B=None, C=None, c=0.0, label=""):
        M = grid.M
        Z = np.zeros((M, M), dtype=complex)
        A = Z if A is None else np.asarray(A, dtype=complex)
        B = Z if B is None else np.asarray(B, dtype=complex)
        C = Z if C is None else np.asarray(C, dtype=complex)
        H = np.block([[C, A.T], [A, B]])
        return cls(grid, 0.5 * (H + H.T), c, label=label)

    @classmethod
    def scalar(cls, grid, c) -> "QuadraticForm":
        return cls(grid, np.zeros((2 * grid.M, 2 * grid.M)), c)

    # --- arithmetic ---------------------------------------------------
    def _check(self, other):
        if other.grid != self.grid:
            raise GridMismatch("quadratic forms live on different grids")

    def __add__(self, other):
        self._check(other)
        return QuadraticForm(self.grid, self.H + other.H, self.c + other.c,
                             self.clipped or other.clipped)

    def __sub__(self, other):
        return self + (-1) * other

    def __rmul__(self, z):
        return QuadraticForm(self.grid, z * self.H, z * self.c, self.clipped, self.label)

    def __mul__(self, z):
        return self.__rmul__(z)

    def adjoint(self) -> "QuadraticForm":
        P = _swap(self.grid.M)
        return QuadraticForm(self.grid, P @ self.H.conj() @ P, np.conj(self.c), self.clipped)

    def is_hermitian(self, rtol=1e-12) -> bool:
        scale = max(np.abs(self.H).max(), 1.0)
        return (np.abs(self.H - self.adjoint().H).max() <= rtol * scale
                and abs(np.imag(self.c)) <= rtol * max(abs(self.c), 1.0))

    def norm(self) -> float:
        return float(np.linalg.norm(self.H))


def field_component(grid: FrequencyGrid, s: int) -> np.ndarray:
    """Coefficient vector of the Fourier component ``phi[omega_s]`` (signed ``s``)."""
    M = grid.M
    if s == 0 or abs(s) > M:
        raise IndexError(f"signed mode index {s} outside +-[1..{M}]")
    v = np.zeros(2 * M, dtype=complex)
    amp = np.sqrt(grid.hbar / (2 * abs(s) * grid.domega * grid.dnu))
    v[s - 1 if s > 0 else M + (-s) - 1] = amp
    return v


def qf_T_omega(grid: FrequencyGrid, m: int) -> QuadraticForm:
    """Generating function ``T[omega_m]`` as a discrete convolution.

    Index pairs whose partner falls outside ``+-[1..M]`` are dropped and the
    form is flagged ``clipped``.
    """
    M = grid.M
    J = _symplectic(M)
    H = np.zeros((2 * M, 2 * M), dtype=complex)
    c = 0.0
    clipped = False
    w = grid.domega
    for jp in list(range(-M, 0)) + list(range(1, M + 1)):
        r = m + jp
        if r == 0:
            continue
        if abs(r) > M:
            clipped = True
            continue
        coef = grid.dnu * (jp * w) * (r * w)
        u = field_component(grid, -jp)
        v = field_component(grid, r)
        H += coef * (np.outer(u, v) + np.outer(v, u))
        c += coef * 0.5 * (u @ J @ v)
    return QuadraticForm(grid, H, c, clipped, label=f"T[{m}]")


def qf_T_k(grid: FrequencyGrid, k: int, stencil: DerivativeStencil | int = 2) -> QuadraticForm:
    """Generator ``T_k = (-i d/domega)^k T[omega] at omega = 0``.

    The derivative is the narrowest central k-th derivative stencil of the
    requested accuracy order, applied to the signed family ``m -> T[m]``.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    p = stencil.order if isinstance(stencil, DerivativeStencil) else int(stencil)
    offsets, weights = central_weights(k, p)
    if offsets.max() > 2 * grid.M - 2:
        raise ValueError("stencil wider than the available m-range")
    total = None
    for m, wt in zip(offsets, weights):
        if wt == 0:
            continue
        term = wt * qf_T_omega(grid, int(m))
        total = term if total is None else total + term
    out = ((-1j) ** k / grid.domega**k) * total
    out.label = f"T_{k}"
    return out


def qf_commutator(Q1: QuadraticForm, Q2: QuadraticForm) -> QuadraticForm:
    """Exact commutator under the canonical commutation relations."""
    Q1._check(Q2)
    J = _symplectic(Q1.grid.M)
    H = Q1.H @ J @ Q2.H - Q2.H @ J @ Q1.H
    # scalars commute and symmetric quadratics close without a c-number
    return QuadraticForm(Q1.grid, H, 0.0, Q1.clipped or Q2.clipped)


def qf_vacuum_expectation(Q: QuadraticForm) -> complex:
    return 0.5 * np.trace(Q.A) + Q.c


def qf_act_on_field(Q: QuadraticForm, v) -> np.ndarray:
    """The linear map ``v^T xi -> [Q, v^T xi]`` on coefficient vectors."""
    v = np.asarray(v)
    if v.shape != (2 * Q.grid.M,):
        raise GridMismatch(f"field vector has shape {v.shape}, grid needs {2 * Q.grid.M}")
    return Q.H @ (_symplectic(Q.grid.M) @ v)


def qf_pair_norm(Q: QuadraticForm) -> float:
    return float(np.linalg.norm(Q.B))


def linear_action(Q: QuadraticForm) -> np.ndarray:
    """Matrix ``X`` with ``(1/i hbar)[Q, v.xi] = (X v).xi``."""
    return (Q.H @ _symplectic(Q.grid.M)) / (1j * Q.grid.hbar)
