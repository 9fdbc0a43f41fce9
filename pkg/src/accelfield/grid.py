"""Positive-frequency lattice and finite-difference stencils.

Continuum objects are mapped onto the lattice with one fixed dictionary:

* ``a_omega``            <->  ``a_j / sqrt(dnu)``
* ``2 pi delta(w - w')`` <->  ``delta_jk / dnu``
* ``delta(w + w')``      <->  ``delta_{m,-m'} / domega`` (signed indices)
* ``int dw/2pi f(w)``    <->  ``sum_j dnu f(w_j)``
* ``theta(w)``           <->  ``j >= 1``

with ``dnu = domega / 2 pi``.  No other discretization rule is used anywhere in
the package.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

import numpy as np


@dataclass(frozen=True)
class Constants:
    """Physical units.  The speed of light is fixed to 1."""

    hbar: float = 1.0

    def __post_init__(self):
        if not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")


@dataclass(frozen=True)
class FrequencyGrid:
    """Modes ``omega_j = j * domega`` for ``j = 1..M`` (no zero mode)."""

    M: int
    domega: float
    constants: Constants = field(default_factory=Constants)

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 4:
            raise ValueError(f"grid needs at least 4 modes, got M={self.M}")
        if not self.domega > 0:
            raise ValueError(f"domega must be positive, got {self.domega}")

    @property
    def hbar(self) -> float:
        return self.constants.hbar

    @property
    def dnu(self) -> float:
        """Spectral measure weight ``domega / 2 pi``."""
        return self.domega / (2 * np.pi)

    @property
    def omega(self) -> np.ndarray:
        return self.domega * np.arange(1, self.M + 1)

    @property
    def omega_max(self) -> float:
        return self.M * self.domega

    def signed_omega(self, m: int) -> float:
        return m * self.domega

    def integrate(self, values) -> complex:
        """``int_0^inf dw/2pi f(w)`` as ``sum_j dnu f(w_j)``."""
        return self.dnu * np.sum(values, axis=-1)

    def u_period(self) -> float:
        """Period of the position representation conjugate to this lattice."""
        return 2 * np.pi / self.domega


def make_grid(M: int, domega: float, hbar: float = 1.0) -> FrequencyGrid:
    return FrequencyGrid(int(M), float(domega), Constants(float(hbar)))


def fd_weights(offsets, deriv: int) -> np.ndarray:
    """Finite-difference weights for the ``deriv``-th derivative at 0.

    ``offsets`` are integer node positions in units of the spacing.  Solved in
    exact rational arithmetic so symmetric stencils come out exactly
    antisymmetric/symmetric.
    """
    x = [Fraction(int(o)) for o in offsets]
    n = len(x)
    if deriv >= n:
        raise ValueError("need more nodes than the derivative order")
    # Vandermonde system sum_i w_i x_i^r = r! delta_{r,deriv}
    A = [[xi**r for xi in x] + [Fraction(factorial(deriv) if r == deriv else 0)] for r in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if A[r][col] != 0)
        A[col], A[piv] = A[piv], A[col]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col] / A[col][col]
                A[r] = [a - f * b for a, b in zip(A[r], A[col])]
    return np.array([float(A[i][n] / A[i][i]) for i in range(n)])


def central_weights(deriv: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Narrowest central stencil for the ``deriv``-th derivative at accuracy ``order``.

    Returns ``(offsets, weights)`` in units where the spacing is 1.
    """
    if order % 2 or order < 2:
        raise ValueError(f"accuracy order must be even and >= 2, got {order}")
    if deriv == 0:
        return np.array([0]), np.array([1.0])
    half = (deriv + 1) // 2 - 1 + order // 2
    offsets = np.arange(-half, half + 1)
    return offsets, fd_weights(offsets, deriv)


@dataclass(frozen=True)
class DerivativeStencil:
    """Banded first-derivative matrix on the mode lattice.

    Rows in ``interior`` (0-based) carry the full central stencil; the
    remaining rows are one-sided of the same accuracy order and are excluded
    from every exactness claim.
    """

    grid: FrequencyGrid
    order: int
    matrix: np.ndarray
    interior: np.ndarray

    @property
    def half_width(self) -> int:
        return self.order // 2

    @property
    def antisymmetric(self) -> np.ndarray:
        """``(D - D^T) / 2``; equals ``D`` on interior rows whose neighbours are interior."""
        return 0.5 * (self.matrix - self.matrix.T)

    @property
    def deep_interior(self) -> np.ndarray:
        """Interior modes ``j`` whose column equals minus their row.

        On these, ``D`` and its antisymmetric part act identically, so
        packets supported here see no one-sided boundary coefficient.
        """
        D = self.matrix
        keep = [j for j in self.interior if np.array_equal(D[:, j], -D[j, :])]
        return np.asarray(keep, dtype=int)

    @property
    def band(self) -> int:
        """Largest ``|j - l|`` with a nonzero antisymmetric coefficient."""
        j, l = np.nonzero(self.antisymmetric)
        return int(np.max(np.abs(j - l))) if j.size else 0

    def apply(self, values) -> np.ndarray:
        return self.matrix @ np.asarray(values)


def derivative_matrix(grid: FrequencyGrid, p: int = 2) -> DerivativeStencil:
    if p not in (2, 4):
        raise ValueError(f"stencil order must be 2 or 4, got {p}")
    s = p // 2
    M = grid.M
    if M < p + 2:
        raise ValueError(f"M={M} too small for an order-{p} stencil")
    offsets, w = central_weights(1, p)
    D = np.zeros((M, M))
    for j in range(s, M - s):
        D[j, j + offsets] = w
    # one-sided rows use p + 1 nodes
    for j in range(s):
        nodes = np.arange(p + 1)
        D[j, nodes] = fd_weights(nodes - j, 1)
        D[M - 1 - j, M - 1 - nodes] = fd_weights(j - nodes, 1)
    D /= grid.domega
    return DerivativeStencil(grid, p, D, np.arange(s, M - s))
