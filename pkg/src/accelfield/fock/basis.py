from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np
import scipy.sparse as sp

from ..grid import FrequencyGrid

DEFAULT_DIM_CAP = 200_000


class DimensionCapExceeded(ValueError):
    pass


def _occupations(M: int, n_max: int):
    """Occupation vectors with total <= n_max, lexicographic in (n_1, ..., n_M)."""
    def rec(prefix, left, remaining):
        if left == 0:
            yield prefix
            return
        for n in range(remaining + 1):
            yield from rec(prefix + (n,), left - 1, remaining - n)
    yield from rec((), M, n_max)


@dataclass(frozen=True, eq=False)
class FockBasis:
    """Truncated multimode occupation basis ``sum_j n_j <= n_max``.

    ``sector`` tags which light-cone component (``"phi"`` or ``"psi"``) the
    modes belong to when two sectors are combined.
    """

    grid: FrequencyGrid
    n_max: int
    states: np.ndarray
    index: dict = field(repr=False)
    sector: str | None = None

    @property
    def dim(self) -> int:
        return len(self.states)

    @property
    def totals(self) -> np.ndarray:
        return self.states.sum(axis=1)

    def state_index(self, occupations) -> int:
        return self.index[tuple(int(n) for n in occupations)]

    def sector_mask(self, n_lo=0, n_hi=None) -> np.ndarray:
        n_hi = self.n_max if n_hi is None else n_hi
        t = self.totals
        return (t >= n_lo) & (t <= n_hi)

    def projector(self, mask) -> sp.csr_matrix:
        return sp.diags(np.asarray(mask, dtype=float)).tocsr()

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.state_index([0] * self.grid.M)] = 1.0
        return v


def basis_dimension(M: int, n_max: int) -> int:
    return comb(M + n_max, n_max)


def build_basis(grid: FrequencyGrid, n_max: int, dim_cap: int = DEFAULT_DIM_CAP,
                sector: str | None = None) -> FockBasis:
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    dim = basis_dimension(grid.M, n_max)
    if dim > dim_cap:
        raise DimensionCapExceeded(
            f"basis dimension C({grid.M}+{n_max},{n_max}) = {dim} exceeds cap {dim_cap}")
    states = np.array(list(_occupations(grid.M, n_max)), dtype=np.int64).reshape(dim, grid.M)
    index = {tuple(s): i for i, s in enumerate(states.tolist())}
    return FockBasis(grid, n_max, states, index, sector)
