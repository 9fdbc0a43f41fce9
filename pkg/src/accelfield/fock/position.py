"""Newton-Wigner position densities, their normal-ordered products and the light-cone pair."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..grid import DerivativeStencil
from ..quadform import qf_T_k
from .basis import FockBasis
from .operators import FockOperator, mode_operators, realize


class BoundaryModeError(ValueError):
    pass


def _check_interior(D: DerivativeStencil, j: int):
    if j not in set(D.interior.tolist()):
        raise BoundaryModeError(f"mode index {j} (0-based) is a one-sided stencil row")


def m_density(basis: FockBasis, D: DerivativeStencil, j: int, *, allow_boundary=False) -> FockOperator:
    """``m_omega = (i/2) {(a'_omega)^+ a_omega - a_omega^+ a'_omega}`` at mode ``j``.

    ``a'`` uses the antisymmetric part of ``D`` so that the integrated ``m`` is
    hermitian with the same stencil on every row.
    """
    if not allow_boundary:
        _check_interior(D, j)
    ops = mode_operators(basis)
    Da = D.antisymmetric
    A = np.zeros((basis.grid.M, basis.grid.M), dtype=complex)
    # (a'_j)^+ a_j = sum_l Da_jl a_l^+ a_j ;  a_j^+ a'_j = sum_l Da_jl a_j^+ a_l
    A[:, j] += 0.5j * Da[j, :]
    A[j, :] -= 0.5j * Da[j, :]
    M = ops.bilinear(A) / basis.grid.dnu
    return FockOperator(M, basis, f"m_omega[{j + 1}]", "position density", True)


def m_total(basis: FockBasis, D: DerivativeStencil) -> FockOperator:
    """``m = int dw/2pi m_omega = i sum_jl Da_jl a_l^+ a_j``."""
    ops = mode_operators(basis)
    A = 1j * D.antisymmetric.T
    return FockOperator(ops.bilinear(A), basis, "m", "Newton-Wigner position", True)


def smoothing_matrix(D: DerivativeStencil) -> np.ndarray:
    """``S_lj = Da_jl (omega_l - omega_j)``; rows sum to 1 on deep-interior modes."""
    om = D.grid.omega
    return D.antisymmetric.T * (om[:, None] - om[None, :])


def smoothed_number(basis: FockBasis, D: DerivativeStencil) -> FockOperator:
    """``sum_lj S_lj a_l^+ a_j`` with ``[T_0, m] = i hbar`` times this operator exactly."""
    ops = mode_operators(basis)
    return FockOperator(ops.bilinear(smoothing_matrix(D)), basis, "n_S", "smoothed number", True)


def smoothed_density(basis: FockBasis, D: DerivativeStencil, j: int) -> FockOperator:
    """Exact discrete ``(1/i hbar)[T_0, m_omega[j]]``."""
    om = D.grid.omega
    Da = D.antisymmetric
    A = np.zeros((basis.grid.M, basis.grid.M))
    A[:, j] += 0.5 * Da[j, :] * (om - om[j])
    A[j, :] += 0.5 * Da[j, :] * (om - om[j])
    ops = mode_operators(basis)
    return FockOperator(ops.bilinear(A) / basis.grid.dnu, basis, f"n_S[{j + 1}]",
                        "smoothed number density", True)


def normal_ordered_mn(basis: FockBasis, D: DerivativeStencil, k: int) -> FockOperator:
    """``:m n_omega[k]: = (i/dnu) sum_jl Da_jl a_l^+ a_k^+ a_j a_k`` (quartic)."""
    ops = mode_operators(basis)
    Da = D.antisymmetric
    pair_k = ops.adag[k]
    out = sp.csr_matrix((basis.dim, basis.dim), dtype=complex)
    ak = ops.a[k]
    for j, l in zip(*np.nonzero(Da)):
        out = out + Da[j, l] * (ops.adag[l] @ pair_k @ ops.a[j] @ ak)
    return FockOperator(1j * out / basis.grid.dnu, basis, f":m n_omega[{k + 1}]:",
                        "normal-ordered position-number product", True)


def sqrt_density(basis: FockBasis, j: int) -> FockOperator:
    """``sqrt(n_omega[j]) = sqrt(N_j / dnu)``."""
    vals = np.sqrt(basis.states[:, j] / basis.grid.dnu).astype(complex)
    return FockOperator(sp.diags(vals), basis, f"sqrt n_omega[{j + 1}]", "number density", True)


@dataclass
class LightConeOperators:
    E: FockOperator
    P: FockOperator
    U: FockOperator
    V: FockOperator
    tau: FockOperator
    xi: FockOperator
    n_phi: FockOperator
    n_psi: FockOperator
    basis: "ProductBasis"


@dataclass(frozen=True, eq=False)
class ProductBasis:
    """Tensor product ``phi (x) psi`` of two sector bases (phi index varies slowest)."""

    phi: FockBasis
    psi: FockBasis

    @property
    def dim(self) -> int:
        return self.phi.dim * self.psi.dim

    def product_state(self, psi_phi, psi_psi) -> np.ndarray:
        return np.kron(psi_phi, psi_psi)


def _lift(X, basis: ProductBasis, side: str) -> sp.csr_matrix:
    if side == "phi":
        return sp.kron(X, sp.identity(basis.psi.dim), format="csr")
    return sp.kron(sp.identity(basis.phi.dim), X, format="csr")


def dual_sector_operators(basis_phi: FockBasis, basis_psi: FockBasis,
                          D: DerivativeStencil, j: int | None = None) -> LightConeOperators:
    """Energy, momentum and the time/space position pair on ``phi (x) psi``.

    ``U`` and ``V`` are the integrated positions of each sector, or the
    densities at mode ``j`` when it is given.
    """
    if basis_phi.grid != basis_psi.grid or basis_phi.n_max != basis_psi.n_max:
        raise ValueError("sectors must share grid and n_max")
    if basis_phi.sector == basis_psi.sector and basis_phi.sector is not None:
        raise ValueError("both bases carry the same sector flag")
    pb = ProductBasis(basis_phi, basis_psi)
    T0 = {}
    m = {}
    n = {}
    for side, b in (("phi", basis_phi), ("psi", basis_psi)):
        T0[side] = _lift(realize(qf_T_k(b.grid, 0, D), b).matrix, pb, side)
        pos = m_total(b, D) if j is None else m_density(b, D, j)
        m[side] = _lift(pos.matrix, pb, side)
        n[side] = _lift(sum(mode_operators(b).N), pb, side)

    def op(M, label):
        return FockOperator(M, pb, label, "light-cone position pair", True)

    U, V = op(m["phi"], "U"), op(m["psi"], "V")
    return LightConeOperators(
        E=op(T0["phi"] + T0["psi"], "E"),
        P=op(T0["phi"] - T0["psi"], "P"),
        U=U, V=V,
        tau=op(0.5 * (U.matrix + V.matrix), "tau"),
        xi=op(0.5 * (V.matrix - U.matrix), "xi"),
        n_phi=op(n["phi"], "n_phi"), n_psi=op(n["psi"], "n_psi"),
        basis=pb,
    )
