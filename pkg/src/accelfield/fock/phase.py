"""Exponential phase operators ``e_j`` (Susskind-Glogower or Pegg-Barnett) and phase-times.

The phase itself is never built as a logarithm; only ``e_j``, ``e_j^+`` and the
frequency derivative ``delta'_j = -i e'_j e_j^+`` exist.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.special import gammaln

from ..grid import DerivativeStencil
from .basis import FockBasis
from .operators import FockOperator
from .position import _check_interior

SG = "susskind-glogower"
PB = "pegg-barnett"


def sg_mode_matrix(dim: int) -> sp.csr_matrix:
    """``e = sum_n |n><n+1|`` on levels ``0..dim-1``."""
    return sp.diags(np.ones(dim - 1, dtype=complex), 1, format="csr")


def pb_mode_matrix(s: int, theta0: float = 0.0) -> sp.csr_matrix:
    """Unitary phase exponential on the ``(s+1)``-level space."""
    e = sp.lil_matrix((s + 1, s + 1), dtype=complex)
    for n in range(s):
        e[n, n + 1] = 1.0
    e[s, 0] = np.exp(1j * (s + 1) * theta0)
    return e.tocsr()


@dataclass
class PhaseOperatorSet:
    basis: FockBasis
    convention: str
    e: list
    vacuum_projectors: list
    mode_matrix: sp.csr_matrix
    s: int | None = None
    theta0: float = 0.0
    alpha: float = field(init=False)

    def __post_init__(self):
        self.alpha = 1.0 if self.convention == SG else 0.0

    def edag(self, j: int) -> FockOperator:
        return self.e[j].dag()


def phase_operators(basis: FockBasis, convention: str = SG, s: int | None = None,
                    theta0: float = 0.0) -> PhaseOperatorSet:
    convention = convention.lower()
    if convention not in (SG, PB):
        raise ValueError(f"unknown phase convention {convention!r}")
    M, dim = basis.grid.M, basis.dim
    states = basis.states
    totals = basis.totals
    if convention == PB:
        s = basis.n_max if s is None else s
        if not 1 <= s <= basis.n_max:
            raise ValueError(f"Pegg-Barnett mode dimension s+1={s + 1} exceeds n_max+1={basis.n_max + 1}")
        mode = pb_mode_matrix(s, theta0)
    else:
        mode = sg_mode_matrix(basis.n_max + 1)
    e_ops, projectors = [], []
    for j in range(M):
        cols = np.nonzero(states[:, j] > 0)[0]
        lowered = states[cols].copy()
        lowered[:, j] -= 1
        rows = [basis.index[tuple(x)] for x in lowered.tolist()]
        vals = [1.0 + 0j] * len(cols)
        if convention == PB:
            # wrap |0> -> e^{i(s+1)theta0} |s>, kept only inside the cap
            wrap = np.nonzero((states[:, j] == 0) & (totals + s <= basis.n_max))[0]
            raised = states[wrap].copy()
            raised[:, j] = s
            rows += [basis.index[tuple(x)] for x in raised.tolist()]
            cols = np.concatenate([cols, wrap])
            vals += [np.exp(1j * (s + 1) * theta0)] * len(wrap)
        E = sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim), dtype=complex)
        e_ops.append(FockOperator(E, basis, f"e[{j + 1}]", "phase exponential"))
        projectors.append(FockOperator(sp.diags((states[:, j] == 0).astype(complex)), basis,
                                       f"Pi[{j + 1}]", "mode vacuum projector", True))
    return PhaseOperatorSet(basis, convention, e_ops, projectors, mode, s, theta0)


def delta_prime(phases: PhaseOperatorSet, D: DerivativeStencil, j: int) -> FockOperator:
    """``delta'_j = -i sum_l D_jl e_l e_j^+``.

    Not hermitian on the truncated lattice; the defect is available via
    ``hermiticity_defect()``.
    """
    _check_interior(D, j)
    edag_j = phases.e[j].matrix.conj().T
    out = sp.csr_matrix((phases.basis.dim,) * 2, dtype=complex)
    for l in np.nonzero(D.matrix[j])[0]:
        out = out + D.matrix[j, l] * (phases.e[l].matrix @ edag_j)
    return FockOperator(-1j * out, phases.basis, f"delta'[{j + 1}]", "phase time")


# --- product coherent states, one independent truncation per mode ----------

def coherent_vector(alpha: complex, cutoff: int | None = None) -> np.ndarray:
    """Number-basis amplitudes of ``|alpha>`` up to ``cutoff`` levels."""
    r2 = abs(alpha) ** 2
    if cutoff is None:
        cutoff = int(r2 + 12 * np.sqrt(r2) + 40)
    if alpha == 0:
        c = np.zeros(cutoff, dtype=complex)
        c[0] = 1.0
        return c
    n = np.arange(cutoff)
    logmag = -0.5 * r2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    return np.exp(logmag) * np.exp(1j * n * np.angle(alpha))


def _mode_moments(alpha: complex, convention: str):
    """``<e>``, ``<sqrt(N) e^+ sqrt(N)>`` and ``<sqrt(N) e e^+ sqrt(N)>`` in ``|alpha>``."""
    c = coherent_vector(alpha)
    dim = len(c)
    e = sg_mode_matrix(dim) if convention == SG else pb_mode_matrix(dim - 1)
    sqrtN = sp.diags(np.sqrt(np.arange(dim)).astype(complex))
    ev = np.vdot(c, e @ c)
    raise_ = np.vdot(c, sqrtN @ (e.conj().T @ (sqrtN @ c)))
    diag = np.vdot(c, sqrtN @ (e @ (e.conj().T @ (sqrtN @ c))))
    return ev, raise_, diag


def phase_time_route(D: DerivativeStencil, alphas, convention: str = SG) -> np.ndarray:
    """``<sqrt(n_omega) delta'_omega sqrt(n_omega)>`` per interior mode in a product coherent state.

    Each mode is truncated independently well above its mean occupation,
    so the result is free of the total-quanta cap.  Entries outside
    ``D.interior`` are NaN.
    """
    alphas = np.asarray(alphas, dtype=complex)
    moments = [_mode_moments(a, convention) for a in alphas]
    M = len(alphas)
    out = np.full(M, np.nan, dtype=complex)
    for j in D.interior:
        acc = 0.0
        for l in np.nonzero(D.matrix[j])[0]:
            if l == j:
                acc += D.matrix[j, l] * moments[j][2]
            else:
                acc += D.matrix[j, l] * moments[l][0] * moments[j][1]
        out[j] = -1j * acc / D.grid.dnu
    return out


def m_density_coherent(D: DerivativeStencil, alphas) -> np.ndarray:
    """Exact ``<m_omega[j]>`` in a product coherent state (normal-ordered bilinear)."""
    a = np.asarray(alphas, dtype=complex)
    Da = D.antisymmetric
    return np.imag(np.conj(a) * (Da @ a)) / D.grid.dnu
