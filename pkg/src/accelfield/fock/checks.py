"""Verification checks on a truncated Fock basis; each returns a list of CheckRecord."""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ..grid import DerivativeStencil, derivative_matrix
from ..quadform import qf_T_k
from ..records import CheckRecord, exact_record, skip_record
from .basis import FockBasis
from .operators import (anticommutator, commutator, mode_operators, number_operators,
                        realize, sparse_norm)
from .phase import PB, SG, delta_prime, pb_mode_matrix, phase_operators
from .position import (dual_sector_operators, m_density, m_total, normal_ordered_mn,
                       smoothed_density, smoothed_number, sqrt_density)
from .states import BoundarySupportError, OnePacket

REF_NUMBER = "total particle number preserved by T_0, T_1, T_2"
REF_T3 = "vacuum and particle number not invariant under T_3"


def _rel(X, *scales) -> tuple[float, float]:
    s = float(np.prod([max(x, 1e-300) for x in scales]))
    r = sparse_norm(X)
    return r, s


def _restrict(X, mask) -> sp.csr_matrix:
    P = sp.diags(np.asarray(mask, dtype=float))
    return (P @ X @ P).tocsr()


def _comm_record(cid, ref, X, Y, target=None, mask=None, tol=1e-12):
    """``[X, Y] - target`` judged against ``|X| |Y|``."""
    Xm = getattr(X, "matrix", X)
    Ym = getattr(Y, "matrix", Y)
    R = commutator(Xm, Ym)
    if target is not None:
        R = R - getattr(target, "matrix", target)
    if mask is not None:
        R = _restrict(R, mask)
    r, s = _rel(R, sparse_norm(Xm), sparse_norm(Ym))
    return exact_record(cid, ref, r, s, tol)


def generator_operators(basis: FockBasis, D: DerivativeStencil, ks=(0, 1, 2, 3)) -> dict:
    return {k: realize(qf_T_k(basis.grid, k, D), basis) for k in ks}


def invariance_checks(basis: FockBasis, D: DerivativeStencil, tol=1e-12) -> list[CheckRecord]:
    """Number conservation by ``T_0..T_2``, its failure for ``T_3``, and vacuum images."""
    if basis.n_max < 1:
        return [skip_record("fock.invariance", REF_NUMBER)]
    T = generator_operators(basis, D)
    nops = number_operators(basis)
    n = nops.n_total
    out = []
    for k in (0, 1, 2):
        out.append(_comm_record(f"fock.T{k}_commutes_n", REF_NUMBER, T[k], n, tol=tol))
    r, s = _rel(commutator(T[3].matrix, n.matrix), T[3].norm(), n.norm())
    out.append(CheckRecord("fock.T3_breaks_n", REF_T3, r / s, 1e-6, None, r / s, bool(r / s > 1e-6),
                           kind="lower-bound", tolerance=1e-6))
    vac = basis.vacuum()
    for k in (0, 1, 2):
        img = T[k].apply(vac)
        leak = np.linalg.norm(img - np.vdot(vac, img) * vac)
        out.append(exact_record(f"fock.T{k}_vacuum_eigen", "vacuum invariant under T_0, T_1, T_2",
                                leak, max(T[k].norm(), 1.0), tol))
    if basis.n_max >= 2:
        pair = np.linalg.norm(T[3].apply(vac)[basis.totals == 2])
        scale = np.linalg.norm(qf_T_k(basis.grid, 3, D).A)
        out.append(CheckRecord("fock.T3_vacuum_pairs", REF_T3, pair, 1e-6 * scale, None, pair / scale,
                               bool(pair >= 1e-6 * scale), kind="lower-bound", tolerance=1e-6))
    else:
        out.append(skip_record("fock.T3_vacuum_pairs", REF_T3))
    worst = 0.0
    for j, nj in enumerate(nops.n_omega):
        r, s = _rel(commutator(T[0].matrix, nj.matrix), T[0].norm(), nj.norm())
        worst = max(worst, r / s)
    out.append(exact_record("fock.T0_commutes_n_omega", "number density unchanged under translation",
                            worst, 1.0, tol))
    worst = 0.0
    for j in range(basis.grid.M):
        for k in range(j + 1, basis.grid.M):
            X, Y = nops.n_omega[j].matrix, nops.n_omega[k].matrix
            r, s = _rel(commutator(X, Y), sparse_norm(X), sparse_norm(Y))
            worst = max(worst, r / s)
    out.append(exact_record("fock.n_omega_commute", "number densities at distinct frequencies commute",
                            worst, 1.0, tol))
    return out


def hermiticity_checks(basis: FockBasis, D: DerivativeStencil, tol=1e-12) -> list[CheckRecord]:
    ops = dict((f"T_{k}", v) for k, v in generator_operators(basis, D).items())
    nops = number_operators(basis)
    ops["n"] = nops.n_total
    ops["m"] = m_total(basis, D)
    for j in D.interior:
        ops[f"n_omega[{j + 1}]"] = nops.n_omega[j]
        ops[f"m_omega[{j + 1}]"] = m_density(basis, D, j)
    out = []
    for name, op in ops.items():
        out.append(exact_record(f"fock.hermitian.{name}", "hermitian observable",
                                op.hermiticity_defect(), max(op.norm(), 1e-300), tol))
    return out


def redistribution_profile(basis: FockBasis, D: DerivativeStencil, k: int, packet: OnePacket):
    """``(1/i hbar) <[T_k, n_omega[j]]>`` and its Doppler-form target on ``D.interior``.

    Targets: 0 for k=0, ``D(omega <n_omega>)`` for k=1, ``2 D(omega <m_omega>)`` for k=2.
    """
    packet.require_inside(D.interior)
    g = basis.grid
    psi = packet.to_state(basis)
    T = realize(qf_T_k(g, k, D), basis)
    nops = number_operators(basis).n_omega
    I = D.interior
    lhs = np.array([(commutator(T, nops[j]).expectation(psi) / (1j * g.hbar)).real for j in range(g.M)])
    if k == 0:
        rhs = np.zeros(g.M)
    elif k == 1:
        rhs = D.apply(g.omega * packet.density)
    elif k == 2:
        mom = np.zeros(g.M)
        mom[I] = [m_density(basis, D, j).expectation(psi).real for j in I]
        rhs = 2 * D.apply(g.omega * mom)
    else:
        raise ValueError("k must be 0, 1 or 2")
    return lhs[I], np.real(rhs[I])


def number_redistribution_check(basis: FockBasis, D: DerivativeStencil, k: int,
                                packet: OnePacket | None = None, rtol: float = 0.3,
                                tol: float = 1e-12) -> list[CheckRecord]:
    if basis.n_max < 1:
        return [skip_record(f"fock.redistribution.T{k}", "spectral redistribution of n_omega")]
    if k == 0:
        T0 = realize(qf_T_k(basis.grid, 0, D), basis)
        worst = max(sparse_norm(commutator(T0.matrix, n.matrix))
                    for n in number_operators(basis).n_omega)
        return [exact_record("fock.redistribution.T0", "number density unchanged under translation",
                             worst, T0.norm(), tol)]
    lhs, rhs = redistribution_profile(basis, D, k, packet)
    err = float(np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs))
    ref = ("boost redistribution d(omega n_omega)" if k == 1
           else "acceleration redistribution 2 d(omega m_omega)")
    return [CheckRecord(f"fock.redistribution.T{k}", ref, lhs, rhs, float(np.linalg.norm(lhs - rhs)),
                        err, bool(err <= rtol), kind="discretization", tolerance=rtol)]


def canonical_checks(basis: FockBasis, D: DerivativeStencil, packet: OnePacket | None = None,
                     tol=1e-12) -> list[CheckRecord]:
    """Energy/position commutators.

    The graded identities ``[T_0, m] = i hbar n_S`` and
    ``[T_0, m_omega[j]] = i hbar n_S[j]`` hold exactly. The literal forms
    ``[T_0, m] = i hbar n`` and ``= i hbar 1`` on the one-particle sector are
    recorded as stated; they cannot hold on a finite lattice because a
    commutator with a diagonal ``T_0`` has zero diagonal.
    """
    if basis.n_max < 1:
        return [skip_record("fock.canonical", "energy/position canonical commutator")]
    g = basis.grid
    hb = g.hbar
    T0 = realize(qf_T_k(g, 0, D), basis)
    m = m_total(basis, D)
    C = commutator(T0.matrix, m.matrix)
    n = number_operators(basis).n_total
    out = [_comm_record("fock.T0_m_equals_ihbar_nS", "[T_0, m] = i hbar n (smoothed number, exact)",
                        T0, m, target=1j * hb * smoothed_number(basis, D).matrix, tol=tol)]
    worst = 0.0
    for j in D.interior:
        mj = m_density(basis, D, j)
        R = commutator(T0.matrix, mj.matrix) - 1j * hb * smoothed_density(basis, D, j).matrix
        worst = max(worst, sparse_norm(R) / (T0.norm() * mj.norm()))
    out.append(exact_record("fock.T0_m_omega_equals_ihbar_nS", "[T_0, m_omega] = i hbar n_omega (smoothed)",
                            worst, 1.0, tol))
    if packet is not None:
        packet.require_inside(D.interior)
        psi = packet.to_state(basis)
        res = np.linalg.norm((C - 1j * hb * n.matrix) @ psi)
        out.append(exact_record("fock.T0_m_equals_ihbar_n", "[T_0, m] = i hbar n on interior states",
                                res, hb * np.linalg.norm(n.matrix @ psi), tol,
                                note="literal form; holds only as the smoothed number n_S"))
    one = basis.totals == 1
    R = _restrict(C - 1j * hb * sp.identity(basis.dim), one)
    out.append(exact_record("fock.T0_m_identity_one_particle",
                            "[T_0, m] = i hbar on one-particle states",
                            sparse_norm(R), hb * np.sqrt(one.sum()), tol,
                            note="zero-trace obstruction on a finite sector"))
    return out


def position_ladder_check(basis: FockBasis, D: DerivativeStencil, tol=1e-12) -> list[CheckRecord]:
    """``[m, a_j] = i sum_l Da_jl a_l`` on every mode, with ``D`` itself on deep-interior modes."""
    if basis.n_max < 1:
        return [skip_record("fock.m_a", "position/annihilator commutator")]
    ops = mode_operators(basis)
    m = m_total(basis, D).matrix
    Da = D.antisymmetric
    deep = set(D.deep_interior.tolist())
    w_all, w_deep = 0.0, 0.0
    for j in range(basis.grid.M):
        C = commutator(m, ops.a[j])
        scale = sparse_norm(m) * sparse_norm(ops.a[j])
        target = sum(1j * Da[j, l] * ops.a[l] for l in np.nonzero(Da[j])[0])
        w_all = max(w_all, sparse_norm(C - target) / scale)
        if j in deep:
            target = sum(1j * D.matrix[j, l] * ops.a[l] for l in np.nonzero(D.matrix[j])[0])
            w_deep = max(w_deep, sparse_norm(C - target) / scale)
    return [exact_record("fock.m_a_antisymmetric", "[m, a] = i a' (antisymmetrized stencil)", w_all, 1.0, tol),
            exact_record("fock.m_a_stencil", "[m, a] = i a' on deep-interior modes", w_deep, 1.0, tol)]


def mn_closed_form(basis: FockBasis, D: DerivativeStencil, j: int, k: int) -> sp.csr_matrix:
    """``[m_omega[j], n_omega[k]]`` from the canonical relations, as a bilinear."""
    M = basis.grid.M
    Da = D.antisymmetric
    A = np.zeros((M, M), dtype=complex)
    A[:, j] += 0.5j * Da[j, :]
    A[j, :] -= 0.5j * Da[j, :]
    # [a_l^+ a_q, N_k] = (delta_qk - delta_lk) a_l^+ a_q
    W = np.zeros((M, M))
    W[:, k] += 1.0
    W[k, :] -= 1.0
    return mode_operators(basis).bilinear(A * W) / basis.grid.dnu**2


def mn_commutator_check(basis: FockBasis, D: DerivativeStencil, tol=1e-12) -> list[CheckRecord]:
    if basis.n_max < 1:
        return [skip_record("fock.mn_commutator", "commutator of position and number densities")]
    nops = number_operators(basis).n_omega
    worst, far = 0.0, 0.0
    width = D.band
    for j in D.interior:
        mj = m_density(basis, D, j)
        for k in range(basis.grid.M):
            brute = commutator(mj.matrix, nops[k].matrix)
            scale = mj.norm() * nops[k].norm()
            worst = max(worst, sparse_norm(brute - mn_closed_form(basis, D, j, k)) / scale)
            if abs(j - k) > width:
                far = max(far, sparse_norm(brute) / scale)
    return [exact_record("fock.mn_closed_form", "position/number density commutator, closed form",
                         worst, 1.0, tol),
            exact_record("fock.mn_disjoint_support", "position/number density commutator, disjoint stencil",
                         far, 1.0, tol)]


def phase_checks(basis: FockBasis, s: int | None = None, theta0: float = 0.3,
                 tol=1e-12) -> list[CheckRecord]:
    """Susskind-Glogower identities on the embedded basis, Pegg-Barnett on its mode space."""
    if basis.n_max < 1:
        return [skip_record("fock.phase", "phase exponential operators")]
    P = phase_operators(basis, SG)
    inner = basis.totals <= basis.n_max - 1
    I = sp.identity(basis.dim, dtype=complex)
    w_eed, w_ede, w_cross, w_dag = 0.0, 0.0, 0.0, 0.0
    M = basis.grid.M
    for j in range(M):
        e = P.e[j].matrix
        ed = e.conj().T
        w_eed = max(w_eed, sparse_norm(_restrict(e @ ed - I, inner)))
        w_ede = max(w_ede, sparse_norm(ed @ e - (I - P.vacuum_projectors[j].matrix)))
        for k in range(j + 1, M):
            w_cross = max(w_cross, sparse_norm(commutator(e, P.e[k].matrix)))
            w_dag = max(w_dag, sparse_norm(_restrict(commutator(e, P.e[k].matrix.conj().T), inner)))
    out = [exact_record("fock.phase.SG_e_edag", "e e^+ = 1 (Susskind-Glogower)", w_eed, 1.0, tol),
           exact_record("fock.phase.SG_edag_e", "e^+ e = 1 - Pi_0 (Susskind-Glogower)", w_ede, 1.0, tol),
           exact_record("fock.phase.cross_mode", "phase exponentials at distinct frequencies commute",
                        w_cross, 1.0, tol),
           exact_record("fock.phase.cross_mode_dag", "e_j and e_k^+ commute for j != k",
                        w_dag, 1.0, tol)]
    s = basis.n_max if s is None else s
    U = pb_mode_matrix(s, theta0)
    Id = sp.identity(s + 1, dtype=complex)
    uni = max(sparse_norm(U @ U.conj().T - Id), sparse_norm(U.conj().T @ U - Id))
    out.append(exact_record("fock.phase.PB_unitary", "e unitary (Pegg-Barnett)", uni, 1.0, tol))
    Uj = sp.kron(U, Id)
    Uk = sp.kron(Id, U)
    out.append(exact_record("fock.phase.PB_cross_mode", "Pegg-Barnett exponentials on distinct modes commute",
                            sparse_norm(commutator(Uj, Uk)), 1.0, tol))
    phase_operators(basis, PB, s=s, theta0=theta0)  # construction contract
    return out


def phase_time_checks(basis: FockBasis, D: DerivativeStencil, packet: OnePacket,
                      rtol=0.05, tol=1e-12, convention: str = SG) -> list[CheckRecord]:
    """``<delta'_j>`` on a plane-wave packet and the vacuum value of ``sqrt(n) delta' sqrt(n)``."""
    if basis.n_max < 2:
        # e_j^+ lifts one-particle states into the two-quantum sector
        return [skip_record("fock.phase_time", "phase time delta'", "needs n_max >= 2")]
    packet.require_inside(D.interior)
    P = phase_operators(basis, convention)
    psi = packet.to_state(basis)
    vac = basis.vacuum()
    g = basis.grid
    ratios, weights, vac_worst = [], [], 0.0
    for j in D.interior:
        dp = delta_prime(P, D, j)
        sq = sqrt_density(basis, j)
        vac_worst = max(vac_worst, abs((sq @ dp @ sq).expectation(vac)))
        N = g.dnu * packet.density[j]
        if N > 1e-8 * g.dnu * packet.density.max():
            ratios.append(dp.expectation(psi).real / N)
            weights.append(N)
    u_est = float(np.average(ratios, weights=weights))
    u0 = packet.center_u
    err = abs(u_est - u0) / max(abs(u0), packet.spread_u)
    return [exact_record("fock.phase_time.vacuum", "sqrt(n) delta' sqrt(n) vanishes on the vacuum",
                         vac_worst, 1.0, tol),
            CheckRecord("fock.phase_time.packet_center", "phase time reads the packet position",
                        u_est, u0, abs(u_est - u0), err, bool(err <= rtol), kind="discretization",
                        tolerance=rtol)]


def newton_wigner_checks(basis: FockBasis, D: DerivativeStencil, packet: OnePacket,
                         tol=1e-12, n_u: int | None = None) -> list[CheckRecord]:
    """Position operator on one-particle amplitudes and the normal-ordering identity."""
    if basis.n_max < 1:
        return [skip_record("fock.newton_wigner", "Newton-Wigner position")]
    if np.setdiff1d(packet.support, D.deep_interior).size:
        raise BoundarySupportError("packet must sit on rows where D is antisymmetric")
    g = basis.grid
    m = m_total(basis, D)
    nops = number_operators(basis).n_omega
    c = packet.amplitudes
    psi = packet.to_state(basis)
    one = np.nonzero(basis.totals == 1)[0]
    modes = [int(np.argmax(basis.states[i])) for i in one]
    out_amp = np.zeros(g.M, dtype=complex)
    out_amp[modes] = (m.matrix @ psi)[one]
    target = -1j * (D.matrix @ c)
    out = [exact_record("fock.nw.amplitudes", "m acts as -i d/domega on one-particle amplitudes",
                        np.linalg.norm(out_amp - target), np.linalg.norm(target), tol)]

    sector = basis.totals <= 1
    w_sector, w_op, w_quartic = 0.0, 0.0, 0.0
    red = 0.0
    one_mask = basis.totals == 1
    for j in D.interior:
        mj = m_density(basis, D, j)
        anti = 0.5 * anticommutator(m.matrix, nops[j].matrix)
        quart = normal_ordered_mn(basis, D, j).matrix
        scale = m.norm() * nops[j].norm()
        w_sector = max(w_sector, sparse_norm(_restrict(anti - mj.matrix, sector)) / scale)
        w_op = max(w_op, sparse_norm(anti - mj.matrix - quart) / scale)
        w_quartic = max(w_quartic, sparse_norm(quart @ sp.diags(sector.astype(float))) / scale)
        sq = sqrt_density(basis, j).matrix
        red = max(red, sparse_norm(_restrict(sq @ m.matrix @ sq - mj.matrix, one_mask))
                  / sparse_norm(_restrict(mj.matrix, one_mask)))
    out += [exact_record("fock.nw.anticommutator_sector", "1/2{m, n_omega} = m_omega on one-particle states",
                         w_sector, 1.0, tol),
            exact_record("fock.nw.anticommutator_operator", "1/2{m, n_omega} = m_omega + :m n_omega:",
                         w_op, 1.0, tol),
            exact_record("fock.nw.quartic_annihilates", ":m n_omega: vanishes on n <= 1",
                         w_quartic, 1.0, tol),
            exact_record("fock.nw.sqrt_form", "m_omega = sqrt(n_omega) m sqrt(n_omega) on one-particle states",
                         red, 1.0, tol, note="sqrt(N_j) m sqrt(N_j) has zero one-particle diagonal")]
    out.append(position_representation_check(D, packet, n_u))
    return out


def u_representation(grid, amplitudes_f, u) -> np.ndarray:
    """``psi(u) = sum_j dnu f_j exp(-i omega_j u)``."""
    return np.exp(-1j * np.outer(u, grid.omega)) @ (grid.dnu * np.asarray(amplitudes_f))


def position_representation_check(D: DerivativeStencil, packet: OnePacket,
                                  n_u: int | None = None) -> CheckRecord:
    """Fourier image of ``-i D f`` against ``u psi(u)`` over one period.

    The bound is the stencil truncation estimated by comparing order p with
    order p+2 plus the wrap-around mass beyond half a period.
    """
    g = D.grid
    L = g.u_period()
    n_u = n_u or 8 * g.M
    u = -L / 2 + L * np.arange(n_u) / n_u
    f = packet.f
    lhs = u_representation(g, -1j * D.apply(f), u)
    psi = u_representation(g, f, u)
    rhs = u * psi
    err = float(np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs))
    hi = derivative_matrix(g, D.order + 2) if g.M >= D.order + 4 else D
    stencil_est = np.linalg.norm(D.apply(f) - hi.apply(f)) / np.linalg.norm(hi.apply(f))
    edge = np.abs(u) > 0.4 * L
    wrap = np.sqrt(np.sum(np.abs(rhs[edge]) ** 2) / np.sum(np.abs(rhs) ** 2))
    bound = float(2 * stencil_est + 2 * wrap + 1e-12)
    return CheckRecord("fock.nw.position_representation", "position representation of m is u f(u)",
                       err, bound, float(np.linalg.norm(lhs - rhs)), err, bool(err <= bound),
                       kind="aliasing", tolerance=bound,
                       note=f"stencil estimate {stencil_est:.3e}, wrap mass {wrap:.3e}")


def dual_sector_checks(basis_phi: FockBasis, basis_psi: FockBasis, D: DerivativeStencil,
                       tol=1e-12) -> list[CheckRecord]:
    if basis_phi.n_max < 1:
        return [skip_record("fock.dual_sector", "light-cone time and space operators")]
    L = dual_sector_operators(basis_phi, basis_psi, D)
    pb = L.basis
    hb = basis_phi.grid.hbar
    nS = [smoothed_number(b, D).matrix for b in (basis_phi, basis_psi)]
    nS_sum = (sp.kron(nS[0], sp.identity(basis_psi.dim)) + sp.kron(sp.identity(basis_phi.dim), nS[1]))
    out = [_comm_record("fock.dual.E_tau", "[E, tau] = i hbar n / 2 (smoothed, exact)",
                        L.E, L.tau, target=0.5j * hb * nS_sum, tol=tol),
           _comm_record("fock.dual.P_xi", "[P, xi] = -i hbar n / 2 (smoothed, exact)",
                        L.P, L.xi, target=-0.5j * hb * nS_sum, tol=tol)]
    vac = pb.product_state(basis_phi.vacuum(), basis_psi.vacuum())
    e_vac = L.E.expectation(vac).real
    want = sum(realize(qf_T_k(b.grid, 0, D), b).expectation(b.vacuum()).real
               for b in (basis_phi, basis_psi))
    out.append(exact_record("fock.dual.vacuum_energy", "E on the vacuum is the sum of sector energies",
                            abs(e_vac - want), abs(want), tol))
    worst = 0.0
    g = basis_phi.grid
    for j in range(g.M):
        occ = np.zeros(g.M, dtype=int)
        occ[j] = 1
        s1 = np.zeros(basis_phi.dim, dtype=complex)
        s1[basis_phi.state_index(occ)] = 1.0
        st = pb.product_state(s1, basis_psi.vacuum())
        worst = max(worst, np.linalg.norm(L.P.apply(st) - hb * g.omega[j] * st) / (hb * g.omega[j]))
    out.append(exact_record("fock.dual.P_one_particle", "P on a phi-sector quantum is hbar omega",
                            worst, 1.0, tol))
    for name, op in (("E", L.E), ("P", L.P), ("tau", L.tau), ("xi", L.xi)):
        out.append(exact_record(f"fock.hermitian.{name}", "hermitian observable",
                                op.hermiticity_defect(), max(op.norm(), 1e-300), tol))
    return out
