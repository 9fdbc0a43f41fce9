import numpy as np
import pytest
import scipy.sparse as sp

from accelfield.fock.basis import DimensionCapExceeded, basis_dimension, build_basis
from accelfield.fock.checks import (generator_operators, hermiticity_checks, invariance_checks,
                                    number_redistribution_check, redistribution_profile)
from accelfield.fock.operators import (FockOperator, commutator, mode_operators, number_operators,
                                       realize)
from accelfield.fock.states import (BoundarySupportError, OnePacket, coherent_like_state,
                                    gaussian_packet, mode_packet)
from accelfield.grid import derivative_matrix, make_grid
from accelfield.quadform import GridMismatch, QuadraticForm, qf_T_k


@pytest.mark.parametrize("M, n, dim", [(4, 2, 15), (16, 4, 4845), (5, 0, 1)])
def test_basis_dimension(M, n, dim):
    b = build_basis(make_grid(max(M, 4), 1.0), n)
    assert b.dim == dim == basis_dimension(max(M, 4), n)


def test_two_mode_count():
    # the stars-and-bars count C(M + N, N) at M = 2, N = 2
    assert basis_dimension(2, 2) == 6


def test_basis_order_and_index():
    b = build_basis(make_grid(4, 1.0), 2)
    assert b.states[0].tolist() == [0, 0, 0, 0]
    assert all(tuple(s) <= tuple(t) for s, t in zip(b.states.tolist(), b.states[1:].tolist()))
    for i, s in enumerate(b.states):
        assert b.state_index(s) == i


def test_dim_cap():
    with pytest.raises(DimensionCapExceeded):
        build_basis(make_grid(32, 1.0), 4, dim_cap=1000)
    with pytest.raises(ValueError):
        build_basis(make_grid(4, 1.0), -1)


@pytest.fixture(scope="module")
def b43():
    return build_basis(make_grid(4, 0.5), 3)


def test_ccr_truncated(b43):
    ops = mode_operators(b43)
    inner = sp.diags((b43.totals <= b43.n_max - 1).astype(float))
    for j in range(4):
        for k in range(4):
            C = (ops.a[j] @ ops.adag[k] - ops.adag[k] @ ops.a[j]).toarray()
            want = np.eye(b43.dim) * (j == k)
            assert np.allclose((inner @ (C - want) @ inner), 0)
    # the top sector shows the truncation defect
    C = (ops.a[0] @ ops.adag[0] - ops.adag[0] @ ops.a[0]).toarray()
    top = np.nonzero(b43.totals == b43.n_max)[0]
    assert not np.allclose(C[np.ix_(top, top)], np.eye(len(top)))


def test_number_eigenvalues(b43):
    ops = mode_operators(b43)
    nums = number_operators(b43)
    psi = np.zeros(b43.dim)
    psi[b43.state_index([1, 0, 1, 0])] = 1
    for j in range(4):
        assert ops.N[j] @ psi @ psi == (1 if j in (0, 2) else 0)
    assert nums.n_total.expectation(psi) == 2
    assert np.allclose(nums.n_omega[0].expectation(psi), 1 / b43.grid.dnu)
    vac = b43.vacuum()
    assert all(np.linalg.norm(a @ vac) == 0 for a in ops.a)


def test_realize_scalar_and_mismatch(b43):
    Q = QuadraticForm.scalar(b43.grid, 2.5)
    assert np.allclose(realize(Q, b43).matrix.toarray(), 2.5 * np.eye(b43.dim))
    with pytest.raises(GridMismatch):
        realize(QuadraticForm.scalar(make_grid(4, 1.0), 1.0), b43)


def test_operator_shape_guard(b43):
    with pytest.raises(ValueError):
        FockOperator(sp.identity(3), b43)


def test_realized_generators(grid16, stencil16):
    b = build_basis(grid16, 4)
    T = generator_operators(b, stencil16)
    n = number_operators(b).n_total
    for k in (0, 1, 2):
        assert commutator(T[k], n).norm() <= 1e-12 * T[k].norm() * n.norm()
        assert T[k].check_hermitian()
    assert commutator(T[3], n).norm() > 1e-6 * T[3].norm() * n.norm()
    vac = b.vacuum()
    assert T[0].expectation(vac).real == pytest.approx(0.5 * grid16.omega.sum())
    img = T[3].apply(vac)
    assert np.linalg.norm(img[b.totals == 2]) > 1e-6


def test_invariance_records(grid16, stencil16):
    recs = invariance_checks(build_basis(grid16, 2), stencil16)
    assert all(r.passed for r in recs), [r.check_id for r in recs if not r.passed]
    skip = invariance_checks(build_basis(grid16, 0), stencil16)
    assert skip[0].kind == "skip"


def test_hermiticity_records():
    g = make_grid(8, 0.5)
    recs = hermiticity_checks(build_basis(g, 2), derivative_matrix(g))
    assert recs and all(r.passed for r in recs)


def test_translation_keeps_density(grid16, stencil16):
    r = number_redistribution_check(build_basis(grid16, 2), stencil16, 0)[0]
    assert r.passed and r.computed == 0


def test_packet_normalization(grid16):
    with pytest.raises(ValueError):
        OnePacket(grid16, np.ones(16))
    pk = mode_packet(grid16, 3)
    assert grid16.dnu * np.sum(pk.density) == pytest.approx(1)


def test_packet_boundary_rejected(grid16, stencil16):
    pk = gaussian_packet(grid16, 1.0, 0.5)
    with pytest.raises(BoundarySupportError):
        redistribution_profile(build_basis(grid16, 1), stencil16, 1, pk)


def test_packet_center():
    g = make_grid(64, 0.125)
    pk = gaussian_packet(g, 4.0, 0.5, u0=1.7)
    assert pk.center_u == pytest.approx(1.7)
    assert pk.spread_u == pytest.approx(1.0, rel=1e-6)


def test_coherent_like_state_normalized(b43):
    psi = coherent_like_state(b43, [0.3, 0.1j, 0, 0.2])
    assert np.linalg.norm(psi) == pytest.approx(1.0)


def test_boost_doppler_profile():
    g = make_grid(64, 0.125)
    D = derivative_matrix(g)
    pk = gaussian_packet(g, 4.0, 0.5, 0.8, support=D.interior, cut=1e-10)
    lhs, rhs = redistribution_profile(build_basis(g, 1), D, 1, pk)
    assert np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs) < 0.02
