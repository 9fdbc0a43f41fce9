import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from accelfield.fock.basis import build_basis
from accelfield.fock.operators import mode_operators, realize
from accelfield.grid import derivative_matrix, make_grid
from accelfield.quadform import (GridMismatch, QuadraticForm, field_component, qf_act_on_field,
                                 qf_commutator, qf_pair_norm, qf_T_k, qf_T_omega,
                                 qf_vacuum_expectation)
from accelfield.report import oracle_residual, random_form


def test_T0_diagonal(grid16):
    T0 = qf_T_omega(grid16, 0)
    assert np.allclose(T0.A, np.diag(grid16.hbar * grid16.omega))
    assert qf_pair_norm(T0) == 0 and np.linalg.norm(T0.C) == 0
    assert qf_vacuum_expectation(T0) == pytest.approx(0.5 * grid16.omega.sum())


def test_T0_realized_number_form():
    g = make_grid(5, 0.7, hbar=1.3)
    b = build_basis(g, 3)
    ops = mode_operators(b)
    T0 = realize(qf_T_omega(g, 0), b).matrix.toarray()
    want = sum(g.hbar * w * N.toarray() for w, N in zip(g.omega, ops.N))
    want += 0.5 * g.hbar * g.omega.sum() * np.eye(b.dim)
    assert np.allclose(T0, want, atol=1e-13)


def test_negative_m_pair_support():
    g = make_grid(4, 0.5)
    T = qf_T_omega(g, -2)
    nz = np.argwhere(np.abs(T.B) > 1e-14)
    assert nz.tolist() == [[0, 0]]
    assert np.linalg.norm(T.C) == 0


@pytest.mark.parametrize("m", [0, 1, 3, 7])
def test_positive_m_no_creation(grid16, m):
    assert qf_pair_norm(qf_T_omega(grid16, m)) == 0


@pytest.mark.parametrize("m", [1, 2, 5, 11])
def test_adjoint_pairs(grid16, m):
    a = qf_T_omega(grid16, m).adjoint()
    b = qf_T_omega(grid16, -m)
    assert np.allclose(a.H, b.H) and a.c == pytest.approx(b.c)


def test_clipped_flag(grid16):
    assert not qf_T_omega(grid16, 0).clipped
    assert qf_T_omega(grid16, 3).clipped


def test_T_k_zero_is_T0(grid16):
    assert np.allclose(qf_T_k(grid16, 0).H, qf_T_omega(grid16, 0).H)


@pytest.mark.parametrize("k", [0, 1, 2, 3])
@pytest.mark.parametrize("p", [2, 4])
def test_generators_hermitian(k, p):
    g = make_grid(16, 0.5)
    T = qf_T_k(g, k, derivative_matrix(g, p))
    assert T.is_hermitian()
    assert abs(np.imag(T.c)) < 1e-12


@pytest.mark.parametrize("k", [0, 1, 2])
def test_pair_free_low_generators(grid16, k):
    T = qf_T_k(grid16, k)
    assert qf_pair_norm(T) <= 1e-12 * np.linalg.norm(T.A)


def test_T3_pairs_converge():
    scaled = []
    for M in (16, 32, 64):
        g = make_grid(M, 8.0 / M)
        scaled.append(g.domega**2 * qf_pair_norm(qf_T_k(g, 3)))
    # the only pair created is (omega_1, omega_1), weight hbar / (2 domega^2)
    assert scaled == pytest.approx([0.5, 0.5, 0.5], rel=1e-12)


def test_wide_stencil_rejected():
    with pytest.raises(ValueError):
        qf_T_k(make_grid(4, 1.0), 13)


def test_number_pair_commutator():
    g = make_grid(4, 1.0)
    E = np.zeros((4, 4))
    E[0, 0] = 1.0
    n1 = QuadraticForm.from_blocks(g, A=E)
    aa = QuadraticForm.from_blocks(g, C=2 * E)   # (1/2) C a a = a_1 a_1
    R = qf_commutator(n1, aa)
    assert np.allclose(R.H, (-2 * aa).H) and R.c == 0
    b_small, b_big = build_basis(g, 4), build_basis(g, 6)
    assert oracle_residual(n1, aa, 4) < 1e-12
    assert b_small.dim < b_big.dim


def test_grid_mismatch():
    a = qf_T_omega(make_grid(4, 1.0), 0)
    b = qf_T_omega(make_grid(4, 0.5), 0)
    with pytest.raises(GridMismatch):
        qf_commutator(a, b)
    with pytest.raises(GridMismatch):
        qf_act_on_field(a, np.zeros(3))


def test_vacuum_expectation_diag():
    g = make_grid(4, 1.0)
    h = np.array([1.0, 2.0, 3.0, 5.0])
    assert qf_vacuum_expectation(QuadraticForm.from_blocks(g, A=np.diag(h))) == pytest.approx(5.5)


def test_T0_T1_vacuum(grid16):
    c = qf_vacuum_expectation(qf_commutator(qf_T_k(grid16, 0), qf_T_k(grid16, 1)))
    assert abs(c) <= 1e-12


def test_field_action_T0(grid16):
    v = field_component(grid16, 5)
    assert np.allclose(qf_act_on_field(qf_T_omega(grid16, 0), v), -grid16.omega[4] * v)
    assert np.allclose(qf_act_on_field(QuadraticForm.scalar(grid16, 3.0), v), 0)


@pytest.mark.parametrize("m, s", [(1, 2), (-1, 3), (2, -3), (-2, 1)])
def test_field_action_shift_brute_force(m, s):
    g = make_grid(4, 0.5)
    T = qf_T_omega(g, m)
    w = qf_act_on_field(T, field_component(g, s))
    t = m + s
    assert np.allclose(w, -g.hbar * (m + s) * g.domega * field_component(g, t))
    # same action in Fock space, on sectors away from the cap
    b = build_basis(g, 3)
    ops = mode_operators(b)
    ladder = ops.a + ops.adag

    def lin(vec):
        return sum(c * x for c, x in zip(vec, ladder) if c != 0)

    X = realize(T, b).matrix
    phi = lin(field_component(g, s))
    brute = (X @ phi - phi @ X).toarray()
    keep = b.totals <= 1
    assert np.allclose(brute[np.ix_(keep, keep)], lin(w).toarray()[np.ix_(keep, keep)], atol=1e-12)


def test_central_charge_middle_third():
    from accelfield.convergence import central_charge_ratios
    errs = []
    for M in (16, 32, 64):
        _, r = central_charge_ratios(M)
        errs.append(np.max(np.abs(r - 1)))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] <= 0.05


def test_virasoro_interior_exact():
    from accelfield.convergence import virasoro_error
    for M in (16, 32):
        assert virasoro_error(M) <= 1e-12


def test_closure_unclipped_entries():
    g = make_grid(16, 0.5)
    m1, m2 = 2, -3
    R = qf_commutator(qf_T_omega(g, m1), qf_T_omega(g, m2))
    T = qf_T_omega(g, m1 + m2)
    target = (g.hbar * (m1 - m2) * g.domega) * T
    # entries touching modes within |m| of the top are affected by clipping
    keep = np.arange(0, g.M - 4)
    idx = np.concatenate([keep, keep + g.M])
    assert np.allclose(R.H[np.ix_(idx, idx)], target.H[np.ix_(idx, idx)], atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_self_commutator_zero(seed):
    rng = np.random.default_rng(seed)
    Q = random_form(make_grid(5, 0.3), rng)
    R = qf_commutator(Q, Q)
    assert np.allclose(R.H, 0) and R.c == 0


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_commutator_antisymmetric_and_jacobi(seed):
    rng = np.random.default_rng(seed)
    g = make_grid(4, 0.8)
    X, Y, Z = (random_form(g, rng) for _ in range(3))
    assert np.allclose(qf_commutator(X, Y).H, -qf_commutator(Y, X).H)
    J = (qf_commutator(X, qf_commutator(Y, Z)) + qf_commutator(Y, qf_commutator(Z, X))
         + qf_commutator(Z, qf_commutator(X, Y)))
    assert np.allclose(J.H, 0, atol=1e-9)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), n_max=st.integers(1, 3))
def test_oracle_property(seed, n_max):
    rng = np.random.default_rng(seed)
    g = make_grid(4, float(rng.uniform(0.2, 2.0)))
    assert oracle_residual(random_form(g, rng), random_form(g, rng), n_max) <= 1e-10
