from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from accelfield.grid import (Constants, central_weights, derivative_matrix, fd_weights,
                             make_grid)


def test_omega_values():
    g = make_grid(4, 0.5)
    assert np.array_equal(g.omega, [0.5, 1.0, 1.5, 2.0])
    assert make_grid(64, 0.125).omega[-1] == 8.0
    assert g.dnu == pytest.approx(0.5 / (2 * np.pi))


@pytest.mark.parametrize("M, dw", [(1, 0.5), (3, 0.5), (8, 0.0), (8, -1.0)])
def test_bad_grid(M, dw):
    with pytest.raises(ValueError):
        make_grid(M, dw)


def test_hbar_positive():
    with pytest.raises(ValueError):
        Constants(hbar=0.0)
    assert make_grid(4, 1.0, hbar=2.5).hbar == 2.5


def test_integrate_measure():
    g = make_grid(400, 0.05)
    # int_0^inf dw/2pi exp(-w) = 1/2pi, rectangle rule from w = dw
    assert g.integrate(np.exp(-g.omega)) == pytest.approx(1 / (2 * np.pi), rel=0.03)


def test_fd_weights_exact():
    w = fd_weights([-1, 0, 1], 1)
    assert list(w) == [Fraction(-1, 2), 0, Fraction(1, 2)]
    offs, w2 = central_weights(2, 2)
    assert list(offs) == [-1, 0, 1] and list(w2) == [1, -2, 1]
    offs, w3 = central_weights(3, 2)
    assert list(offs) == [-2, -1, 0, 1, 2]
    assert list(w3) == [-0.5, 1, 0, -1, 0.5]


def test_central_row_p2(stencil16):
    D = stencil16.matrix
    j = 7
    assert D[j, j - 1] == -1.0 and D[j, j + 1] == 1.0 and D[j, j] == 0.0


@pytest.mark.parametrize("p", [2, 4])
def test_interior_antisymmetric(p):
    D = derivative_matrix(make_grid(24, 0.3), p)
    I = D.interior
    sub = D.matrix[np.ix_(I, I)]
    assert np.array_equal(sub, -sub.T)
    assert np.allclose(D.apply(D.grid.omega)[I], 1.0, rtol=0, atol=1e-13)


def test_quadratic_exact(stencil16):
    om = stencil16.grid.omega
    I = stencil16.interior
    assert np.allclose(stencil16.apply(om**2)[I], 2 * om[I], rtol=0, atol=1e-12)


def test_deep_interior_columns(stencil16):
    D = stencil16.matrix
    for j in stencil16.deep_interior:
        assert np.array_equal(D[:, j], -D[j, :])
    assert stencil16.band == 2


def test_too_small():
    with pytest.raises(ValueError):
        derivative_matrix(make_grid(5, 1.0), 4)
    with pytest.raises(ValueError):
        derivative_matrix(make_grid(8, 1.0), 3)
    derivative_matrix(make_grid(4, 0.5), 2)


@pytest.mark.parametrize("p", [2, 4])
def test_order_p_convergence(p):
    u0 = 0.7
    errs, hs = [], []
    for M in (32, 64, 128):
        g = make_grid(M, 8.0 / M)
        D = derivative_matrix(g, p)
        f = np.exp(1j * g.omega * u0)
        err = np.abs(D.apply(f) - 1j * u0 * f)[D.interior].max()
        errs.append(err)
        hs.append(g.domega)
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert abs(slope - p) <= 0.3
    assert errs[0] / errs[1] == pytest.approx(2**p, rel=0.1)


@settings(max_examples=30, deadline=None)
@given(M=st.integers(6, 40), dw=st.floats(0.05, 3.0), p=st.sampled_from([2, 4]))
def test_linear_exact_property(M, dw, p):
    if M < p + 2:
        return
    D = derivative_matrix(make_grid(M, dw), p)
    # every row (one-sided included) is exact on linear data
    assert np.allclose(D.apply(3.0 * D.grid.omega + 1.0), 3.0, atol=1e-9)
