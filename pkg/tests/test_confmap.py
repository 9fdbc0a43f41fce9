import numpy as np
import pytest
from scipy import special

from accelfield.confmap import (NonMonotonicMap, Quadrature, bogoliubov, doppler_experiment,
                                log_vector_field, make_map, mellin_oracle, mellin_oscillatory,
                                perturbation_beta, perturbation_scaling, planck,
                                rindler_bogoliubov, rindler_planck_check)
from accelfield.fock.basis import build_basis
from accelfield.fock.states import BoundarySupportError, gaussian_packet
from accelfield.grid import derivative_matrix, make_grid


def test_homographic_translation_reduction():
    m = make_map("homographic", a=1, b=0.7, c=0, d=1)
    u = np.linspace(-3, 3, 7)
    assert np.allclose(m(u), u + 0.7)


def test_homographic_determinant():
    with pytest.raises(ValueError):
        make_map("homographic", a=2, b=0, c=0, d=1)


def test_homographic_pole_in_domain():
    with pytest.raises(ValueError):
        make_map("homographic", a=1, b=0, c=1, d=1, domain=(-5, 5))
    make_map("homographic", a=1, b=0, c=1, d=1, domain=(0, 5))


def test_rindler_monotone():
    m = make_map("rindler", accel=2.0)
    u = np.linspace(-5, 5, 101)
    assert np.all(np.diff(m(u)) > 0)
    assert np.allclose(m(u), -np.exp(-2 * u) / 2)
    with pytest.raises(ValueError):
        make_map("rindler", accel=-1)


def test_polynomial_monotonic_guard():
    with pytest.raises(NonMonotonicMap):
        make_map("polynomial", k=2, eps=0.5, domain=(-5, 5))


def test_unknown_kind():
    with pytest.raises(ValueError):
        make_map("spiral")


def test_identity_overlaps(grid16):
    bp = bogoliubov(make_map("identity"), grid16)
    assert bp.beta_norm <= 1e-8
    assert np.allclose(np.diag(bp.alpha), 1.0, atol=1e-8)
    off = bp.alpha - np.diag(np.diag(bp.alpha))
    assert np.max(np.abs(off)) <= 2 * bp.meta["spectral_leakage"]


def test_translation_phase(grid16):
    b = 1.3
    bp = bogoliubov(make_map("translation", b=b), grid16)
    assert bp.beta_norm <= 1e-8
    assert np.allclose(np.diag(bp.alpha), np.exp(1j * grid16.omega * b), atol=1e-8)


def test_translation_composition(grid16):
    a1 = bogoliubov(make_map("translation", b=0.4), grid16).alpha
    a2 = bogoliubov(make_map("translation", b=0.9), grid16).alpha
    a12 = bogoliubov(make_map("translation", b=1.3), grid16).alpha
    assert np.allclose(np.diag(a1) * np.diag(a2), np.diag(a12), atol=1e-8)


def test_gaussian_window_oracle(grid16):
    # alpha for a translation is the window's Fourier transform off the diagonal
    sig = 5 / grid16.domega
    bp = bogoliubov(make_map("translation", b=0.0), grid16, quad=Quadrature(sigma=sig))
    w = grid16.omega
    want = np.sqrt(w[None, :] / w[:, None]) * np.exp(-(sig**2) * (w[None, :] - w[:, None]) ** 2 / 2)
    assert np.allclose(bp.alpha, want, atol=1e-10)


def test_dilation_bands(grid16):
    lam = np.log(2.0)
    bp = bogoliubov(make_map("dilation", lam=lam), grid16)
    assert bp.beta_norm <= 1e-8
    # input omega_j lands on output frequency e^{-lam} omega_j (mode j/2)
    for j in range(1, 16, 2):
        assert np.argmax(np.abs(bp.alpha[:, j])) == (j + 1) // 2 - 1


@pytest.mark.parametrize("s", [0.3j, 1.5j, -2j, 0.4 + 0.8j])
def test_mellin_against_gamma(s):
    assert abs(mellin_oscillatory(s) - mellin_oracle(s)) < 1e-8
    assert mellin_oracle(s) == pytest.approx(special.gamma(s) * np.exp(1j * np.pi * s / 2))


def test_rindler_planck_decade():
    r = rindler_planck_check(1.0, 2.0, np.geomspace(0.1, 1.0, 8))
    assert r["rel_err"].max() <= 0.05
    assert r["boltzmann_rel_err"].max() <= 1e-6


def test_rindler_inertial_frequency_scaling():
    # |beta|^2 scales as 1/wbar at fixed Rindler frequency
    bp = rindler_bogoliubov(1.0, [0.5], [1.0, 2.0, 4.0])
    b2 = np.abs(bp.beta[:, 0]) ** 2
    assert np.allclose(b2 * np.array([1.0, 2.0, 4.0]), b2[0])


def test_bogoliubov_dispatches_rindler(grid16):
    bp = bogoliubov(make_map("rindler", accel=1.0), grid16)
    assert bp.meta["rule"].startswith("Mellin")
    assert planck(1.0, 1.0) == pytest.approx(1 / np.expm1(2 * np.pi))


def test_log_vector_field():
    assert log_vector_field(2, 0.1) == {2: 0.1, 3: pytest.approx(-0.01)}
    assert log_vector_field(3, 0.0) == {3: 0.0}


def test_perturbation_zero(grid16):
    assert perturbation_beta(2, 0.0, grid16) == 0.0


@pytest.mark.parametrize("k, lo, hi", [(2, 1.9, 10.0), (3, 0.8, 1.2)])
def test_perturbation_slopes(grid16, k, lo, hi):
    r = perturbation_scaling(k, [1e-4, 1e-3, 1e-2], grid16)
    assert lo <= r["slope"] <= hi


def test_perturbation_nonmonotonic(grid16):
    with pytest.raises(NonMonotonicMap):
        perturbation_beta(2, 0.5, grid16)


def _doppler(u0, M=64):
    g = make_grid(M, 8.0 / M)
    D = derivative_matrix(g)
    pk = gaussian_packet(g, 4.0, 0.5, u0, support=D.interior, cut=1e-10)
    return doppler_experiment(pk, 0.01, build_basis(g, 1), D)


def test_doppler_shift():
    r = _doppler(1.5)
    assert r["rel_l2"] <= 0.10
    assert r["m_rel_err"] <= 0.02


def test_doppler_zero_position():
    r = _doppler(0.0)
    assert np.max(np.abs(r["shift"])) < 1e-12
    assert r["resid_vs_boost"] < 1e-10


def test_doppler_refines():
    assert _doppler(1.5, 32)["rel_l2"] > _doppler(1.5, 64)["rel_l2"]


def test_doppler_boundary():
    g = make_grid(16, 0.5)
    D = derivative_matrix(g)
    with pytest.raises(BoundarySupportError):
        doppler_experiment(gaussian_packet(g, 1.0, 0.5, 1.0), 0.01, build_basis(g, 1), D)
