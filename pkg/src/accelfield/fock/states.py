from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from ..grid import FrequencyGrid
from .basis import FockBasis

NORM_TOL = 1e-12


class BoundarySupportError(ValueError):
    """Packet amplitude reaches modes excluded from exactness claims."""


@dataclass(frozen=True)
class OnePacket:
    """1-particle spectral amplitudes ``f[omega_j]`` with ``sum dnu |f|^2 = 1``."""

    grid: FrequencyGrid
    f: np.ndarray

    def __post_init__(self):
        norm = self.grid.dnu * np.sum(np.abs(self.f) ** 2)
        if abs(norm - 1) > 1e-10:
            raise ValueError(f"packet not normalized: sum dnu |f|^2 = {norm}")

    @property
    def amplitudes(self) -> np.ndarray:
        """Coefficients on the discrete 1-particle states ``a_j^+ |vac>``."""
        return np.sqrt(self.grid.dnu) * self.f

    @property
    def support(self) -> np.ndarray:
        return np.nonzero(self.f)[0]

    @property
    def density(self) -> np.ndarray:
        """``<n_omega[j]>`` in this state."""
        return np.abs(self.f) ** 2

    @property
    def center_u(self) -> float:
        """Newton-Wigner centre ``int dw/2pi Im(conj(f) f')`` via the analytic phase."""
        phase = np.unwrap(np.angle(self.f[self.support]))
        w = self.density[self.support]
        slope = np.gradient(phase, self.grid.domega)
        return float(np.sum(w * slope) / np.sum(w))

    @property
    def spread_u(self) -> float:
        """Position spread from the amplitude modulus, ``sigma_u = 1 / (2 sigma_omega)``."""
        w = self.density / np.sum(self.density)
        om = self.grid.omega
        mean = np.sum(w * om)
        return float(0.5 / np.sqrt(np.sum(w * (om - mean) ** 2)))

    def require_inside(self, allowed) -> None:
        outside = np.setdiff1d(self.support, np.asarray(allowed))
        if outside.size:
            raise BoundarySupportError(
                f"packet has amplitude on modes {(outside + 1).tolist()} outside the allowed range")

    def to_state(self, basis: FockBasis) -> np.ndarray:
        if basis.n_max < 1:
            raise ValueError("basis has no 1-particle sector")
        psi = np.zeros(basis.dim, dtype=complex)
        occ = np.zeros(self.grid.M, dtype=int)
        for j in self.support:
            occ[j] = 1
            psi[basis.state_index(occ)] = self.amplitudes[j]
            occ[j] = 0
        return psi


def gaussian_packet(grid: FrequencyGrid, omega_c: float, sigma_omega: float, u0: float = 0.0,
                    support=None, cut: float = 1e-15) -> OnePacket:
    """Gaussian in frequency times ``exp(i omega u0)``, normalized on the grid.

    Amplitudes below ``cut`` relative to the peak, or outside ``support``, are
    set exactly to zero so the packet has compact support on the lattice.
    """
    om = grid.omega
    g = np.exp(-((om - omega_c) ** 2) / (4 * sigma_omega**2))
    g[g < cut * g.max()] = 0.0
    if support is not None:
        mask = np.zeros(grid.M, dtype=bool)
        mask[np.asarray(support)] = True
        g[~mask] = 0.0
    f = g * np.exp(1j * om * u0)
    f /= np.sqrt(grid.dnu * np.sum(np.abs(f) ** 2))
    return OnePacket(grid, f)


def mode_packet(grid: FrequencyGrid, j: int) -> OnePacket:
    """Single-mode packet on mode index ``j`` (0-based)."""
    f = np.zeros(grid.M, dtype=complex)
    f[j] = 1 / np.sqrt(grid.dnu)
    return OnePacket(grid, f)


def coherent_like_state(basis: FockBasis, alphas) -> np.ndarray:
    """Multimode coherent state projected onto the truncated basis and renormalized."""
    alphas = np.asarray(alphas, dtype=complex)
    amps = np.ones(basis.dim, dtype=complex)
    for j, a in enumerate(alphas):
        n = basis.states[:, j]
        amps *= a**n / np.sqrt(np.array([factorial(int(k)) for k in n], dtype=float))
    return amps / np.linalg.norm(amps)
