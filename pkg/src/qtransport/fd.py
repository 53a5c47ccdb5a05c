"""Central finite differences of order 2p and the spectrum of the derivative operator."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import StateVector

MAX_HALF_WIDTH = 32


@dataclass(frozen=True)
class FdScheme:
    """Antisymmetric stencil ``a[-p..p]`` stored as ``a_pos[k] = a_k`` for k = 0..p."""

    p: int
    a_pos: np.ndarray

    @property
    def coefficients(self) -> dict[int, float]:
        out = {0: 0.0}
        for k in range(1, self.p + 1):
            out[k] = float(self.a_pos[k])
            out[-k] = -float(self.a_pos[k])
        return out

    @property
    def c_p(self) -> float:
        """Sum of |a_q| over q = 0..p, the constant in the ``2 C_p / dx`` norm bound."""
        return float(np.sum(np.abs(self.a_pos)))

    def moment_residuals(self) -> np.ndarray:
        """Relative residual of ``sum_k a_k k^j = [j == 1]`` for j = 0..2p."""
        ks = np.arange(-self.p, self.p + 1, dtype=float)
        a = np.array([self.coefficients[int(k)] for k in ks])
        res = []
        for j in range(2 * self.p + 1):
            terms = a * ks**j
            scale = max(1.0, float(np.sum(np.abs(terms))))
            res.append(abs(float(np.sum(terms)) - (1.0 if j == 1 else 0.0)) / scale)
        return np.array(res)


def fd_coefficients(p: int) -> FdScheme:
    if not 1 <= p <= MAX_HALF_WIDTH:
        raise ValueError(f"half-width p must be in 1..{MAX_HALF_WIDTH}, got {p}")
    a = np.zeros(p + 1)
    ratio = 1.0  # (p!)^2 / ((p-k)! (p+k)!)
    for k in range(1, p + 1):
        ratio *= (p - k + 1) / (p + k)
        a[k] = (-1) ** (k + 1) * ratio / k
    scheme = FdScheme(p, a)
    worst = float(scheme.moment_residuals().max())
    if worst > 1e-10:
        raise ArithmeticError(f"moment conditions violated by {worst:.2e} for p={p}")
    return scheme


def derivative_eigenvalues(scheme: FdScheme, n_qubits: int) -> np.ndarray:
    """Eigenvalue of the discrete derivative at frequency node ``X = k / N``."""
    n_pts = 1 << n_qubits
    x = np.arange(n_pts) / n_pts
    out = np.zeros(n_pts)
    for q in range(1, scheme.p + 1):
        out += scheme.a_pos[q] * np.sin(2 * np.pi * q * x)
    return 2.0 * n_pts * out


def apply_stencil(state: StateVector, axis: int, scheme: FdScheme) -> StateVector:
    """Apply ``-i`` times the periodic central-difference derivative along one axis."""
    amps = state.amps
    dx = state.grid.steps[axis]
    out = np.zeros(amps.shape, dtype=complex)
    for k in range(1, scheme.p + 1):
        fwd = np.roll(amps, -k, axis=axis)
        bwd = np.roll(amps, k, axis=axis)
        out += scheme.a_pos[k] * (fwd - bwd)
    return StateVector(state.grid, -1j * out / dx)


def operator_norm_Dj(scheme: FdScheme, n_qubits: int) -> tuple[float, float]:
    """Return (exact spectral norm, ``2 C_p / dx`` bound)."""
    exact = float(np.max(np.abs(derivative_eigenvalues(scheme, n_qubits))))
    bound = 2.0 * scheme.c_p * (1 << n_qubits)
    return exact, bound
