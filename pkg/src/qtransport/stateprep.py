"""Loading the initial condition: exact amplitude encoding and the two-diagonal arcsin protocol."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import CTRL, GPHASE, RZ, GateList, H, PHASE, synthesize_walsh_circuit
from .grid import GridSpec, StateVector, encode_function
from .walsh import sparse_walsh_series, walsh_coefficients, _dense_to_series

DEFAULT_ALPHA = 1.05


@dataclass
class PrepOutcome:
    conditioned_state: StateVector
    success_prob: float
    alpha: float
    ancilla_kept: bool
    theta: np.ndarray
    sampled_success: float | None = None
    shots: int | None = None
    seed: int | None = None

    def fidelity(self, target: StateVector) -> float:
        return float(abs(np.vdot(target.flat, self.conditioned_state.flat)))


def exact_load(f0, grid: GridSpec) -> StateVector:
    """Oracle load of the normalized encoding (cost ``O(2^n)`` gates on hardware)."""
    return encode_function(f0, grid, normalize=True)


def closed_form_success(f0: np.ndarray, alpha: float) -> float:
    """``(1 / (alpha^2 N)) sum f^2 / f_max^2``."""
    f = np.asarray(f0, dtype=float).ravel()
    fmax = np.max(np.abs(f))
    return float(np.sum((f / fmax) ** 2) / (alpha**2 * f.size))


def arcsin_phase(f0: np.ndarray, alpha: float) -> np.ndarray:
    f = np.asarray(f0, dtype=float)
    fmax = np.max(np.abs(f))
    return np.arcsin(np.clip(f / (alpha * fmax), -1.0, 1.0))


def _run_protocol(theta: np.ndarray) -> np.ndarray:
    """Statevector of the ``n + 1`` qubits after the protocol; row 0/1 = ancilla value.

    Ancilla is the most significant qubit. Steps: Hadamards everywhere,
    ``e^{-i theta}`` controlled on |1>, ``e^{+i theta}`` controlled on |0>,
    Hadamard and ``diag(1, -i)`` on the ancilla.
    """
    size = theta.size
    psi = np.full((2, size), 1.0 / np.sqrt(2 * size), dtype=complex)
    psi[1] *= np.exp(-1j * theta.ravel())
    psi[0] *= np.exp(1j * theta.ravel())
    psi = np.stack([psi[0] + psi[1], psi[0] - psi[1]]) / np.sqrt(2)
    psi[1] *= -1j
    return psi


def two_diagonal_prep(f0, grid: GridSpec, alpha: float = DEFAULT_ALPHA, walsh_budget: int | None = None,
                      shots: int | None = None, seed: int | None = None) -> PrepOutcome:
    """Prepare ``f0`` with one ancilla and two controlled diagonals, post-selecting the ancilla on 1.

    Parameters
    ----------
    f0 : callable or array
        Real initial condition, as a function on the mesh or as grid samples.
    grid : GridSpec
    alpha : float
        Scaling ``>= 1`` applied to ``f_max``; larger values keep the phase away from ``pi/2``.
    walsh_budget : int, optional
        When given, the phase is replaced by its sparse Walsh approximation with this many terms.
    shots, seed : int, optional
        Also draw ``shots`` ancilla measurements and report the empirical success rate.

    Returns
    -------
    PrepOutcome
        Exact success probability and the renormalized post-selected state.
    """
    if alpha < 1:
        raise ValueError(f"alpha must be at least 1, got {alpha}")
    samples = encode_function(f0, grid, normalize=False).amps
    if np.iscomplexobj(samples) and np.any(np.imag(samples)):
        raise ValueError("two-diagonal preparation needs a real-valued f0")
    samples = np.real(samples).astype(float)
    if not np.any(samples):
        raise ValueError("f0 vanishes on the grid")
    theta = arcsin_phase(samples, alpha)
    if walsh_budget is not None:
        theta = sparse_walsh_series(theta, walsh_budget).evaluate()
    psi = _run_protocol(theta)
    branch = psi[1]
    p1 = float(np.sum(np.abs(branch) ** 2))
    cond = StateVector(grid, branch / np.sqrt(p1), normalized=True)
    out = PrepOutcome(cond, p1, alpha, ancilla_kept=True, theta=theta.reshape(grid.shape))
    if shots is not None:
        rng = np.random.Generator(np.random.Philox(seed))
        out.sampled_success = float(rng.binomial(shots, min(max(p1, 0.0), 1.0)) / shots)
        out.shots, out.seed = shots, seed
    return out


def two_diagonal_circuit(theta: np.ndarray, grid: GridSpec, budget: int | None = None) -> GateList:
    """Gate list of the protocol; the ancilla is qubit ``grid.total_qubits``."""
    n = grid.total_qubits
    theta = np.asarray(theta, dtype=float).reshape(grid.shape)
    if budget is None:
        series = _dense_to_series(walsh_coefficients(theta), grid.qubits, grid.shape, keep_zeros=False)
    else:
        series = sparse_walsh_series(theta, budget)
    plus = synthesize_walsh_circuit(series, n_qubits=n + 1)
    minus = GateList(n + 1, [_negate(g) for g in plus.gates])
    gl = GateList(n + 1, [H(q) for q in range(n + 1)])
    gl.append(CTRL(n, 1, minus))
    gl.append(CTRL(n, 0, plus))
    gl.append(H(n))
    gl.append(PHASE(n, -np.pi / 2))
    return gl


def _negate(g):
    if isinstance(g, RZ):
        return RZ(g.q, -g.angle)
    if isinstance(g, GPHASE):
        return GPHASE(-g.angle)
    return g
