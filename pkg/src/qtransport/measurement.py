"""Observables and estimation protocols, each with an exact path and a seeded sampling path.

Sampling uses a counter-based generator (Philox) so that every report is
reproducible from its ``(seed, shots)`` pair.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuit import GateList, simulate
from .grid import GridSpec, StateVector, norm2

KINDS = ("point", "uniform", "moment", "overlap_moment", "pauli_z")


@dataclass(frozen=True)
class Observable:
    """``kind`` is one of ``point``, ``uniform``, ``moment``, ``overlap_moment``, ``pauli_z``.

    ``payload`` is the node index tuple for ``point``, the exponent tuple for the
    two moment kinds and the bit position (least significant = 0) for ``pauli_z``.
    """

    kind: str
    payload: tuple | int | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown observable kind {self.kind!r}")

    @property
    def is_diagonal(self) -> bool:
        return self.kind in ("point", "moment", "pauli_z")


@dataclass
class EstimateReport:
    exact_value: float
    sampled_value: float | None = None
    shots: int | None = None
    seed: int | None = None
    stderr: float | None = None
    p0: float | None = None
    scale: float = 1.0

    def within(self, target: float, n_sigma: float = 3.0) -> bool:
        """Sampled estimate within ``n_sigma`` standard errors of ``target``."""
        return abs(self.sampled_value - target) <= n_sigma * self.stderr


def _rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _flat(state) -> np.ndarray:
    return state.flat if isinstance(state, StateVector) else np.asarray(state).reshape(-1)


def moment_weights(grid: GridSpec, k: Sequence[int]) -> np.ndarray:
    mesh = grid.mesh()
    w = np.ones(grid.shape)
    for x, e in zip(mesh, k):
        w = w * x ** int(e)
    return w


def moment_normalizer(grid: GridSpec, k: Sequence[int]) -> float:
    return norm2(moment_weights(grid, k))


def diagonal_values(obs: Observable, grid: GridSpec) -> np.ndarray:
    """Diagonal of a diagonal observable, flat in amplitude order."""
    if obs.kind == "point":
        out = np.zeros(grid.size)
        out[grid.index_of(obs.payload)] = 1.0
        return out
    if obs.kind == "moment":
        return moment_weights(grid, obs.payload).ravel()
    if obs.kind == "pauli_z":
        bit = int(obs.payload)
        if not 0 <= bit < grid.total_qubits:
            raise ValueError(f"qubit {bit} outside the {grid.total_qubits}-qubit register")
        return 1.0 - 2.0 * ((np.arange(grid.size) >> bit) & 1)
    raise ValueError(f"{obs.kind} is not diagonal")


def expectation(state: StateVector, obs: Observable) -> float:
    """Exact ``<psi|O|psi>``; for ``overlap_moment`` the rank-one value ``<m_k|psi>``."""
    grid = state.grid
    psi = state.flat
    if obs.is_diagonal:
        return float(np.sum(diagonal_values(obs, grid) * np.abs(psi) ** 2))
    if obs.kind == "uniform":
        return float(abs(np.sum(psi)) ** 2 / grid.size)
    w = moment_weights(grid, obs.payload).ravel()
    return float(np.real(np.sum(w * psi)) / norm2(w))


def observable_block(obs: Observable, grid: GridSpec) -> tuple[np.ndarray, float]:
    """Diagonal unitary phase whose real part encodes ``O / scale``.

    ``exp(i arccos(O / scale))`` has real part ``O / scale``, so a Hadamard test
    on it returns ``<O> / scale`` for real diagonal ``O``.
    """
    vals = diagonal_values(obs, grid)
    scale = max(1.0, float(np.max(np.abs(vals))))
    return np.arccos(np.clip(vals / scale, -1.0, 1.0)), scale


def _binary_estimate(p0: float, shots: int | None, seed, scale: float = 1.0):
    if shots is None:
        return None, None
    p0 = min(max(p0, 0.0), 1.0)
    hits = _rng(seed).binomial(shots, p0)
    p_hat = hits / shots
    value = scale * (2 * p_hat - 1)
    stderr = scale * 2 * np.sqrt(p_hat * (1 - p_hat) / shots)
    return float(value), float(stderr)


def hadamard_test(state, block, shots: int | None = None, seed: int | None = None,
                  imaginary: bool = False) -> EstimateReport:
    """Ancilla interference estimate of ``Re`` (or ``Im``) of ``<psi|U|psi>``.

    ``block`` is a :class:`GateList` on the system qubits, a diagonal phase
    array (``U = exp(i phase)``) or a diagonal :class:`Observable`, which is
    turned into a phase with :func:`observable_block`.
    """
    psi = _flat(state).astype(complex)
    size = psi.size
    n = size.bit_length() - 1
    scale = 1.0
    if isinstance(block, Observable):
        if not isinstance(state, StateVector):
            raise TypeError("an Observable block needs a StateVector to know the grid")
        block, scale = observable_block(block, state.grid)
    # ancilla is qubit n (most significant): rows 0 and 1 below
    branch0 = psi / np.sqrt(2)
    if isinstance(block, GateList):
        if block.n_qubits != n:
            raise ValueError(f"block acts on {block.n_qubits} qubits but the state has {n}")
        branch1 = simulate(block, psi) / np.sqrt(2)
    else:
        phase = np.asarray(block, dtype=float).reshape(-1)
        if phase.size != size:
            raise ValueError(f"diagonal block has {phase.size} entries, expected {size}")
        branch1 = psi * np.exp(1j * phase) / np.sqrt(2)
    if imaginary:
        branch1 = branch1 * -1j
    out0 = (branch0 + branch1) / np.sqrt(2)
    p0 = float(np.sum(np.abs(out0) ** 2))
    value, stderr = _binary_estimate(p0, shots, seed, scale)
    return EstimateReport(scale * (2 * p0 - 1), value, shots, seed, stderr, p0, scale)


def swap_test(psi, phi, shots: int | None = None, seed: int | None = None, imaginary: bool = False,
              circuit: str = "overlap") -> EstimateReport:
    """Overlap estimate between two states of equal width.

    ``circuit="overlap"`` interferes the two preparations on one ancilla
    (``(|0>|psi> + |1>|phi>)/sqrt 2`` then a Hadamard), so ``P(0) = (1 + Re<phi|psi>)/2``
    and the phase gate gives ``Im<phi|psi>``. ``circuit="cswap"`` is the
    register-swap circuit on ``2n + 1`` qubits, for which
    ``P(0) = (1 + |<phi|psi>|^2)/2``.
    """
    a = _flat(psi).astype(complex)
    b = _flat(phi).astype(complex)
    if a.size != b.size:
        raise ValueError(f"register widths differ: {a.size} vs {b.size} amplitudes")
    if circuit == "overlap":
        b_branch = b * (1j if imaginary else 1.0)
        p0 = float(np.sum(np.abs(a + b_branch) ** 2) / 4)
    elif circuit == "cswap":
        if imaginary:
            raise ValueError("the register-swap circuit has no imaginary-part variant")
        joint = np.outer(a, b)
        sym = (joint + joint.T) / 2
        p0 = float(np.sum(np.abs(sym) ** 2))
    else:
        raise ValueError(f"unknown swap-test circuit {circuit!r}")
    value, stderr = _binary_estimate(p0, shots, seed)
    return EstimateReport(2 * p0 - 1, value, shots, seed, stderr, p0)


@dataclass
class QaeReport(EstimateReport):
    distribution: np.ndarray | None = None
    k_map: int | None = None
    m: int | None = None


def qae_distribution(psi, phi, m: int) -> np.ndarray:
    """Outcome distribution of canonical amplitude estimation with ``m`` ancillas.

    ``Q = (I - 2|psi><psi|)(I - 2|phi><phi|)``; the ancilla register holds
    ``sum_j |j> Q^j |psi>`` before the inverse transform.
    """
    a = _flat(psi).astype(complex)
    b = _flat(phi).astype(complex)
    size = 1 << m
    rows = np.empty((size, a.size), dtype=complex)
    v = a.copy()
    for j in range(size):
        rows[j] = v
        v = v - 2 * b * np.vdot(b, v)
        v = v - 2 * a * np.vdot(a, v)
    amps = np.fft.fft(rows, axis=0) / size  # kernel exp(-2 pi i k j / 2^m)
    return np.sum(np.abs(amps) ** 2, axis=1)


def qae(psi, phi, m: int, shots: int | None = None, seed: int | None = None) -> QaeReport:
    """Estimate ``a = <psi|phi>`` (assumed real in [0, 1]) by phase estimation.

    Exact mode returns the whole distribution and the most likely outcome; with
    ``shots`` the outcome is also drawn ``shots`` times and the mode of the
    sample is reported.
    """
    if m < 1:
        raise ValueError("need at least one precision qubit")
    a = _flat(psi).astype(complex)
    b = _flat(phi).astype(complex)
    ov = np.vdot(a, b)
    if abs(ov.imag) > 1e-9:
        raise ValueError(f"overlap {ov} is not real; the estimator assumes a real overlap")
    dist = qae_distribution(a, b, m)
    k_map = int(np.argmax(dist))
    estimate = abs(np.cos(np.pi * k_map / (1 << m)))
    rep = QaeReport(float(estimate), distribution=dist, k_map=k_map, m=m)
    if shots is not None:
        counts = _rng(seed).multinomial(shots, dist / dist.sum())
        k_hat = int(np.argmax(counts))
        rep.sampled_value = float(abs(np.cos(np.pi * k_hat / (1 << m))))
        rep.shots, rep.seed = shots, seed
        rep.stderr = float(np.pi / (1 << m))
    return rep


def sample_counts(state, shots: int, seed: int | None = None) -> np.ndarray:
    """Multinomial histogram over basis states."""
    probs = np.abs(_flat(state)) ** 2
    total = probs.sum()
    if not np.isclose(total, 1.0, atol=1e-9):
        raise ValueError(f"state is not normalized (norm^2 = {total})")
    return _rng(seed).multinomial(shots, probs / total)


def sampled_expectation(state: StateVector, obs: Observable, shots: int, seed: int | None = None) -> EstimateReport:
    """Estimate a diagonal observable from computational-basis samples."""
    counts = sample_counts(state, shots, seed)
    vals = diagonal_values(obs, state.grid)
    mean = float(np.dot(counts, vals) / shots)
    var = float(np.dot(counts, (vals - mean) ** 2) / max(shots - 1, 1))
    return EstimateReport(expectation(state, obs), mean, shots, seed, float(np.sqrt(var / shots)))
