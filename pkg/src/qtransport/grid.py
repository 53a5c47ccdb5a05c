"""Dyadic grids, amplitude encoding and discrete norms.

Layout convention used by every module of the package: the flat amplitude
index is row-major over the axes, so the register of axis 1 is the most
significant. Inside a register the node ``X = k / N`` is stored at index
``k`` and the register qubit ``q_0`` is the most significant bit of ``k``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

DEFAULT_MAX_QUBITS = 30


class CapacityError(ValueError):
    """Raised when a grid would exceed the configured qubit budget."""


class DegenerateNormError(ValueError):
    """Raised when normalizing an all-zero vector."""


class GridMismatchError(ValueError):
    """Raised when two states live on different grids."""


@dataclass(frozen=True)
class GridSpec:
    qubits: tuple[int, ...]

    @property
    def d(self) -> int:
        return len(self.qubits)

    @property
    def points(self) -> tuple[int, ...]:
        return tuple(1 << n for n in self.qubits)

    @property
    def steps(self) -> tuple[float, ...]:
        return tuple(1.0 / (1 << n) for n in self.qubits)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.points

    @property
    def size(self) -> int:
        return 1 << sum(self.qubits)

    @property
    def total_qubits(self) -> int:
        return sum(self.qubits)

    def axis_nodes(self, axis: int) -> np.ndarray:
        """Node coordinates ``k / N`` of one axis (0-based axis index)."""
        n_pts = self.points[axis]
        return np.arange(n_pts) / n_pts

    def mesh(self) -> list[np.ndarray]:
        """Coordinate arrays of shape ``self.shape``, one per axis."""
        return np.meshgrid(*[self.axis_nodes(a) for a in range(self.d)], indexing="ij")

    def index_of(self, node: Sequence[int]) -> int:
        """Flat amplitude index of an integer node ``(k_1, ..., k_d)``."""
        return int(np.ravel_multi_index(tuple(node), self.shape))

    def node_of(self, index: int) -> tuple[int, ...]:
        return tuple(int(k) for k in np.unravel_index(index, self.shape))

    def qubit_offsets(self) -> tuple[int, ...]:
        """Position of each register's least significant bit in the flat index."""
        offs = []
        for a in range(self.d):
            offs.append(sum(self.qubits[a + 1:]))
        return tuple(offs)


def build_grid(qubits: Sequence[int], max_qubits: int = DEFAULT_MAX_QUBITS) -> GridSpec:
    qubits = tuple(int(n) for n in qubits)
    if not qubits:
        raise ValueError("grid needs at least one axis")
    if any(n < 1 for n in qubits):
        raise ValueError(f"every axis needs at least one qubit, got {list(qubits)}")
    if sum(qubits) > max_qubits:
        raise CapacityError(
            f"{sum(qubits)} qubits requested but the memory guard allows at most {max_qubits}"
        )
    return GridSpec(qubits)


@dataclass
class StateVector:
    grid: GridSpec
    amps: np.ndarray
    normalized: bool = field(default=False)

    def __post_init__(self) -> None:
        self.amps = np.asarray(self.amps)
        if self.amps.size != self.grid.size:
            raise ValueError(f"expected {self.grid.size} amplitudes, got {self.amps.size}")
        self.amps = self.amps.reshape(self.grid.shape)

    @property
    def flat(self) -> np.ndarray:
        return self.amps.reshape(-1)

    def norm(self) -> float:
        return norm2(self.amps)

    def normalize(self) -> "StateVector":
        """Normalize in place and return self."""
        nrm = self.norm()
        if nrm == 0.0:
            raise DegenerateNormError("cannot normalize the zero vector")
        self.amps = self.amps / nrm
        self.normalized = True
        return self

    def copy(self) -> "StateVector":
        return StateVector(self.grid, self.amps.copy(), self.normalized)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.flat) ** 2


def norm2(values: np.ndarray) -> float:
    """Discrete 2-norm. ``np.sum`` uses pairwise summation for float arrays."""
    v = np.abs(np.asarray(values)).ravel()
    return float(np.sqrt(np.sum(v * v)))


def sample_function(f: Callable[..., np.ndarray], grid: GridSpec) -> np.ndarray:
    """Evaluate ``f(x1, ..., xd)`` on the mesh, broadcasting scalars."""
    vals = np.asarray(f(*grid.mesh()))
    return np.broadcast_to(vals, grid.shape).copy()


def encode_function(f, grid: GridSpec, normalize: bool = True) -> StateVector:
    """Real-space encoding of a function given as a callable or as samples."""
    samples = sample_function(f, grid) if callable(f) else np.asarray(f).reshape(grid.shape)
    if not np.all(np.isfinite(samples)):
        raise ValueError("function is not finite at every grid node")
    state = StateVector(grid, samples.astype(complex if np.iscomplexobj(samples) else float))
    if normalize:
        if not np.any(samples):
            raise DegenerateNormError("all samples are zero, the encoding has no norm")
        state.normalize()
    return state


def vector_error(a: StateVector, b: StateVector) -> float:
    if a.grid != b.grid:
        raise GridMismatchError(f"grids differ: {a.grid.qubits} vs {b.grid.qubits}")
    return norm2(a.amps - b.amps)
