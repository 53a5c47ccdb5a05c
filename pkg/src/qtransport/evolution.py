"""First-order product-formula time stepping in the Fourier-diagonal representation.

One step applies, for axis j = 1..d in that order,
``QFT_j^-1 exp(-i C_j(X, t) d_j(k_j)) QFT_j``, where ``C_j`` is
``h c_j(X, t + h)`` for the standard variant ``"s"`` and the integral of
``c_j`` over ``[t, t + h]`` for the generalized variant ``"g"``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .expr import TransportProblem, evaluate
from .fd import FdScheme, derivative_eigenvalues, fd_coefficients
from .grid import GridSpec, StateVector
from .walsh import truncate_phase

# two-node Gauss-Legendre on [0, 1]
GL_NODES = np.array([0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)])
GL_WEIGHTS = np.array([0.5, 0.5])


def coefficient_on_grid(problem: TransportProblem, axis: int, grid: GridSpec, t: float) -> np.ndarray:
    """``c_j`` on the grid with axis ``j`` collapsed to length one (``c_j`` ignores ``x_j``)."""
    target = tuple(1 if a == axis else grid.points[a] for a in range(grid.d))
    coords = []
    for a in range(grid.d):
        shape = [1] * grid.d
        if a == axis:
            coords.append(np.zeros(shape))
        else:
            shape[a] = grid.points[a]
            coords.append(grid.axis_nodes(a).reshape(shape))
    val = np.asarray(evaluate(problem.coeffs[axis], coords, t), dtype=float)
    return np.broadcast_to(val, target)


def step_phase(problem: TransportProblem, axis: int, t: float, h: float, variant: str,
               grid: GridSpec) -> np.ndarray:
    """Integrated coefficient ``C_j`` for the step ``[t, t + h]`` (axis ``j`` has length one)."""
    if variant == "s":
        return h * coefficient_on_grid(problem, axis, grid, t + h)
    if variant == "g":
        if not problem.is_time_dependent(axis):
            return h * coefficient_on_grid(problem, axis, grid, t)
        total = 0.0
        for node, w in zip(GL_NODES, GL_WEIGHTS):
            total = total + w * coefficient_on_grid(problem, axis, grid, t + node * h)
        return h * total
    raise ValueError(f"unknown product-formula variant {variant!r}, expected 's' or 'g'")


@dataclass
class StepPlan:
    problem: TransportProblem
    grid: GridSpec
    L: int
    variant: str = "g"
    T: float | None = None
    truncation: tuple[str, int] | None = None  # ("sparse" | "m", budget)
    scheme: FdScheme = field(init=False)
    eigenvalues: list = field(init=False)
    _cache: dict = field(init=False, default_factory=dict)

    def __post_init__(self) -> None:
        if self.L < 1:
            raise ValueError("need at least one time step")
        if self.variant not in ("s", "g"):
            raise ValueError(f"unknown product-formula variant {self.variant!r}")
        if self.T is None:
            self.T = self.problem.T
        if self.problem.d != self.grid.d:
            raise ValueError(f"problem has d={self.problem.d} but grid has {self.grid.d} axes")
        self.scheme = fd_coefficients(self.problem.p)
        self.eigenvalues = [derivative_eigenvalues(self.scheme, n) for n in self.grid.qubits]

    @property
    def h(self) -> float:
        return self.T / self.L

    def phase(self, axis: int, t: float) -> np.ndarray:
        """Diagonal phase ``-C_j(X, t) d_j(k_j)`` over the grid with axis ``j`` in frequency space."""
        coeff = step_phase(self.problem, axis, t, self.h, self.variant, self.grid)
        view = [1] * self.grid.d
        view[axis] = self.grid.points[axis]
        theta = -coeff * self.eigenvalues[axis].reshape(view)
        if self.truncation is not None:
            method, budget = self.truncation
            theta = truncate_phase(np.broadcast_to(theta, self.grid.shape), method, budget)
        return theta

    def factor(self, axis: int, t: float, half_spectrum: bool = False) -> np.ndarray:
        """``exp(i phase)``; cached when the coefficient does not depend on time."""
        static = not self.problem.is_time_dependent(axis)
        key = (axis, half_spectrum)
        if static and key in self._cache:
            return self._cache[key]
        theta = self.phase(axis, t)
        if half_spectrum:
            theta = np.take(theta, np.arange(self.grid.points[axis] // 2 + 1), axis=axis)
        fac = np.exp(1j * theta)
        if static:
            self._cache[key] = fac
        return fac


def _apply_factor(amps: np.ndarray, fac: np.ndarray, axis: int, real: bool) -> np.ndarray:
    if real:
        n_pts = amps.shape[axis]
        return sfft.irfft(fac * sfft.rfft(amps, axis=axis), n=n_pts, axis=axis)
    return sfft.ifft(fac * sfft.fft(amps, axis=axis), axis=axis)


def trotter_step(state: StateVector, t: float, plan: StepPlan) -> StateVector:
    """One product-formula step from ``t`` to ``t + h``.

    Real states stay real under exact phases because the derivative spectrum is
    odd, so they use the half-spectrum transform.
    """
    real = not np.iscomplexobj(state.amps) and plan.truncation is None
    amps = state.amps
    for axis in range(plan.grid.d):
        amps = _apply_factor(amps, plan.factor(axis, t, half_spectrum=real), axis, real)
    return StateVector(state.grid, amps, state.normalized)


def evolve(state0: StateVector, plan: StepPlan, record: int | None = None):
    """Run ``plan.L`` steps. With ``record = r`` also return copies every ``r`` steps.

    Returns the final state, or ``(final, [(t, state), ...])`` when recording;
    the list starts with ``t = 0``.
    """
    state = state0.copy()
    snaps = [(0.0, state0.copy())] if record else None
    h = plan.h
    for step in range(plan.L):
        state = trotter_step(state, step * h, plan)
        if record and (step + 1) % record == 0:
            snaps.append(((step + 1) * h, state.copy()))
    return (state, snaps) if record else state
