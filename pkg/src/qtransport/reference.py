"""Classical oracles and computable error bounds.

Oracles: characteristics solution of the driven harmonic phase-space flow,
periodic shift for constant advection, RK4 for Lotka-Volterra and a
sixth-order splitting integrator for the space-discretized ODE. Bounds:
discretization (regressed constant), operator-norm and vector-norm
product-formula bounds at leading order. Remainder terms of the vector-norm
bound are not computed.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.fft as sfft

from .expr import TransportProblem, evaluate
from .evolution import StepPlan, coefficient_on_grid, evolve
from .fd import derivative_eigenvalues, fd_coefficients, operator_norm_Dj
from .grid import GridSpec, StateVector, build_grid, encode_function, norm2, vector_error

# ---------------------------------------------------------------------------
# analytic and classical oracles


def characteristics_boltzmann2d(x, v, t, qE0_over_m: float = -1.0, c: float = 0.0,
                                f0: Callable | None = None):
    """Exact solution of ``f_t + v~ f_x + (qE0/m)(x~ - c t) f_v = 0`` with ``x~ = x - 0.5``.

    The flow is traced back in centered coordinates and ``f0`` is evaluated at
    the foot of the characteristic in absolute coordinates. Without ``f0`` the
    foot point ``(x0, v0)`` is returned.
    """
    if qE0_over_m >= 0:
        raise ValueError("the closed form needs qE0/m < 0 (oscillatory characteristics)")
    w = np.sqrt(-qE0_over_m)
    xc = np.asarray(x) - 0.5
    vc = np.asarray(v) - 0.5
    y = xc - c * t
    x0 = y * np.cos(w * t) - (vc - c) / w * np.sin(w * t)
    v0 = c + w * y * np.sin(w * t) + (vc - c) * np.cos(w * t)
    if f0 is None:
        return x0 + 0.5, v0 + 0.5
    return f0(x0 + 0.5, v0 + 0.5)


def shift_solution_1d(f0: Callable, v: float, t: float, grid: GridSpec) -> np.ndarray:
    """Samples of ``f0(x - v t)`` with periodic wrap, evaluated analytically at shifted nodes."""
    x = grid.axis_nodes(0)
    return np.asarray(f0(np.mod(x - v * t, 1.0)), dtype=float)


def shift_samples_1d(samples: np.ndarray, v: float, t: float) -> np.ndarray:
    """Periodic shift of grid samples when ``v t`` is a whole number of cells."""
    n_pts = len(samples)
    cells = v * t * n_pts
    k = int(round(cells))
    if abs(cells - k) > 1e-9:
        raise ValueError("shift is not a whole number of grid cells; use shift_solution_1d")
    return np.roll(np.asarray(samples), k)


@dataclass
class LotkaParams:
    alpha: float = float(np.exp(-1.0))
    beta: float = float(np.exp(-0.5))
    gamma: float = float(np.exp(1.0 / 3.0))
    delta: float = float(np.exp(-1.0 / 6.0))

    def hamiltonian(self, q, p):
        return -self.alpha * p - self.beta * np.exp(-p) - self.delta * q - self.gamma * np.exp(-q)

    def fixed_point(self) -> tuple[float, float]:
        return self.delta / self.gamma, self.alpha / self.beta


class InstabilityError(ArithmeticError):
    pass


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray  # populations, shape (steps + 1, 2)

    @property
    def qp(self) -> np.ndarray:
        return -np.log(self.x)


def rk4_lotka_volterra(params: LotkaParams, init: Sequence[float], T: float, steps: int) -> Trajectory:
    """Classic fixed-step RK4 on the population equations."""
    a, b, g, d = params.alpha, params.beta, params.gamma, params.delta

    def rhs(y):
        return np.array([a * y[0] - b * y[0] * y[1], -d * y[1] + g * y[0] * y[1]])

    y = np.array(init, dtype=float)
    if np.any(y <= 0):
        raise ValueError("populations must be positive")
    h = T / steps
    out = np.empty((steps + 1, 2))
    out[0] = y
    for i in range(steps):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * h * k1)
        k3 = rhs(y + 0.5 * h * k2)
        k4 = rhs(y + h * k3)
        y = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if np.any(y <= 0) or not np.all(np.isfinite(y)):
            raise InstabilityError(f"population left the positive quadrant at step {i + 1}; reduce the step size")
        out[i + 1] = y
    return Trajectory(np.linspace(0.0, T, steps + 1), out)


def liouville_problem_lotka(params: LotkaParams | None = None, q0: float = 0.7, p0: float = 0.3,
                            sigma: float = 0.02, T: float = 5.0, p: int = 4) -> TransportProblem:
    """Phase-space transport for the Lotka-Volterra flow, axis 1 = q, axis 2 = p.

    The velocities are the Hamiltonian vector field ``dq/dt = -alpha + beta e^-p``,
    ``dp/dt = delta - gamma e^-q``.
    """
    params = params or LotkaParams()
    q0, p0, sigma = float(q0), float(p0), float(sigma)
    c_q = f"-({params.alpha!r}) + ({params.beta!r})*exp(-x2)"
    c_p = f"({params.delta!r}) - ({params.gamma!r})*exp(-x1)"
    f0 = f"exp(-((x1-{q0!r})^2 + (x2-{p0!r})^2)/(2*{sigma!r}^2))"
    return TransportProblem([c_q, c_p], f0, p=p, T=T, label="lotka-volterra")


# ---------------------------------------------------------------------------
# high-order reference for the space-discretized ODE (time-independent fields)

_Y6 = (0.784513610477560, 0.235573213359357, -1.17767998417887)
Y6_WEIGHTS = _Y6[::-1] + (1.0 - 2.0 * sum(_Y6),) + _Y6


def reference_steps(problem: TransportProblem, grid: GridSpec, T: float, per_step: float = 12.0,
                    per_flow: float = 50.0) -> int:
    """Step count for :func:`semidiscrete_reference`.

    Takes the larger of two rules: about ``per_step`` units of stiffness
    ``T sum_j ||c_j|| ||D_j||`` per step, and ``per_flow`` steps per unit of
    transported distance ``T sum_j ||c_j||``. The second rule dominates on coarse
    grids, where the composition error follows the smooth part of the state.
    Together they keep the composition error below 1e-8, several orders under
    the space-discretization error of the grids where either rule is active.
    """
    scheme = fd_coefficients(problem.p)
    stiff = flow = 0.0
    for axis in range(grid.d):
        c_sup = float(np.max(np.abs(coefficient_on_grid(problem, axis, grid, 0.0))))
        stiff += c_sup * operator_norm_Dj(scheme, grid.qubits[axis])[0]
        flow += c_sup
    return max(16, int(np.ceil(T * stiff / per_step)), int(np.ceil(T * flow * per_flow)))


def semidiscrete_reference(problem: TransportProblem, state0: StateVector, T: float,
                           steps: int | None = None) -> StateVector:
    """Solve ``d/dt f = -i sum_j c_j D_j f`` with a sixth-order composition of Strang steps.

    Each single-axis flow is applied exactly in Fourier space, so the only
    error is the composition error ``O((T/steps)^6)``. Neighbouring flows on
    the same axis are fused. ``steps`` defaults to :func:`reference_steps`.
    """
    if problem.is_time_dependent():
        raise ValueError("the splitting reference supports time-independent coefficients only")
    grid = state0.grid
    if steps is None:
        steps = reference_steps(problem, grid, T)
    scheme = fd_coefficients(problem.p)
    real = not np.iscomplexobj(state0.amps)
    coeffs = []
    for axis in range(grid.d):
        n_pts = grid.points[axis]
        eig = derivative_eigenvalues(scheme, grid.qubits[axis])
        if real:
            eig = eig[: n_pts // 2 + 1]
        view = [1] * grid.d
        view[axis] = eig.size
        coeffs.append(-coefficient_on_grid(problem, axis, grid, 0.0) * eig.reshape(view))
    cache: dict = {}

    def flow(amps, axis, tau):
        key = (axis, tau)
        if key not in cache:
            cache[key] = np.exp(1j * tau * coeffs[axis])
        if real:
            return sfft.irfft(cache[key] * sfft.rfft(amps, axis=axis), n=amps.shape[axis], axis=axis)
        return sfft.ifft(cache[key] * sfft.fft(amps, axis=axis), axis=axis)

    h = T / steps
    d = grid.d
    schedule = []
    for w in Y6_WEIGHTS:
        tau = w * h
        schedule += [(a, tau / 2) for a in range(d - 1)]
        schedule.append((d - 1, tau))
        schedule += [(a, tau / 2) for a in reversed(range(d - 1))]
    amps = state0.amps.copy()
    pending = None
    for _ in range(steps):
        for axis, tau in schedule:
            if pending is not None and pending[0] == axis:
                pending = (axis, pending[1] + tau)
                continue
            if pending is not None:
                amps = flow(amps, *pending)
            pending = (axis, tau)
    if pending is not None:
        amps = flow(amps, *pending)
    return StateVector(grid, amps, state0.normalized)


# ---------------------------------------------------------------------------
# sup norms on a sample lattice


@dataclass
class Lattice:
    nodes_per_axis: tuple[int, ...]
    times: np.ndarray

    def describe(self) -> str:
        return f"{'x'.join(map(str, self.nodes_per_axis))} nodes, {len(self.times)} times"


def sample_lattice(grid: GridSpec, T: float, refine: int = 4, n_times: int = 64,
                   max_nodes: int = 1 << 22) -> Lattice:
    """``refine``-times finer lattice than the grid, coarsened until it holds at most ``max_nodes``."""
    nodes = [refine * n for n in grid.points]
    while int(np.prod(nodes)) > max_nodes:
        big = int(np.argmax(nodes))
        nodes[big] //= 2
    return Lattice(tuple(nodes), np.linspace(0.0, T, n_times))


def _lattice_eval(expr, lattice: Lattice, t, skip_axis: int | None = None):
    d = len(lattice.nodes_per_axis)
    coords = []
    for a, m in enumerate(lattice.nodes_per_axis):
        shape = [1] * d
        if a == skip_axis:
            coords.append(np.zeros(shape))
            continue
        shape[a] = m
        coords.append((np.arange(m) / m).reshape(shape))
    return np.asarray(evaluate(expr, coords, t), dtype=float)


@dataclass
class FieldNorms:
    c_sup: np.ndarray  # ||c_j||_inf
    dt_sup: np.ndarray  # ||d_t c_j||_inf
    dx_sup: np.ndarray  # dx_sup[j, m] = ||d_{x_j} c_m||_inf
    lattice: Lattice


def field_norms(problem: TransportProblem, grid: GridSpec, T: float | None = None,
                lattice: Lattice | None = None, step: float = 1e-6) -> FieldNorms:
    T = problem.T if T is None else T
    lattice = lattice or sample_lattice(grid, T)
    d = problem.d
    c_sup = np.zeros(d)
    dt_sup = np.zeros(d)
    dx_sup = np.zeros((d, d))
    for m, expr in enumerate(problem.coeffs):
        dep_t = problem.is_time_dependent(m)
        for t in lattice.times:
            val = _lattice_eval(expr, lattice, t, skip_axis=m)
            c_sup[m] = max(c_sup[m], float(np.max(np.abs(val))))
            if dep_t:
                tp = _lattice_eval(expr, lattice, t + step, skip_axis=m)
                tm = _lattice_eval(expr, lattice, t - step, skip_axis=m)
                dt_sup[m] = max(dt_sup[m], float(np.max(np.abs(tp - tm))) / (2 * step))
            for j in range(d):
                if j == m:
                    continue
                nodes = lattice.nodes_per_axis
                coords_p, coords_m = [], []
                for a, cnt in enumerate(nodes):
                    shape = [1] * d
                    if a == m:
                        coords_p.append(np.zeros(shape))
                        coords_m.append(np.zeros(shape))
                        continue
                    shape[a] = cnt
                    base = (np.arange(cnt) / cnt).reshape(shape)
                    coords_p.append(base + step if a == j else base)
                    coords_m.append(base - step if a == j else base)
                diff = np.asarray(evaluate(expr, coords_p, t)) - np.asarray(evaluate(expr, coords_m, t))
                dx_sup[j, m] = max(dx_sup[j, m], float(np.max(np.abs(diff))) / (2 * step))
    return FieldNorms(c_sup, dt_sup, dx_sup, lattice)


def derivative_norm_ratio(samples: np.ndarray, grid: GridSpec) -> np.ndarray:
    """``||d_{x_m} f||_{2,N} / ||f||_{2,N}`` per axis, by spectral differentiation of periodic samples."""
    f = np.asarray(samples)
    base = norm2(f)
    out = np.zeros(grid.d)
    for axis in range(grid.d):
        n_pts = grid.points[axis]
        freq = sfft.fftfreq(n_pts, d=1.0 / n_pts)
        if n_pts % 2 == 0:
            freq[n_pts // 2] = 0.0
        view = [1] * grid.d
        view[axis] = n_pts
        deriv = sfft.ifft(2j * np.pi * freq.reshape(view) * sfft.fft(f, axis=axis), axis=axis)
        out[axis] = norm2(deriv) / base
    return out


# ---------------------------------------------------------------------------
# bounds


@dataclass
class OperatorNormBound:
    alpha_g: float
    alpha_s: float
    beta_s: float
    bound_g: float
    bound_s: float
    d_norms: np.ndarray
    norms: FieldNorms

    def bound(self, variant: str) -> float:
        return self.bound_g if variant == "g" else self.bound_s


def operator_norm_bound(problem: TransportProblem, qubits: Sequence[int], T: float, L: int,
                        p: int | None = None, norms: FieldNorms | None = None) -> OperatorNormBound:
    grid = build_grid(qubits)
    scheme = fd_coefficients(problem.p if p is None else p)
    dn = np.array([operator_norm_Dj(scheme, n)[0] for n in grid.qubits])
    norms = norms or field_norms(problem, grid, T)
    c, ct = norms.c_sup, norms.dt_sup
    d = problem.d
    a_g = sum(c[j] * c[m] * dn[j] * dn[m] for j in range(d) for m in range(j + 1, d))
    a_s = a_g + 0.5 * sum(ct[j] * dn[j] for j in range(d))
    b_s = sum(c[j] * ct[m] * dn[j] * dn[m] for j in range(d) for m in range(j + 1, d)) / 3.0
    return OperatorNormBound(a_g, a_s, b_s, a_g * T**2 / L, a_s * T**2 / L + b_s * T**3 / L**2, dn, norms)


@dataclass
class VectorNormBound:
    alpha_g: float
    alpha_s: float
    bound_g: float
    bound_s: float
    ratios: np.ndarray
    norms: FieldNorms
    remainder_included: bool = False

    def bound(self, variant: str) -> float:
        return self.bound_g if variant == "g" else self.bound_s


def vector_norm_bound(problem: TransportProblem, qubits: Sequence[int], T: float, L: int,
                      ratios: np.ndarray | None = None, snapshots: Sequence[np.ndarray] | None = None,
                      norms: FieldNorms | None = None) -> VectorNormBound:
    """Leading-order vector-norm bound ``alpha' T^2 / L``.

    The derivative ratio ``||d_m f_t|| / ||f_0||`` defaults to its value at
    ``t = 0``; pass ``snapshots`` (solution samples over time) to use the max.
    """
    grid = build_grid(qubits)
    if ratios is None:
        f0 = problem.initial_samples(grid)
        ratios = derivative_norm_ratio(f0, grid)
        if snapshots:
            base = norm2(f0)
            for snap in snapshots:
                r = derivative_norm_ratio(snap, grid) * norm2(snap) / base
                ratios = np.maximum(ratios, r)
    norms = norms or field_norms(problem, grid, T)
    c, ct, dx = norms.c_sup, norms.dt_sup, norms.dx_sup
    d = problem.d
    a_g = 0.5 * sum(c[j] * dx[j, m] * ratios[m] + c[m] * dx[m, j] * ratios[j]
                    for j in range(d) for m in range(j + 1, d))
    a_s = a_g + 0.5 * sum(ct[j] * ratios[j] for j in range(d))
    return VectorNormBound(a_g, a_s, a_g * T**2 / L, a_s * T**2 / L, np.asarray(ratios), norms)


@dataclass
class DiscretizationReport:
    n_values: list
    errors: np.ndarray
    slope: float
    intercept: float
    K_fit: float
    K_envelope: float
    bounds: np.ndarray
    c_sum: float
    T: float
    p: int

    def bound_at(self, n: int) -> float:
        return self.T * self.K_envelope * self.c_sum * 2.0 ** (-2 * self.p * n)


def discretization_error(problem: TransportProblem, n: int, oracle: Callable, T: float,
                         ode_steps: int | None = None) -> float:
    """``|| encoding of the exact solution - space-discretized ODE solution ||`` on ``n`` qubits per axis."""
    grid = build_grid([n] * problem.d)
    f0 = problem.initial_samples(grid)
    scale = norm2(f0)
    state0 = StateVector(grid, f0 / scale, normalized=True)
    approx = semidiscrete_reference(problem, state0, T, ode_steps)
    exact = np.asarray(oracle(*grid.mesh(), T), dtype=float) / scale
    return norm2(approx.amps - exact)


def discretization_bound(problem: TransportProblem, oracle: Callable | None, n_values: Sequence[int],
                         T: float | None = None,
                         ode_steps: Callable[[int], int] | int | None = None) -> DiscretizationReport:
    """Measure the space-discretization error over ``n_values`` and regress the bound constant.

    ``K_fit`` comes from a least-squares fit with the slope pinned to ``-2p``;
    ``K_envelope`` is the smallest constant that bounds every measured point.
    """
    if oracle is None:
        raise ValueError("no exact-solution oracle registered for this problem")
    if len(n_values) < 3:
        raise ValueError("the regression needs at least three grid sizes")
    T = problem.T if T is None else T
    p = problem.p
    errs = []
    for n in n_values:
        steps = ode_steps(n) if callable(ode_steps) else ode_steps
        errs.append(discretization_error(problem, n, oracle, T, steps))
    errs = np.array(errs)
    ns = np.asarray(n_values, dtype=float)
    with np.errstate(divide="ignore"):
        logs = np.log2(errs)
    if np.all(errs > 0):
        slope, intercept = np.polyfit(ns, logs, 1)
    else:
        slope, intercept = float("nan"), float("nan")
    norms = field_norms(problem, build_grid([min(n_values)] * problem.d), T)
    c_sum = float(np.sum(norms.c_sup))
    base = T * c_sum * 2.0 ** (-2 * p * ns)
    if c_sum == 0 or np.all(errs == 0):
        k_fit = k_env = 0.0
    else:
        ratios = errs / base
        k_fit = float(2.0 ** np.mean(np.log2(ratios)))
        k_env = float(np.max(ratios))
    return DiscretizationReport(list(n_values), errs, float(slope), float(intercept), k_fit, k_env,
                                k_env * base, c_sum, T, p)


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class SweepSpec:
    """One experiment series.

    ``variable`` is ``"n"`` (qubits per axis), ``"L"`` or ``"walsh_budget"``.
    ``oracle(x1, ..., xd, t)`` gives the exact solution on the mesh. With
    ``method="ode"`` the measured state is the space-discretized ODE solution
    (no product formula), which isolates the discretization error.
    """

    problem: TransportProblem
    variable: str
    values: Sequence[int]
    oracle: Callable | None
    n: int | Sequence[int] = 6
    L: int = 128
    variant: str = "g"
    method: str = "product"
    truncation: str = "sparse"
    ode_steps: int | None = None
    K: float | None = None


SWEEP_COLUMNS = ("sweep_var", "value", "measured_error", "bound_thm1", "bound_thm2", "bound_thm3", "seconds")


def run_sweep(spec: SweepSpec) -> list[dict]:
    rows = []
    prob = spec.problem
    T = prob.T
    for value in spec.values:
        start = time.perf_counter()
        n = value if spec.variable == "n" else spec.n
        qubits = [n] * prob.d if isinstance(n, (int, np.integer)) else list(n)
        L = value if spec.variable == "L" else spec.L
        grid = build_grid(qubits)
        f0 = prob.initial_samples(grid)
        scale = norm2(f0)
        state0 = StateVector(grid, f0 / scale, normalized=True)
        if spec.method == "ode":
            final = semidiscrete_reference(prob, state0, T, spec.ode_steps)
        else:
            trunc = (spec.truncation, int(value)) if spec.variable == "walsh_budget" else None
            final = evolve(state0, StepPlan(prob, grid, L, spec.variant, truncation=trunc))
        if spec.oracle is not None:
            exact = np.asarray(spec.oracle(*grid.mesh(), T), dtype=float) / scale
            err = norm2(final.amps - exact)
        else:
            err = float("nan")
        norms = field_norms(prob, grid, T)
        thm2 = operator_norm_bound(prob, qubits, T, L, norms=norms).bound(spec.variant)
        thm3 = vector_norm_bound(prob, qubits, T, L, norms=norms).bound(spec.variant)
        if spec.K is not None:
            thm1 = T * spec.K * float(np.sum(norms.c_sup)) * max(grid.steps) ** (2 * prob.p)
        else:
            thm1 = float("nan")
        var = spec.variable if spec.variable != "walsh_budget" else f"walsh_budget_{spec.truncation}"
        rows.append({
            "sweep_var": var,
            "value": value,
            "measured_error": err,
            "bound_thm1": thm1,
            "bound_thm2": thm2,
            "bound_thm3": thm3,
            "seconds": time.perf_counter() - start,
        })
    return rows


def fitted_slope(xs: Sequence[float], errors: Sequence[float], log_x: bool = True) -> float:
    """Slope of ``log2 error`` against ``log2 x`` (or against ``x`` when ``log_x`` is False)."""
    x = np.log2(np.asarray(xs, dtype=float)) if log_x else np.asarray(xs, dtype=float)
    return float(np.polyfit(x, np.log2(np.asarray(errors, dtype=float)), 1)[0])
