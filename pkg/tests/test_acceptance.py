"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` (lines are printed even when
output is captured) or directly with ``python3 tests/test_acceptance.py``.
"""
from __future__ import annotations

import sys
import time

import numpy as np
import pytest
from scipy.linalg import expm

from qtransport import catalog
from qtransport.circuit import apply_diagonal, apply_qft
from qtransport.evolution import StepPlan, coefficient_on_grid, evolve, trotter_step
from qtransport.fd import apply_stencil, derivative_eigenvalues, fd_coefficients
from qtransport.grid import StateVector, build_grid, norm2
from qtransport.measurement import (Observable, expectation, hadamard_test, qae, qae_distribution,
                                    sampled_expectation, swap_test)
from qtransport.reference import (LotkaParams, SweepSpec, discretization_bound, fitted_slope,
                                  operator_norm_bound, rk4_lotka_volterra, run_sweep)
from qtransport.stateprep import closed_form_success, two_diagonal_prep
from qtransport.walsh import m_walsh_series


def _initial(entry, grid):
    f0 = entry.problem.initial_samples(grid)
    scale = norm2(f0)
    return StateVector(grid, f0 / scale, normalized=True), scale


def _convection_run():
    e = catalog.get("convection1d")
    grid = build_grid(e.qubits)
    s0, scale = _initial(e, grid)
    _, snaps = evolve(s0, StepPlan(e.problem, grid, e.L), record=1)
    return e, grid, scale, snaps


# ---------------------------------------------------------------------------
# criteria


def criterion_1():
    start = time.perf_counter()
    e, grid, scale, snaps = _convection_run()
    errs = {t: norm2(s.amps - e.oracle(*grid.mesh(), t) / scale) for t, s in snaps}
    secs = time.perf_counter() - start
    ok = (abs(errs[0.25] / 3.6e-4 - 1) <= 0.1 and abs(errs[0.5] / 7.2e-4 - 1) <= 0.1 and secs < 1.0)
    return ok, f"error(0.25)={errs[0.25]:.4g} error(0.5)={errs[0.5]:.4g} targets 3.6e-4, 7.2e-4 +-10%; {secs:.3f}s"


def criterion_2():
    _, _, _, snaps = _convection_run()
    final = snaps[-1][1]
    target = {0: 0.0, 1: 0.5, 2: -1.0}
    exact_ok, sampled_ok, parts = True, True, []
    for bit, want in target.items():
        obs = Observable("pauli_z", bit)
        ex = expectation(final, obs)
        rep = sampled_expectation(final, obs, 8192, seed=2024 + bit)
        exact_ok &= abs(ex - want) <= 1e-10
        sampled_ok &= abs(rep.sampled_value - want) <= 3 * rep.stderr + 1e-12
        parts.append(f"Z{bit}: exact {ex:.6f} sampled {rep.sampled_value:.4f}+-{rep.stderr:.4f}")
    detail = "; ".join(parts) + f" | exact within 1e-10: {exact_ok}, sampled within 3 SE: {sampled_ok}"
    return exact_ok and sampled_ok, detail


def criterion_3():
    start = time.perf_counter()
    slopes = {}
    for p in (1, 2, 3):
        e = catalog.get("boltzmann2d-static", p=p)
        rep = discretization_bound(e.problem, e.oracle, [5, 6, 7, 8, 9])
        slopes[p] = rep.slope
    secs = time.perf_counter() - start
    ok = all(abs(slopes[p] + 2 * p) <= 0.15 * 2 * p for p in slopes) and secs < 120
    return ok, ", ".join(f"p={p} slope {s:.3f} (target {-2 * p})" for p, s in slopes.items()) + f"; {secs:.1f}s"


def criterion_4():
    start = time.perf_counter()
    e = catalog.get("boltzmann2d")
    prob = e.problem
    rows_n = run_sweep(SweepSpec(prob, "n", [6, 7, 8, 9, 10], e.oracle, L=128))
    err_n = [r["measured_error"] for r in rows_n]
    spread = max(err_n) / min(err_n)
    Ls = [16, 32, 64, 128, 256, 512]
    rows_L = run_sweep(SweepSpec(prob, "L", Ls, e.oracle, n=10))
    slope = fitted_slope(Ls, [r["measured_error"] for r in rows_L])
    growth = (operator_norm_bound(prob, [10, 10], prob.T, 128).bound_g
              / operator_norm_bound(prob, [6, 6], prob.T, 128).bound_g)
    secs = time.perf_counter() - start
    ok = spread < 2 and abs(slope + 1) <= 0.1 and 128 <= growth <= 512 and secs < 600
    return ok, (f"(a) errors n=6..10 {', '.join(f'{x:.3e}' for x in err_n)} spread {spread:.3f}; "
                f"(b) L slope {slope:.3f}; (c) operator bound growth n 6->10 {growth:.1f}; {secs:.0f}s")


def criterion_5():
    e = catalog.get("boltzmann2d-walsh")
    prob = e.problem
    budgets = [4**j for j in range(6)]
    errs = {}
    for method in ("sparse", "m"):
        rows = run_sweep(SweepSpec(prob, "walsh_budget", budgets, e.oracle, n=e.qubits, L=e.L,
                                   truncation=method))
        errs[method] = [r["measured_error"] for r in rows]
    base = run_sweep(SweepSpec(prob, "L", [e.L], e.oracle, n=e.qubits))[0]["measured_error"]
    parts, ok = [], True
    for method, es in errs.items():
        mono = all(b <= a * (1 + 1e-12) for a, b in zip(es, es[1:]))
        reach = [k for k, v in zip(budgets, es) if k < 1024 and abs(v - base) <= 0.01 * base]
        if method == "sparse":  # the budget sweep itself; M-Walsh is the comparison series
            ok &= mono and bool(reach)
        parts.append(f"{method}: monotone {mono}, plateau from {reach[0] if reach else 'none'}")
    worse = [k for k, s, m in zip(budgets, errs["sparse"], errs["m"]) if s > m * (1 + 1e-12)]
    ok &= not worse
    table = " ".join(f"K={k}:{s:.3e}/{m:.3e}" for k, s, m in zip(budgets, errs["sparse"], errs["m"]))
    return ok, (f"untruncated {base:.3e}; {'; '.join(parts)}; sparse > M-Walsh at K={worse or 'none'}; "
                f"sparse/M errors {table}")


def criterion_6():
    x = np.arange(1 << 12) / (1 << 12)
    f = np.sin(2 * np.pi * x)
    parts, ok = [], True
    for M in (16, 64, 256):
        series = m_walsh_series(lambda t: np.sin(2 * np.pi * t), M, n=12, deriv_sup=2 * np.pi)
        sup = float(np.max(np.abs(series.evaluate() - f)))
        ok &= sup <= 2 * np.pi / M and series.certificate == 2 * np.pi / M
        parts.append(f"M={M}: sup {sup:.4g} <= {2 * np.pi / M:.4g}")
    return ok, "; ".join(parts)


def criterion_7():
    rng = np.random.default_rng(7)
    grid = build_grid([8])
    x = grid.axis_nodes(0)
    worst_p, worst_fid = 0.0, 0.0
    for _ in range(20):
        k = np.arange(1, 5)
        a, b = rng.normal(size=4) / k**2, rng.normal(size=4) / k**2
        f = rng.normal() + (a[:, None] * np.cos(2 * np.pi * k[:, None] * x)
                            + b[:, None] * np.sin(2 * np.pi * k[:, None] * x)).sum(axis=0)
        alpha = 1 + 2 * rng.random()
        out = two_diagonal_prep(f, grid, alpha)
        worst_p = max(worst_p, abs(out.success_prob - closed_form_success(f, alpha)))
        target = StateVector(grid, f / norm2(f), True)
        worst_fid = max(worst_fid, 1 - out.fidelity(target))
    const = two_diagonal_prep(np.ones(grid.size), grid, 2.0).success_prob
    ok = worst_p <= 1e-10 and worst_fid <= 1e-10 and abs(const - 0.25) <= 1e-15
    return ok, f"max |P(1) - closed form| {worst_p:.2e}; max infidelity {worst_fid:.2e}; constant alpha=2 P(1)={const!r}"


def _pair(a, n=3):
    psi = np.zeros(1 << n)
    psi[0] = 1
    phi = np.zeros(1 << n)
    phi[0], phi[1] = a, np.sqrt(1 - a * a)
    return psi, phi


def criterion_8():
    a = np.cos(np.pi * 5 / 16)
    rep = qae(*_pair(a), m=4)
    dist = rep.distribution
    exact_ok = abs(rep.exact_value - a) <= 1e-12 and dist[5] + dist[11] >= 1 - 1e-12
    m = 6
    worst = 1.0
    for g in np.linspace(0.03, 0.97, 25):
        d = qae_distribution(*_pair(g), m)
        theta = np.arccos(g) / np.pi * (1 << m)
        lo, hi = int(np.floor(theta)), int(np.ceil(theta))
        # the two outcomes nearest the peak at +theta (its mirror at -theta holds the same mass)
        mass = d[lo % 64] + (d[hi % 64] if hi != lo else 0)
        worst = min(worst, mass)
    ok = exact_ok and worst >= 4 / np.pi**2
    return ok, (f"representable a: estimate {rep.exact_value:.15f} mass on 5/11 {dist[5] + dist[11]:.15f}; "
                f"generic a, m=6: min mass on nearest outcomes {worst:.4f} >= {4 / np.pi**2:.4f}")


def criterion_9():
    start = time.perf_counter()
    e = catalog.get("lotka-volterra")
    grid = build_grid(e.qubits)
    state, _ = _initial(e, grid)
    plan = StepPlan(e.problem, grid, e.L)
    ex = e.extras
    params = LotkaParams(ex["alpha"], ex["beta"], ex["gamma"], ex["delta"])
    x_init = (float(np.exp(-ex["q0"])), float(np.exp(-ex["p0"])))
    rk = rk4_lotka_volterra(params, x_init, e.problem.T, e.L)  # same time nodes, dt = 1e-3
    mq, mp = Observable("moment", (1, 0)), Observable("moment", (0, 1))
    worst, worst_t = 0.0, 0.0
    for k in range(e.L + 1):
        if k % 50 == 0:
            pops = np.exp(-np.array([expectation(state, mq), expectation(state, mp)]))
            rel = float(np.max(np.abs(pops - rk.x[k]) / rk.x[k]))
            if rel > worst:
                worst, worst_t = rel, k * plan.h
        if k < e.L:
            state = trotter_step(state, k * plan.h, plan)
    secs = time.perf_counter() - start
    return worst < 0.05 and secs < 900, f"max relative population error {worst:.3e} at t={worst_t:.2f} (< 5%); {secs:.0f}s"


def criterion_10():
    start = time.perf_counter()
    rng = np.random.default_rng(10)
    worst = {}
    # spectral derivative against the stencil
    err = 0.0
    for p in range(1, 11):
        scheme = fd_coefficients(p)
        for n in range(max(1, int(np.ceil(np.log2(2 * p + 1)))), 9):
            g = build_grid([n])
            v = rng.normal(size=g.size) + 1j * rng.normal(size=g.size)
            s = StateVector(g, v / np.linalg.norm(v), True)
            scaled = apply_qft(s, 0).amps * derivative_eigenvalues(scheme, n)
            spec = apply_qft(StateVector(g, scaled), 0, inverse=True).amps
            err = max(err, float(np.max(np.abs(spec - apply_stencil(s, 0, scheme).amps))))
    worst["stencil"] = err
    # one product-formula step against dense exponentials
    prob = catalog.get("boltzmann2d", p=2).problem
    g = build_grid([3, 3])
    scheme = fd_coefficients(prob.p)
    v = rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape)
    v /= np.linalg.norm(v)
    plan = StepPlan(prob, g, 10, variant="s")
    t0 = 0.3 * prob.T
    dense = v.reshape(-1)
    eye = np.eye(g.size)
    for axis in range(2):
        D = np.stack([apply_stencil(StateVector(g, eye[i].reshape(g.shape)), axis, scheme).flat
                      for i in range(g.size)], axis=1)  # Hermitian derivative on one axis
        c = np.broadcast_to(coefficient_on_grid(prob, axis, g, t0 + plan.h), g.shape).reshape(-1)
        dense = expm(-1j * plan.h * np.diag(c) @ D) @ dense
    step = trotter_step(StateVector(g, v, True), t0, plan).flat
    worst["trotter"] = float(np.max(np.abs(step - dense)))
    # norm drift
    e = catalog.get("boltzmann2d-static", p=10)
    g = build_grid([6, 6])
    s0, _ = _initial(e, g)
    final = evolve(s0, StepPlan(e.problem, g, 1000, T=5.0))
    worst["drift"] = abs(norm2(final.amps) - 1.0)
    # interference protocols against direct inner products
    err = 0.0
    for _ in range(20):
        a = rng.normal(size=32) + 1j * rng.normal(size=32)
        b = rng.normal(size=32) + 1j * rng.normal(size=32)
        a /= np.linalg.norm(a)
        b /= np.linalg.norm(b)
        ov = np.vdot(b, a)
        phase = rng.uniform(-np.pi, np.pi, size=32)
        direct = np.vdot(a, np.exp(1j * phase) * a)
        err = max(err, abs(swap_test(a, b).exact_value - ov.real), abs(swap_test(a, b, imaginary=True).exact_value - ov.imag),
                  abs(hadamard_test(a, phase).exact_value - direct.real),
                  abs(hadamard_test(a, phase, imaginary=True).exact_value - direct.imag))
    worst["interference"] = err
    secs = time.perf_counter() - start
    ok = (worst["stencil"] <= 1e-12 and worst["trotter"] <= 1e-12 and worst["drift"] < 1e-10
          and worst["interference"] <= 1e-12 and secs < 60)
    return ok, ", ".join(f"{k} {v:.2e}" for k, v in worst.items()) + f"; {secs:.1f}s"


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 11)}


def report(i: int) -> bool:
    ok, detail = CRITERIA[i]()
    print(f"{'PASS' if ok else 'FAIL'} criterion {i}: {detail}", flush=True)
    return ok


SLOW = {3, 4, 9}


@pytest.mark.parametrize("number", [pytest.param(i, marks=pytest.mark.slow) if i in SLOW else i for i in CRITERIA])
def test_criterion(number, capsys):
    with capsys.disabled():
        ok = report(number)
    assert ok


if __name__ == "__main__":
    results = [report(i) for i in CRITERIA]
    sys.exit(0 if all(results) else 1)
