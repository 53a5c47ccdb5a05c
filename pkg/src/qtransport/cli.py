"""Command-line driver: ``qtransport simulate | sweep | gates | catalog``.

Runs are described by a JSON config (see :class:`RunConfig`). Every command
that writes files also writes ``manifest.json`` with the resolved config and
the library version, so a run can be repeated from its manifest alone.

Exit codes: 0 ok, 2 config error, 3 constraint violation, 4 capacity guard.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np
import scipy.fft as sfft

from . import __version__, catalog
from .circuit import (GateList, gate_metrics, qft_circuit, register_qubits, synthesize_walsh_circuit,
                      walsh_series_cost)
from .evolution import StepPlan, evolve
from .expr import ExprError, TransportProblem, check_constraint, variables
from .grid import CapacityError, DEFAULT_MAX_QUBITS, StateVector, build_grid, norm2
from .measurement import Observable, expectation, hadamard_test, sampled_expectation
from .reference import SWEEP_COLUMNS, LotkaParams, SweepSpec, rk4_lotka_volterra, run_sweep
from .stateprep import DEFAULT_ALPHA, closed_form_success, two_diagonal_prep
from .walsh import _dense_to_series, multidim_walsh_series, sparse_walsh_series, split_budget, walsh_coefficients

EXIT_OK, EXIT_CONFIG, EXIT_CONSTRAINT, EXIT_CAPACITY = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


class ConstraintViolation(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# config


@dataclass
class RunConfig:
    """Resolved run description. ``None`` fields take the catalog defaults.

    ``problem`` is a catalog name or an inline ``{"c": [...], "f0": expr or samples}``.
    ``prep`` is ``{"mode": "exact"}`` or ``{"mode": "two-diagonal", "alpha": a, "budget": K}``.
    ``walsh`` is ``{"method": "exact" | "m" | "sparse", "budget": K}`` for the evolution diagonals.
    ``measurement`` holds ``observables`` (list of ``{"kind", "payload"}``),
    ``protocol`` (``exact``, ``sampled`` or ``hadamard``), ``shots`` and ``seed``.
    """

    problem: Any = "convection1d"
    options: dict = field(default_factory=dict)
    p: int | None = None
    qubits: list | None = None
    T: float | None = None
    L: int | None = None
    variant: str = "g"
    prep: dict = field(default_factory=lambda: {"mode": "exact"})
    walsh: dict = field(default_factory=lambda: {"method": "exact"})
    measurement: dict = field(default_factory=dict)
    record_every: int | None = None
    save_states: bool = False
    sweep: dict | None = None
    gates: dict | None = None
    output: str | None = None
    max_qubits: int = DEFAULT_MAX_QUBITS

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config field(s): {', '.join(unknown)}")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def loads(cls, text: str) -> "RunConfig":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None

    def dumps(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True, allow_nan=False)

    def validate(self) -> None:
        if self.variant not in ("s", "g"):
            raise ConfigError(f"variant must be 's' or 'g', got {self.variant!r}")
        if self.prep.get("mode", "exact") not in ("exact", "two-diagonal"):
            raise ConfigError(f"unknown prep mode {self.prep.get('mode')!r}")
        if self.walsh.get("method", "exact") not in ("exact", "m", "sparse"):
            raise ConfigError(f"unknown walsh method {self.walsh.get('method')!r}")
        if self.walsh.get("method", "exact") != "exact" and not isinstance(self.walsh.get("budget"), int):
            raise ConfigError("a truncated walsh method needs an integer budget")
        proto = self.measurement.get("protocol", "exact")
        if proto not in ("exact", "sampled", "hadamard"):
            raise ConfigError(f"unknown measurement protocol {proto!r}")
        for name in ("p", "L", "record_every"):
            v = getattr(self, name)
            if v is not None and (not isinstance(v, int) or v < 1):
                raise ConfigError(f"{name} must be a positive integer")
        if self.T is not None and not (isinstance(self.T, (int, float)) and self.T > 0):
            raise ConfigError("T must be a positive number")
        if self.qubits is not None and not all(isinstance(n, int) and n >= 1 for n in self.qubits):
            raise ConfigError("qubits must list positive integers")


@dataclass
class Resolved:
    config: RunConfig
    entry: catalog.CatalogEntry

    @property
    def problem(self) -> TransportProblem:
        return self.entry.problem


def resolve(cfg: RunConfig) -> Resolved:
    try:
        if isinstance(cfg.problem, str):
            entry = catalog.get(cfg.problem, **cfg.options)
        elif isinstance(cfg.problem, dict):
            spec = dict(cfg.problem)
            coeffs, f0 = spec.pop("c"), spec.pop("f0")
            label = spec.pop("label", "inline")
            if spec:
                raise ConfigError(f"unknown inline problem field(s): {', '.join(sorted(spec))}")
            prob = TransportProblem(list(coeffs), f0, label=label)
            entry = catalog.CatalogEntry(label, "inline problem", prob, [5] * prob.d, 16)
        else:
            raise ConfigError("problem must be a catalog name or an inline object")
    except (KeyError, TypeError) as exc:
        raise ConfigError(str(exc).strip("'\"")) from None
    except ExprError as exc:
        raise ConfigError(f"bad expression: {exc}") from None
    prob = entry.problem
    if cfg.p is not None:
        prob.p = cfg.p
    if cfg.T is not None:
        prob.T = float(cfg.T)
    if cfg.qubits is not None:
        if len(cfg.qubits) != prob.d:
            raise ConfigError(f"qubits lists {len(cfg.qubits)} axes but the problem has d={prob.d}")
        entry.qubits = list(cfg.qubits)
    if cfg.L is not None:
        entry.L = cfg.L
    resolved = RunConfig(**{**asdict(cfg), "p": prob.p, "T": prob.T, "qubits": list(entry.qubits), "L": entry.L})
    return Resolved(resolved, entry)


def _check(res: Resolved):
    grid = build_grid(res.entry.qubits, res.config.max_qubits)
    report = check_constraint(res.problem)
    if not report.passed:
        raise ConstraintViolation(str(report))
    try:
        res.problem.check_finite(grid)
    except ExprError as exc:
        raise ConfigError(str(exc)) from None
    return grid


# ---------------------------------------------------------------------------
# output helpers


def fmt(x) -> str:
    """Shortest decimal that round-trips to the same double."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return "" if x is None else str(x)


def write_csv(path: Path, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(row[c]) for c in columns])


def write_svg(path: Path, rows: list[dict], x_key: str, y_keys: list[str], title: str) -> None:
    """Minimal log-log line plot as plain SVG."""
    width, height, pad = 640, 420, 60
    series = []
    for key in y_keys:
        pts = [(float(r[x_key]), float(r[key])) for r in rows]
        pts = [(x, y) for x, y in pts if x > 0 and y > 0 and math.isfinite(y)]
        if pts:
            series.append((key, pts))
    if not series:
        return
    xs = [math.log10(x) for _, pts in series for x, _ in pts]
    ys = [math.log10(y) for _, pts in series for _, y in pts]
    x0, x1 = min(xs), max(xs) if max(xs) > min(xs) else min(xs) + 1
    y0, y1 = min(ys), max(ys) if max(ys) > min(ys) else min(ys) + 1

    def px(x, y):
        return (pad + (math.log10(x) - x0) / (x1 - x0) * (width - 2 * pad),
                height - pad - (math.log10(y) - y0) / (y1 - y0) * (height - 2 * pad))

    colors = ["#c0392b", "#2471a3", "#229954", "#7d3c98", "#b9770e"]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{width / 2}" y="24" text-anchor="middle" font-size="14">{title}</text>',
           f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
           f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
           f'<text x="{width / 2}" y="{height - 15}" text-anchor="middle" font-size="12">{x_key} (log)</text>']
    for i, (key, pts) in enumerate(series):
        color = colors[i % len(colors)]
        coords = " ".join(f"{a:.1f},{b:.1f}" for a, b in (px(x, y) for x, y in pts))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{coords}"/>')
        out.append(f'<text x="{width - pad - 150}" y="{pad + 16 * i}" fill="{color}" font-size="12">{key}</text>')
    out.append("</svg>")
    path.write_text("\n".join(out) + "\n")


def write_manifest(out: Path, res: Resolved, command: str, seed: int, threads: int, files: list[str]) -> None:
    manifest = {
        "command": command,
        "library": "qtransport",
        "version": __version__,
        "seed": seed,
        "threads": threads,
        "config": json.loads(res.config.dumps()),
        "files": sorted(files),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# commands


def _observables(cfg: RunConfig) -> list[Observable]:
    obs = []
    for item in cfg.measurement.get("observables", []):
        payload = item.get("payload")
        if isinstance(payload, list):
            payload = tuple(payload)
        try:
            obs.append(Observable(item["kind"], payload))
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad observable {item}: {exc}") from None
    return obs


def _truncation(cfg: RunConfig):
    method = cfg.walsh.get("method", "exact")
    return None if method == "exact" else (method, int(cfg.walsh["budget"]))


def cmd_simulate(res: Resolved, out: Path, seed: int) -> list[str]:
    cfg = res.config
    prob = res.problem
    grid = _check(res)
    files = []
    samples = prob.initial_samples(grid)
    scale = norm2(samples)
    if scale == 0:
        raise ConfigError("f0 vanishes on the grid")
    target = StateVector(grid, samples / scale, normalized=True)
    prep_rows = []
    if cfg.prep.get("mode", "exact") == "exact":
        state0 = target
    else:
        alpha = float(cfg.prep.get("alpha", DEFAULT_ALPHA))
        shots = cfg.prep.get("shots")
        outcome = two_diagonal_prep(samples, grid, alpha, cfg.prep.get("budget"), shots, seed)
        state0 = outcome.conditioned_state
        prep_rows.append({"alpha": alpha, "success_prob": outcome.success_prob,
                          "closed_form": closed_form_success(samples, alpha),
                          "sampled_success": outcome.sampled_success, "fidelity": outcome.fidelity(target)})
        write_csv(out / "prep.csv", list(prep_rows[0]), prep_rows)
        files.append("prep.csv")

    plan = StepPlan(prob, grid, res.entry.L, cfg.variant, truncation=_truncation(cfg))
    every = cfg.record_every or res.entry.L
    final, snaps = evolve(state0, plan, record=every)
    if snaps[-1][0] != plan.T and abs(snaps[-1][0] - plan.T) > 1e-12:
        snaps.append((plan.T, final))

    err_rows = []
    for t, st in snaps:
        row = {"t": t, "norm": norm2(st.amps), "error": float("nan")}
        if res.entry.oracle is not None:
            exact = np.asarray(res.entry.oracle(*grid.mesh(), t), dtype=float) / scale
            row["error"] = norm2(st.amps - exact)
        err_rows.append(row)
    write_csv(out / "error.csv", ["t", "error", "norm"], err_rows)
    files.append("error.csv")

    obs = _observables(cfg)
    if obs:
        proto = cfg.measurement.get("protocol", "exact")
        shots = cfg.measurement.get("shots")
        mseed = cfg.measurement.get("seed", seed)
        rows = []
        for t, st in snaps:
            for o in obs:
                if proto == "exact":
                    rep = expectation(st, o)
                    rows.append({"t": t, "observable": f"{o.kind}:{o.payload}", "protocol": proto,
                                 "exact": rep, "estimate": rep, "stderr": 0.0, "shots": 0})
                    continue
                if shots is None:
                    raise ConfigError(f"protocol {proto!r} needs measurement.shots")
                if proto == "sampled":
                    rep = sampled_expectation(st, o, int(shots), mseed)
                else:
                    rep = hadamard_test(st, o, int(shots), mseed)
                rows.append({"t": t, "observable": f"{o.kind}:{o.payload}", "protocol": proto,
                             "exact": rep.exact_value, "estimate": rep.sampled_value,
                             "stderr": rep.stderr, "shots": int(shots)})
        write_csv(out / "expectations.csv", ["t", "observable", "protocol", "exact", "estimate", "stderr", "shots"], rows)
        files.append("expectations.csv")

    if res.entry.name == "lotka-volterra":
        files.append(_write_populations(out, res, snaps, grid))

    gate_rows = gate_report(res, grid, [cfg.walsh.get("budget")] if _truncation(cfg) else [None],
                            cfg.walsh.get("method", "sparse") if _truncation(cfg) else "sparse")
    write_csv(out / "gates.csv", GATE_COLUMNS, gate_rows)
    files.append("gates.csv")
    if cfg.save_states:
        np.savez(out / "states.npz", t=np.array([t for t, _ in snaps]),
                 amps=np.stack([s.amps for _, s in snaps]))
        files.append("states.npz")
    return files


def _write_populations(out: Path, res: Resolved, snaps, grid) -> str:
    ex = res.entry.extras
    params = LotkaParams(ex["alpha"], ex["beta"], ex["gamma"], ex["delta"])
    x_init = (float(np.exp(-ex["q0"])), float(np.exp(-ex["p0"])))
    rows = []
    mq, mp = Observable("moment", (1, 0)), Observable("moment", (0, 1))
    for t, st in snaps:
        x1, x2 = np.exp(-expectation(st, mq)), np.exp(-expectation(st, mp))
        if t > 0:
            steps = max(1, int(round(t / 1e-3)))
            rk = rk4_lotka_volterra(params, x_init, t, steps).x[-1]
        else:
            rk = np.array(x_init)
        rows.append({"t": t, "x1": x1, "x2": x2, "x1_rk4": rk[0], "x2_rk4": rk[1],
                     "rel_err_x1": abs(x1 - rk[0]) / rk[0], "rel_err_x2": abs(x2 - rk[1]) / rk[1]})
    write_csv(out / "populations.csv", list(rows[0]), rows)
    return "populations.csv"


GATE_COLUMNS = ("budget", "method", "axis", "registers", "walsh_terms", "nonzero_terms", "rz_count",
                "cnot_count", "gphase_count", "diag_depth", "qft_size", "qft_depth", "step_size",
                "step_depth_sequential", "step_depth_parallel", "total_size", "total_depth")


def _phase_support(prob: TransportProblem, axis: int) -> list[int]:
    regs = {axis}
    for name in variables(prob.coeffs[axis]):
        if name.startswith("x"):
            regs.add(int(name[1:]) - 1)
    return sorted(regs)


def _axis_series(plan: StepPlan, axis: int, budget, method: str):
    """Walsh series of one step diagonal, restricted to the registers it acts on."""
    grid = plan.grid
    regs = _phase_support(plan.problem, axis)
    theta = np.broadcast_to(plan.phase(axis, 0.0), grid.shape)
    sl = tuple(slice(None) if a in regs else 0 for a in range(grid.d))
    sub = np.ascontiguousarray(theta[sl])
    dims = [grid.qubits[a] for a in regs]
    if budget is None:
        series = _dense_to_series(walsh_coefficients(sub), dims, sub.shape)
    elif method == "sparse":
        series = sparse_walsh_series(sub, min(int(budget), sub.size))
    else:
        series = multidim_walsh_series(sub, dims, split_budget(min(int(budget), sub.size), dims))
    return regs, series


def step_circuit(res: Resolved, grid, budget=None, method: str = "sparse") -> GateList:
    """Gate list of the first product-formula step: per axis QFT, Walsh diagonal, inverse QFT."""
    plan = StepPlan(res.problem, grid, res.entry.L, res.config.variant)
    total = sum(grid.qubits)
    gl = GateList(total)
    for axis in range(grid.d):
        regs, series = _axis_series(plan, axis, budget, method)
        qubits = register_qubits(grid, axis)
        gl.extend(qft_circuit(qubits, total))
        gl.extend(synthesize_walsh_circuit(series, [register_qubits(grid, a) for a in regs], total))
        gl.extend(qft_circuit(qubits, total, inverse=True))
    return gl


def gate_report(res: Resolved, grid, budgets, method: str = "sparse") -> list[dict]:
    """Per-diagonal and per-step gate counts for each budget (``None`` = exact diagonal).

    A diagonal that depends on a single register can run in parallel with the
    diagonals of the other axes, which is what ``step_depth_parallel`` reports.
    """
    prob = res.problem
    plan = StepPlan(prob, grid, res.entry.L, res.config.variant)
    qft = {}
    for n in set(grid.qubits):
        gl = qft_circuit(list(range(n)), n)
        m = gate_metrics(gl)
        qft[n] = (m["size"], m["depth"])
    rows = []
    for budget in budgets:
        per_axis = []
        for axis in range(grid.d):
            regs, series = _axis_series(plan, axis, budget, method)
            cost = walsh_series_cost(series)
            mag = np.abs(series.coeffs)
            cost["nonzero_terms"] = int(np.count_nonzero(mag > 1e-12 * mag.max())) if mag.size else 0
            qsize, qdepth = qft[grid.qubits[axis]]
            per_axis.append((axis, regs, cost, qsize, qdepth))
        seq_depth = sum(2 * qd + c["sequential_depth"] for _, _, c, _, qd in per_axis)
        independent = all(len(r) == 1 for _, r, _, _, _ in per_axis)
        par_depth = max(2 * qd + c["sequential_depth"] for _, _, c, _, qd in per_axis) if independent else seq_depth
        step_size = sum(2 * qs + c["size"] for _, _, c, qs, _ in per_axis)
        for axis, regs, cost, qsize, qdepth in per_axis:
            rows.append({
                "budget": "exact" if budget is None else int(budget),
                "method": "exact" if budget is None else method,
                "axis": axis + 1,
                "registers": " ".join(str(r + 1) for r in regs),
                "walsh_terms": cost["walsh_terms"],
                "nonzero_terms": cost["nonzero_terms"],
                "rz_count": cost["rz_count"],
                "cnot_count": cost["cnot_count"],
                "gphase_count": cost["gphase_count"],
                "diag_depth": cost["sequential_depth"],
                "qft_size": qsize,
                "qft_depth": qdepth,
                "step_size": step_size,
                "step_depth_sequential": seq_depth,
                "step_depth_parallel": par_depth,
                "total_size": step_size * res.entry.L,
                "total_depth": par_depth * res.entry.L,
            })
    return rows


def cmd_gates(res: Resolved, out: Path) -> list[str]:
    grid = _check(res)
    spec = res.config.gates or {}
    budgets = spec.get("budgets", ["exact"])
    budgets = [None if b in (None, "exact") else int(b) for b in budgets]
    method = spec.get("method", "sparse")
    rows = gate_report(res, grid, budgets, method)
    write_csv(out / "gates.csv", GATE_COLUMNS, rows)
    files = ["gates.csv"]
    if spec.get("circuit", False):
        if grid.total_qubits > 14:
            raise ConfigError("gates.circuit is limited to 14 qubits; the exact gate list grows as 4^n")
        (out / "step_circuit.txt").write_text(step_circuit(res, grid, budgets[0], method).dumps())
        files.append("step_circuit.txt")
    return files


def cmd_sweep(res: Resolved, out: Path, threads: int) -> list[str]:
    spec = res.config.sweep
    if not spec:
        raise ConfigError("sweep command needs a 'sweep' section")
    variable = spec.get("variable")
    if variable not in ("n", "L", "walsh_budget"):
        raise ConfigError(f"sweep variable must be n, L or walsh_budget, got {variable!r}")
    values = spec.get("values")
    if not values:
        raise ConfigError("sweep needs a non-empty 'values' list")
    if res.entry.oracle is None:
        raise ConfigError(f"problem {res.entry.name!r} has no exact-solution oracle to sweep against")
    for v in values:
        n = v if variable == "n" else res.entry.qubits
        qubits = [n] * res.problem.d if isinstance(n, int) else n
        build_grid(qubits, res.config.max_qubits)
    report = check_constraint(res.problem)
    if not report.passed:
        raise ConstraintViolation(str(report))
    methods = spec.get("truncations", [spec.get("truncation", "sparse")]) if variable == "walsh_budget" else ["sparse"]
    rows = []
    for method in methods:
        def job(value, method=method):
            s = SweepSpec(res.problem, variable, [value], res.entry.oracle, n=list(res.entry.qubits),
                          L=res.entry.L, variant=res.config.variant, method=spec.get("method", "product"),
                          truncation=method, ode_steps=spec.get("ode_steps"), K=spec.get("K"))
            return run_sweep(s)[0]

        with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
            rows.extend(pool.map(job, values))
    write_csv(out / "sweep.csv", SWEEP_COLUMNS, rows)
    files = ["sweep.csv"]
    if spec.get("svg", False):
        write_svg(out / "sweep.svg", rows, "value", ["measured_error", "bound_thm2", "bound_thm3"],
                  f"{res.entry.name}: error vs {variable}")
        files.append("sweep.svg")
    return files


def cmd_catalog(stream) -> None:
    for name, factory in catalog.CATALOG.items():
        e = factory()
        stream.write(f"{name}\t d={e.problem.d} qubits={e.qubits} p={e.problem.p} T={e.problem.T!r} "
                     f"L={e.L}\t{e.description}\n")


# ---------------------------------------------------------------------------
# entry point


def load_config(text: str) -> tuple[RunConfig, int]:
    """Parse a config, or a manifest written by an earlier run (then its seed is reused)."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if isinstance(data, dict) and data.get("library") == "qtransport" and "config" in data:
        return RunConfig.from_dict(data["config"]), int(data.get("seed", 0))
    return RunConfig.from_dict(data), 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qtransport", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("simulate", "sweep", "gates"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="JSON run config or a previous manifest.json (default: convection1d)")
        sp.add_argument("--out", type=Path, help="output directory (default: config 'output' or ./run)")
        sp.add_argument("--seed", type=int, default=None, help="seed for every sampled quantity (default 0, or the manifest's)")
        sp.add_argument("--threads", type=int, default=1, help="worker threads for transforms and sweeps")
    sub.add_parser("catalog")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    if args.command == "catalog":
        cmd_catalog(sys.stdout)
        return EXIT_OK
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        seed = 0
        if args.config is not None:
            try:
                text = args.config.read_text()
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}") from None
            cfg, seed = load_config(text)
        else:
            cfg = RunConfig()
        if args.seed is not None:
            seed = args.seed
        if seed < 0 or seed >= 1 << 64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        res = resolve(cfg)
        out = args.out or Path(cfg.output or "run")
        out.mkdir(parents=True, exist_ok=True)
        with sfft.set_workers(args.threads):
            if args.command == "simulate":
                files = cmd_simulate(res, out, seed)
            elif args.command == "sweep":
                files = cmd_sweep(res, out, args.threads)
            else:
                files = cmd_gates(res, out)
        write_manifest(out, res, args.command, seed, args.threads, files + ["manifest.json"])
    except ConstraintViolation as exc:
        print(f"constraint violation:\n{exc}", file=sys.stderr)
        return EXIT_CONSTRAINT
    except CapacityError as exc:
        print(f"capacity guard: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (ConfigError, ExprError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"wrote {', '.join(sorted(files))} to {out}{os.sep}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
