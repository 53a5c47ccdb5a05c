"""Coefficient expressions: a small arithmetic grammar, evaluation and the divergence check.

Grammar (whitespace-insensitive)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' unary)?          right associative
    atom    := number | name | name '(' expr ')' | '(' expr ')'

Names are ``x1 .. xd``, ``t``, ``pi`` and the functions
``sin cos exp ln sqrt abs``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy.stats import qmc

FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "ln": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
}
_VAR_RE = re.compile(r"x([1-9][0-9]*)\Z")


class ExprError(Exception):
    """Base class of every expression error."""


class ExprSyntaxError(ExprError, ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class ExprArityError(ExprSyntaxError):
    pass


class ExprDomainError(ExprError, ArithmeticError):
    pass


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str  # "t" or "x<k>"


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Bin:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Var, Neg, Bin, Call]

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            off = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExprSyntaxError(f"unexpected character {text[off]!r}", off)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, off = self.peek()
        if val != value or kind != "op":
            what = "end of input" if kind == "end" else repr(val)
            raise ExprSyntaxError(f"expected {value!r} but found {what}", off)
        self.take()

    def parse(self) -> Expr:
        node = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {val!r}", off)
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Bin(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Bin(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return Bin("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        kind, val, off = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if val in FUNCTIONS:
                if self.peek()[1] != "(":
                    raise ExprArityError(f"function {val!r} needs one argument", self.peek()[2])
                self.take()
                if self.peek()[1] == ")":
                    raise ExprArityError(f"function {val!r} needs one argument", self.peek()[2])
                arg = self.expr()
                if self.peek()[1] == ",":
                    raise ExprArityError(f"function {val!r} takes exactly one argument", self.peek()[2])
                self.expect(")")
                return Call(val, arg)
            if val == "pi":
                return Var("pi")
            if val == "t" or _VAR_RE.match(val):
                return Var(val)
            raise ExprSyntaxError(f"unknown identifier {val!r}", off)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        what = "end of input" if kind == "end" else repr(val)
        raise ExprSyntaxError(f"unexpected {what}", off)


def parse_expr(text: str) -> Expr:
    return _Parser(text).parse()


def to_text(e: Expr) -> str:
    """Print an expression so that it reparses to the same tree."""
    if isinstance(e, Num):
        s = repr(float(e.value))
        return f"({s})" if e.value < 0 or s in ("inf", "nan") else s
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return f"-({to_text(e.arg)})"
    if isinstance(e, Call):
        return f"{e.func}({to_text(e.arg)})"
    return f"({to_text(e.left)} {e.op} {to_text(e.right)})"


def variables(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return set() if e.name == "pi" else {e.name}
    if isinstance(e, Num):
        return set()
    if isinstance(e, (Neg, Call)):
        return variables(e.arg)
    return variables(e.left) | variables(e.right)


def max_axis(e: Expr) -> int:
    axes = [int(v[1:]) for v in variables(e) if v != "t"]
    return max(axes, default=0)


def evaluate(e: Expr, coords: Sequence, t=0.0):
    """Evaluate on scalars or broadcastable arrays; ``coords[k]`` is ``x(k+1)``."""
    with np.errstate(all="ignore"):
        return _eval(e, coords, t)


def _eval(e: Expr, coords, t):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        if e.name == "pi":
            return np.pi
        if e.name == "t":
            return t
        k = int(e.name[1:])
        if k > len(coords):
            raise ValueError(f"variable {e.name} used but only {len(coords)} coordinates given")
        return coords[k - 1]
    if isinstance(e, Neg):
        return -_eval(e.arg, coords, t)
    if isinstance(e, Call):
        arg = _eval(e.arg, coords, t)
        if e.func == "ln" and np.any(np.asarray(arg) <= 0):
            raise ExprDomainError("ln of a non-positive value")
        if e.func == "sqrt" and np.any(np.asarray(arg) < 0):
            raise ExprDomainError("sqrt of a negative value")
        return FUNCTIONS[e.func](arg)
    left = _eval(e.left, coords, t)
    right = _eval(e.right, coords, t)
    if e.op == "+":
        return left + right
    if e.op == "-":
        return left - right
    if e.op == "*":
        return left * right
    if e.op == "/":
        if np.any(np.asarray(right) == 0):
            raise ExprDomainError("division by zero")
        return np.true_divide(left, right)
    out = np.power(np.asarray(left, dtype=float), right)
    if not np.all(np.isfinite(out)) and np.all(np.isfinite(left)) and np.all(np.isfinite(right)):
        raise ExprDomainError("power is undefined for these arguments")
    return out if np.ndim(out) else float(out)


def eval_expr(e: Expr, point: Sequence[float], t: float = 0.0, d: int | None = None) -> float:
    if d is not None and len(point) != d:
        raise ValueError(f"point has {len(point)} coordinates, expected {d}")
    value = float(evaluate(e, [float(x) for x in point], float(t)))
    if not np.isfinite(value):
        raise ExprDomainError("expression is not finite at this point")
    return value


def _as_expr(e) -> Expr:
    return parse_expr(e) if isinstance(e, str) else e


@dataclass
class TransportProblem:
    """Transport equation with coefficient fields ``c_j(x, t)`` on the unit box."""

    coeffs: list
    f0: Expr
    p: int = 10
    T: float = 1.0
    label: str = ""
    constraint_ok: bool = field(default=False, init=False)
    f0_samples: np.ndarray | None = field(default=None, init=False, repr=False)

    def __post_init__(self) -> None:
        self.coeffs = [_as_expr(c) for c in self.coeffs]
        if isinstance(self.f0, (np.ndarray, list, tuple)):
            # explicit grid samples instead of a formula
            self.f0_samples = np.asarray(self.f0, dtype=float)
            self.f0 = Num(0.0)
        else:
            self.f0 = _as_expr(self.f0)
        if self.p < 1:
            raise ValueError("finite-difference half-width p must be at least 1")
        if not self.T > 0:
            raise ValueError("horizon T must be positive")
        for e in [*self.coeffs, self.f0]:
            if max_axis(e) > self.d:
                raise ValueError(f"{to_text(e)} uses an axis beyond d={self.d}")

    @property
    def d(self) -> int:
        return len(self.coeffs)

    def coefficient(self, axis: int, coords, t):
        return evaluate(self.coeffs[axis], coords, t)

    def is_time_dependent(self, axis: int | None = None) -> bool:
        exprs = self.coeffs if axis is None else [self.coeffs[axis]]
        return any("t" in variables(e) for e in exprs)

    def initial_samples(self, grid) -> np.ndarray:
        if self.f0_samples is not None:
            if self.f0_samples.size != grid.size:
                raise ValueError(f"f0 has {self.f0_samples.size} samples but the grid has {grid.size} nodes")
            return self.f0_samples.reshape(grid.shape).copy()
        vals = evaluate(self.f0, grid.mesh(), 0.0)
        return np.broadcast_to(np.asarray(vals, dtype=float), grid.shape).copy()

    def check_finite(self, grid, n_times: int = 8) -> None:
        mesh = grid.mesh()
        for t in np.linspace(0.0, self.T, n_times):
            for j, e in enumerate(self.coeffs):
                if not np.all(np.isfinite(evaluate(e, mesh, t))):
                    raise ExprDomainError(f"c{j + 1} is not finite on the grid at t={t}")
        if not np.all(np.isfinite(self.initial_samples(grid))):
            raise ExprDomainError("f0 is not finite on the grid")


@dataclass
class ConstraintReport:
    passed: bool
    worst: list  # per axis: (|estimate|, point, t)
    tol: float

    def __str__(self) -> str:
        lines = [f"divergence check {'passed' if self.passed else 'FAILED'} (tol {self.tol:g})"]
        for j, (val, pt, t) in enumerate(self.worst):
            coords = ", ".join(f"{x:.4g}" for x in pt)
            lines.append(f"  axis {j + 1}: max |d c{j + 1}/d x{j + 1}| = {val:.3g} at x=({coords}), t={t:.4g}")
        return "\n".join(lines)


def check_constraint(prob: TransportProblem, samples: int = 64, tol: float = 1e-8,
                     step: float = 1e-5, seed: int = 0) -> ConstraintReport:
    """Numerically check that each c_j does not depend on x_j."""
    if samples < 1:
        raise ValueError("need at least one sample")
    d = prob.d
    pts = qmc.Halton(d=d + 1, scramble=True, seed=seed).random(samples)
    pts[:, d] *= prob.T
    worst = []
    passed = True
    for j, e in enumerate(prob.coeffs):
        best = (0.0, tuple(pts[0, :d]), float(pts[0, d]))
        for row in pts:
            x = list(row[:d])
            t = float(row[d])
            xp = list(x)
            xm = list(x)
            xp[j] += step
            xm[j] -= step
            deriv = (eval_expr(e, xp, t) - eval_expr(e, xm, t)) / (2 * step)
            if abs(deriv) > best[0]:
                best = (abs(deriv), tuple(x), t)
        worst.append(best)
        passed = passed and best[0] <= tol
    prob.constraint_ok = passed
    return ConstraintReport(passed, worst, tol)
