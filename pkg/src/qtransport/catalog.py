"""Built-in problems with their default resolution and exact-solution oracles."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .expr import TransportProblem, evaluate
from .reference import LotkaParams, characteristics_boltzmann2d, liouville_problem_lotka


@dataclass
class CatalogEntry:
    name: str
    description: str
    problem: TransportProblem
    qubits: list
    L: int
    oracle: Callable | None = None  # oracle(*mesh, t) -> unnormalized samples
    extras: dict = field(default_factory=dict)


def _gaussian(mu1: float, mu2: float, sigma: float, centered: bool) -> str:
    if centered:
        mu1, mu2 = mu1 + 0.5, mu2 + 0.5
    mu1, mu2, sigma = float(mu1), float(mu2), float(sigma)
    return f"exp(-((x1-({mu1!r}))^2 + (x2-({mu2!r}))^2)/(2*({sigma!r})^2))"


def _characteristics_oracle(problem: TransportProblem, qE0_over_m: float, c: float) -> Callable:
    def f0(x, v):
        return evaluate(problem.f0, [x, v], 0.0)

    def oracle(x, v, t):
        return characteristics_boltzmann2d(x, v, t, qE0_over_m, c, f0)

    return oracle


def convection1d(p: int = 10, v: float = 1.0, T: float = 0.5) -> CatalogEntry:
    """Constant advection on three qubits from the vector ``[1/2, 1/sqrt 2, 1/2, 0, 0, 0, 0, 0]``."""
    samples = np.array([0.5, 1 / np.sqrt(2), 0.5, 0, 0, 0, 0, 0])
    prob = TransportProblem([repr(float(v))], samples, p=p, T=T, label="convection1d")

    def oracle(x, t):
        n_pts = x.size
        cells = v * t * n_pts
        k = int(round(cells))
        if abs(cells - k) > 1e-9:
            raise ValueError("the sample oracle needs v t to be a whole number of cells")
        return np.roll(samples, k).reshape(x.shape)

    return CatalogEntry("convection1d", "1D constant advection, 3 qubits, hand-set initial vector",
                        prob, [3], 2, oracle, {"v": v})


def boltzmann2d(p: int = 10, qE0_over_m: float = -1.0, c: float = 1.6, T: float = 0.025,
                sigma: float = 1 / (10 * np.sqrt(2)), centered_mu: bool = True, n: int = 10,
                L: int = 128) -> CatalogEntry:
    """Phase-space advection in a uniformly moving harmonic field (time-dependent force)."""
    f0 = _gaussian(-0.1, 0.1, sigma, centered_mu)
    qE0_over_m, c = float(qE0_over_m), float(c)
    coeffs = ["x2 - 0.5", f"({qE0_over_m!r})*(x1 - 0.5 - ({c!r})*t)"]
    prob = TransportProblem(coeffs, f0, p=p, T=T, label="boltzmann2d")
    return CatalogEntry("boltzmann2d", "collisionless phase-space advection, moving harmonic field",
                        prob, [n, n], L, _characteristics_oracle(prob, qE0_over_m, c),
                        {"qE0_over_m": qE0_over_m, "c": c, "sigma": sigma, "centered_mu": centered_mu})


def boltzmann2d_static(p: int = 3, qE0_over_m: float = -1.0, T: float = 2 * np.pi, sigma: float = 0.05,
                       centered_mu: bool = True, n: int = 7, L: int = 128) -> CatalogEntry:
    """Phase-space rotation in a static harmonic field; a full period for the default ``T``."""
    f0 = _gaussian(-0.1, 0.1, sigma, centered_mu)
    qE0_over_m = float(qE0_over_m)
    coeffs = ["x2 - 0.5", f"({qE0_over_m!r})*(x1 - 0.5)"]
    prob = TransportProblem(coeffs, f0, p=p, T=T, label="boltzmann2d-static")
    return CatalogEntry("boltzmann2d-static", "collisionless phase-space rotation, static harmonic field",
                        prob, [n, n], L, _characteristics_oracle(prob, qE0_over_m, 0.0),
                        {"qE0_over_m": qE0_over_m, "c": 0.0, "sigma": sigma, "centered_mu": centered_mu})


def boltzmann2d_walsh(p: int = 10, centered_mu: bool = True) -> CatalogEntry:
    """Static-field rotation on a 5+5 qubit grid, used for truncated-diagonal sweeps."""
    entry = boltzmann2d_static(p=p, T=0.5, sigma=0.05, centered_mu=centered_mu, n=5, L=128)
    entry.name = "boltzmann2d-walsh"
    entry.problem.label = entry.name
    entry.description = "static-field rotation on 5+5 qubits for Walsh budget sweeps"
    return entry


def lotka_volterra(p: int = 4, n: int = 9, L: int = 5000, T: float = 5.0) -> CatalogEntry:
    """Liouville transport of a narrow Gaussian under the log-transformed predator-prey flow."""
    params = LotkaParams()
    prob = liouville_problem_lotka(params, q0=0.7, p0=0.3, sigma=0.02, T=T, p=p)
    return CatalogEntry("lotka-volterra", "Liouville equation of the Lotka-Volterra system in (q, p) = -ln x",
                        prob, [n, n], L, None,
                        {"alpha": params.alpha, "beta": params.beta, "gamma": params.gamma,
                         "delta": params.delta, "q0": 0.7, "p0": 0.3})


CATALOG: dict[str, Callable[..., CatalogEntry]] = {
    "convection1d": convection1d,
    "boltzmann2d": boltzmann2d,
    "boltzmann2d-static": boltzmann2d_static,
    "boltzmann2d-walsh": boltzmann2d_walsh,
    "lotka-volterra": lotka_volterra,
}


def get(name: str, **kwargs) -> CatalogEntry:
    try:
        factory = CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown catalog problem {name!r}; known: {', '.join(CATALOG)}") from None
    return factory(**kwargs)
