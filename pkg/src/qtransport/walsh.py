"""Walsh functions and truncated Walsh series in natural (dyadic) ordering.

``w_j(x) = (-1)^(sum_i j_i x_i)`` where ``j_i`` is bit ``i`` of ``j`` counted
from the least significant end and ``x_i`` is the ``(i+1)``-th binary digit of
``x`` after the point. On a grid of ``2^n`` nodes this is
``(-1)^popcount(j & bitrev_n(k))`` at ``x = k / 2^n``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


def _is_pow2(m: int) -> bool:
    return m >= 1 and (m & (m - 1)) == 0


def next_pow2(m: float) -> int:
    m = int(np.ceil(m))
    return 1 if m <= 1 else 1 << (m - 1).bit_length()


def bit_reverse_indices(n: int) -> np.ndarray:
    k = np.arange(1 << n)
    out = np.zeros_like(k)
    for b in range(n):
        out |= ((k >> b) & 1) << (n - 1 - b)
    return out


def fwht(values: np.ndarray, axis: int = 0) -> np.ndarray:
    """Unnormalized fast Walsh-Hadamard transform (natural order) along one axis."""
    a = np.moveaxis(np.array(values, dtype=float, copy=True), axis, 0)
    size = a.shape[0]
    if not _is_pow2(size):
        raise ValueError(f"length {size} is not a power of two")
    rest = a.shape[1:]
    h = 1
    while h < size:
        a = a.reshape((size // (2 * h), 2, h) + rest)
        top = a[:, 0] + a[:, 1]
        a[:, 1] = a[:, 0] - a[:, 1]
        a[:, 0] = top
        a = a.reshape((size,) + rest)
        h *= 2
    return np.moveaxis(a, 0, axis)


def walsh_function(j: int, x: float) -> int:
    if j < 0:
        raise ValueError("Walsh index must be non-negative")
    parity = 0
    for i in range(j.bit_length()):
        if (j >> i) & 1:
            parity ^= int(np.floor(x * (1 << (i + 1)))) & 1
    return -1 if parity else 1


def walsh_matrix(m: int) -> np.ndarray:
    """``W[j, k] = w_j(k / 2^m)``; for tests and small oracles."""
    rev = bit_reverse_indices(m)
    j = np.arange(1 << m)[:, None]
    bits = j & rev[None, :]
    pop = np.zeros_like(bits)
    for b in range(m):
        pop += (bits >> b) & 1
    return 1 - 2 * (pop & 1)


def walsh_coefficients(samples: np.ndarray) -> np.ndarray:
    """``a_j = (1/M) sum_k f(k/M) w_j(k/M)`` along every axis of ``samples``."""
    out = np.asarray(samples, dtype=float)
    for axis in range(out.ndim):
        size = out.shape[axis]
        if not _is_pow2(size):
            raise ValueError(f"length {size} is not a power of two")
        rev = bit_reverse_indices(size.bit_length() - 1)
        out = fwht(np.take(out, rev, axis=axis), axis) / size
    return out


def walsh_synthesis(coeffs: np.ndarray) -> np.ndarray:
    """Inverse of :func:`walsh_coefficients`: grid values from a dense coefficient array."""
    out = np.asarray(coeffs, dtype=float)
    for axis in range(out.ndim):
        size = out.shape[axis]
        rev = bit_reverse_indices(size.bit_length() - 1)
        out = np.take(fwht(out, axis), rev, axis=axis)
    return out


@dataclass(frozen=True)
class WalshSeries:
    """Truncated series ``sum a_j w_j``; ``indices`` has one row per kept multi-index."""

    dims: tuple[int, ...]
    indices: np.ndarray
    coeffs: np.ndarray
    samples_per_axis: tuple[int, ...]
    certificate: float | None = None

    @property
    def terms(self) -> dict[tuple[int, ...], float]:
        return {tuple(int(v) for v in row): float(c) for row, c in zip(self.indices, self.coeffs)}

    def __len__(self) -> int:
        return len(self.coeffs)

    def dense_coefficients(self) -> np.ndarray:
        dense = np.zeros(tuple(1 << n for n in self.dims))
        if len(self.coeffs):
            dense[tuple(self.indices.T)] = self.coeffs
        return dense

    def evaluate(self) -> np.ndarray:
        """Series values at every node of the ``dims`` grid."""
        return walsh_synthesis(self.dense_coefficients())

    def evaluate_at(self, x: Sequence[float]) -> float:
        total = 0.0
        for row, c in zip(self.indices, self.coeffs):
            term = c
            for j, xi in zip(row, x):
                term *= walsh_function(int(j), xi)
            total += term
        return total

    def hamming_weights(self) -> np.ndarray:
        w = np.zeros(len(self.coeffs), dtype=int)
        for col in range(self.indices.shape[1] if self.indices.size else 0):
            v = self.indices[:, col].copy()
            while np.any(v):
                w += v & 1
                v >>= 1
        return w


def _dense_to_series(dense: np.ndarray, dims, samples, certificate=None, keep_zeros=True) -> WalshSeries:
    if keep_zeros:
        idx = np.argwhere(np.ones(dense.shape, dtype=bool))
    else:
        idx = np.argwhere(dense != 0)
    coeffs = dense[tuple(idx.T)] if len(idx) else np.zeros(0)
    return WalshSeries(tuple(dims), idx.astype(np.int64), np.asarray(coeffs, float), tuple(samples), certificate)


def _as_samples(f, dims: Sequence[int], budgets: Sequence[int]) -> np.ndarray:
    """Samples of ``f`` at the coarse nodes ``k / M_i``."""
    if callable(f):
        axes = [np.arange(m) / m for m in budgets]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.broadcast_to(np.asarray(f(*mesh), dtype=float), tuple(budgets)).copy()
    arr = np.asarray(f, dtype=float)
    slices = []
    for axis, m in enumerate(budgets):
        size = arr.shape[axis]
        if m > size:
            raise ValueError(f"budget {m} exceeds the {size} samples available on axis {axis}")
        slices.append(slice(None, None, size // m))
    return arr[tuple(slices)]


def m_walsh_series(f, M: int, n: int | None = None, deriv_sup: float | None = None) -> WalshSeries:
    """First ``M`` Walsh terms from samples at ``k / M`` (``M`` rounded up to a power of two).

    Parameters
    ----------
    f : callable or array
        Either ``f(x)`` vectorized over ``x`` or samples on a grid of ``2^n`` nodes.
    M : int
        Number of terms. Non powers of two are rounded up.
    n : int, optional
        Register width of the target grid. Defaults to ``log2(M)`` or the sample grid width.
    deriv_sup : float, optional
        ``sup |f'|``; when given the series carries the ``sup|f'| / M`` certificate.
    """
    M = next_pow2(M)
    if n is None:
        n = (len(f).bit_length() - 1) if not callable(f) else M.bit_length() - 1
    if M > (1 << n):
        raise ValueError(f"M={M} exceeds the 2^{n} grid")
    coeffs = walsh_coefficients(_as_samples(f, [n], [M]))
    cert = None if deriv_sup is None else deriv_sup / M
    return _dense_to_series(coeffs, (n,), (M,), cert)


def multidim_walsh_series(f, dims: Sequence[int], budgets: Sequence[int],
                          deriv_sups: Sequence[float] | None = None) -> WalshSeries:
    """Tensor-product series with ``M_i`` terms per axis from samples at ``k / M_i``."""
    budgets = [next_pow2(m) for m in budgets]
    for m, n in zip(budgets, dims):
        if m > (1 << n):
            raise ValueError(f"budget {m} exceeds the register width 2^{n}")
    coeffs = walsh_coefficients(_as_samples(f, dims, budgets))
    cert = None
    if deriv_sups is not None:
        cert = float(sum(s / m for s, m in zip(deriv_sups, budgets)))
    return _dense_to_series(coeffs, dims, budgets, cert)


def sparse_walsh_series(samples: np.ndarray, budget: int) -> WalshSeries:
    """Keep the ``budget`` largest coefficients of the full transform.

    Ties are broken in favour of the smaller flat (row-major) multi-index.
    """
    samples = np.asarray(samples, dtype=float)
    total = samples.size
    if not 1 <= budget <= total:
        raise ValueError(f"budget must be in 1..{total}, got {budget}")
    dense = walsh_coefficients(samples)
    flat = dense.ravel()
    order = np.lexsort((np.arange(total), -np.abs(flat)))[:budget]
    order.sort()
    idx = np.stack(np.unravel_index(order, dense.shape), axis=1)
    dims = tuple(s.bit_length() - 1 for s in dense.shape)
    return WalshSeries(dims, idx.astype(np.int64), flat[order].copy(), tuple(dense.shape))


def m_for_tolerance(deriv_sup: float, eps: float) -> int:
    """Smallest power of two ``M`` with ``deriv_sup / M <= eps``."""
    return next_pow2(int(np.ceil(deriv_sup / eps)))


def truncate_phase(phase: np.ndarray, method: str, budget: int) -> np.ndarray:
    """Grid values of a truncated Walsh approximation of ``phase``.

    ``method`` is ``"sparse"`` (largest coefficients) or ``"m"`` (tensor M-series
    with the budget split as evenly as possible, the larger share on axis 0).
    """
    phase = np.asarray(phase, dtype=float)
    if method == "sparse":
        return sparse_walsh_series(phase, budget).evaluate()
    if method == "m":
        dims = [s.bit_length() - 1 for s in phase.shape]
        budgets = split_budget(budget, dims)
        series = multidim_walsh_series(phase, dims, budgets)
        return series.evaluate()
    raise ValueError(f"unknown truncation method {method!r}")


def split_budget(budget: int, dims: Sequence[int]) -> list[int]:
    """Distribute ``2^m`` terms over axes as evenly as the register widths allow."""
    m = next_pow2(budget).bit_length() - 1
    if m > sum(dims):
        raise ValueError(f"budget {budget} exceeds the full series size")
    share = [0] * len(dims)
    axis = 0
    while m > 0:
        if share[axis] < dims[axis]:
            share[axis] += 1
            m -= 1
        axis = (axis + 1) % len(dims)
    return [1 << s for s in share]
