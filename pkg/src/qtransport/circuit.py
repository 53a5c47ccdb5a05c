"""Statevector kernels, an abstract gate list, Walsh-series circuit synthesis and cost metrics.

Qubit labels in a :class:`GateList` are bit positions of the flat amplitude
index, least significant bit = qubit 0. For a grid this puts the register of
the last axis on the lowest labels and the register qubit ``q_0`` (most
significant node bit) on the highest label of its register; see
:func:`register_qubits`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np
import scipy.fft as sfft

from .grid import GridSpec, StateVector
from .walsh import WalshSeries

# ---------------------------------------------------------------------------
# gates


@dataclass(frozen=True)
class H:
    q: int


@dataclass(frozen=True)
class X:
    q: int


@dataclass(frozen=True)
class RZ:
    """``exp(i angle Z)``: phase ``e^{i angle}`` on |0> and ``e^{-i angle}`` on |1>."""

    q: int
    angle: float


@dataclass(frozen=True)
class PHASE:
    """``diag(1, e^{i angle})``."""

    q: int
    angle: float


@dataclass(frozen=True)
class CPHASE:
    c: int
    t: int
    angle: float


@dataclass(frozen=True)
class CNOT:
    c: int
    t: int


@dataclass(frozen=True)
class SWAP:
    a: int
    b: int


@dataclass(frozen=True)
class GPHASE:
    angle: float


@dataclass(frozen=True)
class CTRL:
    control: int
    polarity: int
    body: "GateList"


Gate = Union[H, X, RZ, PHASE, CPHASE, CNOT, SWAP, GPHASE, CTRL]


def gate_qubits(g: Gate) -> tuple[int, ...]:
    if isinstance(g, (H, X, RZ, PHASE)):
        return (g.q,)
    if isinstance(g, (CNOT, CPHASE)):
        return (g.c, g.t)
    if isinstance(g, SWAP):
        return (g.a, g.b)
    if isinstance(g, GPHASE):
        return ()
    return (g.control,) + tuple(sorted(g.body.qubits_used()))


@dataclass
class GateList:
    n_qubits: int
    gates: list = field(default_factory=list)

    def __post_init__(self) -> None:
        for g in self.gates:
            self._check(g)

    def _check(self, g: Gate) -> None:
        qs = gate_qubits(g)
        if any(not 0 <= q < self.n_qubits for q in qs):
            raise ValueError(f"{g} addresses a qubit outside 0..{self.n_qubits - 1}")
        if len(set(qs)) != len(qs):
            raise ValueError(f"{g} uses the same qubit twice")
        if isinstance(g, CTRL) and g.polarity not in (0, 1):
            raise ValueError("control polarity must be 0 or 1")

    def append(self, g: Gate) -> "GateList":
        self._check(g)
        self.gates.append(g)
        return self

    def extend(self, gates: Iterable[Gate]) -> "GateList":
        for g in gates:
            self.append(g)
        return self

    def qubits_used(self) -> set[int]:
        used: set[int] = set()
        for g in self.gates:
            used.update(gate_qubits(g))
        return used

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def dumps(self) -> str:
        return "\n".join([f"QUBITS {self.n_qubits}", *_dump_lines(self.gates)]) + "\n"

    @classmethod
    def loads(cls, text: str) -> "GateList":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        if not lines or not lines[0].startswith("QUBITS"):
            raise ValueError("gate list text must start with 'QUBITS <n>'")
        n = int(lines[0].split()[1])
        gates, pos = _parse_lines(lines, 1, n)
        if pos != len(lines):
            raise ValueError(f"unmatched END at line {pos + 1}")
        return cls(n, gates)


def _fmt(x: float) -> str:
    return repr(float(x))


def _dump_lines(gates) -> list[str]:
    out = []
    for g in gates:
        if isinstance(g, H):
            out.append(f"H {g.q}")
        elif isinstance(g, X):
            out.append(f"X {g.q}")
        elif isinstance(g, RZ):
            out.append(f"RZ {g.q} {_fmt(g.angle)}")
        elif isinstance(g, PHASE):
            out.append(f"PHASE {g.q} {_fmt(g.angle)}")
        elif isinstance(g, CPHASE):
            out.append(f"CPHASE {g.c} {g.t} {_fmt(g.angle)}")
        elif isinstance(g, CNOT):
            out.append(f"CNOT {g.c} {g.t}")
        elif isinstance(g, SWAP):
            out.append(f"SWAP {g.a} {g.b}")
        elif isinstance(g, GPHASE):
            out.append(f"GPHASE {_fmt(g.angle)}")
        else:
            out.append(f"CTRL {g.control} {g.polarity} BEGIN")
            out.extend("  " + ln for ln in _dump_lines(g.body.gates))
            out.append("END")
    return out


def _parse_lines(lines: list[str], pos: int, n: int):
    gates = []
    while pos < len(lines):
        parts = lines[pos].split()
        op, args = parts[0], parts[1:]
        if op == "END":
            return gates, pos
        try:
            if op == "H":
                gates.append(H(int(args[0])))
            elif op == "X":
                gates.append(X(int(args[0])))
            elif op == "RZ":
                gates.append(RZ(int(args[0]), float(args[1])))
            elif op == "PHASE":
                gates.append(PHASE(int(args[0]), float(args[1])))
            elif op == "CPHASE":
                gates.append(CPHASE(int(args[0]), int(args[1]), float(args[2])))
            elif op == "CNOT":
                gates.append(CNOT(int(args[0]), int(args[1])))
            elif op == "SWAP":
                gates.append(SWAP(int(args[0]), int(args[1])))
            elif op == "GPHASE":
                gates.append(GPHASE(float(args[0])))
            elif op == "CTRL":
                body, end = _parse_lines(lines, pos + 1, n)
                if end >= len(lines):
                    raise ValueError("CTRL block without END")
                gates.append(CTRL(int(args[0]), int(args[1]), GateList(n, body)))
                pos = end
            else:
                raise ValueError(f"unknown gate {op!r}")
        except (IndexError, ValueError) as exc:
            raise ValueError(f"line {pos + 1}: {lines[pos]!r}: {exc}") from None
        pos += 1
    return gates, pos


# ---------------------------------------------------------------------------
# gate-level simulation on flat amplitude vectors


def _bits(size: int, q: int) -> np.ndarray:
    return (np.arange(size) >> q) & 1


def simulate(gl: GateList, amps: np.ndarray, active: np.ndarray | None = None) -> np.ndarray:
    """Apply a gate list to a flat vector of ``2**gl.n_qubits`` amplitudes.

    ``active`` restricts every gate to the basis states where it is True; it is
    how controlled blocks are simulated.
    """
    psi = np.array(amps, dtype=complex).reshape(-1)
    size = psi.size
    if size != 1 << gl.n_qubits:
        raise ValueError(f"state has {size} amplitudes, gate list expects 2^{gl.n_qubits}")
    idx = np.arange(size)
    on = np.ones(size, dtype=bool) if active is None else active
    for g in gl.gates:
        if isinstance(g, GPHASE):
            psi[on] *= np.exp(1j * g.angle)
        elif isinstance(g, RZ):
            b = _bits(size, g.q)[on]
            psi[on] *= np.exp(1j * g.angle * (1 - 2 * b))
        elif isinstance(g, PHASE):
            sel = on & (_bits(size, g.q) == 1)
            psi[sel] *= np.exp(1j * g.angle)
        elif isinstance(g, CPHASE):
            sel = on & (_bits(size, g.c) == 1) & (_bits(size, g.t) == 1)
            psi[sel] *= np.exp(1j * g.angle)
        elif isinstance(g, (H, X)):
            lo = idx[on & (_bits(size, g.q) == 0)]
            hi = lo | (1 << g.q)
            a0, a1 = psi[lo].copy(), psi[hi].copy()
            if isinstance(g, H):
                psi[lo] = (a0 + a1) / np.sqrt(2)
                psi[hi] = (a0 - a1) / np.sqrt(2)
            else:
                psi[lo], psi[hi] = a1, a0
        elif isinstance(g, CNOT):
            lo = idx[on & (_bits(size, g.c) == 1) & (_bits(size, g.t) == 0)]
            hi = lo | (1 << g.t)
            psi[lo], psi[hi] = psi[hi].copy(), psi[lo].copy()
        elif isinstance(g, SWAP):
            sel = idx[on & (_bits(size, g.a) == 1) & (_bits(size, g.b) == 0)]
            other = (sel & ~(1 << g.a)) | (1 << g.b)
            psi[sel], psi[other] = psi[other].copy(), psi[sel].copy()
        elif isinstance(g, CTRL):
            sub_on = on & (_bits(size, g.control) == g.polarity)
            psi = simulate(g.body, psi, sub_on)
        else:
            raise TypeError(f"unknown gate {g!r}")
    return psi


def gate_list_unitary(gl: GateList) -> np.ndarray:
    size = 1 << gl.n_qubits
    return np.stack([simulate(gl, np.eye(size, dtype=complex)[:, k]) for k in range(size)], axis=1)


# ---------------------------------------------------------------------------
# fast kernels on grid states


def apply_qft(state: StateVector, axis: int, inverse: bool = False) -> StateVector:
    """Unitary Fourier transform on one register.

    The forward transform uses the ``exp(-2 pi i j k / N)`` kernel. With this
    choice, forward transform, multiplication by the derivative eigenvalue at
    node ``k / N`` and inverse transform reproduce the ``-i`` times stencil
    derivative exactly.
    """
    fn = sfft.ifft if inverse else sfft.fft
    return StateVector(state.grid, fn(state.amps, axis=axis, norm="ortho"), state.normalized)


def apply_diagonal(state: StateVector, phase: np.ndarray, axis: int | None = None) -> StateVector:
    """Multiply amplitudes by ``exp(i phase)``.

    ``phase`` has the full grid shape, a shape broadcastable to it, or (with
    ``axis``) the length of one register.
    """
    phase = np.asarray(phase, dtype=float)
    shape = state.grid.shape
    if axis is not None:
        if phase.shape != (shape[axis],):
            raise ValueError(f"phase of length {phase.size} does not match register {axis} ({shape[axis]} nodes)")
        view = [1] * len(shape)
        view[axis] = shape[axis]
        phase = phase.reshape(view)
    elif phase.size == state.grid.size:
        phase = phase.reshape(shape)
    else:
        try:
            np.broadcast_shapes(phase.shape, shape)
        except ValueError:
            raise ValueError(f"phase shape {phase.shape} does not match grid {shape}") from None
    return StateVector(state.grid, state.amps * np.exp(1j * phase), state.normalized)


def apply_controlled(amps: np.ndarray, control: int, polarity: int, block) -> np.ndarray:
    """Apply ``block`` where the ``control`` bit equals ``polarity``.

    ``amps`` is a flat vector over ``n + 1`` qubits. ``block`` is either a
    :class:`GateList` on the same labels or a diagonal phase array over the
    other ``n`` qubits, ordered by the flat index with the control bit removed.
    """
    amps = np.asarray(amps, dtype=complex).reshape(-1)
    size = amps.size
    n_total = size.bit_length() - 1
    if not 0 <= control < n_total:
        raise ValueError(f"control qubit {control} outside 0..{n_total - 1}")
    if isinstance(block, GateList):
        if control in block.qubits_used():
            raise ValueError(f"control qubit {control} is also used by the block")
        return simulate(block, amps, _bits(size, control) == polarity)
    phase = np.asarray(block, dtype=float).reshape(-1)
    if phase.size != size // 2:
        raise ValueError(f"diagonal block has {phase.size} entries, expected {size // 2}")
    idx = np.arange(size)
    sel = idx[_bits(size, control) == polarity]
    low = sel & ((1 << control) - 1)
    high = (sel >> (control + 1)) << control
    out = amps.copy()
    out[sel] *= np.exp(1j * phase[high | low])
    return out


# ---------------------------------------------------------------------------
# synthesis


def register_qubits(grid: GridSpec, axis: int) -> list[int]:
    """Gate-list labels of register ``axis``, listed from ``q_0`` (most significant) down."""
    low = grid.qubit_offsets()[axis]
    n = grid.qubits[axis]
    return [low + n - 1 - k for k in range(n)]


def series_qubit_map(dims: Sequence[int]) -> list[list[int]]:
    """Labels for every Walsh bit: ``map[i][b]`` is the qubit of bit ``b`` of component ``i``."""
    grid = GridSpec(tuple(dims))
    return [register_qubits(grid, a) for a in range(len(dims))]


def synthesize_walsh_circuit(series: WalshSeries, qubit_map: Sequence[Sequence[int]] | None = None,
                             n_qubits: int | None = None) -> GateList:
    """Gate list for ``exp(i sum_j a_j w_j)``.

    Each term of Hamming weight ``k >= 1`` becomes a CNOT staircase of ``k - 1``
    gates collecting the parity on the last qubit, one RZ, and the mirrored
    staircase. The constant term becomes a global phase.
    """
    if len(series) == 0:
        raise ValueError("cannot synthesize an empty series")
    qmap = series_qubit_map(series.dims) if qubit_map is None else [list(m) for m in qubit_map]
    n = sum(series.dims) if n_qubits is None else n_qubits
    gl = GateList(n)
    for row, a in zip(series.indices, series.coeffs):
        qs = []
        for comp, j in enumerate(row):
            j = int(j)
            b = 0
            while j:
                if j & 1:
                    qs.append(qmap[comp][b])
                j >>= 1
                b += 1
        if not qs:
            gl.append(GPHASE(float(a)))
            continue
        stairs = [CNOT(qs[i], qs[i + 1]) for i in range(len(qs) - 1)]
        gl.extend(stairs)
        gl.append(RZ(qs[-1], float(a)))
        gl.extend(reversed(stairs))
    return gl


def qft_circuit(qubits: Sequence[int], n_qubits: int, inverse: bool = False) -> GateList:
    """Gate-level register transform matching :func:`apply_qft` (same sign convention).

    ``qubits`` lists the register from its most significant bit down.
    """
    n = len(qubits)
    sign = -1.0 if not inverse else 1.0
    gl = GateList(n_qubits)
    body = []
    for i in range(n):
        body.append(H(qubits[i]))
        for j in range(i + 1, n):
            body.append(CPHASE(qubits[j], qubits[i], sign * 2 * np.pi / (1 << (j - i + 1))))
    swaps = [SWAP(qubits[i], qubits[n - 1 - i]) for i in range(n // 2)]
    if inverse:
        # inverse circuit: reversed order of the conjugate gates
        gl.extend(swaps)
        gl.extend(reversed(body))
    else:
        gl.extend(body)
        gl.extend(swaps)
    return gl


def qft_cost(n: int) -> dict[str, int]:
    """Textbook register transform cost: ``n(n+1)/2`` H and controlled phases plus ``n//2`` swaps."""
    return {
        "hadamard": n,
        "controlled_phase": n * (n - 1) // 2,
        "swap": n // 2,
        "size": n * (n + 1) // 2 + n // 2,
    }


# ---------------------------------------------------------------------------
# metrics


def _flatten(gl: GateList, controls: tuple[int, ...] = ()) -> list[tuple[str, tuple[int, ...]]]:
    out = []
    for g in gl.gates:
        if isinstance(g, CTRL):
            ctl = controls + (g.control,)
            if g.polarity == 0:
                out.append(("X", controls + (g.control,)))
            out.extend(_flatten(g.body, ctl))
            if g.polarity == 0:
                out.append(("X", controls + (g.control,)))
        else:
            out.append((type(g).__name__, controls + gate_qubits(g)))
    return out


def gate_metrics(gl: GateList) -> dict[str, int]:
    """Size, depth and per-kind counts after flattening controlled blocks.

    A controlled block counts as its body (each body gate gains the control
    qubit) plus two X gates for an anti-control; it is not decomposed further.
    Global phases count towards size but occupy no qubit, so they add no depth.
    """
    flat = _flatten(gl)
    layer: dict[int, int] = {}
    depth = 0
    counts: dict[str, int] = {}
    for kind, qs in flat:
        counts[kind] = counts.get(kind, 0) + 1
        if not qs:
            continue
        lvl = 1 + max(layer.get(q, 0) for q in qs)
        for q in qs:
            layer[q] = lvl
        depth = max(depth, lvl)
    rz = counts.get("RZ", 0)
    gph = counts.get("GPHASE", 0)
    return {
        "size": len(flat),
        "depth": depth,
        "rz_count": rz,
        "cnot_count": counts.get("CNOT", 0),
        "gphase_count": gph,
        "walsh_terms": rz + gph,
        "h_count": counts.get("H", 0),
        "x_count": counts.get("X", 0),
        "phase_count": counts.get("PHASE", 0),
        "cphase_count": counts.get("CPHASE", 0),
        "swap_count": counts.get("SWAP", 0),
    }


def walsh_series_cost(series: WalshSeries) -> dict[str, int]:
    """Gate counts of :func:`synthesize_walsh_circuit` without building the list.

    ``sequential_depth`` assumes no overlap between terms, which is what the
    staircase layout gives when every term shares the parity qubit.
    """
    w = series.hamming_weights()
    nonconst = w[w > 0]
    cnot = int(np.sum(2 * (nonconst - 1)))
    rz = int(nonconst.size)
    gph = int(np.sum(w == 0))
    return {
        "walsh_terms": rz + gph,
        "rz_count": rz,
        "gphase_count": gph,
        "cnot_count": cnot,
        "size": rz + gph + cnot,
        "sequential_depth": cnot + rz,
    }
