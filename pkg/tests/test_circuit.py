import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from qtransport.circuit import (CNOT, CPHASE, CTRL, GPHASE, H, PHASE, RZ, SWAP, X, GateList, apply_controlled,
                                apply_diagonal, apply_qft, gate_list_unitary, gate_metrics, qft_circuit, qft_cost,
                                register_qubits, simulate, synthesize_walsh_circuit, walsh_series_cost)
from qtransport.fd import apply_stencil, derivative_eigenvalues, fd_coefficients
from qtransport.grid import StateVector, build_grid
from qtransport.walsh import WalshSeries, sparse_walsh_series


def _series(dims, terms):
    idx = np.array([k for k, _ in terms], dtype=np.int64).reshape(len(terms), len(dims))
    return WalshSeries(tuple(dims), idx, np.array([a for _, a in terms], float), tuple(1 << n for n in dims))


def _rand_state(grid, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=grid.size) + 1j * rng.normal(size=grid.size)
    return StateVector(grid, v / np.linalg.norm(v), True)


def test_qft_of_zero_is_uniform_on_register():
    g = build_grid([3, 2])
    amps = np.zeros(g.shape, complex)
    amps[0, 1] = 1
    out = apply_qft(StateVector(g, amps), 0).amps
    np.testing.assert_allclose(np.abs(out[:, 1]), np.full(8, 1 / np.sqrt(8)), atol=1e-15)
    assert np.allclose(out[:, [0, 2, 3]], 0)


def test_qft_round_trip_and_norm():
    g = build_grid([4, 3])
    s = _rand_state(g, 0)
    f = apply_qft(s, 1)
    assert abs(f.norm() - 1) < 1e-12
    np.testing.assert_allclose(apply_qft(f, 1, inverse=True).amps, s.amps, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 10), st.integers(1, 8), st.integers(0, 2**31))
def test_spectral_derivative_equals_stencil(p, n, seed):
    g = build_grid([n, 2])
    s = _rand_state(g, seed)
    scheme = fd_coefficients(p)
    d = derivative_eigenvalues(scheme, n)
    # multiply (not exponentiate) by the eigenvalues
    f = apply_qft(s, 0).amps * d[:, None]
    spec = apply_qft(StateVector(g, f), 0, inverse=True).amps
    sten = apply_stencil(s, 0, scheme).amps
    scale = max(1.0, np.max(np.abs(sten)))
    assert np.max(np.abs(spec - sten)) <= 1e-12 * scale


def test_diagonal_identity_and_sign():
    g = build_grid([3])
    s = _rand_state(g, 1)
    np.testing.assert_array_equal(apply_diagonal(s, np.zeros(8)).amps, s.amps)
    np.testing.assert_allclose(apply_diagonal(s, np.full(8, np.pi)).amps, -s.amps, atol=1e-15)
    with pytest.raises(ValueError):
        apply_diagonal(s, np.zeros(4), axis=0)


def test_qft_commutes_with_other_register_phase():
    g = build_grid([3, 4])
    s = _rand_state(g, 2)
    ph = np.random.default_rng(3).normal(size=16)
    a = apply_qft(apply_diagonal(s, ph, axis=1), 0).amps
    b = apply_diagonal(apply_qft(s, 0), ph, axis=1).amps
    np.testing.assert_allclose(a, b, atol=1e-13)


def test_constant_series_is_global_phase():
    gl = synthesize_walsh_circuit(_series([2], [((0,), 0.3)]))
    assert gl.gates == [GPHASE(0.3)]


def test_single_bit_series_is_one_rz():
    gl = synthesize_walsh_circuit(_series([1], [((1,), 0.3)]))
    m = gate_metrics(gl)
    assert m["rz_count"] == 1 and m["cnot_count"] == 0


def test_weight_two_term_matches_zz():
    theta = 0.37
    gl = synthesize_walsh_circuit(_series([2], [((3,), theta)]))
    assert gate_metrics(gl)["cnot_count"] == 2 and gate_metrics(gl)["rz_count"] == 1
    Z = np.diag([1.0, -1.0])
    np.testing.assert_allclose(gate_list_unitary(gl), expm(1j * theta * np.kron(Z, Z)), atol=1e-12)


def test_metrics_examples():
    assert gate_metrics(GateList(3))["size"] == 0 and gate_metrics(GateList(3))["depth"] == 0
    m = gate_metrics(synthesize_walsh_circuit(_series([2], [((1,), 0.1), ((3,), 0.2)])))
    assert m["rz_count"] == 2 and m["cnot_count"] == 2


def test_full_ten_qubit_series_counts():
    phase = np.random.default_rng(5).normal(size=1024)
    series = sparse_walsh_series(phase, 1024)
    m = gate_metrics(synthesize_walsh_circuit(series))
    assert m["walsh_terms"] == 1024
    assert m["rz_count"] == 1023 and m["gphase_count"] == 1
    cost = walsh_series_cost(series)
    assert cost["rz_count"] == m["rz_count"] and cost["cnot_count"] == m["cnot_count"]


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 10), st.integers(1, 12), st.integers(0, 2**31))
def test_synthesis_equals_diagonal(n, k, seed):
    rng = np.random.default_rng(seed)
    phase = rng.normal(size=1 << n)
    series = sparse_walsh_series(phase, min(k, 1 << n))
    target = series.evaluate()
    psi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    gl = synthesize_walsh_circuit(series)
    # series indices use q_0 = most significant bit; flat index ordering matches the grid
    np.testing.assert_allclose(simulate(gl, psi), psi * np.exp(1j * target), atol=1e-12)


def test_two_register_synthesis_layout():
    g = build_grid([2, 3])
    rng = np.random.default_rng(11)
    phase = rng.normal(size=g.shape)
    series = sparse_walsh_series(phase, g.size)
    psi = _rand_state(g, 4)
    out = simulate(synthesize_walsh_circuit(series), psi.flat)
    np.testing.assert_allclose(out, apply_diagonal(psi, phase).flat, atol=1e-12)
    assert register_qubits(g, 0) == [4, 3] and register_qubits(g, 1) == [2, 1, 0]


def test_qft_circuit_matches_fast_transform():
    g = build_grid([3, 2])
    s = _rand_state(g, 6)
    for axis in (0, 1):
        for inv in (False, True):
            gl = qft_circuit(register_qubits(g, axis), g.total_qubits, inverse=inv)
            np.testing.assert_allclose(simulate(gl, s.flat), apply_qft(s, axis, inv).flat, atol=1e-12)


def test_qft_cost_formula():
    gl = qft_circuit(list(range(5)), 5)
    m = gate_metrics(gl)
    c = qft_cost(5)
    assert m["size"] == c["size"] == 5 * 6 // 2 + 2


def test_controlled_polarity_mismatch_is_identity():
    psi = np.zeros(8, complex)
    psi[0b100] = 1
    block = GateList(3, [X(0), H(1)])
    np.testing.assert_array_equal(apply_controlled(psi, 2, 0, block), psi)


def test_controlled_global_phase_is_phase_kickback():
    rng = np.random.default_rng(0)
    psi = rng.normal(size=8) + 1j * rng.normal(size=8)
    a = simulate(GateList(3, [CTRL(1, 1, GateList(3, [GPHASE(0.7)]))]), psi)
    b = simulate(GateList(3, [PHASE(1, 0.7)]), psi)
    np.testing.assert_allclose(a, b, atol=1e-14)


def test_controlled_diagonal_dense_oracle():
    rng = np.random.default_rng(9)
    psi = rng.normal(size=16) + 1j * rng.normal(size=16)
    phase = rng.normal(size=8)
    out = apply_controlled(psi, 3, 1, phase)
    U = np.diag(np.concatenate([np.ones(8), np.exp(1j * phase)]))
    np.testing.assert_allclose(out, U @ psi, atol=1e-13)
    with pytest.raises(ValueError):
        apply_controlled(psi, 1, 1, GateList(4, [H(1)]))


def test_gate_validation():
    with pytest.raises(ValueError):
        GateList(2, [H(2)])
    with pytest.raises(ValueError):
        GateList(2, [CNOT(1, 1)])


def test_text_round_trip_bit_exact():
    inner = GateList(4, [RZ(0, np.pi / 3), CNOT(0, 2), GPHASE(-1e-300)])
    gl = GateList(4, [H(3), RZ(2, 0.7853981633974483), CNOT(0, 3), PHASE(1, 0.1 + 0.2), CPHASE(0, 1, 2.5e-17),
                      SWAP(0, 3), X(2), GPHASE(1.5707963267948966), CTRL(3, 0, inner)])
    text = gl.dumps()
    assert "RZ 2 0.7853981633974483" in text and "GPHASE 1.5707963267948966" in text
    back = GateList.loads(text)
    assert back == gl
    assert back.dumps() == text


def test_norm_preserved_by_all_kernels():
    rng = np.random.default_rng(2)
    psi = rng.normal(size=32) + 1j * rng.normal(size=32)
    psi /= np.linalg.norm(psi)
    gl = GateList(5, [H(0), CNOT(0, 4), RZ(3, 0.4), SWAP(1, 2), CPHASE(2, 4, 1.1), PHASE(0, 0.2),
                      CTRL(4, 1, GateList(5, [H(1), X(2)]))])
    assert abs(np.linalg.norm(simulate(gl, psi)) - 1) < 1e-12


def test_depth_ignores_global_phase():
    gl = GateList(2, [H(0), H(1), GPHASE(0.1), CNOT(0, 1)])
    assert gate_metrics(gl)["depth"] == 2
