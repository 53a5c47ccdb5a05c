import numpy as np
import pytest

from qtransport.circuit import simulate
from qtransport.grid import build_grid, encode_function
from qtransport.stateprep import (DEFAULT_ALPHA, arcsin_phase, closed_form_success, exact_load, two_diagonal_circuit,
                                  two_diagonal_prep)


def _gauss(x, v=None):
    r = (x - 0.45) ** 2 if v is None else (x - 0.45) ** 2 + (v - 0.55) ** 2
    return np.exp(-r / (2 * 0.08**2))


def test_exact_load_hand_vector():
    f0 = np.array([0.5, 1 / np.sqrt(2), 0.5, 0, 0, 0, 0, 0])
    s = exact_load(f0, build_grid([3]))
    np.testing.assert_allclose(s.flat, f0, atol=1e-15)


def test_exact_load_constant_and_gaussian():
    s = exact_load(lambda x: np.ones_like(x), build_grid([4]))
    np.testing.assert_allclose(s.flat, 0.25)
    s = exact_load(_gauss, build_grid([9, 9]))
    assert abs(s.norm() - 1) < 1e-12


def test_constant_alpha_one_certain_success():
    out = two_diagonal_prep(np.full(16, 3.0), build_grid([4]), alpha=1.0)
    assert out.success_prob == pytest.approx(1.0, abs=1e-14)
    np.testing.assert_allclose(out.conditioned_state.flat, 0.25, atol=1e-14)


def test_constant_alpha_two_quarter():
    out = two_diagonal_prep(np.full(16, 3.0), build_grid([4]), alpha=2.0)
    assert out.success_prob == pytest.approx(0.25, abs=1e-15)


def test_gaussian_success_matches_closed_form():
    g = build_grid([8])
    f = _gauss(g.axis_nodes(0))
    out = two_diagonal_prep(f, g, alpha=1.1)
    assert abs(out.success_prob - closed_form_success(f, 1.1)) <= 1e-10
    assert out.fidelity(encode_function(f, g)) >= 1 - 1e-10


def test_success_converges_to_continuum_ratio():
    alpha = 1.1
    # ||f||_L2^2 / (alpha^2 ||f||_inf^2) with the Gaussian almost entirely inside [0, 1]
    limit = 0.08 * np.sqrt(np.pi) / alpha**2
    diffs = []
    for n in (4, 6, 8, 10):
        g = build_grid([n])
        diffs.append(abs(two_diagonal_prep(_gauss(g.axis_nodes(0)), g, alpha).success_prob - limit))
    assert diffs[-1] < 1e-3 and diffs[-1] < diffs[0]


def test_negative_values_supported():
    g = build_grid([5])
    f = np.sin(2 * np.pi * g.axis_nodes(0)) + 0.3
    out = two_diagonal_prep(f, g)
    assert out.alpha == DEFAULT_ALPHA
    assert out.fidelity(encode_function(f, g)) >= 1 - 1e-10


def test_alpha_above_one_keeps_phase_inside():
    f = np.linspace(-2, 2, 32)
    assert np.max(np.abs(arcsin_phase(f, 1.05))) < np.pi / 2


def test_errors():
    g = build_grid([2])
    with pytest.raises(ValueError):
        two_diagonal_prep(np.ones(4), g, alpha=0.9)
    with pytest.raises(ValueError):
        two_diagonal_prep(np.zeros(4), g)
    with pytest.raises(ValueError):
        two_diagonal_prep(np.ones(4) * 1j, g)


def test_truncation_fidelity_improves_with_budget():
    g = build_grid([6])
    f = _gauss(g.axis_nodes(0))
    target = encode_function(f, g)
    infid = [1 - two_diagonal_prep(f, g, walsh_budget=K).fidelity(target) for K in (1, 2, 4, 8, 16, 32, 64)]
    assert np.all(np.diff(infid) <= 1e-12)
    assert infid[-1] < 1e-12


def test_gate_level_protocol_matches_fast_path():
    g = build_grid([2, 2])
    f = _gauss(*g.mesh())
    out = two_diagonal_prep(f, g, alpha=1.2)
    gl = two_diagonal_circuit(out.theta, g)
    psi0 = np.zeros(1 << (g.total_qubits + 1), complex)
    psi0[0] = 1
    psi = simulate(gl, psi0)
    branch = psi[g.size:]  # ancilla is the most significant qubit
    assert np.sum(np.abs(branch) ** 2) == pytest.approx(out.success_prob, abs=1e-12)
    np.testing.assert_allclose(branch / np.linalg.norm(branch), out.conditioned_state.flat, atol=1e-12)


def test_sampled_success_is_seeded():
    g = build_grid([5])
    f = _gauss(g.axis_nodes(0))
    a = two_diagonal_prep(f, g, shots=4096, seed=11)
    b = two_diagonal_prep(f, g, shots=4096, seed=11)
    assert a.sampled_success == b.sampled_success
    assert abs(a.sampled_success - a.success_prob) < 5 * np.sqrt(0.25 / 4096)
