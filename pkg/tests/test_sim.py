import math

import numpy as np
import pytest

from qutraffic import sim
from qutraffic.noise import NoiseChannel
from qutraffic.sim import (
    Circuit,
    Gate,
    MixedState,
    PureState,
    apply_gate,
    expect_z,
    gate_matrix,
    prob_all_zero,
    run_circuit,
    run_noisy,
    zero_state,
)

from oracles import (
    dense_gate_unitary,
    random_circuit,
    random_gate,
    run_circuit_dense,
)


def test_hadamard_matrix():
    m = gate_matrix(sim.h(0))
    expected = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    assert np.allclose(m, expected, atol=1e-15)


def test_ry_zero_angle_is_identity():
    assert np.allclose(gate_matrix(sim.ry(0.0, 0)), np.eye(2), atol=1e-15)


def test_u3_at_pi():
    m = gate_matrix(sim.u3(math.pi, 0.0, 0.0, 0))
    assert np.allclose(m, np.array([[0, -1], [1, 0]]), atol=1e-15)


def test_ry_equals_u3_with_zero_phases():
    for theta in (-2.3, 0.4, 1.0, math.pi):
        assert np.allclose(
            gate_matrix(sim.ry(theta, 0)),
            gate_matrix(sim.u3(theta, 0.0, 0.0, 0)),
            atol=1e-15,
        )


def test_unknown_gate_kind_rejected():
    with pytest.raises(ValueError, match="unknown gate kind"):
        Gate("toffoli", (0,))


def test_gate_validation():
    with pytest.raises(ValueError):
        sim.rx(float("nan"), 0)
    with pytest.raises(ValueError):
        Gate("cnot", (0,), ((0, 1),))  # target and control must differ
    with pytest.raises(ValueError):
        Gate("ry", (0,), (), (0.1, 0.2))  # too many parameters
    with pytest.raises(ValueError):
        Gate("mcu3", (0,), (), (0.1, 0.2, 0.3))  # needs a control
    with pytest.raises(ValueError):
        Gate("x", (0,), ((1, 2),))  # bad polarity


def test_unitarity_all_kinds_random_params():
    rng = np.random.default_rng(11)
    kinds_params = {
        "h": 0, "x": 0, "y": 0, "z": 0,
        "rx": 1, "ry": 1, "rz": 1, "u3": 3,
        "cnot": 0, "cz": 0, "cu3": 3, "mcu3": 3,
    }
    for kind, n_params in kinds_params.items():
        controls = ((1, 1),) if kind in ("cnot", "cz", "cu3", "mcu3") else ()
        for _ in range(100):
            params = tuple(rng.uniform(-2 * math.pi, 2 * math.pi) for _ in range(n_params))
            m = gate_matrix(Gate(kind, (0,), controls, params))
            assert np.max(np.abs(m.conj().T @ m - np.eye(2))) <= 1e-12


def test_apply_hadamard_on_zero():
    state = apply_gate(zero_state(1), sim.h(0))
    assert np.allclose(state.amplitudes, [1 / math.sqrt(2), 1 / math.sqrt(2)])


def test_cnot_control_unsatisfied():
    state = apply_gate(zero_state(2), sim.cnot(0, 1))
    assert np.allclose(state.amplitudes, [1, 0, 0, 0])


def test_cnot_flips_target():
    # |01> little-endian: qubit 0 = 1, basis index 1
    amps = np.zeros(4, dtype=complex)
    amps[1] = 1.0
    state = apply_gate(PureState(2, amps), sim.cnot(0, 1))
    expected = np.zeros(4)
    expected[3] = 1.0  # |11>
    assert np.allclose(state.amplitudes, expected)


def test_anticontrol_matches_x_conjugation():
    rng = np.random.default_rng(5)
    for _ in range(20):
        theta, phi, lam = rng.uniform(-math.pi, math.pi, 3)
        native = Circuit(3, (sim.mcu3(theta, phi, lam, 2, ((0, 0), (1, 1))),))
        conjugated = Circuit(
            3,
            (
                sim.x(0),
                sim.mcu3(theta, phi, lam, 2, ((0, 1), (1, 1))),
                sim.x(0),
            ),
        )
        start = random_state(rng, 3)
        out_a = run_circuit(native, start)
        out_b = run_circuit(conjugated, start)
        assert np.max(np.abs(out_a.amplitudes - out_b.amplitudes)) <= 1e-12


def random_state(rng, num_qubits):
    amps = rng.normal(size=1 << num_qubits) + 1j * rng.normal(size=1 << num_qubits)
    return PureState(num_qubits, amps / np.linalg.norm(amps))


def test_empty_circuit_identity():
    state = run_circuit(Circuit(3, ()))
    assert np.allclose(state.amplitudes, zero_state(3).amplitudes)


def test_hh_is_identity():
    state = run_circuit(Circuit(1, (sim.h(0), sim.h(0))))
    assert abs(state.amplitudes[0] - 1.0) <= 1e-12


def test_run_circuit_matches_dense_oracle_200_cases():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        n = int(rng.integers(1, 5))
        circuit = random_circuit(rng, n, int(rng.integers(1, 21)))
        got = run_circuit(circuit).amplitudes
        want = run_circuit_dense(circuit)
        assert np.max(np.abs(got - want)) <= 1e-10


def test_apply_gate_matches_dense_oracle_on_random_states():
    rng = np.random.default_rng(77)
    for _ in range(100):
        n = int(rng.integers(1, 5))
        gate = random_gate(rng, n)
        state = random_state(rng, n)
        got = apply_gate(state, gate).amplitudes
        want = dense_gate_unitary(gate, n) @ state.amplitudes
        assert np.max(np.abs(got - want)) <= 1e-12


def test_norm_preserved_on_random_50_gate_circuits():
    rng = np.random.default_rng(31)
    for _ in range(20):
        n = int(rng.integers(2, 7))
        state = run_circuit(random_circuit(rng, n, 50))
        assert abs(np.sum(np.abs(state.amplitudes) ** 2) - 1.0) <= 1e-10


def test_circuit_inverse_undoes_circuit():
    rng = np.random.default_rng(13)
    for _ in range(50):
        n = int(rng.integers(1, 5))
        circuit = random_circuit(rng, n, 15)
        state = run_circuit(circuit.inverse(), run_circuit(circuit))
        assert abs(abs(state.amplitudes[0]) - 1.0) <= 1e-10


def test_dimension_mismatch_rejected():
    with pytest.raises(ValueError):
        run_circuit(Circuit(2, ()), zero_state(3))
    with pytest.raises(ValueError):
        Circuit(1, (sim.h(1),))


def test_prob_all_zero():
    assert prob_all_zero(zero_state(4)) == 1.0
    plus = apply_gate(zero_state(1), sim.h(0))
    assert abs(prob_all_zero(plus) - 0.5) <= 1e-12


def test_prob_all_zero_is_squared_overlap():
    rng = np.random.default_rng(19)
    for _ in range(50):
        n = int(rng.integers(1, 4))
        u_a = random_circuit(rng, n, 8)
        u_b = random_circuit(rng, n, 8)
        psi_a = run_circuit(u_a).amplitudes
        psi_b = run_circuit(u_b).amplitudes
        combined = Circuit(n, u_a.gates + u_b.inverse().gates)
        p0 = prob_all_zero(run_circuit(combined))
        want = abs(np.vdot(psi_b, psi_a)) ** 2
        assert abs(p0 - want) <= 1e-10


def test_expect_z_basics():
    assert expect_z(zero_state(1), 0) == 1.0
    plus = apply_gate(zero_state(1), sim.h(0))
    assert abs(expect_z(plus, 0)) <= 1e-12
    rotated = apply_gate(zero_state(1), sim.ry(math.pi / 3, 0))
    assert abs(expect_z(rotated, 0) - 0.5) <= 1e-12
    with pytest.raises(ValueError):
        expect_z(zero_state(1), 1)


def test_pure_state_invariants():
    with pytest.raises(ValueError):
        PureState(2, np.ones(4))  # not normalized
    with pytest.raises(ValueError):
        PureState(2, np.array([1.0, 0.0]))  # wrong length


def test_mixed_state_invariants():
    with pytest.raises(ValueError):
        MixedState(1, np.eye(2))  # trace 2
    with pytest.raises(ValueError):
        MixedState(1, np.array([[0.5, 0.5j], [0.5j, 0.5]]))  # not Hermitian


def test_run_noisy_zero_strength_matches_pure():
    rng = np.random.default_rng(404)
    for kind in ("depolarizing", "bitflip", "amplitude_damping"):
        for _ in range(10):
            n = int(rng.integers(1, 4))
            circuit = random_circuit(rng, n, 10)
            mixed = run_noisy(circuit, NoiseChannel(kind, 0.0))
            pure = run_circuit(circuit)
            assert np.max(np.abs(mixed.rho - np.outer(
                pure.amplitudes, pure.amplitudes.conj()
            ))) <= 1e-12
            diag = np.real(np.diagonal(mixed.rho))
            assert np.max(np.abs(diag - np.abs(pure.amplitudes) ** 2)) <= 1e-10


def test_run_noisy_phaseflip_half_on_plus():
    mixed = run_noisy(Circuit(1, (sim.h(0),)), NoiseChannel("phaseflip", 0.5))
    assert np.max(np.abs(mixed.rho - np.eye(2) / 2)) <= 1e-12


def test_run_noisy_full_amplitude_damping():
    mixed = run_noisy(Circuit(1, (sim.x(0),)), NoiseChannel("amplitude_damping", 1.0))
    expected = np.zeros((2, 2))
    expected[0, 0] = 1.0
    assert np.max(np.abs(mixed.rho - expected)) <= 1e-12


def test_run_noisy_output_is_valid_density_matrix():
    rng = np.random.default_rng(88)
    for kind in ("depolarizing", "phase_damping"):
        circuit = random_circuit(rng, 3, 15)
        mixed = run_noisy(circuit, NoiseChannel(kind, 0.3))
        assert abs(np.trace(mixed.rho) - 1.0) <= 1e-10
        assert mixed.min_eigenvalue() >= -1e-9
