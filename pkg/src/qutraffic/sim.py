"""Exact simulation of quantum circuits on state vectors and density matrices.

Basis convention is little-endian throughout: basis index ``b`` holds qubit
``q`` in bit ``q`` of ``b``, so qubit 0 is the least significant bit and the
product state |q_{n-1} ... q_1 q_0> sits at index sum_q q_q * 2^q.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import TYPE_CHECKING, Iterable, Union

import numpy as np

if TYPE_CHECKING:
    from .noise import NoiseChannel

CONTROL_ON_1 = 1
CONTROL_ON_0 = 0

_PARAM_COUNTS = {
    "h": 0,
    "x": 0,
    "y": 0,
    "z": 0,
    "rx": 1,
    "ry": 1,
    "rz": 1,
    "u3": 3,
    "cnot": 0,
    "cz": 0,
    "cu3": 3,
    "mcu3": 3,
}
GATE_KINDS = frozenset(_PARAM_COUNTS)

# kinds whose name promises control qubits
_SINGLE_CONTROL_KINDS = ("cnot", "cz", "cu3")

_SQRT1_2 = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class Gate:
    """One gate: a single-qubit unitary on a target plus optional controls.

    ``controls`` holds ``(qubit, polarity)`` pairs; the unitary fires only on
    basis states where every control qubit matches its polarity
    (CONTROL_ON_1 or CONTROL_ON_0).
    """

    kind: str
    targets: tuple[int, ...]
    controls: tuple[tuple[int, int], ...] = ()
    params: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        object.__setattr__(
            self, "controls", tuple((int(q), int(p)) for q, p in self.controls)
        )
        object.__setattr__(self, "params", tuple(float(a) for a in self.params))
        if len(self.targets) != 1:
            raise ValueError(f"{self.kind} expects exactly one target qubit")
        want = _PARAM_COUNTS[self.kind]
        if len(self.params) != want:
            raise ValueError(
                f"{self.kind} takes {want} parameter(s), got {len(self.params)}"
            )
        if not all(math.isfinite(a) for a in self.params):
            raise ValueError("gate angles must be finite")
        if self.kind in _SINGLE_CONTROL_KINDS and len(self.controls) != 1:
            raise ValueError(f"{self.kind} takes exactly one control qubit")
        if self.kind == "mcu3" and not self.controls:
            raise ValueError("mcu3 requires at least one control qubit")
        for _, pol in self.controls:
            if pol not in (CONTROL_ON_0, CONTROL_ON_1):
                raise ValueError(f"control polarity must be 0 or 1, got {pol}")
        touched = self.targets + tuple(q for q, _ in self.controls)
        if len(set(touched)) != len(touched):
            raise ValueError("target and control qubits must be distinct")

    @property
    def qubits(self) -> tuple[int, ...]:
        """Every qubit the gate touches: the target, then the controls."""
        return self.targets + tuple(q for q, _ in self.controls)

    def validate_for(self, num_qubits: int) -> None:
        for q in self.qubits:
            if not 0 <= q < num_qubits:
                raise ValueError(
                    f"qubit {q} out of range for a {num_qubits}-qubit circuit"
                )

    def inverse(self) -> "Gate":
        if self.kind in ("rx", "ry", "rz"):
            return Gate(self.kind, self.targets, self.controls, (-self.params[0],))
        if self.kind in ("u3", "cu3", "mcu3"):
            theta, phi, lam = self.params
            return Gate(self.kind, self.targets, self.controls, (-theta, -lam, -phi))
        return self  # h, x, y, z, cnot, cz are self-inverse


def _as_controls(controls: Iterable) -> tuple[tuple[int, int], ...]:
    out = []
    for c in controls:
        if isinstance(c, tuple):
            out.append((int(c[0]), int(c[1])))
        else:
            out.append((int(c), CONTROL_ON_1))
    return tuple(out)


def h(target: int) -> Gate:
    return Gate("h", (target,))


def x(target: int, controls: Iterable = ()) -> Gate:
    return Gate("x", (target,), _as_controls(controls))


def y(target: int) -> Gate:
    return Gate("y", (target,))


def z(target: int) -> Gate:
    return Gate("z", (target,))


def rx(theta: float, target: int) -> Gate:
    return Gate("rx", (target,), (), (theta,))


def ry(theta: float, target: int) -> Gate:
    return Gate("ry", (target,), (), (theta,))


def rz(theta: float, target: int) -> Gate:
    return Gate("rz", (target,), (), (theta,))


def u3(theta: float, phi: float, lam: float, target: int) -> Gate:
    return Gate("u3", (target,), (), (theta, phi, lam))


def cnot(control: int, target: int) -> Gate:
    return Gate("cnot", (target,), ((control, CONTROL_ON_1),))


def cz(control: int, target: int) -> Gate:
    return Gate("cz", (target,), ((control, CONTROL_ON_1),))


def cu3(theta: float, phi: float, lam: float, control: int, target: int) -> Gate:
    return Gate("cu3", (target,), ((control, CONTROL_ON_1),), (theta, phi, lam))


def mcu3(theta: float, phi: float, lam: float, target: int, controls: Iterable) -> Gate:
    return Gate("mcu3", (target,), _as_controls(controls), (theta, phi, lam))


def gate_matrix(gate: Gate) -> np.ndarray:
    """The 2x2 unitary acting on the target qubit.

    For controlled kinds this is the target-block unitary only; the control
    logic lives in apply_gate. Rotations are half-angle,
    R_sigma(theta) = exp(-i theta sigma / 2).
    """
    kind = gate.kind
    if kind == "h":
        return np.array([[_SQRT1_2, _SQRT1_2], [_SQRT1_2, -_SQRT1_2]], dtype=complex)
    if kind in ("x", "cnot"):
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if kind == "y":
        return np.array([[0, -1j], [1j, 0]], dtype=complex)
    if kind in ("z", "cz"):
        return np.array([[1, 0], [0, -1]], dtype=complex)
    if kind == "rx":
        c, s = math.cos(gate.params[0] / 2.0), math.sin(gate.params[0] / 2.0)
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if kind == "ry":
        c, s = math.cos(gate.params[0] / 2.0), math.sin(gate.params[0] / 2.0)
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind == "rz":
        half = cmath.exp(-0.5j * gate.params[0])
        return np.array([[half, 0], [0, half.conjugate()]], dtype=complex)
    if kind in ("u3", "cu3", "mcu3"):
        theta, phi, lam = gate.params
        c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
        return np.array(
            [
                [c, -cmath.exp(1j * lam) * s],
                [cmath.exp(1j * phi) * s, cmath.exp(1j * (phi + lam)) * c],
            ],
            dtype=complex,
        )
    raise ValueError(f"unknown gate kind {kind!r}")


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: tuple[Gate, ...]

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError("a circuit needs at least one qubit")
        object.__setattr__(self, "gates", tuple(self.gates))
        for gate in self.gates:
            gate.validate_for(self.num_qubits)

    def inverse(self) -> "Circuit":
        """The adjoint circuit: reversed gate order, each gate inverted."""
        return Circuit(self.num_qubits, tuple(g.inverse() for g in reversed(self.gates)))


@dataclass(frozen=True, eq=False)
class PureState:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amps)
        if self.num_qubits < 1:
            raise ValueError("a state needs at least one qubit")
        if amps.shape != (1 << self.num_qubits,):
            raise ValueError(
                f"amplitude vector must have length 2**{self.num_qubits}, got {amps.shape}"
            )
        norm_sq = float(np.sum(np.abs(amps) ** 2))
        if abs(norm_sq - 1.0) > 1e-10:
            raise ValueError(f"state is not normalized: |psi|^2 = {norm_sq!r}")


def zero_state(num_qubits: int) -> PureState:
    amps = np.zeros(1 << num_qubits, dtype=complex)
    amps[0] = 1.0
    return PureState(num_qubits, amps)


@dataclass(frozen=True, eq=False)
class MixedState:
    num_qubits: int
    rho: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        object.__setattr__(self, "rho", rho)
        dim = 1 << self.num_qubits
        if rho.shape != (dim, dim):
            raise ValueError(f"density matrix must be {dim}x{dim}, got {rho.shape}")
        trace = complex(np.trace(rho))
        if abs(trace - 1.0) > 1e-10:
            raise ValueError(f"density matrix trace is {trace!r}, expected 1")
        if float(np.max(np.abs(rho - rho.conj().T))) > 1e-10:
            raise ValueError("density matrix is not Hermitian")

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.rho)[0])


@lru_cache(maxsize=None)
def _target_pairs(
    num_qubits: int, target: int, controls: tuple[tuple[int, int], ...]
) -> tuple[np.ndarray, np.ndarray]:
    """Paired basis indices (target bit 0 / 1) where all controls match."""
    idx = np.arange(1 << num_qubits)
    keep = ((idx >> target) & 1) == 0
    for q, pol in controls:
        keep &= ((idx >> q) & 1) == pol
    i0 = idx[keep]
    i1 = i0 | (1 << target)
    i0.setflags(write=False)
    i1.setflags(write=False)
    return i0, i1


def _apply_to_vector(amps: np.ndarray, gate: Gate, num_qubits: int) -> np.ndarray:
    mat = gate_matrix(gate)
    i0, i1 = _target_pairs(num_qubits, gate.targets[0], gate.controls)
    out = amps.copy()
    a0, a1 = amps[i0], amps[i1]
    out[i0] = mat[0, 0] * a0 + mat[0, 1] * a1
    out[i1] = mat[1, 0] * a0 + mat[1, 1] * a1
    return out


def apply_gate(state: PureState, gate: Gate) -> PureState:
    """Apply one gate (with its control logic) and return the new state."""
    gate.validate_for(state.num_qubits)
    return PureState(
        state.num_qubits, _apply_to_vector(state.amplitudes, gate, state.num_qubits)
    )


def run_circuit(circuit: Circuit, initial: PureState | None = None) -> PureState:
    """Apply the circuit's gates in order, starting from |0...0> by default."""
    if initial is None:
        amps = np.zeros(1 << circuit.num_qubits, dtype=complex)
        amps[0] = 1.0
    else:
        if initial.num_qubits != circuit.num_qubits:
            raise ValueError(
                f"initial state has {initial.num_qubits} qubits, "
                f"circuit has {circuit.num_qubits}"
            )
        amps = initial.amplitudes.copy()
    for gate in circuit.gates:
        amps = _apply_to_vector(amps, gate, circuit.num_qubits)
    return PureState(circuit.num_qubits, amps)


def prob_all_zero(state: PureState) -> float:
    """Probability of measuring every qubit in |0>."""
    return float(abs(state.amplitudes[0]) ** 2)


@lru_cache(maxsize=None)
def _z_signs(num_qubits: int, qubit: int) -> np.ndarray:
    idx = np.arange(1 << num_qubits)
    signs = 1.0 - 2.0 * ((idx >> qubit) & 1)
    signs.setflags(write=False)
    return signs


def expect_z(state: Union[PureState, MixedState], qubit: int) -> float:
    """<Z> on one qubit of a pure or mixed state."""
    if not 0 <= qubit < state.num_qubits:
        raise ValueError(f"qubit {qubit} out of range")
    if isinstance(state, PureState):
        probs = np.abs(state.amplitudes) ** 2
    else:
        probs = np.real(np.diagonal(state.rho))
    return float(np.dot(_z_signs(state.num_qubits, qubit), probs))


def _conjugate_on_pattern(rho: np.ndarray, mat: np.ndarray, i0, i1) -> np.ndarray:
    """rho -> M rho M^dagger for a 2x2 block M on the index pattern (i0, i1)."""
    out = rho.copy()
    r0, r1 = rho[i0, :], rho[i1, :]
    out[i0, :] = mat[0, 0] * r0 + mat[0, 1] * r1
    out[i1, :] = mat[1, 0] * r0 + mat[1, 1] * r1
    res = out.copy()
    c0, c1 = out[:, i0], out[:, i1]
    res[:, i0] = np.conj(mat[0, 0]) * c0 + np.conj(mat[0, 1]) * c1
    res[:, i1] = np.conj(mat[1, 0]) * c0 + np.conj(mat[1, 1]) * c1
    return res


def _kraus_on_qubit(rho: np.ndarray, kraus_ops, i0, i1) -> np.ndarray:
    acc = np.zeros_like(rho)
    for k in kraus_ops:
        acc += _conjugate_on_pattern(rho, k, i0, i1)
    return acc


def run_noisy(circuit: Circuit, channel: "NoiseChannel") -> MixedState:
    """Density-matrix run from |0...0><0...0|.

    After every gate the single-qubit channel is applied to each qubit the
    gate touches (target and controls), so a zero-strength channel
    reproduces the noiseless evolution.
    """
    kraus_ops = [np.asarray(k, dtype=complex) for k in channel.kraus()]
    n = circuit.num_qubits
    dim = 1 << n
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 1.0
    for gate in circuit.gates:
        mat = gate_matrix(gate)
        i0, i1 = _target_pairs(n, gate.targets[0], gate.controls)
        rho = _conjugate_on_pattern(rho, mat, i0, i1)
        for q in sorted(gate.qubits):
            j0, j1 = _target_pairs(n, q, ())
            rho = _kraus_on_qubit(rho, kraus_ops, j0, j1)
    return MixedState(n, rho)
