"""Single-qubit Kraus noise channels.

Six channels, each controlled by one strength parameter p in [0, 1]:

    bitflip            {sqrt(1-p) I,  sqrt(p) X}
    phaseflip          {sqrt(1-p) I,  sqrt(p) Z}
    bitphaseflip       {sqrt(1-p) I,  sqrt(p) Y}
    depolarizing       {sqrt(1-p) I,  sqrt(p/3) X,  sqrt(p/3) Y,  sqrt(p/3) Z}
    amplitude_damping  {[[1, 0], [0, sqrt(1-p)]],  [[0, sqrt(p)], [0, 0]]}
    phase_damping      {[[1, 0], [0, sqrt(1-p)]],  [[0, 0], [0, sqrt(p)]]}

Every set satisfies sum_i K_i^dagger K_i = I, so the induced map
rho -> sum_i K_i rho K_i^dagger is completely positive and trace
preserving. At p = 0 every channel is the identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sim import MixedState, _kraus_on_qubit, _target_pairs

BITFLIP = "bitflip"
PHASEFLIP = "phaseflip"
BITPHASEFLIP = "bitphaseflip"
DEPOLARIZING = "depolarizing"
AMPLITUDE_DAMPING = "amplitude_damping"
PHASE_DAMPING = "phase_damping"

CHANNEL_KINDS = (
    BITFLIP,
    PHASEFLIP,
    BITPHASEFLIP,
    DEPOLARIZING,
    AMPLITUDE_DAMPING,
    PHASE_DAMPING,
)

# default sweep grid: 0.0 to 1.0 in steps of 0.1
SWEEP_GRID = tuple(round(0.1 * i, 1) for i in range(11))

_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def kraus_set(kind: str, param: float) -> list[np.ndarray]:
    """Kraus operators of the named channel at strength ``param``."""
    p = float(param)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"noise parameter must lie in [0, 1], got {param!r}")
    if kind == BITFLIP:
        return [math.sqrt(1.0 - p) * _I, math.sqrt(p) * _X]
    if kind == PHASEFLIP:
        return [math.sqrt(1.0 - p) * _I, math.sqrt(p) * _Z]
    if kind == BITPHASEFLIP:
        return [math.sqrt(1.0 - p) * _I, math.sqrt(p) * _Y]
    if kind == DEPOLARIZING:
        r = math.sqrt(p / 3.0)
        return [math.sqrt(1.0 - p) * _I, r * _X, r * _Y, r * _Z]
    if kind == AMPLITUDE_DAMPING:
        return [
            np.array([[1, 0], [0, math.sqrt(1.0 - p)]], dtype=complex),
            np.array([[0, math.sqrt(p)], [0, 0]], dtype=complex),
        ]
    if kind == PHASE_DAMPING:
        return [
            np.array([[1, 0], [0, math.sqrt(1.0 - p)]], dtype=complex),
            np.array([[0, 0], [0, math.sqrt(p)]], dtype=complex),
        ]
    raise ValueError(f"unknown noise channel kind {kind!r}")


@dataclass(frozen=True)
class NoiseChannel:
    kind: str
    param: float

    def __post_init__(self):
        if self.kind not in CHANNEL_KINDS:
            raise ValueError(f"unknown noise channel kind {self.kind!r}")
        if not 0.0 <= self.param <= 1.0:
            raise ValueError(f"noise parameter must lie in [0, 1], got {self.param!r}")

    def kraus(self) -> list[np.ndarray]:
        return kraus_set(self.kind, self.param)


def apply_channel(state: MixedState, channel: NoiseChannel, qubit: int) -> MixedState:
    """rho -> sum_i K_i rho K_i^dagger with the K_i acting on one qubit."""
    if not 0 <= qubit < state.num_qubits:
        raise ValueError(f"qubit {qubit} out of range")
    i0, i1 = _target_pairs(state.num_qubits, qubit, ())
    rho = _kraus_on_qubit(state.rho, channel.kraus(), i0, i1)
    return MixedState(state.num_qubits, rho)
