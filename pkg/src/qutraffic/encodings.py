"""Grayscale-image encoding circuits (angle, FRQI, NEQR) and exact decoders.

All three encoders take a square 2x2 or 4x4 image:

* angle  -- one RX per pixel on its own qubit, angle = pixel * pi / 255.
* FRQI   -- position qubits in uniform superposition, one color qubit
  rotated to cos(t_i)|0> + sin(t_i)|1> per position, t_i = pixel * pi / 510.
* NEQR   -- position qubits in uniform superposition, the 8-bit intensity
  written into a basis-state register by multi-controlled X gates.

Position index i = row * side + col occupies the low qubits; the color /
intensity qubits are the most significant. Anti-controls in the FRQI and
NEQR constructions are realized by conjugating the control qubits with X
gates.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass

import numpy as np

from . import sim
from .sim import Circuit, PureState

ANGLE = "angle"
FRQI = "frqi"
NEQR = "neqr"
ENCODING_METHODS = (ANGLE, FRQI, NEQR)

FULL_PI = "full_pi"
HALF_PI = "half_pi"

SUPPORTED_SIDES = (2, 4)
INTENSITY_BITS = 8


@dataclass(frozen=True)
class GrayImage:
    """An 8-bit grayscale image; ``pixels`` is row-major with values 0..255."""

    width: int
    height: int
    pixels: tuple[int, ...]

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be positive")
        try:
            pixels = tuple(operator.index(p) for p in self.pixels)
        except TypeError:
            raise ValueError("pixel values must be integers") from None
        object.__setattr__(self, "pixels", pixels)
        if len(pixels) != self.width * self.height:
            raise ValueError(
                f"expected {self.width * self.height} pixels, got {len(pixels)}"
            )
        for p in pixels:
            if not 0 <= p <= 255:
                raise ValueError(f"pixel value out of range [0, 255]: {p}")

    @property
    def side(self) -> int:
        if self.width != self.height:
            raise ValueError("image is not square")
        return self.width

    def as_array(self) -> np.ndarray:
        return np.asarray(self.pixels, dtype=float)

    @staticmethod
    def from_array(arr) -> "GrayImage":
        arr = np.asarray(arr)
        if arr.ndim != 2:
            raise ValueError("expected a 2-D pixel array")
        return GrayImage(arr.shape[1], arr.shape[0], tuple(int(p) for p in arr.reshape(-1)))


@dataclass(frozen=True)
class EncodingSpec:
    method: str
    image_side: int

    def __post_init__(self):
        if self.method not in ENCODING_METHODS:
            raise ValueError(f"unknown encoding method {self.method!r}")
        if self.image_side not in SUPPORTED_SIDES:
            raise ValueError(f"image side must be one of {SUPPORTED_SIDES}")

    @property
    def num_qubits(self) -> int:
        if self.method == ANGLE:
            return self.image_side**2
        position = 2 * (self.image_side.bit_length() - 1)
        if self.method == FRQI:
            return position + 1
        return position + INTENSITY_BITS


def pixel_to_angle(pixel: float, scheme: str = FULL_PI) -> float:
    """Map an intensity in [0, 255] to a rotation angle.

    FULL_PI spans [0, pi] (angle encoding and classifier data); HALF_PI
    spans [0, pi/2] (the FRQI color angle).
    """
    value = float(pixel)
    if not 0.0 <= value <= 255.0:
        raise ValueError(f"pixel value out of range [0, 255]: {pixel!r}")
    if scheme == FULL_PI:
        return value * math.pi / 255.0
    if scheme == HALF_PI:
        return value * math.pi / 510.0
    raise ValueError(f"unknown angle scheme {scheme!r}")


def _pixel_values(image) -> np.ndarray:
    """Row-major pixel values as floats (GrayImage or any array in [0, 255])."""
    if isinstance(image, GrayImage):
        values = image.as_array()
    else:
        values = np.asarray(image, dtype=float).reshape(-1)
    if values.size == 0 or not np.all(np.isfinite(values)):
        raise ValueError("pixel values must be finite and non-empty")
    if float(values.min()) < 0.0 or float(values.max()) > 255.0:
        raise ValueError("pixel values out of range [0, 255]")
    return values


def _side_of(values: np.ndarray) -> int:
    side = math.isqrt(values.size)
    if side * side != values.size or side not in SUPPORTED_SIDES:
        raise ValueError(
            f"encoders take square 2x2 or 4x4 images, got {values.size} pixels"
        )
    return side


def build_angle_encoding(image) -> Circuit:
    """RX(pixel_k * pi / 255) on qubit k for each row-major pixel k."""
    values = _pixel_values(image)
    side = _side_of(values)
    gates = tuple(sim.rx(pixel_to_angle(v, FULL_PI), q) for q, v in enumerate(values))
    return Circuit(side * side, gates)


def _anticontrol_flips(index: int, num_position: int) -> list:
    """X gates on the position qubits whose bit of ``index`` is 0."""
    return [sim.x(q) for q in range(num_position) if not (index >> q) & 1]


def build_frqi(image) -> Circuit:
    """Uniform position superposition plus one rotated color qubit per pixel.

    Pixel i contributes amplitude cos(t_i)/2^n at basis index i and
    sin(t_i)/2^n at index 2^(2n) + i, with t_i = pixel_i * pi / 510.
    """
    values = _pixel_values(image)
    side = _side_of(values)
    num_position = 2 * (side.bit_length() - 1)
    color = num_position
    controls = tuple(range(num_position))
    gates = [sim.h(q) for q in range(num_position)]
    for i, v in enumerate(values):
        theta = 2.0 * pixel_to_angle(v, HALF_PI)
        flips = _anticontrol_flips(i, num_position)
        gates.extend(flips)
        gates.append(sim.mcu3(theta, 0.0, 0.0, color, controls))
        gates.extend(flips)
    return Circuit(num_position + 1, tuple(gates))


def build_neqr(image) -> Circuit:
    """Uniform position superposition with the intensity byte written per pixel.

    Pixel i with intensity f lands all of its weight (1/2^n) on basis index
    f * 2^(2n) + i.
    """
    values = _pixel_values(image)
    if not np.all(values == np.round(values)):
        raise ValueError("NEQR requires integer pixel values")
    side = _side_of(values)
    num_position = 2 * (side.bit_length() - 1)
    controls = tuple(range(num_position))
    gates = [sim.h(q) for q in range(num_position)]
    for i, v in enumerate(values.astype(int)):
        set_bits = [j for j in range(INTENSITY_BITS) if (v >> j) & 1]
        if not set_bits:
            continue
        flips = _anticontrol_flips(i, num_position)
        gates.extend(flips)
        gates.extend(sim.x(num_position + j, controls=controls) for j in set_bits)
        gates.extend(flips)
    return Circuit(num_position + INTENSITY_BITS, tuple(gates))


def _round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def decode_frqi(state: PureState, side: int) -> GrayImage:
    """Invert build_frqi: recover each pixel from its color-qubit angle."""
    if side not in SUPPORTED_SIDES:
        raise ValueError(f"image side must be one of {SUPPORTED_SIDES}")
    num_position = 2 * (side.bit_length() - 1)
    if state.num_qubits != num_position + 1:
        raise ValueError(
            f"expected a {num_position + 1}-qubit FRQI state, got {state.num_qubits} qubits"
        )
    num_pixels = side * side
    amps = state.amplitudes
    pixels = []
    for i in range(num_pixels):
        a0 = amps[i]
        a1 = amps[(1 << num_position) + i]
        mass = abs(a0) ** 2 + abs(a1) ** 2
        if abs(mass - 1.0 / num_pixels) > 1e-8:
            raise ValueError(
                "state was not produced by the FRQI encoder (position mass mismatch)"
            )
        theta = math.atan2(abs(a1), abs(a0))
        pixels.append(_round_half_up(theta * 510.0 / math.pi))
    return GrayImage(side, side, tuple(pixels))


def decode_neqr(state: PureState, side: int) -> GrayImage:
    """Invert build_neqr: read the unique intensity present at each position."""
    if side not in SUPPORTED_SIDES:
        raise ValueError(f"image side must be one of {SUPPORTED_SIDES}")
    num_position = 2 * (side.bit_length() - 1)
    if state.num_qubits != num_position + INTENSITY_BITS:
        raise ValueError(
            f"expected a {num_position + INTENSITY_BITS}-qubit NEQR state, "
            f"got {state.num_qubits} qubits"
        )
    n = side.bit_length() - 1
    threshold = 1.0 / (1 << (n + 1))
    magnitudes = np.abs(state.amplitudes).reshape(1 << INTENSITY_BITS, side * side)
    pixels = []
    for i in range(side * side):
        hits = np.nonzero(magnitudes[:, i] > threshold)[0]
        if hits.size != 1:
            raise ValueError(
                "state was not produced by the NEQR encoder "
                f"(position {i} has {hits.size} candidate intensities)"
            )
        pixels.append(int(hits[0]))
    return GrayImage(side, side, tuple(pixels))
