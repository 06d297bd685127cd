"""Overlap-based nearest-centroid classifiers.

The plain classifier runs the inversion test: prepare the centroid
encoding U_c from |0...0>, undo the test encoding with U_t^dagger, and read
the all-zeros probability P0 = |<psi_t|psi_c>|^2. The variational variant
repeats the U_c U_t^dagger block m times between Hadamard layers on every
qubit. A sample is assigned to the class with the largest P0, ties going
to the lowest class index (red first).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import sim
from .data import Dataset
from .encodings import FRQI, NEQR, EncodingSpec, GrayImage, build_frqi, build_neqr
from .sim import Circuit, prob_all_zero, run_circuit


@dataclass(frozen=True)
class ClassCentroids:
    """Per-class pixel means, real-valued; class order red=0, yellow=1, green=2."""

    images: np.ndarray  # shape (3, side*side), row-major pixels
    side: int


@dataclass(frozen=True)
class OverlapResult:
    p0: tuple[float, float, float]
    predicted_class: int


def class_centroids(train: Dataset) -> ClassCentroids:
    """Pixel-wise mean image of each class over the training samples."""
    sides = {image.side for image, _ in train.samples}
    if len(sides) != 1:
        raise ValueError("training images must share one size")
    side = sides.pop()
    centroids = []
    for label, name in enumerate(train.class_names):
        rows = [image.as_array() for image, lab in train.samples if lab == label]
        if not rows:
            raise ValueError(f"cannot form a centroid: class {name!r} has no samples")
        centroids.append(np.mean(np.stack(rows), axis=0))
    return ClassCentroids(np.stack(centroids), side)


def encoding_circuit(pixels, spec: EncodingSpec) -> Circuit:
    """Encoder circuit for possibly real-valued pixels.

    FRQI interpolates non-integer intensities directly; NEQR stores bits,
    so pixels are rounded to the nearest integer first.
    """
    values = np.asarray(pixels, dtype=float).reshape(-1) if not isinstance(
        pixels, GrayImage
    ) else pixels.as_array()
    if values.size != spec.image_side**2:
        raise ValueError(
            f"image has {values.size} pixels but the encoding expects "
            f"{spec.image_side**2}"
        )
    if spec.method == FRQI:
        return build_frqi(values)
    if spec.method == NEQR:
        return build_neqr(np.clip(np.floor(values + 0.5), 0, 255))
    raise ValueError("overlap classifiers support only FRQI or NEQR encodings")


def inversion_circuit(
    centroid,
    test,
    spec: EncodingSpec,
    num_layers: int = 1,
    hadamard_layers: bool = False,
) -> Circuit:
    """num_layers repetitions of [U_centroid, U_test^dagger], optionally
    sandwiched between Hadamard layers on all qubits."""
    if num_layers < 1:
        raise ValueError("num_layers must be >= 1")
    u_centroid = encoding_circuit(centroid, spec)
    u_test_dag = encoding_circuit(test, spec).inverse()
    n = u_centroid.num_qubits
    gates = []
    if hadamard_layers:
        gates.extend(sim.h(q) for q in range(n))
    for _ in range(num_layers):
        gates.extend(u_centroid.gates)
        gates.extend(u_test_dag.gates)
    if hadamard_layers:
        gates.extend(sim.h(q) for q in range(n))
    return Circuit(n, tuple(gates))


def uu_overlap(centroid, test, spec: EncodingSpec) -> float:
    """P0 of the inversion test: |<psi_test|psi_centroid>|^2."""
    circuit = inversion_circuit(centroid, test, spec)
    return prob_all_zero(run_circuit(circuit))


def var_uu_overlap(centroid, test, spec: EncodingSpec, num_layers: int) -> float:
    """All-zeros probability of the Hadamard-sandwiched m-layer circuit."""
    circuit = inversion_circuit(centroid, test, spec, num_layers, hadamard_layers=True)
    return prob_all_zero(run_circuit(circuit))


def uu_classify(
    test,
    centroids: ClassCentroids,
    spec: EncodingSpec,
    num_layers: Optional[int] = None,
) -> OverlapResult:
    """Nearest centroid by overlap; ``num_layers`` switches to the
    variational circuit. Ties resolve to the lowest class index."""
    if num_layers is None:
        p0 = tuple(uu_overlap(c, test, spec) for c in centroids.images)
    else:
        p0 = tuple(var_uu_overlap(c, test, spec, num_layers) for c in centroids.images)
    return OverlapResult(p0, int(np.argmax(p0)))


def weighted_accuracy(per_class_acc, class_probs) -> float:
    """Prevalence-weighted accuracy c1*N1 + c2*N2 + c3*N3."""
    acc = np.asarray(per_class_acc, dtype=float)
    probs = np.asarray(class_probs, dtype=float)
    if acc.shape != probs.shape:
        raise ValueError("per-class accuracies and probabilities differ in shape")
    if np.any(acc < 0.0) or np.any(acc > 1.0):
        raise ValueError("per-class accuracies must lie in [0, 1]")
    if np.any(probs < 0.0):
        raise ValueError("class probabilities must be non-negative")
    if abs(float(probs.sum()) - 1.0) > 1e-9:
        raise ValueError("class probabilities must sum to 1")
    return float(np.dot(acc, probs))
