"""Quantum-circuit toolkit for traffic-light image classification.

Exact state-vector and density-matrix simulation, quantum image encodings
(angle, FRQI, NEQR), overlap-based nearest-centroid classifiers, a
trainable variational QNN with parameter-shift gradients, and six
single-qubit Kraus noise channels, plus a reproducible experiment CLI.
"""

from . import classify, data, encodings, noise, qnn, sim

__version__ = "0.1.0"

__all__ = ["classify", "data", "encodings", "noise", "qnn", "sim", "__version__"]
