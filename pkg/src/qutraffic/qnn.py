"""Trainable variational QNN over angle-encoded images.

Circuit: RX angle encoding (one qubit per pixel), then ``num_layers``
blocks of per-qubit RY rotations followed by a CNOT ring
(q -> (q+1) mod n). Readouts are r_q = (1 - <Z_q>)/2 on qubits 0..2,
scored against one-hot class targets with a summed squared error.
Gradients use the exact parameter-shift rule for the half-angle RY
generators; updates use Adam (or a plain gradient step in "sgd" mode).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import sim
from .data import Dataset, stratified_split
from .encodings import FULL_PI, build_angle_encoding, pixel_to_angle
from .noise import NoiseChannel
from .sim import Circuit, expect_z, run_circuit, run_noisy

NUM_CLASSES = 3
SHIFT = math.pi / 2.0


@dataclass(frozen=True)
class QnnModel:
    num_qubits: int
    num_layers: int
    params: np.ndarray  # one RY angle per (layer, qubit): params[layer*n + q]

    def __post_init__(self):
        params = np.asarray(self.params, dtype=float)
        object.__setattr__(self, "params", params)
        if self.num_qubits < NUM_CLASSES:
            raise ValueError(f"model needs at least {NUM_CLASSES} qubits")
        if self.num_layers < 1:
            raise ValueError("model needs at least one layer")
        if params.shape != (self.num_layers * self.num_qubits,):
            raise ValueError(
                f"expected {self.num_layers * self.num_qubits} parameters, "
                f"got shape {params.shape}"
            )
        if not np.all(np.isfinite(params)):
            raise ValueError("parameters must be finite")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 20
    batch_size: int = 32
    learning_rate: float = 0.001
    train_fraction: float = 0.8
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    optimizer: str = "adam"  # "sgd" applies the raw update step instead

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie strictly between 0 and 1")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ValueError("Adam betas must lie in [0, 1)")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


@dataclass
class Metrics:
    """Per-epoch training history; index 0 is the untrained model."""

    cost: list[float]
    train_accuracy: list[float]
    test_accuracy: list[float]
    confusion: np.ndarray  # 3x3, rows true class, columns predicted, test split


def model_circuit(model: QnnModel, image) -> Circuit:
    """Angle encoding followed by the model's RY + CNOT-ring layers."""
    encoding = build_angle_encoding(image)
    if encoding.num_qubits != model.num_qubits:
        raise ValueError(
            f"image encodes to {encoding.num_qubits} qubits, model has {model.num_qubits}"
        )
    n = model.num_qubits
    gates = list(encoding.gates)
    for layer in range(model.num_layers):
        base = layer * n
        gates.extend(sim.ry(model.params[base + q], q) for q in range(n))
        gates.extend(sim.cnot(q, (q + 1) % n) for q in range(n))
    return Circuit(n, tuple(gates))


def qnn_forward(model: QnnModel, image) -> np.ndarray:
    """Readout vector (r_0, r_1, r_2) with r_q = (1 - <Z_q>)/2."""
    state = run_circuit(model_circuit(model, image))
    return np.array([(1.0 - expect_z(state, q)) / 2.0 for q in range(NUM_CLASSES)])


def qnn_loss(pred, label: int) -> float:
    """Summed squared error of the readouts against the one-hot target."""
    pred = np.asarray(pred, dtype=float)
    if pred.shape != (NUM_CLASSES,):
        raise ValueError(f"expected {NUM_CLASSES} readouts, got shape {pred.shape}")
    if not 0 <= label < NUM_CLASSES:
        raise ValueError(f"label {label} out of range")
    target = np.zeros(NUM_CLASSES)
    target[label] = 1.0
    return float(np.sum((pred - target) ** 2))


def qnn_cost(model: QnnModel, samples) -> float:
    """Mean loss over (image, label) samples."""
    if len(samples) == 0:
        raise ValueError("cost needs at least one sample")
    angles, labels = _encoding_angles(samples, model.num_qubits)
    readouts = _readouts_batch(
        angles, np.broadcast_to(model.params, (len(samples), model.params.size)),
        model.num_layers,
    )
    return _mean_loss(readouts, labels)


# --- vectorized evaluation over stacks of (encoding, parameter) rows ---


@lru_cache(maxsize=None)
def _pair_indices(num_qubits: int, target: int):
    idx = np.arange(1 << num_qubits)
    i0 = idx[((idx >> target) & 1) == 0]
    i1 = i0 | (1 << target)
    i0.setflags(write=False)
    i1.setflags(write=False)
    return i0, i1


@lru_cache(maxsize=None)
def _cnot_indices(num_qubits: int, control: int, target: int):
    idx = np.arange(1 << num_qubits)
    sel = (((idx >> control) & 1) == 1) & (((idx >> target) & 1) == 0)
    i0 = idx[sel]
    i1 = i0 | (1 << target)
    i0.setflags(write=False)
    i1.setflags(write=False)
    return i0, i1


@lru_cache(maxsize=None)
def _z_sign_matrix(num_qubits: int) -> np.ndarray:
    idx = np.arange(1 << num_qubits)
    signs = np.stack(
        [1.0 - 2.0 * ((idx >> q) & 1) for q in range(NUM_CLASSES)], axis=1
    )
    signs.setflags(write=False)
    return signs


def _expect_z_batch(rx_angles: np.ndarray, thetas: np.ndarray, num_layers: int):
    """<Z_q> (q = 0..2) for a stack of circuits sharing the ring topology.

    rx_angles: (B, n) per-row encoding angles; thetas: (B, n*num_layers)
    per-row RY parameters.
    """
    rows, n = rx_angles.shape
    dim = 1 << n
    out = np.empty((rows, NUM_CLASSES))
    chunk = max(1, (1 << 22) // dim)
    for start in range(0, rows, chunk):
        stop = min(rows, start + chunk)
        psi = np.zeros((stop - start, dim), dtype=complex)
        psi[:, 0] = 1.0
        for q in range(n):
            half = rx_angles[start:stop, q, None] / 2.0
            c, s = np.cos(half), np.sin(half)
            i0, i1 = _pair_indices(n, q)
            a0, a1 = psi[:, i0], psi[:, i1]
            psi[:, i0] = c * a0 - 1j * s * a1
            psi[:, i1] = -1j * s * a0 + c * a1
        for layer in range(num_layers):
            base = layer * n
            for q in range(n):
                half = thetas[start:stop, base + q, None] / 2.0
                c, s = np.cos(half), np.sin(half)
                i0, i1 = _pair_indices(n, q)
                a0, a1 = psi[:, i0], psi[:, i1]
                psi[:, i0] = c * a0 - s * a1
                psi[:, i1] = s * a0 + c * a1
            for q in range(n):
                i0, i1 = _cnot_indices(n, q, (q + 1) % n)
                swapped = psi[:, i0]
                psi[:, i0] = psi[:, i1]
                psi[:, i1] = swapped
        probs = np.abs(psi) ** 2
        out[start:stop] = probs @ _z_sign_matrix(n)
    return out


def _readouts_batch(rx_angles, thetas, num_layers) -> np.ndarray:
    return (1.0 - _expect_z_batch(rx_angles, thetas, num_layers)) / 2.0


def _encoding_angles(samples, num_qubits: int):
    angles = np.array(
        [[pixel_to_angle(p, FULL_PI) for p in image.pixels] for image, _ in samples]
    )
    if angles.shape[1] != num_qubits:
        raise ValueError(
            f"images encode to {angles.shape[1]} qubits, model has {num_qubits}"
        )
    labels = np.array([label for _, label in samples], dtype=int)
    if np.any((labels < 0) | (labels >= NUM_CLASSES)):
        raise ValueError("sample label out of range")
    return angles, labels


def _one_hot(labels: np.ndarray) -> np.ndarray:
    target = np.zeros((labels.size, NUM_CLASSES))
    target[np.arange(labels.size), labels] = 1.0
    return target


def _mean_loss(readouts: np.ndarray, labels: np.ndarray) -> float:
    return float(np.mean(np.sum((readouts - _one_hot(labels)) ** 2, axis=1)))


def param_shift_grad(model: QnnModel, batch) -> np.ndarray:
    """Batch-mean cost gradient via the exact +-pi/2 parameter-shift rule.

    d<Z>/dtheta_j = (<Z>(theta_j + pi/2) - <Z>(theta_j - pi/2)) / 2, chained
    through the readout map and the squared-error loss.
    """
    if len(batch) == 0:
        raise ValueError("gradient needs at least one sample")
    angles, labels = _encoding_angles(batch, model.num_qubits)
    num_params = model.params.size
    variants = np.tile(model.params, (2 * num_params + 1, 1))
    variants[1 : num_params + 1] += np.eye(num_params) * SHIFT
    variants[num_params + 1 :] -= np.eye(num_params) * SHIFT
    num_samples = len(batch)
    rx = np.repeat(angles, 2 * num_params + 1, axis=0)
    thetas = np.tile(variants, (num_samples, 1))
    readouts = _readouts_batch(rx, thetas, model.num_layers).reshape(
        num_samples, 2 * num_params + 1, NUM_CLASSES
    )
    base = readouts[:, 0, :]
    shifted = (readouts[:, 1 : num_params + 1, :] - readouts[:, num_params + 1 :, :]) / 2.0
    residual = 2.0 * (base - _one_hot(labels))
    per_sample = np.einsum("sk,spk->sp", residual, shifted)
    return per_sample.mean(axis=0)


@dataclass(frozen=True)
class AdamState:
    beta1: float
    beta2: float
    epsilon: float
    step: int
    m: np.ndarray
    v: np.ndarray

    @staticmethod
    def init(num_params: int, beta1=0.9, beta2=0.999, epsilon=1e-8) -> "AdamState":
        return AdamState(beta1, beta2, epsilon, 0, np.zeros(num_params), np.zeros(num_params))


def adam_step(state: AdamState, params, grads, learning_rate: float):
    """One bias-corrected Adam update; returns (new_state, new_params)."""
    params = np.asarray(params, dtype=float)
    grads = np.asarray(grads, dtype=float)
    if params.shape != grads.shape:
        raise ValueError("parameter and gradient shapes differ")
    t = state.step + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * grads
    v = state.beta2 * state.v + (1.0 - state.beta2) * grads**2
    m_hat = m / (1.0 - state.beta1**t)
    v_hat = v / (1.0 - state.beta2**t)
    new_params = params - learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon)
    return AdamState(state.beta1, state.beta2, state.epsilon, t, m, v), new_params


def sgd_step(params, grads, learning_rate: float) -> np.ndarray:
    """The raw update rule theta <- theta - eta * grad, no moments."""
    params = np.asarray(params, dtype=float)
    grads = np.asarray(grads, dtype=float)
    if params.shape != grads.shape:
        raise ValueError("parameter and gradient shapes differ")
    return params - learning_rate * grads


def train(dataset: Dataset, num_layers: int, config: TrainConfig):
    """Seeded, fully deterministic training run; returns (model, metrics).

    Stratified 80/20-style split, per-epoch seeded shuffling, fixed batch
    order, parameters initialized uniformly on [-pi, pi].
    """
    train_set, test_set = stratified_split(dataset, config.train_fraction, config.seed)
    if any(c == 0 for c in train_set.counts()):
        raise ValueError("every class must appear in the training split")
    sides = {image.side for image, _ in dataset.samples}
    if len(sides) != 1:
        raise ValueError("dataset images must share one size")
    n = sides.pop() ** 2

    rng = np.random.default_rng(config.seed)
    params = rng.uniform(-math.pi, math.pi, size=num_layers * n)

    train_angles, train_labels = _encoding_angles(train_set.samples, n)
    test_angles, test_labels = _encoding_angles(test_set.samples, n)

    def evaluate(current: np.ndarray):
        r_train = _readouts_batch(
            train_angles,
            np.broadcast_to(current, (train_angles.shape[0], current.size)),
            num_layers,
        )
        r_test = _readouts_batch(
            test_angles,
            np.broadcast_to(current, (test_angles.shape[0], current.size)),
            num_layers,
        )
        cost = _mean_loss(r_train, train_labels)
        train_acc = float(np.mean(np.argmax(r_train, axis=1) == train_labels))
        test_pred = np.argmax(r_test, axis=1)
        test_acc = float(np.mean(test_pred == test_labels))
        return cost, train_acc, test_acc, test_pred

    metrics = Metrics([], [], [], np.zeros((NUM_CLASSES, NUM_CLASSES), dtype=int))
    cost, train_acc, test_acc, test_pred = evaluate(params)
    metrics.cost.append(cost)
    metrics.train_accuracy.append(train_acc)
    metrics.test_accuracy.append(test_acc)

    opt = AdamState.init(params.size, config.beta1, config.beta2, config.epsilon)
    for _ in range(config.epochs):
        order = rng.permutation(len(train_set.samples))
        for start in range(0, len(order), config.batch_size):
            batch = [train_set.samples[i] for i in order[start : start + config.batch_size]]
            model = QnnModel(n, num_layers, params)
            grads = param_shift_grad(model, batch)
            if config.optimizer == "adam":
                opt, params = adam_step(opt, params, grads, config.learning_rate)
            else:
                params = sgd_step(params, grads, config.learning_rate)
        cost, train_acc, test_acc, test_pred = evaluate(params)
        metrics.cost.append(cost)
        metrics.train_accuracy.append(train_acc)
        metrics.test_accuracy.append(test_acc)

    for true, pred in zip(test_labels, test_pred):
        metrics.confusion[true, pred] += 1
    return QnnModel(n, num_layers, params), metrics


def evaluate_noisy(model: QnnModel, samples, channel: NoiseChannel) -> float:
    """Accuracy under the channel via density-matrix forward passes."""
    if len(samples) == 0:
        raise ValueError("evaluation needs at least one sample")
    correct = 0
    for image, label in samples:
        rho = run_noisy(model_circuit(model, image), channel)
        readout = [(1.0 - expect_z(rho, q)) / 2.0 for q in range(NUM_CLASSES)]
        if int(np.argmax(readout)) == label:
            correct += 1
    return correct / len(samples)


def metrics_csv(metrics: Metrics) -> str:
    """CSV history with header epoch,cost,train_acc,test_acc."""
    lines = ["epoch,cost,train_acc,test_acc"]
    history = zip(metrics.cost, metrics.train_accuracy, metrics.test_accuracy)
    for epoch, (cost, train_acc, test_acc) in enumerate(history):
        lines.append(f"{epoch},{cost!r},{train_acc!r},{test_acc!r}")
    return "\n".join(lines) + "\n"


def model_json(model: QnnModel) -> str:
    """Checkpoint text: JSON with parameters at 17 significant digits."""
    params = ",\n    ".join(format(p, ".17g") for p in model.params)
    return (
        "{\n"
        f'  "num_qubits": {model.num_qubits},\n'
        f'  "num_layers": {model.num_layers},\n'
        '  "params": [\n'
        f"    {params}\n"
        "  ]\n"
        "}\n"
    )


def save_model(model: QnnModel, path) -> None:
    Path(path).write_text(model_json(model))


def load_model(path) -> QnnModel:
    payload = json.loads(Path(path).read_text())
    try:
        return QnnModel(
            int(payload["num_qubits"]),
            int(payload["num_layers"]),
            np.asarray(payload["params"], dtype=float),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"{path}: malformed model checkpoint ({exc})") from None
