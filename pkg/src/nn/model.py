"""Dense MLP representation and the math used to train and query it.

Every layer is stored in augmented form: a matrix of shape
(out_units, in_units + 1) whose last column is the bias, so that
``W @ [a; 1] == W[:, :-1] @ a + W[:, -1]``. A model with depth L has L
hidden layers and L + 1 matrices; the last one has exactly C rows.
"""
from dataclasses import dataclass
from enum import Enum
from typing import List, Sequence, Tuple

import numpy as np

from src.error_handling.error_handling import ArchitectureError, ContractViolation
from src.util.config import Config

LOG_CLAMP = 1e-12


class Activation(str, Enum):
    RELU = "relu"
    LEAKY_RELU = "leaky_relu"


@dataclass(frozen=True, eq=False)
class LayerWeights:
    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] < 1 or matrix.shape[1] < 2:
            raise ContractViolation(f"Layer matrix must be 2-D with at least one bias column, got shape {matrix.shape}")
        if not np.all(np.isfinite(matrix)):
            raise ContractViolation("Layer matrix contains non-finite entries")
        matrix.flags.writeable = False
        object.__setattr__(self, "matrix", matrix)

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def cols(self) -> int:
        return self.matrix.shape[1]

    @property
    def weights(self) -> np.ndarray:
        return self.matrix[:, :-1]

    @property
    def bias(self) -> np.ndarray:
        return self.matrix[:, -1]


@dataclass(frozen=True, eq=False)
class ModelWeights:
    layers: Tuple[LayerWeights, ...]
    activation: Activation = Activation.RELU

    def __post_init__(self):
        layers = tuple(l if isinstance(l, LayerWeights) else LayerWeights(l) for l in self.layers)
        if not layers:
            raise ArchitectureError("A model needs at least one layer")
        for idx in range(1, len(layers)):
            if layers[idx].cols != layers[idx - 1].rows + 1:
                raise ArchitectureError(
                    f"Layer {idx} has {layers[idx].cols} columns but layer {idx - 1} emits "
                    f"{layers[idx - 1].rows} units (+1 bias)",
                    details={"layer": idx},
                )
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "activation", Activation(self.activation))

    @classmethod
    def from_matrices(cls, matrices: Sequence[np.ndarray], activation=Activation.RELU) -> "ModelWeights":
        return cls(tuple(LayerWeights(m) for m in matrices), Activation(activation))

    @property
    def depth(self) -> int:
        return len(self.layers) - 1

    @property
    def num_classes(self) -> int:
        return self.layers[-1].rows

    @property
    def input_width(self) -> int:
        return self.layers[0].cols - 1

    @property
    def hidden_widths(self) -> List[int]:
        return [layer.rows for layer in self.layers[:-1]]

    @property
    def architecture(self) -> List[int]:
        return [self.input_width] + [layer.rows for layer in self.layers]

    def matrices(self) -> List[np.ndarray]:
        return [layer.matrix for layer in self.layers]

    def same_architecture(self, other: "ModelWeights") -> bool:
        return self.architecture == other.architecture and self.activation == other.activation


def activate(z: np.ndarray, activation: Activation) -> np.ndarray:
    if activation == Activation.LEAKY_RELU:
        return np.where(z > 0, z, Config.LEAKY_SLOPE * z)
    return np.maximum(z, 0.0)


def activation_grad(z: np.ndarray, activation: Activation) -> np.ndarray:
    if activation == Activation.LEAKY_RELU:
        return np.where(z > 0, 1.0, Config.LEAKY_SLOPE)
    return (z > 0).astype(np.float64)


def _as_batch(x) -> Tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        return x[None, :], True
    if x.ndim != 2:
        raise ContractViolation(f"Inputs must be a vector or a batch matrix, got {x.ndim} dimensions")
    return x, False


def _forward_matrices(matrices: Sequence[np.ndarray], activation: Activation, X: np.ndarray):
    """Returns (pre-activations per layer, activations feeding each layer)."""
    inputs = []
    pre = []
    a = X
    last = len(matrices) - 1
    for idx, W in enumerate(matrices):
        if a.shape[1] != W.shape[1] - 1:
            raise ContractViolation(
                f"Layer {idx} expects {W.shape[1] - 1} inputs, got {a.shape[1]}",
                details={"layer": idx},
            )
        inputs.append(a)
        z = a @ W[:, :-1].T + W[:, -1]
        pre.append(z)
        a = activate(z, activation) if idx < last else z
    return pre, inputs


def hidden_activations(model: ModelWeights, x) -> List[np.ndarray]:
    """Post-activation outputs of every hidden layer."""
    X, single = _as_batch(x)
    pre, inputs = _forward_matrices(model.matrices(), model.activation, X)
    hidden = inputs[1:]
    return [h[0] for h in hidden] if single else hidden


def forward_logits(model: ModelWeights, x) -> np.ndarray:
    """Pre-softmax outputs f(x); accepts one sample or an (N, I) batch."""
    X, single = _as_batch(x)
    pre, _ = _forward_matrices(model.matrices(), model.activation, X)
    logits = pre[-1]
    return logits[0] if single else logits


def softmax(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    shifted = v - np.max(v, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=-1, keepdims=True)


def one_hot(labels, num_classes: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    out = np.zeros((labels.shape[0], num_classes), dtype=np.float64)
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


def _as_one_hot(labels, num_classes: int) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.ndim == 1:
        return one_hot(labels, num_classes)
    return labels.astype(np.float64)


def cross_entropy(probs, labels) -> float:
    """Mean of -sum_c Y_ic log p_ic; labels are one-hot rows or class ids."""
    P = np.atleast_2d(np.asarray(probs, dtype=np.float64))
    Y = _as_one_hot(labels if np.ndim(labels) else [labels], P.shape[1])
    if Y.shape != P.shape:
        raise ContractViolation(f"Label batch shape {Y.shape} does not match probabilities {P.shape}")
    per_sample = -np.sum(Y * np.log(np.clip(P, LOG_CLAMP, None)), axis=1)
    return float(max(np.mean(per_sample), 0.0))


def l1_penalty(matrices: Sequence[np.ndarray], l1_coefficient: float) -> float:
    if l1_coefficient == 0:
        return 0.0
    return float(l1_coefficient * sum(np.abs(W).sum() for W in matrices))


def loss_and_gradients(matrices: Sequence[np.ndarray], activation: Activation, X: np.ndarray,
                       Y: np.ndarray, l1_coefficient: float = 0.0) -> Tuple[float, List[np.ndarray]]:
    pre, inputs = _forward_matrices(matrices, activation, X)
    P = softmax(pre[-1])
    loss = cross_entropy(P, Y) + l1_penalty(matrices, l1_coefficient)

    n = X.shape[0]
    grads: List[np.ndarray] = [None] * len(matrices)
    dz = (P - Y) / n
    for idx in range(len(matrices) - 1, -1, -1):
        W = matrices[idx]
        g = np.empty_like(W)
        g[:, :-1] = dz.T @ inputs[idx]
        g[:, -1] = dz.sum(axis=0)
        if l1_coefficient:
            g += l1_coefficient * np.sign(W)
        grads[idx] = g
        if idx > 0:
            dz = (dz @ W[:, :-1]) * activation_grad(pre[idx - 1], activation)
    return loss, grads


def objective(model: ModelWeights, features, labels, l1_coefficient: float = 0.0) -> float:
    X, _ = _as_batch(features)
    Y = _as_one_hot(labels, model.num_classes)
    P = softmax(forward_logits(model, X))
    return cross_entropy(P, Y) + l1_penalty(model.matrices(), l1_coefficient)


def backward(model: ModelWeights, features, labels, l1_coefficient: float = 0.0) -> List[np.ndarray]:
    """Exact gradient of the objective, one array per layer matrix."""
    X, _ = _as_batch(features)
    if X.shape[0] == 0:
        raise ContractViolation("Cannot differentiate on an empty batch")
    Y = _as_one_hot(labels, model.num_classes)
    _, grads = loss_and_gradients(model.matrices(), model.activation, X, Y, l1_coefficient)
    return grads


def predict_proba(model: ModelWeights, x) -> np.ndarray:
    return softmax(forward_logits(model, x))


