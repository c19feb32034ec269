"""Global block model for clients sharing one depth.

The first layer stacks every client's first layer, each middle layer is
block-diagonal with a single shared bias column fed by the augmented
constant, and the J output layers stay separate so each block keeps its own
pre-softmax head.
"""
from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import numpy as np

from src.error_handling.error_handling import ArchitectureError, ContractViolation
from src.nn.model import Activation, ModelWeights, activate, forward_logits


@dataclass(frozen=True, eq=False)
class GlobalBlockModel:
    first_layer: np.ndarray
    middle_layers: Tuple[np.ndarray, ...]
    head_blocks: Tuple[np.ndarray, ...]
    block_widths: Tuple[Tuple[int, ...], ...]
    activation: Activation = Activation.RELU

    @property
    def num_models(self) -> int:
        return len(self.head_blocks)

    @property
    def num_classes(self) -> int:
        return self.head_blocks[0].shape[0]

    @property
    def input_width(self) -> int:
        return self.first_layer.shape[1] - 1

    @property
    def depth(self) -> int:
        return len(self.middle_layers) + 1

    def hidden(self, X: np.ndarray) -> List[np.ndarray]:
        """Global activations of every hidden layer, blocks concatenated in client order."""
        if X.shape[1] != self.input_width:
            raise ContractViolation(f"Layer 0 expects {self.input_width} inputs, got {X.shape[1]}",
                                    details={"layer": 0})
        a = activate(X @ self.first_layer[:, :-1].T + self.first_layer[:, -1], self.activation)
        outputs = [a]
        for M in self.middle_layers:
            a = activate(a @ M[:, :-1].T + M[:, -1], self.activation)
            outputs.append(a)
        return outputs

    def head_logits(self, X: np.ndarray) -> np.ndarray:
        """(N, C, J) pre-softmax outputs, one column per client head."""
        penultimate = self.hidden(X)[-1]
        offsets = np.concatenate([[0], np.cumsum(self.block_widths[-1])])
        columns = []
        for j, head in enumerate(self.head_blocks):
            block = penultimate[:, offsets[j]:offsets[j + 1]]
            columns.append(block @ head[:, :-1].T + head[:, -1])
        return np.stack(columns, axis=-1)

    def to_concat_model(self) -> ModelWeights:
        """Single network whose output layer sums the heads (last-layer concatenation)."""
        head = np.hstack([h[:, :-1] for h in self.head_blocks] +
                         [np.sum([h[:, -1] for h in self.head_blocks], axis=0)[:, None]])
        return ModelWeights.from_matrices([self.first_layer, *self.middle_layers, head], self.activation)


def check_compatible(models: Sequence[ModelWeights], same_depth: bool = True):
    if not models:
        raise ArchitectureError("No models to fuse")
    ref = models[0]
    for j, model in enumerate(models[1:], start=1):
        if model.num_classes != ref.num_classes:
            raise ArchitectureError(f"Model {j} predicts {model.num_classes} classes, model 0 predicts {ref.num_classes}",
                                    details={"model": j})
        if model.input_width != ref.input_width:
            raise ArchitectureError(f"Model {j} takes {model.input_width} inputs, model 0 takes {ref.input_width}",
                                    details={"model": j})
        if same_depth and model.depth != ref.depth:
            raise ArchitectureError(f"Model {j} has depth {model.depth}, model 0 has depth {ref.depth}",
                                    details={"model": j})
        if same_depth and model.activation != ref.activation:
            raise ArchitectureError(f"Model {j} uses {model.activation.value}, model 0 uses {ref.activation.value}",
                                    details={"model": j})


def _block_diagonal(matrices: Sequence[np.ndarray]) -> np.ndarray:
    rows = sum(W.shape[0] for W in matrices)
    cols = sum(W.shape[1] - 1 for W in matrices)
    out = np.zeros((rows, cols + 1))
    r = c = 0
    for W in matrices:
        h, w = W.shape[0], W.shape[1] - 1
        out[r:r + h, c:c + w] = W[:, :-1]
        out[r:r + h, -1] = W[:, -1]
        r += h
        c += w
    return out


def build_global_block(models: Sequence[ModelWeights]) -> GlobalBlockModel:
    if len(models) < 2:
        raise ArchitectureError(f"A global block model needs at least 2 models, got {len(models)}")
    check_compatible(models, same_depth=True)
    if models[0].depth < 1:
        raise ArchitectureError("Block construction needs at least one hidden layer")

    depth = models[0].depth
    first = np.vstack([m.layers[0].matrix for m in models])
    middle = tuple(_block_diagonal([m.layers[l].matrix for m in models]) for l in range(1, depth))
    heads = tuple(np.array(m.layers[-1].matrix) for m in models)
    widths = tuple(tuple(m.layers[l].rows for m in models) for l in range(depth))
    return GlobalBlockModel(first, middle, heads, widths, models[0].activation)


def disturbing_matrix(models: Union[Sequence[ModelWeights], GlobalBlockModel], x) -> np.ndarray:
    """Column j holds client j's logits: (C, J) for one sample, (N, C, J) for a batch."""
    X = np.asarray(x, dtype=np.float64)
    single = X.ndim == 1
    X = X[None, :] if single else X
    if isinstance(models, GlobalBlockModel):
        M = models.head_logits(X)
    else:
        if not models:
            raise ContractViolation("Disturbing matrix needs at least one model")
        M = np.stack([forward_logits(m, X) for m in models], axis=-1)
    return M[0] if single else M
