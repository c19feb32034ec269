from typing import Sequence, Tuple

import numpy as np

from src.error_handling.error_handling import ArchitectureError, ContractViolation
from src.fusion.block import build_global_block, check_compatible
from src.nn.model import ModelWeights, forward_logits, softmax


def fuse_fedavg(models: Sequence[Tuple[ModelWeights, int]], uniform: bool = False) -> ModelWeights:
    """Coordinate-wise average, weighted by N_j / N unless ``uniform``.

    Computed as W_0 + sum_j w_j (W_j - W_0) so identical inputs come back unchanged.
    """
    if not models:
        raise ArchitectureError("No models to average")
    ref = models[0][0]
    for j, (model, _) in enumerate(models[1:], start=1):
        if not model.same_architecture(ref):
            raise ArchitectureError(f"Model {j} has architecture {model.architecture}, model 0 has {ref.architecture}",
                                    details={"model": j})

    counts = np.array([count for _, count in models], dtype=np.float64)
    if uniform:
        weights = np.full(len(models), 1.0 / len(models))
    else:
        if np.any(counts < 0) or counts.sum() <= 0:
            raise ContractViolation(f"Sample counts must be non-negative with a positive total, got {counts.tolist()}")
        weights = counts / counts.sum()

    fused = []
    for l, base in enumerate(ref.matrices()):
        acc = np.array(base)
        for w, (model, _) in zip(weights, models):
            acc += w * (model.layers[l].matrix - base)
        fused.append(acc)
    return ModelWeights.from_matrices(fused, ref.activation)


def predict_ensemble(models: Sequence[ModelWeights], x) -> np.ndarray:
    """Uniform average of client softmax outputs."""
    check_compatible(models, same_depth=False)
    return np.mean([softmax(forward_logits(m, x)) for m in models], axis=0)


def fuse_concat(models: Sequence[ModelWeights]) -> ModelWeights:
    """Concatenate clients into one network: logits equal the sum of the clients' logits."""
    return build_global_block(models).to_concat_model()


def fuse_concat_toy(model_a: ModelWeights, model_b: ModelWeights) -> ModelWeights:
    """Two single-hidden-layer nets, hidden layers stacked and output layers side by side."""
    for name, model in (("first", model_a), ("second", model_b)):
        if model.depth != 1:
            raise ArchitectureError(f"The {name} model has depth {model.depth}; concat fusion takes one hidden layer")
    return fuse_concat([model_a, model_b])
