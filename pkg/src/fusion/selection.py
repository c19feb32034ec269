"""Adaptive model selection by absolute confidence.

A client's absolute confidence on x is max_c exp(f_c(x)). Since exp is
monotone every comparison is done on raw logits; the exponentiated value is
only reported for diagnostics.
"""
import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Union

import numpy as np

from src.error_handling.error_handling import ContractViolation, ErrorCode
from src.fusion.block import GlobalBlockModel, check_compatible, disturbing_matrix
from src.nn.model import ModelWeights, forward_logits, softmax

Models = Union[Sequence[ModelWeights], GlobalBlockModel]

LN_10 = math.log(10.0)


@dataclass(frozen=True)
class Confidence:
    max_logit: float
    class_index: int

    @property
    def log10(self) -> float:
        return self.max_logit / LN_10

    @property
    def value(self) -> float:
        try:
            return math.exp(self.max_logit)
        except OverflowError:
            return math.inf


def ams_select(M: np.ndarray) -> Union[int, np.ndarray]:
    """argmax_j max_c M[c, j]; the lowest index wins ties. Batches (N, C, J) give (N,) indices."""
    M = np.asarray(M)
    if M.size == 0:
        raise ContractViolation("Disturbing matrix is empty")
    selected = np.argmax(np.max(M, axis=-2), axis=-1)
    return int(selected) if M.ndim == 2 else selected


def _num_models(models: Models) -> int:
    return models.num_models if isinstance(models, GlobalBlockModel) else len(models)


def _batched(models: Models, x):
    X = np.asarray(x, dtype=np.float64)
    single = X.ndim == 1
    M = disturbing_matrix(models, X[None, :] if single else X)
    return M, single


def _route(M: np.ndarray) -> np.ndarray:
    selected = ams_select(M)
    return np.ascontiguousarray(M[np.arange(M.shape[0]), :, selected])


def predict_ams_top1(models: Models, x) -> np.ndarray:
    """softmax of the logits of the single most confident client."""
    if not isinstance(models, GlobalBlockModel):
        check_compatible(models, same_depth=True)
    M, single = _batched(models, x)
    probs = softmax(_route(M))
    return probs[0] if single else probs


def topk_logits(M: np.ndarray, k: int) -> np.ndarray:
    """Elementwise sum of the k columns with the largest maxima, per sample of an (N, C, J) batch."""
    order = np.argsort(-np.max(M, axis=1), axis=-1, kind="stable")[:, :k]
    chosen = np.take_along_axis(M, order[:, None, :], axis=2)
    return np.ascontiguousarray(chosen.sum(axis=-1))


def predict_ams_topk(models: Models, x, k: int) -> np.ndarray:
    num_models = _num_models(models)
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= num_models:
        raise ContractViolation(f"k must lie in [1, {num_models}], got {k}", code=ErrorCode.INVALID_TOP_K)
    if k == 1:
        return predict_ams_top1(models, x)
    if not isinstance(models, GlobalBlockModel):
        check_compatible(models, same_depth=True)
    M, single = _batched(models, x)
    probs = softmax(topk_logits(M, k))
    return probs[0] if single else probs


def predict_ams_full(models: Models, x) -> np.ndarray:
    return predict_ams_topk(models, x, _num_models(models))


def predict_ams_cross(models: Sequence[ModelWeights], x) -> np.ndarray:
    """Top-1 selection across clients whose depths differ; only C and I must agree."""
    check_compatible(models, same_depth=False)
    M, single = _batched(models, x)
    probs = softmax(_route(M))
    return probs[0] if single else probs


def absolute_confidence(model: ModelWeights, x) -> Confidence:
    logits = forward_logits(model, np.asarray(x, dtype=np.float64))
    if logits.ndim != 1:
        raise ContractViolation("absolute_confidence takes a single sample; use max_logits for batches")
    c = int(np.argmax(logits))
    return Confidence(max_logit=float(logits[c]), class_index=c)


def max_logits(model: ModelWeights, X) -> np.ndarray:
    return np.max(forward_logits(model, np.atleast_2d(X)), axis=1)


def logit_scale_stats(models: Sequence[ModelWeights], X) -> List[Dict[str, float]]:
    """Per-client max-logit statistics; exposes scale differences that drive cross-depth routing."""
    stats = []
    for j, model in enumerate(models):
        m = max_logits(model, X)
        stats.append({
            "model": j,
            "depth": model.depth,
            "mean": float(np.mean(m)),
            "std": float(np.std(m)),
            "min": float(np.min(m)),
            "max": float(np.max(m)),
        })
    return stats


def routing_histogram(models: Models, X) -> np.ndarray:
    """How many samples of X each client is selected for."""
    M = disturbing_matrix(models, np.atleast_2d(X))
    return np.bincount(ams_select(M), minlength=_num_models(models))
