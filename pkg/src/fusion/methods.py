import re
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Optional, Sequence

import numpy as np

from src.error_handling.error_handling import ConfigurationError, ContractViolation, ErrorCode
from src.fusion.baselines import fuse_concat, fuse_fedavg, predict_ensemble
from src.fusion.selection import predict_ams_cross, predict_ams_top1, predict_ams_topk
from src.nn.model import ModelWeights, predict_proba
from src.nn.serialization import save_bundle, save_model


class MethodKind(str, Enum):
    CONCAT_DIRECT = "concat_direct"
    FEDAVG = "fedavg"
    ENSEMBLE_UNIFORM = "ensemble_uniform"
    AMS_TOP1 = "ams_top1"
    AMS_TOPK = "ams_topk"
    AMS_FULL = "ams_full"
    AMS_CROSS = "ams_cross"


SAME_DEPTH_ONLY = {MethodKind.CONCAT_DIRECT, MethodKind.FEDAVG, MethodKind.AMS_TOP1,
                   MethodKind.AMS_TOPK, MethodKind.AMS_FULL}

_TOPK_PATTERN = re.compile(r"^ams_topk\s*[(:]\s*(\d+)\s*\)?$")


@dataclass(frozen=True)
class FusionMethod:
    kind: MethodKind
    k: Optional[int] = None

    @classmethod
    def parse(cls, text: str) -> "FusionMethod":
        text = text.strip().lower()
        match = _TOPK_PATTERN.match(text)
        if match:
            return cls(MethodKind.AMS_TOPK, int(match.group(1)))
        try:
            kind = MethodKind(text)
        except ValueError:
            raise ConfigurationError(f"Unknown fusion method {text!r}")
        if kind == MethodKind.AMS_TOPK:
            raise ConfigurationError("ams_topk needs k, e.g. ams_topk(3)")
        return cls(kind)

    @classmethod
    def parse_list(cls, text: str) -> List["FusionMethod"]:
        # commas inside ams_topk(k) never occur, so a plain split is enough
        return [cls.parse(part) for part in text.split(",") if part.strip()]

    def __str__(self):
        return f"ams_topk({self.k})" if self.kind == MethodKind.AMS_TOPK else self.kind.value

    @property
    def needs_same_depth(self) -> bool:
        return self.kind in SAME_DEPTH_ONLY

    @property
    def needs_shared_init(self) -> bool:
        return self.kind == MethodKind.FEDAVG

    def validate(self, num_models: int):
        if self.kind == MethodKind.AMS_TOPK and not (self.k and 1 <= self.k <= num_models):
            raise ContractViolation(f"{self} needs 1 <= k <= {num_models}", code=ErrorCode.INVALID_TOP_K)


@dataclass
class FusedPredictor:
    method: FusionMethod
    predict: Callable[[np.ndarray], np.ndarray]
    models: Sequence[ModelWeights]
    fused_model: Optional[ModelWeights] = None

    def __call__(self, X):
        return self.predict(X)

    def save(self, path: str) -> str:
        if self.fused_model is not None:
            return save_model(self.fused_model, path, tag=str(self.method))
        return save_bundle(list(self.models), path, tag=str(self.method))


def build_predictor(method: FusionMethod, models: Sequence[ModelWeights],
                    sample_counts: Optional[Sequence[int]] = None,
                    uniform_fedavg: bool = True) -> FusedPredictor:
    models = list(models)
    method.validate(len(models))
    kind = method.kind

    if kind == MethodKind.FEDAVG:
        counts = sample_counts if sample_counts is not None else [1] * len(models)
        fused = fuse_fedavg(list(zip(models, counts)), uniform=uniform_fedavg)
        return FusedPredictor(method, lambda X: predict_proba(fused, X), models, fused)
    if kind == MethodKind.CONCAT_DIRECT:
        fused = fuse_concat(models) if len(models) > 1 else models[0]
        return FusedPredictor(method, lambda X: predict_proba(fused, X), models, fused)
    if kind == MethodKind.ENSEMBLE_UNIFORM:
        return FusedPredictor(method, lambda X: predict_ensemble(models, X), models)
    if kind == MethodKind.AMS_TOP1:
        return FusedPredictor(method, lambda X: predict_ams_top1(models, X), models)
    if kind == MethodKind.AMS_TOPK:
        return FusedPredictor(method, lambda X: predict_ams_topk(models, X, method.k), models)
    if kind == MethodKind.AMS_FULL:
        return FusedPredictor(method, lambda X: predict_ams_topk(models, X, len(models)), models)
    return FusedPredictor(method, lambda X: predict_ams_cross(models, X), models)
