from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

import numpy as np

from src.error_handling.error_handling import ContractViolation, ErrorCode


class Role(str, Enum):
    TRAIN = "train"
    TEST = "test"


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    num_classes: int
    role: Role = Role.TRAIN

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if features.ndim != 2 or labels.ndim != 1 or features.shape[0] != labels.shape[0]:
            raise ContractViolation(
                f"Features {features.shape} and labels {labels.shape} do not describe one sample per row",
                code=ErrorCode.INVALID_DATASET)
        if features.shape[0] == 0:
            raise ContractViolation("Dataset must hold at least one sample", code=ErrorCode.INVALID_DATASET)
        if labels.min() < 0 or labels.max() >= self.num_classes:
            raise ContractViolation(f"Labels must lie in [0, {self.num_classes})", code=ErrorCode.INVALID_DATASET)
        if not np.all(np.isfinite(features)):
            raise ContractViolation("Features contain non-finite values", code=ErrorCode.INVALID_DATASET)
        features.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "role", Role(self.role))

    def __len__(self):
        return self.features.shape[0]

    @property
    def input_width(self) -> int:
        return self.features.shape[1]

    def subset(self, indices) -> "Dataset":
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(self.features[indices], self.labels[indices], self.num_classes, self.role)

    @staticmethod
    def merge(first: "Dataset", second: "Dataset") -> "Dataset":
        if first.num_classes != second.num_classes or first.input_width != second.input_width:
            raise ContractViolation("Cannot merge datasets with different widths or class counts",
                                    code=ErrorCode.INVALID_DATASET)
        return Dataset(np.vstack([first.features, second.features]),
                       np.concatenate([first.labels, second.labels]),
                       first.num_classes, first.role)


@dataclass(frozen=True, eq=False)
class PartitionPlan:
    client_indices: List[np.ndarray]
    strategy: str
    label_counts: np.ndarray
    alpha: Optional[float] = None
    labels_per_client: Optional[List[List[int]]] = None
    proportions: Optional[np.ndarray] = None
    attempts: int = 1
    metadata: dict = field(default_factory=dict)

    @property
    def num_clients(self) -> int:
        return len(self.client_indices)

    def client_sizes(self) -> List[int]:
        return [len(idx) for idx in self.client_indices]

    def client_datasets(self, ds: Dataset) -> List[Dataset]:
        return [ds.subset(idx) for idx in self.client_indices]

    def distinct_labels(self) -> List[int]:
        return [int(np.count_nonzero(row)) for row in self.label_counts]

    def describe(self) -> str:
        parts = [f"{self.strategy} J={self.num_clients}"]
        if self.alpha is not None:
            parts.append(f"alpha={self.alpha:g}")
        parts.append(f"sizes={self.client_sizes()}")
        parts.append(f"labels/client={self.distinct_labels()}")
        return " ".join(parts)

    def to_bytes(self) -> bytes:
        return b"".join(np.asarray(idx, dtype="<i8").tobytes() + b"|" for idx in self.client_indices)
