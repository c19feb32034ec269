from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from src.data.dataset import Dataset
from src.data.partition import partition_by_label_sets
from src.fusion.selection import LN_10, max_logits
from src.logging.logger import get_logger
from src.nn.model import Activation, ModelWeights
from src.nn.trainer import TrainConfig, evaluate_accuracy, mlp_architecture, train
from src.util.config import Config


@dataclass(frozen=True)
class ConfidenceReport:
    in_labels: Tuple[int, ...]
    n_in: int
    n_out: int
    median_in: float
    median_out: float
    in_label_accuracy: float

    @property
    def gap(self) -> float:
        """Median max-logit gap in natural-log units of confidence."""
        return self.median_in - self.median_out

    @property
    def median_in_log10(self) -> float:
        return self.median_in / LN_10

    @property
    def median_out_log10(self) -> float:
        return self.median_out / LN_10


def confidence_report(model: ModelWeights, test: Dataset, in_labels: Sequence[int]) -> ConfidenceReport:
    in_labels = tuple(sorted(int(k) for k in in_labels))
    inside = np.isin(test.labels, in_labels)
    if not inside.any() or inside.all():
        raise ValueError("Test set must contain both in-label and out-of-label samples")
    scores = max_logits(model, test.features)
    return ConfidenceReport(
        in_labels=in_labels,
        n_in=int(inside.sum()),
        n_out=int((~inside).sum()),
        median_in=float(np.median(scores[inside])),
        median_out=float(np.median(scores[~inside])),
        in_label_accuracy=evaluate_accuracy(model, test.subset(np.flatnonzero(inside))),
    )


def run_confidence_study(train_set: Dataset, test_set: Dataset, in_labels: Sequence[int] = Config.CONFIDENCE_LABELS,
                         cfg: Optional[TrainConfig] = None, hidden_width: int = Config.HIDDEN_WIDTH, depth: int = 1,
                         activation=Activation.RELU) -> Tuple[ConfidenceReport, ModelWeights]:
    """Train on a label subset and compare confidence on seen vs unseen labels."""
    cfg = cfg or TrainConfig.mnist()
    plan = partition_by_label_sets(train_set, [in_labels])
    client = plan.client_datasets(train_set)[0]
    architecture = mlp_architecture(train_set.input_width, hidden_width, depth, train_set.num_classes)
    model = train(client, architecture, cfg, activation)
    report = confidence_report(model, test_set, in_labels)
    get_logger().info(f"labels {report.in_labels}: median max-logit in {report.median_in:.2f} "
                      f"out {report.median_out:.2f} (gap {report.gap:.2f})")
    return report, model
