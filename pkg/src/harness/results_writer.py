"""CSV / JSONL writers for trial records, demo outcomes and disturbing matrices."""
import csv
import json
import os
import re
from typing import Iterable, List, Sequence

import numpy as np

from src.data.dataset import Dataset
from src.error_handling.error_handling import ErrorCode, IngestionError
from src.fusion.block import disturbing_matrix
from src.fusion.methods import FusedPredictor
from src.fusion.selection import routing_histogram
from src.harness.demo2d import DemoRecord
from src.harness.experiment import ResultRecord
from src.nn.model import ModelWeights
from src.util.config import Config

CSV_HEADER = ["dataset", "partition", "alpha", "clients", "depth", "method", "trial", "seed", "accuracy", "wall_ms"]
DEMO_HEADER = ["seed", "acc_left", "acc_right", "acc_global", "outcome"]
DISTURBING_HEADER = ["sample_id", "c", "j", "logit"]
ROUTING_HEADER = ["client", "samples"]


def _ensure_parent(path: str):
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)


def _csv_row(record: ResultRecord) -> dict:
    row = record.to_dict()
    row["alpha"] = "" if record.alpha is None else repr(record.alpha)
    row["accuracy"] = repr(record.accuracy)
    row["wall_ms"] = f"{record.wall_ms:.3f}"
    return row


def write_records_csv(records: Iterable[ResultRecord], path: str) -> str:
    _ensure_parent(path)
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=CSV_HEADER)
        writer.writeheader()
        for record in records:
            writer.writerow(_csv_row(record))
    return path


def write_records_jsonl(records: Iterable[ResultRecord], path: str) -> str:
    _ensure_parent(path)
    with open(path, "w") as f:
        for record in records:
            f.write(json.dumps(record.to_dict()) + "\n")
    return path


def read_records_csv(path: str) -> List[ResultRecord]:
    if not os.path.exists(path):
        raise IngestionError(f"Results file not found: {path}", code=ErrorCode.FILE_NOT_FOUND)
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        missing = set(CSV_HEADER) - set(reader.fieldnames or [])
        if missing:
            raise IngestionError(f"{path} is missing columns: {', '.join(sorted(missing))}")
        return [
            ResultRecord(
                dataset=row["dataset"],
                partition=row["partition"],
                alpha=float(row["alpha"]) if row["alpha"] else None,
                clients=int(row["clients"]),
                depth=row["depth"],
                method=row["method"],
                trial=int(row["trial"]),
                seed=int(row["seed"]),
                accuracy=float(row["accuracy"]),
                wall_ms=float(row["wall_ms"]),
            )
            for row in reader
        ]


def write_demo_csv(records: Iterable[DemoRecord], path: str) -> str:
    _ensure_parent(path)
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=DEMO_HEADER)
        writer.writeheader()
        for record in records:
            writer.writerow(record.to_dict())
    return path


def export_disturbing_matrices(models: Sequence[ModelWeights], X: np.ndarray, path: str) -> str:
    """One row per (sample, class, client) entry of the disturbing matrix."""
    M = disturbing_matrix(models, np.asarray(X, dtype=np.float64).reshape(len(X), -1))
    _ensure_parent(path)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(DISTURBING_HEADER)
        for sample_id, c, j in np.ndindex(*M.shape):
            writer.writerow([sample_id, c, j, repr(float(M[sample_id, c, j]))])
    return path


def write_routing_csv(counts: Sequence[int], path: str) -> str:
    _ensure_parent(path)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(ROUTING_HEADER)
        for client, samples in enumerate(counts):
            writer.writerow([client, int(samples)])
    return path


class TrialExporter:
    """Per-trial artifacts: fused weights for every method, a disturbing-matrix
    sample of the test set and the number of test samples routed to each client."""

    def __init__(self, export_dir: str, samples: int = Config.EXPORT_SAMPLES):
        self.export_dir = export_dir
        self.samples = samples

    def trial_dir(self, cfg, trial: int) -> str:
        name = f"{cfg.dataset}_{cfg.partition}"
        if cfg.alpha is not None:
            name += f"_alpha{cfg.alpha:g}"
        return os.path.join(self.export_dir, f"{name}_J{cfg.clients}_depth{cfg.depth_label}", f"trial{trial}")

    def __call__(self, cfg, trial: int, models: Sequence[ModelWeights], predictors: Sequence[FusedPredictor],
                 test_set: Dataset) -> List[str]:
        trial_dir = self.trial_dir(cfg, trial)
        paths = [p.save(os.path.join(trial_dir, re.sub(r"\W+", "_", str(p.method)).strip("_") + ".bin"))
                 for p in predictors]
        paths.append(export_disturbing_matrices(models, test_set.features[:self.samples],
                                                os.path.join(trial_dir, "disturbing.csv")))
        paths.append(write_routing_csv(routing_histogram(models, test_set.features),
                                       os.path.join(trial_dir, "routing.csv")))
        return paths
