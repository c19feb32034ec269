"""Two-class 2D data for the neuron-disturbing demo.

Samples live in the band between x2 = |x1| - 1 and x2 = |x1| + 1 for
x1 in [-2, 2]. The labelling boundary is x2 = |x1| (x2 = -x1 on the left,
x2 = x1 on the right): points strictly above it are class 1. The left client
only sees x1 <= 0.5, the right one only x1 >= -0.5.
"""
import csv
import os
from typing import Tuple

import numpy as np

from src.data.dataset import Dataset, Role
from src.error_handling.error_handling import ContractViolation

X1_LIMIT = 2.0
SIDE_BOUNDS = {
    "left": (-X1_LIMIT, 0.5),
    "right": (-0.5, X1_LIMIT),
}


def in_region(x1, x2) -> np.ndarray:
    x1 = np.asarray(x1)
    x2 = np.asarray(x2)
    return (np.abs(x1) <= X1_LIMIT) & (x2 >= np.abs(x1) - 1.0) & (x2 <= np.abs(x1) + 1.0)


def diamond_label(x1, x2) -> np.ndarray:
    return (np.asarray(x2) > np.abs(np.asarray(x1))).astype(np.int64)


def _rejection_sample(rng: np.random.Generator, n: int, lo: float, hi: float) -> np.ndarray:
    accepted = np.empty((0, 2))
    while accepted.shape[0] < n:
        batch = 2 * (n - accepted.shape[0]) + 16
        x1 = rng.uniform(lo, hi, size=batch)
        x2 = rng.uniform(-1.0, X1_LIMIT + 1.0, size=batch)
        keep = in_region(x1, x2)
        accepted = np.vstack([accepted, np.column_stack([x1[keep], x2[keep]])])
    return accepted[:n]


def gen_diamond2d(side: str, n_train: int, n_test: int, seed) -> Tuple[Dataset, Dataset]:
    if side not in SIDE_BOUNDS:
        raise ContractViolation(f"side must be one of {sorted(SIDE_BOUNDS)}, got {side!r}")
    if n_train <= 0 or n_test <= 0:
        raise ContractViolation("Sample counts must be positive")

    rng = np.random.default_rng(seed)
    lo, hi = SIDE_BOUNDS[side]
    points = _rejection_sample(rng, n_train + n_test, lo, hi)
    labels = diamond_label(points[:, 0], points[:, 1])

    train = Dataset(points[:n_train], labels[:n_train], 2, Role.TRAIN)
    test = Dataset(points[n_train:], labels[n_train:], 2, Role.TEST)
    return train, test


def export_dataset_csv(ds: Dataset, path: str) -> str:
    if ds.input_width != 2:
        raise ContractViolation(f"CSV export covers 2D datasets only, got width {ds.input_width}")
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["x1", "x2", "label"])
        for (x1, x2), label in zip(ds.features, ds.labels):
            writer.writerow([repr(float(x1)), repr(float(x2)), int(label)])
    return path
