from typing import List, Optional, Sequence

import numpy as np

from src.data.dataset import Dataset, PartitionPlan
from src.error_handling.error_handling import ConfigurationError, PartitionError
from src.logging.logger import get_logger
from src.util.config import Config

HETERO_LABEL = "hetero_label"
HETERO_DIR = "hetero_dir"
LABEL_SETS = "label_sets"
MIN_LABELS, MAX_LABELS = 3, 6


def _label_counts(ds: Dataset, client_indices: Sequence[np.ndarray]) -> np.ndarray:
    return np.stack([np.bincount(ds.labels[idx], minlength=ds.num_classes) for idx in client_indices])


def largest_remainder(proportions: np.ndarray, total: int) -> np.ndarray:
    """Integer counts summing to ``total`` that track ``proportions`` within one unit each."""
    proportions = np.asarray(proportions, dtype=np.float64)
    proportions = proportions / proportions.sum()
    raw = proportions * total
    counts = np.floor(raw).astype(np.int64)
    short = int(np.clip(total - counts.sum(), 0, len(counts)))
    order = np.argsort(-(raw - counts), kind="stable")
    counts[order[:short]] += 1
    return counts


def _draw_dirichlet(rng: np.random.Generator, alpha: float, num_clients: int) -> np.ndarray:
    p = rng.dirichlet(np.full(num_clients, alpha))
    if not np.all(np.isfinite(p)) or p.sum() <= 0:
        # every gamma underflowed; the limit of Dir(alpha -> 0) is a random vertex
        p = np.zeros(num_clients)
        p[rng.integers(num_clients)] = 1.0
    return p


def _assign_label_sets(ds: Dataset, label_sets: Sequence[Sequence[int]], disjoint: bool,
                       rng: np.random.Generator) -> List[np.ndarray]:
    by_label = {k: np.flatnonzero(ds.labels == k) for k in range(ds.num_classes)}
    parts: List[List[np.ndarray]] = [[] for _ in label_sets]
    if disjoint:
        for k, members in by_label.items():
            holders = [j for j, labels in enumerate(label_sets) if k in labels]
            if not holders:
                continue
            for j, chunk in zip(holders, np.array_split(rng.permutation(members), len(holders))):
                parts[j].append(chunk)
    else:
        for j, labels in enumerate(label_sets):
            parts[j].extend(by_label[k] for k in labels)
    return [np.sort(np.concatenate(p)) if p else np.empty(0, dtype=np.int64) for p in parts]


def partition_by_label_sets(ds: Dataset, label_sets: Sequence[Sequence[int]], disjoint: bool = False,
                            seed=None) -> PartitionPlan:
    label_sets = [sorted(int(k) for k in labels) for labels in label_sets]
    client_indices = _assign_label_sets(ds, label_sets, disjoint, np.random.default_rng(seed))
    empty = [j for j, idx in enumerate(client_indices) if len(idx) == 0]
    if empty:
        raise PartitionError(f"Clients {empty} received no samples for their label sets",
                             details={"clients": empty})
    return PartitionPlan(client_indices=client_indices, strategy=LABEL_SETS,
                         label_counts=_label_counts(ds, client_indices), labels_per_client=label_sets,
                         metadata={"disjoint": disjoint})


def partition_hetero_label(ds: Dataset, num_clients: int, seed, disjoint: bool = False,
                           max_retries: Optional[int] = None) -> PartitionPlan:
    """Each client holds every sample of a random 3 to 6 label subset.

    Label sets are redrawn as a whole until every label present in ``ds`` is
    held by at least one client.
    """
    present = np.unique(ds.labels)
    if num_clients < 2:
        raise ConfigurationError(f"hetero_label needs at least 2 clients, got {num_clients}")
    if len(present) < MAX_LABELS:
        raise ConfigurationError(f"hetero_label needs at least {MAX_LABELS} classes, got {len(present)}")
    max_retries = max_retries or Config.PARTITION_MAX_RETRIES

    rng = np.random.default_rng(seed)
    for attempt in range(1, max_retries + 1):
        sizes = rng.integers(MIN_LABELS, MAX_LABELS + 1, size=num_clients)
        label_sets = [sorted(int(k) for k in rng.choice(present, size=s, replace=False)) for s in sizes]
        if set().union(*label_sets) == set(present.tolist()):
            break
    else:
        raise PartitionError(f"No label assignment covering all labels after {max_retries} draws",
                             details={"clients": num_clients, "seed": seed})

    client_indices = _assign_label_sets(ds, label_sets, disjoint, rng)
    empty = [j for j, idx in enumerate(client_indices) if len(idx) == 0]
    if empty:
        raise PartitionError(f"Clients {empty} received no samples", details={"clients": empty})

    plan = PartitionPlan(client_indices=client_indices, strategy=HETERO_LABEL,
                         label_counts=_label_counts(ds, client_indices), labels_per_client=label_sets,
                         attempts=attempt, metadata={"disjoint": disjoint})
    get_logger().info(f"Partitioned {len(ds)} samples: {plan.describe()}")
    return plan


def partition_hetero_dir(ds: Dataset, num_clients: int, alpha: float, seed,
                         max_retries: Optional[int] = None) -> PartitionPlan:
    """Per class k, split the shuffled class-k samples by p_k ~ Dir(alpha) across clients.

    The whole assignment round is redrawn while any client ends up empty.
    """
    if alpha <= 0:
        raise ConfigurationError(f"alpha must be positive, got {alpha}")
    if num_clients < 2:
        raise ConfigurationError(f"hetero_dir needs at least 2 clients, got {num_clients}")
    max_retries = max_retries or Config.PARTITION_MAX_RETRIES

    rng = np.random.default_rng(seed)
    for attempt in range(1, max_retries + 1):
        parts: List[List[np.ndarray]] = [[] for _ in range(num_clients)]
        proportions = np.zeros((ds.num_classes, num_clients))
        for k in range(ds.num_classes):
            members = np.flatnonzero(ds.labels == k)
            if len(members) == 0:
                continue
            members = rng.permutation(members)
            proportions[k] = _draw_dirichlet(rng, alpha, num_clients)
            counts = largest_remainder(proportions[k], len(members))
            for j, chunk in enumerate(np.split(members, np.cumsum(counts)[:-1])):
                parts[j].append(chunk)
        client_indices = [np.sort(np.concatenate(p)) for p in parts]
        if all(len(idx) > 0 for idx in client_indices):
            break
    else:
        raise PartitionError(f"Some client stayed empty after {max_retries} Dirichlet rounds",
                             details={"clients": num_clients, "alpha": alpha, "seed": seed})

    plan = PartitionPlan(client_indices=client_indices, strategy=HETERO_DIR,
                         label_counts=_label_counts(ds, client_indices), alpha=alpha,
                         proportions=proportions, attempts=attempt)
    get_logger().info(f"Partitioned {len(ds)} samples: {plan.describe()}")
    return plan
