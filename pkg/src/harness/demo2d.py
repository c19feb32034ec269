"""Neuron-disturbing demo on the 2D band data.

Per seed: two one-neuron nets are trained on the left and right halves, fused
by concatenation, and all three are scored on the merged test set.
"""
from dataclasses import dataclass, asdict
from typing import Dict, Iterable, List, Optional

from src.data.dataset import Dataset
from src.data.synthetic import gen_diamond2d
from src.error_handling.error_handling import ErrorManager, ErrorSeverity, TrainingError
from src.fusion.baselines import fuse_concat_toy
from src.logging.logger import get_logger
from src.nn.model import Activation
from src.nn.trainer import TrainConfig, evaluate_accuracy, mlp_architecture, train
from src.util.config import Config

SUCCESS = "success"
FAIL = "fail"
NEUTRAL = "neutral"


@dataclass(frozen=True)
class DemoRecord:
    seed: int
    acc_left: float
    acc_right: float
    acc_global: float
    outcome: str

    def to_dict(self) -> Dict:
        return asdict(self)


def classify_outcome(acc_left: float, acc_right: float, acc_global: float) -> str:
    if acc_global >= Config.DEMO_SUCCESS_ACCURACY:
        return SUCCESS
    if acc_global < min(acc_left, acc_right):
        return FAIL
    return NEUTRAL


def run_demo_seed(seed: int, activation=Activation.RELU) -> DemoRecord:
    left_train, left_test = gen_diamond2d("left", Config.DEMO_N_TRAIN, Config.DEMO_N_TEST, [seed, 0])
    right_train, right_test = gen_diamond2d("right", Config.DEMO_N_TRAIN, Config.DEMO_N_TEST, [seed, 1])
    merged_test = Dataset.merge(left_test, right_test)

    architecture = mlp_architecture(2, Config.DEMO_HIDDEN_WIDTH, 1, 2)
    left = train(left_train, architecture, TrainConfig.demo2d(seed=2 * seed), activation)
    right = train(right_train, architecture, TrainConfig.demo2d(seed=2 * seed + 1), activation)
    fused = fuse_concat_toy(left, right)

    acc_left = evaluate_accuracy(left, merged_test)
    acc_right = evaluate_accuracy(right, merged_test)
    acc_global = evaluate_accuracy(fused, merged_test)
    return DemoRecord(seed, acc_left, acc_right, acc_global, classify_outcome(acc_left, acc_right, acc_global))


def run_demo2d(seeds: Iterable[int], activation=Activation.RELU, db_manager=None, run_id: Optional[str] = None,
               error_manager: Optional[ErrorManager] = None) -> List[DemoRecord]:
    logger = get_logger()
    seeds = list(seeds)
    if not seeds:
        raise ValueError("run_demo2d needs at least one seed")
    error_manager = error_manager or ErrorManager(logger=logger, db_manager=db_manager)

    records = []
    for seed in seeds:
        try:
            record = run_demo_seed(seed, activation)
        except TrainingError as e:
            error_manager.record_exception(e, component="demo2d", severity=ErrorSeverity.WARNING,
                                           record_id=f"seed={seed}")
            logger.warning(f"Seed {seed} skipped: {e.message}")
            continue
        logger.info(f"seed {seed}: left {record.acc_left:.2%} right {record.acc_right:.2%} "
                    f"global {record.acc_global:.2%} -> {record.outcome}")
        if db_manager:
            db_manager.insert_demo_result(record, run_id)
        records.append(record)
    return records


def demo_summary(records: List[DemoRecord]) -> Dict[str, float]:
    total = len(records)
    counts = {outcome: sum(1 for r in records if r.outcome == outcome) for outcome in (SUCCESS, FAIL, NEUTRAL)}
    return {
        "seeds": total,
        **counts,
        "success_rate": counts[SUCCESS] / total if total else 0.0,
        "fail_rate": counts[FAIL] / total if total else 0.0,
    }
