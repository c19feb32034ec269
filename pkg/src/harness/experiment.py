import hashlib
import os
import time
import uuid
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.data.dataset import Dataset, PartitionPlan
from src.data.mnist import load_mnist_split
from src.data.partition import HETERO_DIR, HETERO_LABEL, partition_hetero_dir, partition_hetero_label
from src.data.synthetic import gen_diamond2d
from src.error_handling.error_handling import (ConfigurationError, ContractViolation, ErrorCode, ErrorManager,
                                               ErrorSeverity)
from src.fusion.methods import FusionMethod, MethodKind, build_predictor
from src.fusion.selection import logit_scale_stats
from src.logging.logger import setup_logger
from src.nn.model import Activation, ModelWeights
from src.nn.serialization import dumps_model
from src.nn.trainer import TrainConfig, evaluate_accuracy, init_model, mlp_architecture, train
from src.util.config import Config
from src.util.validator import Bounded, ConfigSchema, OneOf, Present, Satisfies

DIAMOND2D = "diamond2d"
MNIST = "mnist"
MAX_CROSS_DEPTH = 5
TRAIN_KEYS = ("learning_rate", "decay_factor", "decay_period_epochs", "batch_size", "epochs", "l1_coefficient")
DEFAULT_METHODS = "ensemble_uniform,fedavg,ams_full,ams_top1"

EXPERIMENT_SCHEMA = ConfigSchema("experiment", {
    "dataset": [Present(), OneOf([DIAMOND2D, MNIST])],
    "partition": [Present(), OneOf([HETERO_LABEL, HETERO_DIR])],
    "alpha": [Bounded(low=0, open_low=True)],
    "clients": [Present(), Bounded(low=2)],
    "depth": [Present(), Bounded(low=1)],
    "depth_range": [Satisfies(lambda r: 1 <= r[0] <= r[1] <= MAX_CROSS_DEPTH,
                              "{name} must lie within [1, 5] with lo <= hi, got {value}")],
    "methods": [Present(), Satisfies(len, "{name} must list at least one method")],
    "trials": [Present(), Bounded(low=1)],
    "base_seed": [Present(), Bounded(low=0)],
    "hidden_width": [Present(), Bounded(low=1)],
    "activation": [OneOf([a.value for a in Activation])],
    "fedavg_weighting": [OneOf(["uniform", "sample_count"])],
})


def _parse_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigurationError(f"Not a boolean: {value!r}")


def _parse_depth_range(value: str) -> Optional[Tuple[int, int]]:
    value = value.strip()
    if not value or value.lower() == "none":
        return None
    lo, _, hi = value.replace(",", "-").partition("-")
    return int(lo), int(hi or lo)


def _parse_alpha(value: str) -> Optional[float]:
    return None if value.strip().lower() in ("", "none") else float(value)


_PARSERS = {
    "dataset": str.strip,
    "partition": str.strip,
    "alpha": _parse_alpha,
    "clients": int,
    "depth": int,
    "depth_range": _parse_depth_range,
    "methods": lambda v: tuple(FusionMethod.parse_list(v)),
    "trials": int,
    "base_seed": int,
    "shared_init": _parse_bool,
    "hidden_width": int,
    "activation": lambda v: Activation(v.strip()),
    "fedavg_weighting": str.strip,
    "disjoint_labels": _parse_bool,
    "learning_rate": float,
    "decay_factor": float,
    "decay_period_epochs": int,
    "batch_size": int,
    "epochs": int,
    "l1_coefficient": float,
}


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str = MNIST
    partition: str = HETERO_DIR
    alpha: Optional[float] = 0.5
    clients: int = 5
    depth: int = 1
    depth_range: Optional[Tuple[int, int]] = None
    methods: Tuple[FusionMethod, ...] = field(default_factory=lambda: tuple(FusionMethod.parse_list(DEFAULT_METHODS)))
    trials: int = 5
    base_seed: int = 0
    train: TrainConfig = field(default_factory=TrainConfig.mnist)
    shared_init: bool = True
    hidden_width: int = Config.HIDDEN_WIDTH
    activation: Activation = Activation.RELU
    fedavg_weighting: str = "uniform"
    disjoint_labels: bool = False

    def __post_init__(self):
        self.validate()

    @property
    def cross_architecture(self) -> bool:
        return self.depth_range is not None and self.depth_range[0] != self.depth_range[1]

    @property
    def depth_label(self) -> str:
        if self.depth_range is None:
            return str(self.depth)
        lo, hi = self.depth_range
        return str(lo) if lo == hi else f"{lo}-{hi}"

    def client_depths(self) -> List[int]:
        if self.depth_range is None:
            return [self.depth] * self.clients
        lo, hi = self.depth_range
        return [lo + (j % (hi - lo + 1)) for j in range(self.clients)]

    def trial_seed(self, trial: int) -> int:
        return self.base_seed + Config.TRIAL_SEED_STRIDE * trial

    def validate(self):
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data["activation"] = Activation(self.activation).value
        errors = []

        if self.partition == HETERO_DIR and self.alpha is None:
            errors.append("alpha is required for hetero_dir partitions")
        if self.dataset == DIAMOND2D and self.partition == HETERO_LABEL:
            errors.append("hetero_label needs at least 6 classes; diamond2d has 2")
        for method in self.methods:
            if method.needs_same_depth and self.cross_architecture:
                errors.append(f"Method {method} needs clients of one depth, depth_range is {self.depth_label}")
            if method.needs_shared_init and not self.shared_init:
                errors.append(f"Method {method} needs shared_init = true")
            if method.kind == MethodKind.AMS_TOPK and not (method.k and 1 <= method.k <= self.clients):
                errors.append(f"Method {method} needs 1 <= k <= clients ({self.clients})")
        EXPERIMENT_SCHEMA.enforce(data, errors)

    @classmethod
    def from_mapping(cls, mapping: Dict[str, str]) -> "ExperimentConfig":
        unknown = sorted(set(mapping) - set(_PARSERS))
        if unknown:
            raise ConfigurationError(f"Unknown config keys: {', '.join(unknown)}")
        try:
            parsed = {key: _PARSERS[key](value) for key, value in mapping.items()}
        except (ValueError, TypeError) as e:
            raise ConfigurationError(f"Unparseable config value: {e}")

        dataset = parsed.get("dataset", MNIST)
        recipe = dict(Config.DEMO_TRAIN if dataset == DIAMOND2D else Config.MNIST_TRAIN)
        recipe.update({key: parsed.pop(key) for key in TRAIN_KEYS if key in parsed})
        base_seed = parsed.get("base_seed", 0)
        parsed["train"] = TrainConfig(seed=base_seed, **recipe)
        if parsed.get("partition") == HETERO_LABEL and "alpha" not in parsed:
            parsed["alpha"] = None
        return cls(**parsed)

    @classmethod
    def from_file(cls, path: str) -> "ExperimentConfig":
        if not os.path.exists(path):
            raise ConfigurationError(f"Config file not found: {path}", code=ErrorCode.INVALID_CONFIGURATION)
        mapping = {}
        with open(path) as f:
            for lineno, line in enumerate(f, start=1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                key, sep, value = line.partition("=")
                if not sep:
                    raise ConfigurationError(f"{path}:{lineno}: expected 'key = value'")
                mapping[key.strip()] = value.strip()
        return cls.from_mapping(mapping)

    def to_mapping(self) -> Dict[str, str]:
        mapping = {
            "dataset": self.dataset,
            "partition": self.partition,
            "alpha": "none" if self.alpha is None else repr(self.alpha),
            "clients": str(self.clients),
            "depth": str(self.depth),
            "depth_range": "none" if self.depth_range is None else f"{self.depth_range[0]}-{self.depth_range[1]}",
            "methods": ",".join(str(m) for m in self.methods),
            "trials": str(self.trials),
            "base_seed": str(self.base_seed),
            "shared_init": str(self.shared_init).lower(),
            "hidden_width": str(self.hidden_width),
            "activation": Activation(self.activation).value,
            "fedavg_weighting": self.fedavg_weighting,
            "disjoint_labels": str(self.disjoint_labels).lower(),
        }
        mapping.update({key: repr(getattr(self.train, key)) for key in TRAIN_KEYS})
        return mapping


@dataclass(frozen=True)
class ResultRecord:
    dataset: str
    partition: str
    alpha: Optional[float]
    clients: int
    depth: str
    method: str
    trial: int
    seed: int
    accuracy: float
    wall_ms: float

    def __post_init__(self):
        if not 0.0 <= self.accuracy <= 1.0:
            raise ContractViolation(f"Accuracy {self.accuracy} outside [0, 1]")

    @property
    def setting(self) -> Tuple:
        return (self.dataset, self.partition, self.alpha, self.clients, self.depth)

    def to_dict(self) -> Dict:
        return asdict(self)


def _fingerprint(plan: PartitionPlan, models: Sequence[ModelWeights]) -> str:
    digest = hashlib.sha256(plan.to_bytes())
    for model in models:
        digest.update(dumps_model(model))
    return digest.hexdigest()


class ExperimentRunner:
    def __init__(self, db_manager=None, data_dir=None, max_workers=None,
                 datasets: Optional[Dict[str, Tuple[Dataset, Dataset]]] = None, trial_exporter=None):
        self.logger = setup_logger()
        self.db_manager = db_manager
        self.error_manager = ErrorManager(logger=self.logger, db_manager=db_manager)
        self.data_dir = data_dir or Config.DATA_DIR
        self.max_workers = max_workers or Config.MAX_WORKERS
        self._datasets = dict(datasets or {})
        self.trial_exporter = trial_exporter
        self.run_id = str(uuid.uuid4())

    def load_datasets(self, cfg: ExperimentConfig) -> Tuple[Dataset, Dataset]:
        if cfg.dataset not in self._datasets:
            if cfg.dataset == MNIST:
                self._datasets[MNIST] = load_mnist_split(self.data_dir)
            else:
                left_train, left_test = gen_diamond2d("left", Config.DEMO_N_TRAIN, Config.DEMO_N_TEST, [cfg.base_seed, 0])
                right_train, right_test = gen_diamond2d("right", Config.DEMO_N_TRAIN, Config.DEMO_N_TEST, [cfg.base_seed, 1])
                self._datasets[DIAMOND2D] = (Dataset.merge(left_train, right_train), Dataset.merge(left_test, right_test))
        return self._datasets[cfg.dataset]

    def partition(self, cfg: ExperimentConfig, train_set: Dataset, seed: int) -> PartitionPlan:
        if cfg.partition == HETERO_LABEL:
            return partition_hetero_label(train_set, cfg.clients, seed, disjoint=cfg.disjoint_labels)
        return partition_hetero_dir(train_set, cfg.clients, cfg.alpha, seed)

    def client_architectures(self, cfg: ExperimentConfig, train_set: Dataset) -> List[List[int]]:
        return [mlp_architecture(train_set.input_width, cfg.hidden_width, depth, train_set.num_classes)
                for depth in cfg.client_depths()]

    def train_clients(self, cfg: ExperimentConfig, client_sets: List[Dataset], architectures: List[List[int]],
                      trial_seed: int) -> List[ModelWeights]:
        shared = {}
        if cfg.shared_init:
            for arch in architectures:
                key = tuple(arch)
                if key not in shared:
                    shared[key] = init_model(arch, cfg.activation, np.random.default_rng([trial_seed, len(arch)]))

        def fit(j):
            train_cfg = replace(cfg.train, seed=trial_seed + j + 1)
            return train(client_sets[j], architectures[j], train_cfg, cfg.activation,
                         init=shared.get(tuple(architectures[j])))

        models: List[Optional[ModelWeights]] = [None] * len(client_sets)
        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            futures = {executor.submit(fit, j): j for j in range(len(client_sets))}
            for future in as_completed(futures):
                j = futures[future]
                models[j] = future.result()
                self.logger.info(f"Client {j} trained on {len(client_sets[j])} samples "
                                 f"(depth {len(architectures[j]) - 2})")
        return models

    def run_trial(self, cfg: ExperimentConfig, trial: int, train_set: Dataset, test_set: Dataset) -> List[ResultRecord]:
        seed = cfg.trial_seed(trial)
        self.logger.info(f"Trial {trial + 1}/{cfg.trials} seed={seed}: {cfg.dataset} {cfg.partition} "
                         f"J={cfg.clients} depth={cfg.depth_label}")
        plan = self.partition(cfg, train_set, seed)
        client_sets = plan.client_datasets(train_set)
        models = self.train_clients(cfg, client_sets, self.client_architectures(cfg, train_set), seed)
        fingerprint = _fingerprint(plan, models)
        if cfg.cross_architecture:
            for stats in logit_scale_stats(models, test_set.features):
                self.logger.info(f"Client {stats['model']} depth {stats['depth']}: max-logit mean {stats['mean']:.2f} "
                                 f"std {stats['std']:.2f}")

        records, predictors = [], []
        for method in cfg.methods:
            start = time.perf_counter()
            predictor = build_predictor(method, models, plan.client_sizes(),
                                        uniform_fedavg=cfg.fedavg_weighting == "uniform")
            predictors.append(predictor)
            accuracy = evaluate_accuracy(predictor, test_set)
            wall_ms = (time.perf_counter() - start) * 1000.0
            if _fingerprint(plan, models) != fingerprint:
                raise ContractViolation(f"Models or partition changed while evaluating {method}",
                                        code=ErrorCode.CHECKSUM_MISMATCH)
            self.logger.info(f"Trial {trial} {method}: accuracy {accuracy:.4f}")
            records.append(ResultRecord(cfg.dataset, cfg.partition, cfg.alpha, cfg.clients, cfg.depth_label,
                                        str(method), trial, seed, accuracy, wall_ms))

        if self.trial_exporter is not None:
            paths = self.trial_exporter(cfg, trial, models, predictors, test_set)
            self.logger.info(f"Trial {trial}: exported {len(paths)} artifacts to {os.path.dirname(paths[-1])}")
        return records

    def run_experiment(self, cfg: ExperimentConfig) -> List[ResultRecord]:
        cfg.validate()
        train_set, test_set = self.load_datasets(cfg)
        records = []
        for trial in range(cfg.trials):
            try:
                trial_records = self.run_trial(cfg, trial, train_set, test_set)
            except Exception as e:
                self.error_manager.record_exception(e, component="ExperimentRunner.run_trial",
                                                    severity=ErrorSeverity.ERROR,
                                                    record_id=f"{self.run_id}:{trial}")
                raise
            if self.db_manager:
                self.db_manager.insert_results(trial_records, self.run_id)
            records.extend(trial_records)
        return records

    def run_alpha_sweep(self, cfg: ExperimentConfig, alphas: Iterable[float]) -> List[ResultRecord]:
        alphas = [float(a) for a in alphas]
        if not alphas or any(a <= 0 for a in alphas):
            raise ConfigurationError(f"Sweep alphas must be positive, got {alphas}")
        if alphas != sorted(alphas):
            raise ConfigurationError(f"Sweep alphas must be sorted ascending, got {alphas}")
        records = []
        for alpha in alphas:
            self.logger.info(f"Sweep point alpha={alpha:g}")
            records.extend(self.run_experiment(replace(cfg, partition=HETERO_DIR, alpha=alpha)))
        return records

    def close(self):
        if self.db_manager:
            self.db_manager.close()


def run_experiment(cfg: ExperimentConfig, **runner_kwargs) -> List[ResultRecord]:
    return ExperimentRunner(**runner_kwargs).run_experiment(cfg)


def run_alpha_sweep(cfg: ExperimentConfig, alphas: Iterable[float], **runner_kwargs) -> List[ResultRecord]:
    return ExperimentRunner(**runner_kwargs).run_alpha_sweep(cfg, alphas)
