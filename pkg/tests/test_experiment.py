import os
from collections import defaultdict
from dataclasses import replace

import numpy as np
import pytest

from src.data.mnist import load_mnist_split, mnist_available
from src.data.partition import HETERO_DIR, HETERO_LABEL
from src.error_handling.error_handling import ConfigurationError, PartitionError
from src.fusion.methods import FusionMethod
from src.harness.experiment import DIAMOND2D, MNIST, ExperimentConfig, ExperimentRunner, ResultRecord
from src.util.config import Config

QUICK = {
    "hidden_width": "8",
    "epochs": "15",
    "batch_size": "32",
    "learning_rate": "0.05",
    "decay_factor": "1.0",
    "decay_period_epochs": "1",
    "l1_coefficient": "0",
}


def quick_config(**overrides):
    mapping = dict(QUICK)
    mapping.update({key: str(value) for key, value in overrides.items()})
    return ExperimentConfig.from_mapping(mapping)


@pytest.fixture
def blob_runner(make_blobs):
    train = make_blobs(n_per_class=30, num_classes=10, spread=0.2, width=4)
    test = make_blobs(n_per_class=10, num_classes=10, spread=0.2, width=4)
    return ExperimentRunner(max_workers=2, datasets={MNIST: (train, test)})


def without_wall_time(records):
    return [replace(r, wall_ms=0.0) for r in records]


def test_diamond_hetero_dir_run():
    cfg = quick_config(dataset=DIAMOND2D, partition=HETERO_DIR, alpha=0.5, clients=3, trials=2,
                       methods="ensemble_uniform,fedavg,ams_full,ams_top1,concat_direct")
    records = ExperimentRunner(max_workers=2).run_experiment(cfg)
    assert len(records) == 2 * 5
    assert {r.method for r in records} == {"ensemble_uniform", "fedavg", "ams_full", "ams_top1", "concat_direct"}
    assert all(0.0 <= r.accuracy <= 1.0 and r.wall_ms >= 0 for r in records)
    assert [r.seed for r in records if r.method == "fedavg"] == [0, 1000]


def test_same_config_twice_is_deterministic(blob_runner):
    cfg = quick_config(partition=HETERO_LABEL, clients=4, trials=2, methods="ensemble_uniform,ams_top1,ams_topk(2)")
    first = blob_runner.run_experiment(cfg)
    second = blob_runner.run_experiment(cfg)
    assert without_wall_time(first) == without_wall_time(second)


def test_hetero_label_records_setting(blob_runner):
    cfg = quick_config(partition=HETERO_LABEL, clients=3, trials=1, methods="ams_top1")
    (record,) = blob_runner.run_experiment(cfg)
    assert record.setting == (MNIST, HETERO_LABEL, None, 3, "1")


def test_cross_architecture_run(blob_runner):
    cfg = quick_config(partition=HETERO_DIR, alpha=1.0, clients=5, depth_range="1-3", trials=1,
                       methods="ensemble_uniform,ams_cross")
    assert cfg.client_depths() == [1, 2, 3, 1, 2]
    records = blob_runner.run_experiment(cfg)
    assert [r.depth for r in records] == ["1-3", "1-3"]


def test_client_architectures(blob_runner, make_blobs):
    cfg = quick_config(partition=HETERO_DIR, alpha=1.0, clients=3, depth_range="2-3",
                       methods="ams_cross")
    archs = blob_runner.client_architectures(cfg, make_blobs(num_classes=10, width=4))
    assert archs == [[4, 8, 8, 10], [4, 8, 8, 8, 10], [4, 8, 8, 10]]


def test_alpha_sweep_record_count(blob_runner):
    cfg = quick_config(partition=HETERO_DIR, clients=3, trials=2, methods="ensemble_uniform,ams_top1")
    records = blob_runner.run_alpha_sweep(cfg, [0.1, 1.0, 1e6])
    assert len(records) == 3 * 2 * 2
    assert sorted({r.alpha for r in records}) == [0.1, 1.0, 1e6]


@pytest.mark.parametrize("alphas", [[1.0, 0.1], [], [0.0, 1.0]])
def test_alpha_sweep_rejects_bad_alphas(blob_runner, alphas):
    cfg = quick_config(partition=HETERO_DIR, clients=3, trials=1, methods="ams_top1")
    with pytest.raises(ConfigurationError):
        blob_runner.run_alpha_sweep(cfg, alphas)


def test_results_reach_database(make_blobs, db):
    train = make_blobs(n_per_class=20, num_classes=10, width=4)
    runner = ExperimentRunner(db_manager=db, max_workers=2, datasets={MNIST: (train, train)})
    cfg = quick_config(partition=HETERO_DIR, alpha=0.5, clients=2, trials=1, methods="ensemble_uniform,ams_full")
    records = runner.run_experiment(cfg)
    stored = db.get_results(runner.run_id)
    assert [row["method"] for row in stored] == [r.method for r in records]
    assert stored[0]["partition"] == HETERO_DIR


def test_failed_trial_is_recorded_and_raised(blob_runner, db, monkeypatch):
    runner = ExperimentRunner(db_manager=db, datasets=blob_runner._datasets)

    def broken(*args, **kwargs):
        raise PartitionError("no luck")

    monkeypatch.setattr(runner, "partition", broken)
    cfg = quick_config(partition=HETERO_DIR, clients=2, trials=1, methods="ams_top1")
    with pytest.raises(PartitionError):
        runner.run_experiment(cfg)
    assert runner.error_manager.get_errors()[0].component == "ExperimentRunner.run_trial"
    assert db.get_errors()[0][1] == "PARTITION_RETRIES_EXCEEDED"


@pytest.mark.parametrize("overrides,message", [
    ({"methods": "fedavg", "shared_init": "false"}, "shared_init"),
    ({"methods": "ams_top1", "depth_range": "1-5"}, "one depth"),
    ({"methods": "ams_topk(6)", "clients": 5}, "k <= clients"),
    ({"dataset": DIAMOND2D, "partition": HETERO_LABEL}, "6 classes"),
    ({"partition": HETERO_DIR, "alpha": "none"}, "alpha"),
    ({"clients": 1}, "clients"),
    ({"depth_range": "2-7", "methods": "ams_cross"}, "depth_range"),
])
def test_invalid_configs(overrides, message):
    with pytest.raises(ConfigurationError, match=message):
        quick_config(**overrides)


def test_unknown_key():
    with pytest.raises(ConfigurationError, match="Unknown"):
        ExperimentConfig.from_mapping({"dataset": "mnist", "learning_rte": "0.1"})


def test_diamond_defaults_to_demo_recipe():
    cfg = ExperimentConfig.from_mapping({"dataset": DIAMOND2D, "partition": HETERO_DIR, "methods": "ams_top1"})
    assert cfg.train.learning_rate == 0.5 and cfg.train.epochs == 600


def test_from_file(tmp_path):
    path = os.path.join(tmp_path, "run.cfg")
    with open(path, "w") as f:
        f.write("# heterogeneous labels\n"
                "dataset = mnist\n"
                "partition = hetero_label   # 3-6 labels each\n"
                "clients = 10\n"
                "methods = fedavg, ams_top1, ams_topk(3)\n"
                "\n"
                "epochs = 2\n")
    cfg = ExperimentConfig.from_file(path)
    assert cfg.clients == 10 and cfg.alpha is None
    assert [str(m) for m in cfg.methods] == ["fedavg", "ams_top1", "ams_topk(3)"]
    assert cfg.train.epochs == 2 and cfg.train.learning_rate == 0.001
    assert ExperimentConfig.from_mapping(cfg.to_mapping()) == cfg


def test_from_file_errors(tmp_path):
    with pytest.raises(ConfigurationError):
        ExperimentConfig.from_file(os.path.join(tmp_path, "missing.cfg"))
    path = os.path.join(tmp_path, "bad.cfg")
    with open(path, "w") as f:
        f.write("dataset mnist\n")
    with pytest.raises(ConfigurationError, match="key = value"):
        ExperimentConfig.from_file(path)


def test_trial_seeds():
    cfg = quick_config(base_seed=7, methods="ams_top1")
    assert [cfg.trial_seed(t) for t in range(3)] == [7, 1007, 2007]


def test_result_record_rejects_bad_accuracy():
    with pytest.raises(ValueError):
        ResultRecord(MNIST, HETERO_DIR, 0.5, 5, "1", str(FusionMethod.parse("ams_top1")), 0, 0, 1.5, 1.0)


CONFIG_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "configs")
needs_mnist = pytest.mark.skipif(not mnist_available(), reason="MNIST files not present under FUSELAB_DATA_DIR")


def mean_accuracy(records, **where):
    """Mean accuracy per method over the records matching every `where` field."""
    by_method = defaultdict(list)
    for r in records:
        if all(getattr(r, key) == value for key, value in where.items()):
            by_method[r.method].append(r.accuracy)
    return {method: float(np.mean(accs)) for method, accs in by_method.items()}


@pytest.fixture(scope="module")
def mnist_runner():
    return ExperimentRunner(datasets={MNIST: load_mnist_split()})


@pytest.mark.slow
@needs_mnist
def test_mnist_hetero_dir_ranking(mnist_runner):
    cfg = ExperimentConfig.from_file(os.path.join(CONFIG_DIR, "hetero_dir_mnist.cfg"))
    assert (cfg.alpha, cfg.clients, cfg.depth, cfg.trials) == (0.5, 5, 1, 5)
    means = mean_accuracy(mnist_runner.run_experiment(cfg))
    assert 0.85 <= means["ams_top1"] <= 0.97
    assert means["ams_top1"] >= means["ams_full"]
    assert means["ams_full"] >= means["fedavg"] - 0.03


@pytest.mark.slow
@needs_mnist
def test_mnist_hetero_label_ranking(mnist_runner):
    cfg = ExperimentConfig.from_file(os.path.join(CONFIG_DIR, "hetero_label_mnist.cfg"))
    assert (cfg.clients, cfg.depth, cfg.trials) == (10, 1, 5)
    means = mean_accuracy(mnist_runner.run_experiment(cfg))
    assert means["ams_top1"] >= means["fedavg"] + 0.10
    assert means["ams_top1"] > means["ensemble_uniform"]


@pytest.mark.slow
@needs_mnist
def test_mnist_alpha_sweep_extremes(mnist_runner):
    cfg = ExperimentConfig.from_file(os.path.join(CONFIG_DIR, "alpha_sweep_mnist.cfg"))
    records = mnist_runner.run_alpha_sweep(cfg, Config.SWEEP_ALPHAS)
    assert len(records) == len(Config.SWEEP_ALPHAS) * len(cfg.methods) * cfg.trials

    skewed = mean_accuracy(records, alpha=5e-4)
    assert skewed["ams_top1"] >= skewed["ensemble_uniform"] + 0.20
    near_iid = mean_accuracy(records, alpha=1e6)
    assert max(near_iid.values()) - min(near_iid.values()) <= 0.05
