import gzip
import os
import struct

import numpy as np
import pytest

from src.data.dataset import Dataset, Role
from src.db.db_manager import DBManager
from src.logging.logger import setup_logger
from src.nn.model import Activation, ModelWeights
from src.nn.trainer import init_model


@pytest.fixture(scope="session", autouse=True)
def _log_to_tmp(tmp_path_factory):
    # first caller wins, so later setup_logger() calls reuse these handlers
    setup_logger(str(tmp_path_factory.mktemp("logs")))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def identity_model():
    return ModelWeights.from_matrices([np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])])


def random_model(rng, architecture, activation=Activation.RELU, bias_scale=0.1):
    model = init_model(architecture, activation, rng)
    matrices = [np.array(W) for W in model.matrices()]
    for W in matrices:
        W[:, -1] = rng.normal(scale=bias_scale, size=W.shape[0])
    return ModelWeights.from_matrices(matrices, activation)


@pytest.fixture
def make_model(rng):
    def _make(architecture, activation=Activation.RELU):
        return random_model(rng, architecture, activation)
    return _make


def blobs(rng, n_per_class=40, num_classes=2, spread=0.3, width=2, role=Role.TRAIN):
    centers = np.array([[3.0 * np.cos(2 * np.pi * k / num_classes), 3.0 * np.sin(2 * np.pi * k / num_classes)]
                        for k in range(num_classes)])
    if width > 2:
        centers = np.hstack([centers, np.zeros((num_classes, width - 2))])
    X = np.vstack([c + spread * rng.normal(size=(n_per_class, width)) for c in centers])
    y = np.repeat(np.arange(num_classes), n_per_class)
    return Dataset(X, y, num_classes, role)


@pytest.fixture
def blob_data(rng):
    return blobs(rng)


@pytest.fixture
def ten_class_data(rng):
    """Small 10-class set, 30 samples per class, 4 features."""
    return blobs(rng, n_per_class=30, num_classes=10, spread=0.2, width=4)


def write_idx_images(path, images, magic=2051, compress=False):
    count, rows, cols = images.shape
    raw = struct.pack(">IIII", magic, count, rows, cols) + images.astype(np.uint8).tobytes()
    with open(path, "wb") as f:
        f.write(gzip.compress(raw) if compress else raw)
    return path


def write_idx_labels(path, labels, magic=2049, compress=False):
    raw = struct.pack(">II", magic, len(labels)) + np.asarray(labels, dtype=np.uint8).tobytes()
    with open(path, "wb") as f:
        f.write(gzip.compress(raw) if compress else raw)
    return path


@pytest.fixture
def tiny_idx(tmp_path):
    images = np.arange(5 * 3 * 3, dtype=np.uint8).reshape(5, 3, 3)
    labels = np.array([0, 1, 2, 3, 9], dtype=np.uint8)
    return (write_idx_images(os.path.join(tmp_path, "images.idx"), images),
            write_idx_labels(os.path.join(tmp_path, "labels.idx"), labels),
            images, labels)


@pytest.fixture
def db():
    manager = DBManager(":memory:")
    yield manager
    manager.close()


@pytest.fixture
def make_blobs(rng):
    def _make(**kwargs):
        return blobs(rng, **kwargs)
    return _make
