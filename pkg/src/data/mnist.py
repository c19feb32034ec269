"""MNIST IDX reader.

    [offset] [type]          [value]
    0000     32 bit integer  2051 (images) / 2049 (labels), big-endian
    0004     32 bit integer  item count
    0008     32 bit integer  rows         (images only)
    0012     32 bit integer  columns      (images only)
    ....     unsigned byte   payload, row-major

Files may be raw or gzip-compressed.
"""
import gzip
import os
import struct
import zlib
from typing import Tuple

import numpy as np

from src.data.dataset import Dataset, Role
from src.error_handling.error_handling import (IdxCountMismatchError, IdxMagicError, IdxTruncatedError,
                                               IngestionError)
from src.logging.logger import get_logger
from src.util.config import Config

IMAGES_MAGIC = 2051
LABELS_MAGIC = 2049
NUM_CLASSES = 10


def _read_bytes(path: str) -> bytes:
    if not os.path.exists(path):
        raise IngestionError(f"IDX file not found: {path}", details={"path": path})
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:2] == b"\x1f\x8b":
        try:
            raw = gzip.decompress(raw)
        except (OSError, EOFError, zlib.error) as e:
            raise IdxTruncatedError(f"Corrupt gzip stream in {path}: {e}", details={"path": path})
    return raw


def _header(raw: bytes, path: str, expected_magic: int, dims: int) -> Tuple[int, ...]:
    size = 4 * (dims + 1)
    if len(raw) < size:
        raise IdxTruncatedError(f"{path} is shorter than its {size}-byte header", details={"path": path})
    values = struct.unpack(f">{dims + 1}I", raw[:size])
    if values[0] != expected_magic:
        raise IdxMagicError(f"{path} has magic {values[0]}, expected {expected_magic}",
                            details={"path": path, "magic": values[0]})
    return values[1:]


def read_idx_images(path: str) -> np.ndarray:
    raw = _read_bytes(path)
    count, rows, cols = _header(raw, path, IMAGES_MAGIC, 3)
    expected = count * rows * cols
    payload = np.frombuffer(raw, dtype=np.uint8, offset=16)
    if payload.size < expected:
        raise IdxTruncatedError(f"{path} holds {payload.size} pixels, header declares {expected}",
                                details={"path": path})
    return payload[:expected].reshape(count, rows * cols)


def read_idx_labels(path: str) -> np.ndarray:
    raw = _read_bytes(path)
    (count,) = _header(raw, path, LABELS_MAGIC, 1)
    payload = np.frombuffer(raw, dtype=np.uint8, offset=8)
    if payload.size < count:
        raise IdxTruncatedError(f"{path} holds {payload.size} labels, header declares {count}",
                                details={"path": path})
    return payload[:count]


def load_mnist(images_path: str, labels_path: str, role: Role = Role.TRAIN) -> Dataset:
    images = read_idx_images(images_path)
    labels = read_idx_labels(labels_path)
    if images.shape[0] != labels.shape[0]:
        raise IdxCountMismatchError(
            f"{images_path} has {images.shape[0]} images but {labels_path} has {labels.shape[0]} labels",
            details={"images": images.shape[0], "labels": labels.shape[0]})
    get_logger().info(f"Loaded {images.shape[0]} MNIST samples from {images_path}")
    return Dataset(images.astype(np.float64) / 255.0, labels.astype(np.int64), NUM_CLASSES, role)


def _locate(data_dir: str, name: str) -> str:
    path = os.path.join(data_dir, name)
    if os.path.exists(path):
        return path
    plain = path[:-3] if path.endswith(".gz") else path
    return plain if os.path.exists(plain) else path


def load_mnist_split(data_dir: str = None) -> Tuple[Dataset, Dataset]:
    data_dir = data_dir or Config.DATA_DIR
    files = {key: _locate(data_dir, name) for key, name in Config.MNIST_FILES.items()}
    train = load_mnist(files["train_images"], files["train_labels"], Role.TRAIN)
    test = load_mnist(files["test_images"], files["test_labels"], Role.TEST)
    return train, test


def mnist_available(data_dir: str = None) -> bool:
    data_dir = data_dir or Config.DATA_DIR
    return all(os.path.exists(_locate(data_dir, name)) for name in Config.MNIST_FILES.values())
