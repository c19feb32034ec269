"""Binary weight format.

Single model (all integers big-endian)::

    magic        4 bytes   b"FLW1"
    tag_length   uint16    length of the UTF-8 method tag (0 for plain models)
    tag          bytes
    activation   uint8     0 = relu, 1 = leaky_relu
    layer_count  uint32
    C            uint32    rows of the last layer
    I            uint32    input width (first layer columns - 1)
    per layer:   rows uint32, cols uint32   (cols include the bias column)
    payload      float64 big-endian, each layer row-major, layers in order

Bundle of models (AMS global models keep every client network)::

    magic        4 bytes   b"FLB1"
    tag_length   uint16, tag bytes
    count        uint32
    per model:   length uint64, then one single-model record
"""
import os
import struct
from typing import List, Tuple

import numpy as np

from src.error_handling.error_handling import ErrorCode, IngestionError
from src.nn.model import Activation, ModelWeights

MODEL_MAGIC = b"FLW1"
BUNDLE_MAGIC = b"FLB1"
_ACTIVATION_TAGS = {Activation.RELU: 0, Activation.LEAKY_RELU: 1}
_TAG_ACTIVATIONS = {v: k for k, v in _ACTIVATION_TAGS.items()}


class _Reader:
    def __init__(self, raw: bytes):
        self.raw = raw
        self.offset = 0

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.raw):
            raise IngestionError("Weight record is truncated", code=ErrorCode.IDX_TRUNCATED,
                                 details={"offset": self.offset, "needed": size})
        chunk = self.raw[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def _pack_tag(tag: str) -> bytes:
    encoded = tag.encode("utf-8")
    return struct.pack(">H", len(encoded)) + encoded


def dumps_model(model: ModelWeights, tag: str = "") -> bytes:
    header = [MODEL_MAGIC, _pack_tag(tag),
              struct.pack(">BIII", _ACTIVATION_TAGS[model.activation], len(model.layers),
                          model.num_classes, model.input_width)]
    header += [struct.pack(">II", layer.rows, layer.cols) for layer in model.layers]
    payload = [np.ascontiguousarray(layer.matrix, dtype=">f8").tobytes() for layer in model.layers]
    return b"".join(header + payload)


def _read_model(reader: _Reader) -> Tuple[ModelWeights, str]:
    if reader.take(4) != MODEL_MAGIC:
        raise IngestionError("Not a weight record (bad magic)", code=ErrorCode.IDX_BAD_MAGIC)
    (tag_length,) = reader.unpack(">H")
    tag = reader.take(tag_length).decode("utf-8")
    activation, layer_count, num_classes, input_width = reader.unpack(">BIII")
    shapes = [reader.unpack(">II") for _ in range(layer_count)]
    matrices = []
    for rows, cols in shapes:
        values = np.frombuffer(reader.take(rows * cols * 8), dtype=">f8")
        matrices.append(values.reshape(rows, cols).astype(np.float64))
    model = ModelWeights.from_matrices(matrices, _TAG_ACTIVATIONS[activation])
    if model.num_classes != num_classes or model.input_width != input_width:
        raise IngestionError("Weight header disagrees with layer shapes", code=ErrorCode.IDX_COUNT_MISMATCH)
    return model, tag


def loads_model(raw: bytes) -> Tuple[ModelWeights, str]:
    return _read_model(_Reader(raw))


def dumps_bundle(models: List[ModelWeights], tag: str = "") -> bytes:
    chunks = [BUNDLE_MAGIC, _pack_tag(tag), struct.pack(">I", len(models))]
    for model in models:
        record = dumps_model(model)
        chunks += [struct.pack(">Q", len(record)), record]
    return b"".join(chunks)


def loads_bundle(raw: bytes) -> Tuple[List[ModelWeights], str]:
    reader = _Reader(raw)
    if reader.take(4) != BUNDLE_MAGIC:
        raise IngestionError("Not a model bundle (bad magic)", code=ErrorCode.IDX_BAD_MAGIC)
    (tag_length,) = reader.unpack(">H")
    tag = reader.take(tag_length).decode("utf-8")
    (count,) = reader.unpack(">I")
    models = []
    for _ in range(count):
        (length,) = reader.unpack(">Q")
        models.append(loads_model(reader.take(length))[0])
    return models, tag


def _write(path: str, raw: bytes) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "wb") as f:
        f.write(raw)
    return path


def _read(path: str) -> bytes:
    if not os.path.exists(path):
        raise IngestionError(f"Weight file not found: {path}", details={"path": path})
    with open(path, "rb") as f:
        return f.read()


def save_model(model: ModelWeights, path: str, tag: str = "") -> str:
    return _write(path, dumps_model(model, tag))


def load_model(path: str) -> Tuple[ModelWeights, str]:
    return loads_model(_read(path))


def save_bundle(models: List[ModelWeights], path: str, tag: str = "") -> str:
    return _write(path, dumps_bundle(models, tag))


def load_bundle(path: str) -> Tuple[List[ModelWeights], str]:
    return loads_bundle(_read(path))
