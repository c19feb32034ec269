import os

import numpy as np
import pytest

from conftest import write_idx_images, write_idx_labels
from src.data.mnist import load_mnist, load_mnist_split, mnist_available, read_idx_images, read_idx_labels
from src.error_handling.error_handling import (IdxCountMismatchError, IdxMagicError, IdxTruncatedError,
                                               IngestionError)
from src.util.config import Config


def test_reads_tiny_files(tiny_idx):
    images_path, labels_path, images, labels = tiny_idx
    np.testing.assert_array_equal(read_idx_images(images_path), images.reshape(5, 9))
    np.testing.assert_array_equal(read_idx_labels(labels_path), labels)


def test_load_scales_to_unit_interval(tiny_idx):
    images_path, labels_path, images, _ = tiny_idx
    ds = load_mnist(images_path, labels_path)
    assert ds.input_width == 9 and len(ds) == 5 and ds.num_classes == 10
    assert ds.features.max() <= 1.0
    assert ds.features[1, 0] == pytest.approx(images[1, 0, 0] / 255.0)


def test_gzip_files(tmp_path):
    images = np.full((2, 2, 2), 255, dtype=np.uint8)
    images_path = write_idx_images(os.path.join(tmp_path, "i.gz"), images, compress=True)
    labels_path = write_idx_labels(os.path.join(tmp_path, "l.gz"), [4, 7], compress=True)
    ds = load_mnist(images_path, labels_path)
    assert np.all(ds.features == 1.0)
    assert ds.labels.tolist() == [4, 7]


@pytest.mark.parametrize("damage", [
    lambda z: z[:10] + b"\xff" * 8 + z[18:],  # reserved deflate block type
    lambda z: z[:len(z) // 2],
])
def test_corrupt_gzip_stream(tmp_path, damage):
    path = write_idx_labels(os.path.join(tmp_path, "l.gz"), list(range(10)) * 20, compress=True)
    with open(path, "rb") as f:
        compressed = f.read()
    with open(path, "wb") as f:
        f.write(damage(compressed))
    with pytest.raises(IdxTruncatedError, match="Corrupt gzip"):
        read_idx_labels(path)


def test_bad_label_magic(tmp_path):
    path = write_idx_labels(os.path.join(tmp_path, "l.idx"), [1, 2], magic=2051)
    with pytest.raises(IdxMagicError):
        read_idx_labels(path)


def test_bad_image_magic(tmp_path):
    path = write_idx_images(os.path.join(tmp_path, "i.idx"), np.zeros((1, 2, 2)), magic=2049)
    with pytest.raises(IdxMagicError):
        read_idx_images(path)


def test_truncated_payload(tiny_idx, tmp_path):
    images_path = tiny_idx[0]
    with open(images_path, "rb") as f:
        raw = f.read()
    cut = os.path.join(tmp_path, "cut.idx")
    with open(cut, "wb") as f:
        f.write(raw[:-4])
    with pytest.raises(IdxTruncatedError):
        read_idx_images(cut)


def test_truncated_header(tmp_path):
    path = os.path.join(tmp_path, "short.idx")
    with open(path, "wb") as f:
        f.write(b"\x00\x00\x08")
    with pytest.raises(IdxTruncatedError):
        read_idx_labels(path)


def test_count_mismatch(tiny_idx, tmp_path):
    labels_path = write_idx_labels(os.path.join(tmp_path, "few.idx"), [1, 2, 3])
    with pytest.raises(IdxCountMismatchError):
        load_mnist(tiny_idx[0], labels_path)


def test_missing_file(tmp_path):
    with pytest.raises(IngestionError):
        read_idx_images(os.path.join(tmp_path, "nope.idx"))
    assert not mnist_available(str(tmp_path))


@pytest.mark.skipif(not mnist_available(), reason="MNIST files not present under FUSELAB_DATA_DIR")
def test_official_files():
    train, test = load_mnist_split(Config.DATA_DIR)
    assert (len(train), train.input_width) == (60000, 784)
    assert len(test) == 10000
