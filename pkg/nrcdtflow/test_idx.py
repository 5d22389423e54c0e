import gzip
import struct

import numpy as np
import pytest

from nrcdtflow.datagen.idx import (
    IMAGE_MAGIC,
    LABEL_MAGIC,
    BadMagic,
    TruncatedFile,
    encode_idx,
    load_mnist,
    parse_idx,
    read_idx,
    write_idx,
)


@pytest.mark.unit
class TestIdx:
    def test_header_layout(self):
        data = encode_idx(np.arange(12, dtype=np.uint8).reshape(2, 2, 3))
        assert struct.unpack(">4I", data[:16]) == (IMAGE_MAGIC, 2, 2, 3)
        assert data[16:] == bytes(range(12))
        labels = encode_idx(np.array([3, 1, 4], dtype=np.uint8))
        assert struct.unpack(">2I", labels[:8]) == (LABEL_MAGIC, 3)

    def test_file_roundtrip_with_gzip(self, tmp_path):
        images = np.random.default_rng(0).integers(0, 256, (4, 5, 6), dtype=np.uint8)
        path = write_idx(tmp_path / "images-idx3-ubyte.gz", images)
        with gzip.open(path, "rb") as handle:
            assert handle.read(4) == struct.pack(">I", IMAGE_MAGIC)
        np.testing.assert_array_equal(read_idx(path), images)

    def test_bad_magic(self):
        with pytest.raises(BadMagic):
            parse_idx(struct.pack(">II", 0x0803, 1) + b"\x00")

    def test_truncated(self):
        data = encode_idx(np.zeros((2, 3, 3), dtype=np.uint8))
        with pytest.raises(TruncatedFile):
            parse_idx(data[:-1])
        with pytest.raises(TruncatedFile):
            parse_idx(data[:10])
        with pytest.raises(TruncatedFile):
            parse_idx(data[:2])

    def test_trailing_bytes_are_ignored(self, caplog):
        data = encode_idx(np.array([1, 2], dtype=np.uint8)) + b"\xff"
        np.testing.assert_array_equal(parse_idx(data), [1, 2])
        assert "trailing" in caplog.text

    def test_writer_rejects_other_dtypes(self):
        with pytest.raises(ValueError):
            encode_idx(np.zeros((2, 3, 3), dtype=np.float64))
        with pytest.raises(ValueError):
            encode_idx(np.zeros((2, 3), dtype=np.uint8))

    def test_load_mnist_pairs_files(self, tmp_path):
        images = np.zeros((3, 28, 28), dtype=np.uint8)
        labels = np.array([7, 0, 2], dtype=np.uint8)
        write_idx(tmp_path / "t10k-images-idx3-ubyte.gz", images)
        write_idx(tmp_path / "t10k-labels-idx1-ubyte", labels)
        loaded_images, loaded_labels = load_mnist(tmp_path, "t10k")
        assert loaded_images.shape == (3, 28, 28)
        np.testing.assert_array_equal(loaded_labels, labels)
        with pytest.raises(FileNotFoundError):
            load_mnist(tmp_path, "train")
        with pytest.raises(ValueError):
            load_mnist(tmp_path, "validation")
