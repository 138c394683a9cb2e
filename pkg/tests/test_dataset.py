"""Spike dataset round-trips and IDX parsing."""

import gzip
import struct

import numpy as np
import pytest

from esam.dataset import (
    load_dataset,
    read_idx_images,
    read_idx_labels,
    save_dataset,
)
from esam.errors import ValidationError


def test_roundtrip_768_bits(tmp_path):
    rng = np.random.default_rng(0)
    samples = (rng.random((17, 768)) < 0.2).astype(np.uint8)
    labels = rng.integers(0, 10, 17).astype(np.uint8)
    p = tmp_path / "d.bin"
    save_dataset(p, samples, labels)
    ds = load_dataset(p)
    np.testing.assert_array_equal(ds.samples, samples)
    np.testing.assert_array_equal(ds.labels, labels)
    assert ds.count == 17 and ds.width == 768
    # fixed-size layout: header + count * (96 packed bytes + 1 label)
    assert p.stat().st_size == 12 + 17 * 97


def test_roundtrip_width_not_multiple_of_8(tmp_path):
    rng = np.random.default_rng(1)
    samples = rng.integers(0, 2, (5, 13)).astype(np.uint8)
    labels = np.zeros(5, dtype=np.uint8)
    save_dataset(tmp_path / "d.bin", samples, labels)
    ds = load_dataset(tmp_path / "d.bin")
    np.testing.assert_array_equal(ds.samples, samples)


def test_save_is_byte_deterministic(tmp_path):
    rng = np.random.default_rng(2)
    samples = rng.integers(0, 2, (9, 768)).astype(np.uint8)
    labels = rng.integers(0, 10, 9).astype(np.uint8)
    save_dataset(tmp_path / "a.bin", samples, labels)
    save_dataset(tmp_path / "b.bin", samples, labels)
    assert (tmp_path / "a.bin").read_bytes() == (tmp_path / "b.bin").read_bytes()


def test_bad_magic_and_truncation(tmp_path):
    p = tmp_path / "bad.bin"
    p.write_bytes(b"NOPE" + b"\x00" * 8)
    with pytest.raises(ValidationError, match="magic"):
        load_dataset(p)
    p.write_bytes(struct.pack("<4sII", b"ESD1", 3, 768) + b"\x00" * 10)
    with pytest.raises(ValidationError, match="records"):
        load_dataset(p)


def test_idx_roundtrip(tmp_path):
    rng = np.random.default_rng(3)
    imgs = rng.integers(0, 256, (4, 28, 28)).astype(np.uint8)
    labels = rng.integers(0, 10, 4).astype(np.uint8)
    ip = tmp_path / "imgs"
    lp = tmp_path / "labels.gz"
    ip.write_bytes(struct.pack(">IIII", 0x803, 4, 28, 28) + imgs.tobytes())
    with gzip.open(lp, "wb") as fh:
        fh.write(struct.pack(">II", 0x801, 4) + labels.tobytes())
    np.testing.assert_array_equal(read_idx_images(ip), imgs)
    np.testing.assert_array_equal(read_idx_labels(lp), labels)


def test_idx_corrupt_rejected(tmp_path):
    p = tmp_path / "imgs"
    p.write_bytes(struct.pack(">IIII", 0x123, 1, 28, 28) + b"\x00" * 784)
    with pytest.raises(ValidationError, match="magic"):
        read_idx_images(p)
    p.write_bytes(struct.pack(">IIII", 0x803, 2, 28, 28) + b"\x00" * 784)
    with pytest.raises(ValidationError, match="expected"):
        read_idx_images(p)
