"""Binarized sample files and raw MNIST IDX ingestion.

Spike dataset format (produced by the trainer, consumed by the CLI): a flat
binary file, little-endian header, then fixed-size records.

    offset  size  field
    0       4     magic "ESD1"
    4       4     u32 sample count
    8       4     u32 sample width in bits (768 for the shipped network)
    12      -     count records of  ceil(width/8) packed-bit bytes + 1 label byte

Bits are packed MSB-first: sample bit i lives in byte i//8 at bit
(7 - i%8), matching numpy's packbits default.  Labels are single unsigned
bytes.  Everything is deterministic, diff-able with cmp, and trivially
readable from any language.

IDX ingestion handles the classic MNIST header (0x00000803 images /
0x00000801 labels) and transparently decompresses ``.gz`` files.
"""

from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError

MAGIC = b"ESD1"
HEADER = struct.Struct("<4sII")


@dataclass(frozen=True)
class SpikeDataset:
    samples: np.ndarray  # (count, width) uint8 bits
    labels: np.ndarray   # (count,) uint8

    @property
    def count(self) -> int:
        return self.samples.shape[0]

    @property
    def width(self) -> int:
        return self.samples.shape[1]


def save_dataset(path: str | Path, samples: np.ndarray, labels: np.ndarray) -> None:
    samples = np.asarray(samples)
    labels = np.asarray(labels)
    if samples.ndim != 2 or not np.isin(samples, (0, 1)).all():
        raise ValidationError("samples must be a (count, width) 0/1 matrix")
    if labels.shape != (samples.shape[0],):
        raise ValidationError("one label byte per sample required")
    count, width = samples.shape
    packed = np.packbits(samples.astype(np.uint8), axis=1)
    records = np.concatenate(
        [packed, labels.astype(np.uint8)[:, None]], axis=1)
    with open(path, "wb") as fh:
        fh.write(HEADER.pack(MAGIC, count, width))
        fh.write(records.tobytes())


def load_dataset(path: str | Path) -> SpikeDataset:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise FileNotFoundError(f"cannot read dataset {path}: {exc}") from exc
    if len(raw) < HEADER.size:
        raise ValidationError(f"{path}: truncated header")
    magic, count, width = HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValidationError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if width < 1:
        raise ValidationError(f"{path}: bad sample width {width}")
    record = (width + 7) // 8 + 1
    body = raw[HEADER.size:]
    if len(body) != count * record:
        raise ValidationError(
            f"{path}: expected {count} records of {record} bytes, "
            f"got {len(body)} bytes")
    records = np.frombuffer(body, dtype=np.uint8).reshape(count, record)
    bits = np.unpackbits(records[:, :-1], axis=1)[:, :width]
    return SpikeDataset(bits, records[:, -1].copy())


# ---------------------------------------------------------------------------
# MNIST IDX
# ---------------------------------------------------------------------------

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


def _read_maybe_gz(path: Path) -> bytes:
    if path.suffix == ".gz":
        with gzip.open(path, "rb") as fh:
            return fh.read()
    return path.read_bytes()


def read_idx_images(path: str | Path) -> np.ndarray:
    """Read an IDX image file -> (count, rows, cols) uint8."""
    path = Path(path)
    raw = _read_maybe_gz(path)
    if len(raw) < 16:
        raise ValidationError(f"{path}: truncated IDX header")
    magic, count, rows, cols = struct.unpack(">IIII", raw[:16])
    if magic != IDX_IMAGES_MAGIC:
        raise ValidationError(f"{path}: bad IDX image magic 0x{magic:08x}")
    expected = 16 + count * rows * cols
    if len(raw) != expected:
        raise ValidationError(f"{path}: expected {expected} bytes, got {len(raw)}")
    return np.frombuffer(raw, dtype=np.uint8, offset=16).reshape(count, rows, cols)


def read_idx_labels(path: str | Path) -> np.ndarray:
    path = Path(path)
    raw = _read_maybe_gz(path)
    if len(raw) < 8:
        raise ValidationError(f"{path}: truncated IDX header")
    magic, count = struct.unpack(">II", raw[:8])
    if magic != IDX_LABELS_MAGIC:
        raise ValidationError(f"{path}: bad IDX label magic 0x{magic:08x}")
    if len(raw) != 8 + count:
        raise ValidationError(f"{path}: expected {8 + count} bytes, got {len(raw)}")
    return np.frombuffer(raw, dtype=np.uint8, offset=8)
