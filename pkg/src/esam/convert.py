"""Input preprocessing, BNN -> binary-SNN conversion, and the model file
format.

The deployed network evaluates a sign-activation binary network in a single
timestep.  A trained BNN layer computes, per neuron j,

    fire  iff  sum_i w_ij * x_i + b_j >= 0,     w in {-1,+1}, x = 2s - 1

for binary input spikes s in {0,1} (sign(0) counts as fire, matching the
hardware's >= compare).  The hardware instead accumulates the +-1 decode of
the *stored* bits over spiking rows only:

    S_j = sum_{i: s_i = 1} w_ij

Substituting x = 2s - 1 gives  sum w x + b = 2 S - W + b  with
W_j = sum_i w_ij, so the BNN decision is exactly  S_j >= (W_j - b_j) / 2.
Because S_j is an integer this is equivalent to

    S_j >= ceil((W_j - b_j) / 2) = threshold_j

which is the per-neuron integer threshold installed in the neuron array.
The conversion is lossless: fire decisions match the BNN on every input.

Model files are a single strict-schema JSON document; weights are stored as
row-major 0/1 bit-strings (for BNN layers, bit b encodes the +-1 weight
2b - 1).  A "bnn" file carries per-neuron float biases, an "snn" file the
converted integer thresholds.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError

IMAGE_SIDE = 28
CROP_BORDER = (0, 1, IMAGE_SIDE - 2, IMAGE_SIDE - 1)
INPUT_BITS = IMAGE_SIDE * IMAGE_SIDE - 16  # 768 after removing the corners
BINARIZE_THRESHOLD = 0.5

MODEL_FORMAT_VERSION = 1


# ---------------------------------------------------------------------------
# Image preprocessing
# ---------------------------------------------------------------------------

def crop_keep_mask() -> np.ndarray:
    """Boolean 28x28 mask of kept pixels: a 2x2 block is dropped from each
    corner, trimming 784 down to 768 inputs."""
    mask = np.ones((IMAGE_SIDE, IMAGE_SIDE), dtype=bool)
    for r in CROP_BORDER:
        for c in CROP_BORDER:
            mask[r, c] = False
    return mask


def kept_pixel_indices() -> np.ndarray:
    """Row-major flat indices (into the 784-pixel image) of the 768 kept
    pixels, in output order.  Shared with the trainer as a golden file."""
    return np.flatnonzero(crop_keep_mask().ravel())


def preprocess_image(img: np.ndarray) -> np.ndarray:
    """28x28 grayscale in [0,1] -> 768 input spike bits.

    Corner pixels are removed, the rest flattened row-major and binarized
    with spike = (pixel > 0.5).
    """
    img = np.asarray(img)
    if img.shape != (IMAGE_SIDE, IMAGE_SIDE):
        raise ValidationError(
            f"expected a {IMAGE_SIDE}x{IMAGE_SIDE} image, got shape {img.shape}")
    kept = img.ravel()[kept_pixel_indices()]
    return (kept > BINARIZE_THRESHOLD).astype(np.uint8)


# ---------------------------------------------------------------------------
# Models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BnnLayer:
    """One trained layer: weights in {-1,+1} (rows x cols), float biases."""

    weights: np.ndarray
    biases: np.ndarray

    @property
    def rows(self) -> int:
        return self.weights.shape[0]

    @property
    def cols(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True)
class SnnLayer:
    """One converted layer: stored bits in {0,1}, integer thresholds."""

    weight_bits: np.ndarray
    thresholds: np.ndarray

    @property
    def rows(self) -> int:
        return self.weight_bits.shape[0]

    @property
    def cols(self) -> int:
        return self.weight_bits.shape[1]


@dataclass(frozen=True)
class BnnModel:
    layers: tuple[BnnLayer, ...]
    metadata: dict

    @property
    def topology(self) -> list[int]:
        return [self.layers[0].rows] + [l.cols for l in self.layers]


@dataclass(frozen=True)
class SnnModel:
    layers: tuple[SnnLayer, ...]
    metadata: dict

    @property
    def topology(self) -> list[int]:
        return [self.layers[0].rows] + [l.cols for l in self.layers]


def _check_chaining(layers, what: str):
    if not layers:
        raise ValidationError(f"{what}: model has no layers")
    for i in range(len(layers) - 1):
        if layers[i].cols != layers[i + 1].rows:
            raise ValidationError(
                f"{what}: layer {i} has {layers[i].cols} outputs but layer "
                f"{i + 1} expects {layers[i + 1].rows} inputs")


def bnn_to_snn(model: BnnModel) -> SnnModel:
    """Convert a trained BNN into the deployable binary-SNN.

    Stored bit = (w + 1) / 2; threshold_j = ceil((sum_i w_ij - b_j) / 2).
    """
    converted = []
    for li, layer in enumerate(model.layers):
        w = layer.weights
        if not np.isin(w, (-1, 1)).all():
            raise ValidationError(
                f"layer {li}: BNN weights must be exactly -1 or +1")
        if not np.isfinite(layer.biases).all():
            raise ValidationError(f"layer {li}: biases must be finite")
        bits = ((w + 1) // 2).astype(np.uint8)
        col_sums = w.sum(axis=0, dtype=np.int64)
        thresholds = np.array(
            [math.ceil((int(cs) - float(b)) / 2.0)
             for cs, b in zip(col_sums, layer.biases)], dtype=np.int64)
        converted.append(SnnLayer(bits, thresholds))
    return SnnModel(tuple(converted), dict(model.metadata))


# ---------------------------------------------------------------------------
# File format
# ---------------------------------------------------------------------------

_TOP_KEYS = {"format_version", "kind", "topology", "metadata", "layers"}
_LAYER_KEYS_BNN = {"rows", "cols", "weights", "biases"}
_LAYER_KEYS_SNN = {"rows", "cols", "weights", "thresholds"}


def _weights_to_strings(bits: np.ndarray) -> list[str]:
    return ["".join("1" if b else "0" for b in row) for row in bits]


def _strings_to_weights(strings, rows: int, cols: int, where: str) -> np.ndarray:
    if not isinstance(strings, list) or len(strings) != rows:
        raise ValidationError(f"{where}: expected {rows} weight rows")
    out = np.empty((rows, cols), dtype=np.uint8)
    for i, s in enumerate(strings):
        if not isinstance(s, str) or len(s) != cols:
            raise ValidationError(
                f"{where}: weight row {i} must be a {cols}-char bit-string")
        bad = set(s) - {"0", "1"}
        if bad:
            raise ValidationError(
                f"{where}: weight row {i} contains invalid character(s) "
                f"{sorted(bad)}; weights must be 0/1 bits")
        out[i] = np.frombuffer(s.encode(), dtype=np.uint8) - ord("0")
    return out


def model_to_doc(model: BnnModel | SnnModel) -> dict:
    is_bnn = isinstance(model, BnnModel)
    layers = []
    for layer in model.layers:
        entry = {"rows": layer.rows, "cols": layer.cols}
        if is_bnn:
            entry["weights"] = _weights_to_strings((layer.weights + 1) // 2)
            entry["biases"] = [float(b) for b in layer.biases]
        else:
            entry["weights"] = _weights_to_strings(layer.weight_bits)
            entry["thresholds"] = [int(t) for t in layer.thresholds]
        layers.append(entry)
    return {
        "format_version": MODEL_FORMAT_VERSION,
        "kind": "bnn" if is_bnn else "snn",
        "topology": model.topology,
        "metadata": model.metadata,
        "layers": layers,
    }


def model_from_doc(doc: dict, source: str = "<model>") -> BnnModel | SnnModel:
    if not isinstance(doc, dict):
        raise ValidationError(f"{source}: top level must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ValidationError(f"{source}: unknown field(s) {sorted(unknown)}")
    for key in ("format_version", "kind", "topology", "layers"):
        if key not in doc:
            raise ValidationError(f"{source}: missing required field {key!r}")
    if doc["format_version"] != MODEL_FORMAT_VERSION:
        raise ValidationError(
            f"{source}: unsupported format_version {doc['format_version']!r}")
    kind = doc["kind"]
    if kind not in ("bnn", "snn"):
        raise ValidationError(f"{source}: kind must be 'bnn' or 'snn', got {kind!r}")
    metadata = doc.get("metadata", {})
    if not isinstance(metadata, dict):
        raise ValidationError(f"{source}: metadata must be an object")

    layer_keys = _LAYER_KEYS_BNN if kind == "bnn" else _LAYER_KEYS_SNN
    layers = []
    for li, entry in enumerate(doc["layers"]):
        where = f"{source}: layer {li}"
        if not isinstance(entry, dict):
            raise ValidationError(f"{where}: expected an object")
        bad = set(entry) ^ layer_keys
        if bad:
            raise ValidationError(f"{where}: field mismatch {sorted(bad)}")
        rows, cols = entry["rows"], entry["cols"]
        for label, v in (("rows", rows), ("cols", cols)):
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise ValidationError(f"{where}: bad {label} {v!r}")
        bits = _strings_to_weights(entry["weights"], rows, cols, where)
        if kind == "bnn":
            biases = entry["biases"]
            if len(biases) != cols or not all(
                    isinstance(b, (int, float)) and not isinstance(b, bool)
                    for b in biases):
                raise ValidationError(f"{where}: biases must be {cols} numbers")
            layers.append(BnnLayer(bits.astype(np.int8) * 2 - 1,
                                   np.array(biases, dtype=np.float64)))
        else:
            th = entry["thresholds"]
            if len(th) != cols:
                raise ValidationError(f"{where}: expected {cols} thresholds")
            for t in th:
                if isinstance(t, bool) or not isinstance(t, (int, float)) or t != int(t):
                    raise ValidationError(
                        f"{where}: threshold {t!r} is not an integer")
            layers.append(SnnLayer(bits, np.array([int(t) for t in th],
                                                  dtype=np.int64)))

    if doc["topology"] != [layers[0].rows] + [l.cols for l in layers]:
        raise ValidationError(f"{source}: topology does not match the layers")
    _check_chaining(layers, source)

    cls = BnnModel if kind == "bnn" else SnnModel
    return cls(tuple(layers), metadata)


def save_model(model: BnnModel | SnnModel, path: str | Path) -> None:
    doc = model_to_doc(model)
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def load_model(path: str | Path) -> BnnModel | SnnModel:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FileNotFoundError(f"cannot read model {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON: {exc}") from exc
    return model_from_doc(doc, source=str(path))
