"""Hardware calibration configuration: cell-variant timings, energies, areas
and architectural limits.

The config file is strict JSON with units embedded in the field names
(..._ns, ..._pj, ..._um2, ..._mw); unknown fields are rejected so that a
typo cannot silently fall back to a default.  One canonical file ships with
the package (``esam3nm.json``); its ``provenance`` section documents how
every calibrated scalar was derived.

Loaded configs are immutable and safe to share across concurrent workers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path

from .errors import ValidationError

# Canonical variant names and their decoupled read-port counts.  read_ports
# of 0 denotes the baseline 6T (1RW) cell with one shared row-wise port and
# no transposed access; the multiport cells add 1..4 decoupled inference
# ports plus the column-wise read/write port.  Pitch matching caps the
# decoupled ports at 4.
VARIANT_PORTS = {"1rw": 0, "1rw1r": 1, "1rw2r": 2, "1rw3r": 3, "1rw4r": 4}
MAX_READ_PORTS = 4
MAX_ARRAY_ROWS = 128  # write-assist yield constraint
MAX_ARRAY_COLS = 128


@dataclass(frozen=True)
class CellVariant:
    """An SRAM cell option: decoupled read ports + transposed-port flag."""

    name: str
    read_ports: int
    has_transposed_rw: bool

    @property
    def inference_ports(self) -> int:
        """Rows readable per cycle: the shared port counts as one."""
        return self.read_ports if self.read_ports > 0 else 1


@dataclass(frozen=True)
class VariantParams:
    """Per-variant timing/energy/area calibration scalars."""

    cell: CellVariant
    arbiter_stage_ns: float
    sram_neuron_stage_ns: float
    area_multiplier: float
    read_energy_per_port_access_pj: float
    neuron_accumulate_energy_per_bit_pj: float
    arbiter_energy_per_cycle_pj: float
    fire_compare_energy_pj: float
    transposed_read_cycle_energy_pj: float
    transposed_write_cycle_energy_pj: float
    leakage_power_mw: float

    @property
    def clock_period_ns(self) -> float:
        """The longer pipeline stage sets the clock."""
        return max(self.arbiter_stage_ns, self.sram_neuron_stage_ns)


@dataclass(frozen=True)
class HardwareConfig:
    name: str
    max_rows: int
    max_cols: int
    col_mux_factor: int
    cell_area_um2: float
    periphery_area_overhead: float
    arbiter_area_um2: float
    arbiter_tree_area_overhead: float
    pipeline_drain_cycles: int
    fire_handoff_cycles: int
    variants: dict[str, VariantParams]

    def variant(self, name: str) -> VariantParams:
        try:
            return self.variants[name]
        except KeyError:
            raise ValidationError(
                f"unknown cell variant {name!r}; config defines "
                f"{sorted(self.variants)}") from None


def clock_period(cfg: HardwareConfig, variant: str | CellVariant) -> float:
    """Clock period in ns: max of the two pipeline stage times."""
    name = variant.name if isinstance(variant, CellVariant) else variant
    return cfg.variant(name).clock_period_ns


# ---------------------------------------------------------------------------
# Parsing / validation
# ---------------------------------------------------------------------------

_TOP_KEYS = {
    "format_version", "name", "max_rows", "max_cols", "col_mux_factor",
    "cell_area_um2", "periphery_area_overhead", "arbiter_area_um2",
    "arbiter_tree_area_overhead", "pipeline_drain_cycles",
    "fire_handoff_cycles", "variants", "provenance",
}

_VARIANT_KEYS = {
    "read_ports", "has_transposed_rw", "arbiter_stage_ns",
    "sram_neuron_stage_ns", "area_multiplier",
    "read_energy_per_port_access_pj", "neuron_accumulate_energy_per_bit_pj",
    "arbiter_energy_per_cycle_pj", "fire_compare_energy_pj",
    "transposed_read_cycle_energy_pj", "transposed_write_cycle_energy_pj",
    "leakage_power_mw",
}


def _require(doc: dict, key: str, where: str):
    if key not in doc:
        raise ValidationError(f"{where}: missing required field {key!r}")
    return doc[key]


def _check_keys(doc: dict, allowed: set, where: str):
    unknown = set(doc) - allowed
    if unknown:
        raise ValidationError(f"{where}: unknown field(s) {sorted(unknown)}")


def _positive(value, field: str, strict=True):
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ValidationError(f"{field}: expected a number, got {value!r}")
    if strict and value <= 0:
        raise ValidationError(f"{field}: must be strictly positive, got {value}")
    if not strict and value < 0:
        raise ValidationError(f"{field}: must be non-negative, got {value}")
    return float(value)


def _int_in_range(value, field: str, lo: int, hi: int) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ValidationError(f"{field}: expected an integer, got {value!r}")
    if not lo <= value <= hi:
        raise ValidationError(f"{field}: {value} outside allowed range [{lo}, {hi}]")
    return value


def _parse_variant(name: str, doc: dict) -> VariantParams:
    where = f"variants.{name}"
    if name not in VARIANT_PORTS:
        raise ValidationError(
            f"{where}: unknown variant name; expected one of {sorted(VARIANT_PORTS)}")
    if not isinstance(doc, dict):
        raise ValidationError(f"{where}: expected an object")
    _check_keys(doc, _VARIANT_KEYS, where)

    read_ports = _require(doc, "read_ports", where)
    if not isinstance(read_ports, int) or isinstance(read_ports, bool):
        raise ValidationError(f"{where}.read_ports: expected an integer")
    if read_ports < 0 or read_ports > MAX_READ_PORTS:
        raise ValidationError(
            f"{where}.read_ports = {read_ports}: only up to {MAX_READ_PORTS} "
            f"decoupled read ports fit the cell pitch")
    if read_ports != VARIANT_PORTS[name]:
        raise ValidationError(
            f"{where}.read_ports = {read_ports} contradicts variant name "
            f"(expected {VARIANT_PORTS[name]})")

    has_trw = _require(doc, "has_transposed_rw", where)
    if not isinstance(has_trw, bool):
        raise ValidationError(f"{where}.has_transposed_rw: expected a boolean")
    if read_ports > 0 and not has_trw:
        raise ValidationError(
            f"{where}: multiport cells always carry the transposed R/W port")

    cell = CellVariant(name, read_ports, has_trw)
    scalars = {
        f: _positive(_require(doc, f, where), f"{where}.{f}")
        for f in sorted(_VARIANT_KEYS - {"read_ports", "has_transposed_rw"})
    }
    return VariantParams(cell=cell, **scalars)


def parse_config(doc: dict, source: str = "<config>") -> HardwareConfig:
    if not isinstance(doc, dict):
        raise ValidationError(f"{source}: top level must be a JSON object")
    _check_keys(doc, _TOP_KEYS, source)

    version = _require(doc, "format_version", source)
    if version != 1:
        raise ValidationError(f"{source}: unsupported format_version {version!r}")

    variants_doc = _require(doc, "variants", source)
    if not isinstance(variants_doc, dict) or not variants_doc:
        raise ValidationError(f"{source}: variants must be a non-empty object")
    variants = {name: _parse_variant(name, vdoc)
                for name, vdoc in variants_doc.items()}

    return HardwareConfig(
        name=str(_require(doc, "name", source)),
        max_rows=_int_in_range(_require(doc, "max_rows", source),
                               "max_rows", 1, MAX_ARRAY_ROWS),
        max_cols=_int_in_range(_require(doc, "max_cols", source),
                               "max_cols", 1, MAX_ARRAY_COLS),
        col_mux_factor=_int_in_range(_require(doc, "col_mux_factor", source),
                                     "col_mux_factor", 1, 64),
        cell_area_um2=_positive(_require(doc, "cell_area_um2", source),
                                "cell_area_um2"),
        periphery_area_overhead=_positive(
            _require(doc, "periphery_area_overhead", source),
            "periphery_area_overhead", strict=False),
        arbiter_area_um2=_positive(_require(doc, "arbiter_area_um2", source),
                                   "arbiter_area_um2", strict=False),
        arbiter_tree_area_overhead=_positive(
            _require(doc, "arbiter_tree_area_overhead", source),
            "arbiter_tree_area_overhead", strict=False),
        pipeline_drain_cycles=_int_in_range(
            _require(doc, "pipeline_drain_cycles", source),
            "pipeline_drain_cycles", 0, 16),
        fire_handoff_cycles=_int_in_range(
            _require(doc, "fire_handoff_cycles", source),
            "fire_handoff_cycles", 0, 16),
        variants=variants,
    )


def load_config(path: str | Path) -> HardwareConfig:
    """Load and validate a hardware config file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FileNotFoundError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON: {exc}") from exc
    return parse_config(doc, source=str(path))


def default_config_path() -> Path:
    """Path of the shipped calibration file."""
    return Path(resources.files("esam").joinpath("data/esam3nm.json"))


def load_default_config() -> HardwareConfig:
    return load_config(default_config_path())
