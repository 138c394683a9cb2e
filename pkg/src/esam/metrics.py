"""Turn event counters + calibration scalars into time/energy/power/area.

Energy is a linear functional of the event-counter vector plus a leakage
term proportional to wall time (1 mW = 1 pJ/ns, so the arithmetic stays in
pJ and ns throughout).  Throughput assumes tiles are pipelined across
consecutive samples: in steady state a new inference completes every
(bottleneck tile cycles) x (clock period).  Average power is defined by the
identity  power = energy/inference x throughput.
"""

from __future__ import annotations

from dataclasses import dataclass

from .config import CellVariant, HardwareConfig, clock_period
from .engine import DatasetResult, Network, SimStats
from .errors import ValidationError


def _variant_name(variant) -> str:
    return variant.name if isinstance(variant, CellVariant) else variant


# ---------------------------------------------------------------------------
# Energy / throughput
# ---------------------------------------------------------------------------

def energy_of_run(stats: SimStats, cfg: HardwareConfig, variant) -> float:
    """Total energy of a run in pJ: per-event energies plus leakage."""
    p = cfg.variant(_variant_name(variant))
    return (
        stats.arbiter_cycles * p.arbiter_energy_per_cycle_pj
        + stats.port_bit_reads * p.read_energy_per_port_access_pj
        + stats.neuron_adds * p.neuron_accumulate_energy_per_bit_pj
        + stats.fire_compares * p.fire_compare_energy_pj
        + stats.transposed_read_cycles * p.transposed_read_cycle_energy_pj
        + stats.transposed_write_cycles * p.transposed_write_cycle_energy_pj
        + p.leakage_power_mw * stats.wall_time_ns
    )


def throughput(per_tile_cycles, cfg: HardwareConfig, variant) -> float:
    """Pipelined inferences/second for one sample's per-tile cycle counts."""
    bottleneck = max(per_tile_cycles)
    if bottleneck <= 0:
        raise ValidationError("per-tile cycles must be positive")
    return 1e9 / (bottleneck * clock_period(cfg, _variant_name(variant)))


def throughput_of_run(stats: SimStats, cfg: HardwareConfig, variant) -> float:
    """Aggregate pipelined throughput: samples / sum of bottleneck intervals."""
    if stats.n_samples == 0 or stats.bottleneck_cycles == 0:
        raise ValidationError("stats contain no completed samples")
    period = clock_period(cfg, _variant_name(variant))
    return stats.n_samples * 1e9 / (stats.bottleneck_cycles * period)


# ---------------------------------------------------------------------------
# Learning latency
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ColumnUpdateCost:
    cycles: int
    time_ns: float
    energy_pj: float


@dataclass(frozen=True)
class LearningLatency:
    """Cost of one full column read+write vs the non-transposable baseline."""

    baseline: ColumnUpdateCost
    proposed: ColumnUpdateCost
    time_ratio: float
    energy_ratio: float


def _column_update(cfg: HardwareConfig, variant_name: str, rows: int
                   ) -> ColumnUpdateCost:
    p = cfg.variant(variant_name)
    # with the transposed port a column access costs col_mux_factor cycles
    # (4:1 sense-amp muxing); without it, one cycle per row
    per_phase = cfg.col_mux_factor if p.cell.has_transposed_rw else rows
    cycles = 2 * per_phase
    time_ns = cycles * p.clock_period_ns
    energy = per_phase * (p.transposed_read_cycle_energy_pj
                          + p.transposed_write_cycle_energy_pj)
    return ColumnUpdateCost(cycles, time_ns, energy)


def learning_latency(cfg: HardwareConfig, variant, rows: int = 128
                     ) -> LearningLatency:
    """Read+write one full weight column: proposed variant vs 1RW baseline."""
    if not 1 <= rows <= cfg.max_rows:
        raise ValidationError(f"rows {rows} outside 1..{cfg.max_rows}")
    baseline = _column_update(cfg, "1rw", rows)
    proposed = _column_update(cfg, _variant_name(variant), rows)
    return LearningLatency(
        baseline=baseline,
        proposed=proposed,
        time_ratio=baseline.time_ns / proposed.time_ns,
        energy_ratio=baseline.energy_pj / proposed.energy_pj,
    )


# ---------------------------------------------------------------------------
# Speed / area comparisons
# ---------------------------------------------------------------------------

def port_speedup(cfg: HardwareConfig, variant_a, variant_b) -> float:
    """Peak spike-consumption rate of b relative to a (ports per second)."""
    a = cfg.variant(_variant_name(variant_a))
    b = cfg.variant(_variant_name(variant_b))
    rate_a = a.cell.inference_ports / a.clock_period_ns
    rate_b = b.cell.inference_ports / b.clock_period_ns
    return rate_b / rate_a


def cell_array_area(n_cells: int, cfg: HardwareConfig, variant) -> float:
    """Raw bitcell area in um^2 (no periphery), scaled per variant."""
    p = cfg.variant(_variant_name(variant))
    return n_cells * cfg.cell_area_um2 * p.area_multiplier


def area_estimate(network: Network, cfg: HardwareConfig,
                  variant=None) -> float:
    """Total area: scaled cell arrays + periphery + arbiter logic (+tree)."""
    name = _variant_name(variant) if variant is not None else network.params.cell.name
    arrays = cell_array_area(network.total_cells(), cfg, name)
    arrays *= 1.0 + cfg.periphery_area_overhead
    arbiters = (network.n_arbiters() * cfg.arbiter_area_um2
                * (1.0 + cfg.arbiter_tree_area_overhead))
    return arrays + arbiters


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PpaReport:
    variant: str
    clock_ns: float
    n_samples: int
    accuracy: float
    throughput_inf_per_s: float
    energy_per_inference_pj: float
    average_power_mw: float
    total_area_um2: float
    cycles_per_tile: list[int]
    bottleneck_cycles_per_sample: float
    latency_cycles_per_sample: float
    port_utilization: list[float]
    counters: dict

    CSV_COLUMNS = (
        "variant", "clock_ns", "n_samples", "accuracy",
        "throughput_inf_per_s", "energy_per_inference_pj",
        "average_power_mw", "total_area_um2",
        "bottleneck_cycles_per_sample", "latency_cycles_per_sample",
    )

    def csv_row(self) -> list:
        return [getattr(self, c) for c in self.CSV_COLUMNS]

    def to_doc(self) -> dict:
        return {
            "variant": self.variant,
            "clock_ns": self.clock_ns,
            "n_samples": self.n_samples,
            "accuracy": self.accuracy,
            "throughput_inf_per_s": self.throughput_inf_per_s,
            "energy_per_inference_pj": self.energy_per_inference_pj,
            "average_power_mw": self.average_power_mw,
            "total_area_um2": self.total_area_um2,
            "cycles_per_tile": self.cycles_per_tile,
            "bottleneck_cycles_per_sample": self.bottleneck_cycles_per_sample,
            "latency_cycles_per_sample": self.latency_cycles_per_sample,
            "port_utilization": self.port_utilization,
            "counters": self.counters,
        }


def build_report(network: Network, result: DatasetResult) -> PpaReport:
    stats = result.stats
    cfg = network.cfg
    name = network.params.cell.name
    if stats.n_samples == 0:
        raise ValidationError("cannot report on an empty run")

    energy_total = energy_of_run(stats, cfg, name)
    energy_per_inf = energy_total / stats.n_samples
    tput = throughput_of_run(stats, cfg, name)
    # consistency identity: average power is defined by E/inf x inf/s
    power_mw = energy_per_inf * tput * 1e-9

    ports = network.params.cell.inference_ports
    util = [
        (stats.port_grants[k] / stats.arbiter_cycles
         if stats.arbiter_cycles else 0.0)
        for k in range(ports)
    ]
    return PpaReport(
        variant=name,
        clock_ns=stats.clock_ns,
        n_samples=stats.n_samples,
        accuracy=result.accuracy,
        throughput_inf_per_s=tput,
        energy_per_inference_pj=energy_per_inf,
        average_power_mw=power_mw,
        total_area_um2=area_estimate(network, cfg),
        cycles_per_tile=list(stats.per_tile_cycles),
        bottleneck_cycles_per_sample=stats.bottleneck_cycles / stats.n_samples,
        latency_cycles_per_sample=stats.total_cycles / stats.n_samples,
        port_utilization=util,
        counters=stats.counters(),
    )
