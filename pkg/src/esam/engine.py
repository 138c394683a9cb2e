"""Tile engine: arbiters + synapse arrays + neurons, stepped cycle by cycle.

A tile is one layer's hardware: the input spikes of the layer are latched
into per-row-block request registers (each block holds up to 128 rows and
owns its own p-port arbiter).  Every clock cycle each block's arbiter
grants up to p pending requests, the granted rows are read across all of
the block's column strips, and every neuron accumulates the validity-gated
+-1 decode of its sensed bits.  Arbitration is pipelined against
read/accumulate, which functionally collapses to one combined step per
cycle; the pipeline only shows up in the cycle accounting.

When every request register is empty the neurons run their gated threshold
compare and the fired spikes become the next tile's requests (spikes travel
between tiles as parallel binary pulses, so no transport cycles are
charged).  The final tile is read out by argmax over membrane potentials
instead of firing.  All membrane registers are cleared when a tile latches
a new sample (single-timestep evaluation).

Per-tile cycle count for one sample:

    max over row blocks of ceil(pending spikes / p)
      + pipeline_drain_cycles + fire_handoff_cycles   (from the config)

Everything the engine counts is an integer, so runs are bit-reproducible
and stats merge associatively across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .arbiter import MAX_PORTS, arbitrate
from .bitvec import BitVector
from .config import CellVariant, HardwareConfig, VariantParams
from .convert import SnnModel
from .errors import SimulationError, ValidationError
from .memory import SynapseArray
from .neuron import VMEM_LIMIT, NeuronBank


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------

@dataclass
class SimStats:
    """Integer event ledger of a run; energy/time are derived later."""

    clock_ns: float = 0.0
    n_samples: int = 0
    per_tile_cycles: list[int] = field(default_factory=list)
    bottleneck_cycles: int = 0      # sum over samples of max per-tile cycles
    grants: int = 0                 # spikes consumed (granted exactly once)
    port_grants: list[int] = field(default_factory=lambda: [0] * MAX_PORTS)
    arbiter_cycles: int = 0         # per-arbiter active cycles
    port_bit_reads: int = 0         # bits sensed on inference ports
    neuron_adds: int = 0            # +-1 additions into membranes
    fire_compares: int = 0          # gated threshold compares
    fires: int = 0
    transposed_read_cycles: int = 0
    transposed_write_cycles: int = 0

    @property
    def total_cycles(self) -> int:
        return sum(self.per_tile_cycles)

    @property
    def wall_time_ns(self) -> float:
        """Sequential (non-pipelined) latency of everything simulated."""
        return self.total_cycles * self.clock_ns

    def merge(self, other: "SimStats") -> "SimStats":
        if self.clock_ns and other.clock_ns and self.clock_ns != other.clock_ns:
            raise SimulationError("cannot merge stats from different clocks")
        if not self.per_tile_cycles:
            self.per_tile_cycles = [0] * len(other.per_tile_cycles)
        self.clock_ns = self.clock_ns or other.clock_ns
        self.n_samples += other.n_samples
        for t, c in enumerate(other.per_tile_cycles):
            self.per_tile_cycles[t] += c
        self.bottleneck_cycles += other.bottleneck_cycles
        self.grants += other.grants
        for k in range(MAX_PORTS):
            self.port_grants[k] += other.port_grants[k]
        self.arbiter_cycles += other.arbiter_cycles
        self.port_bit_reads += other.port_bit_reads
        self.neuron_adds += other.neuron_adds
        self.fire_compares += other.fire_compares
        self.fires += other.fires
        self.transposed_read_cycles += other.transposed_read_cycles
        self.transposed_write_cycles += other.transposed_write_cycles
        return self

    def counters(self) -> dict:
        return {
            "grants": self.grants,
            "port_grants": list(self.port_grants),
            "arbiter_cycles": self.arbiter_cycles,
            "port_bit_reads": self.port_bit_reads,
            "neuron_adds": self.neuron_adds,
            "fire_compares": self.fire_compares,
            "fires": self.fires,
            "transposed_read_cycles": self.transposed_read_cycles,
            "transposed_write_cycles": self.transposed_write_cycles,
        }


# ---------------------------------------------------------------------------
# Hardware composition
# ---------------------------------------------------------------------------

def _bits_to_mask(bits: np.ndarray) -> int:
    mask = 0
    for i in np.flatnonzero(bits):
        mask |= 1 << int(i)
    return mask


class RowBlock:
    """Up to 128 input rows with their own request register and arbiter."""

    def __init__(self, offset: int, width: int, arrays: list[SynapseArray]):
        self.offset = offset
        self.width = width
        self.arrays = arrays          # one per column strip
        self.requests = 0             # bitmask, bit i = local row i

    @property
    def pending(self) -> int:
        return self.requests.bit_count()

    def latch(self, bits: np.ndarray) -> int:
        self.requests = _bits_to_mask(bits)
        return self.pending


class Tile:
    """One layer: row blocks feeding a shared neuron bank."""

    def __init__(self, index: int, row_blocks: list[RowBlock],
                 bank: NeuronBank, variant: CellVariant):
        self.index = index
        self.row_blocks = row_blocks
        self.bank = bank
        self.variant = variant
        self.in_width = sum(b.width for b in row_blocks)
        self.out_width = bank.size

    @property
    def pending(self) -> bool:
        return any(b.requests for b in self.row_blocks)

    def latch(self, spikes: np.ndarray) -> int:
        """Load a sample's input spikes; clears all membrane state."""
        if spikes.shape != (self.in_width,):
            raise ValidationError(
                f"tile {self.index} expects {self.in_width} input bits, "
                f"got {spikes.shape}")
        self.bank.reset()
        return sum(b.latch(spikes[b.offset:b.offset + b.width])
                   for b in self.row_blocks)

    def step(self, stats: SimStats) -> list[int]:
        """Advance one clock cycle; returns globally-indexed granted rows."""
        p = self.variant.inference_ports
        granted_global = []
        stats.arbiter_cycles += len(self.row_blocks)
        for block in self.row_blocks:
            result = arbitrate(BitVector(block.width, block.requests), p)
            if result.no_request:
                continue
            strips = [array.read_rows(result) for array in block.arrays]
            port_bits = np.concatenate([bits for bits, _ in strips], axis=1)
            valids = strips[0][1]
            self.bank.accumulate(port_bits, valids)
            block.requests = result.residual.value
            for k, row in enumerate(result.granted_indices()):
                if row is not None:
                    stats.port_grants[k] += 1
                    granted_global.append(block.offset + row)
            n_valid = int(valids.sum())
            stats.grants += n_valid
            stats.port_bit_reads += n_valid * self.out_width
            stats.neuron_adds += n_valid * self.out_width
        return granted_global


class Network:
    """Cascaded tiles plus the config/variant they were built for."""

    def __init__(self, tiles: list[Tile], cfg: HardwareConfig,
                 params: VariantParams):
        self.tiles = tiles
        self.cfg = cfg
        self.params = params

    @property
    def variant(self) -> CellVariant:
        return self.params.cell

    @property
    def topology(self) -> list[int]:
        return [self.tiles[0].in_width] + [t.out_width for t in self.tiles]

    def n_arbiters(self) -> int:
        return sum(len(t.row_blocks) for t in self.tiles)

    def total_cells(self) -> int:
        return sum(a.rows * a.cols
                   for t in self.tiles
                   for b in t.row_blocks
                   for a in b.arrays)

    def new_stats(self) -> SimStats:
        return SimStats(clock_ns=self.params.clock_period_ns,
                        per_tile_cycles=[0] * len(self.tiles))


def build_network(model: SnnModel, cfg: HardwareConfig,
                  variant: str | CellVariant) -> Network:
    """Map a converted model onto tiles of <=128x128 arrays.

    Each layer becomes one tile with ceil(in/128) row blocks x
    ceil(out/128) column strips; weight bits map one-to-one and each
    neuron gets its integer threshold.
    """
    if not isinstance(model, SnnModel):
        raise ValidationError(
            "build_network needs a converted (snn) model; run bnn_to_snn or "
            "load an 'snn' file")
    name = variant.name if isinstance(variant, CellVariant) else variant
    params = cfg.variant(name)
    cell = params.cell

    tiles = []
    for li, layer in enumerate(model.layers):
        if layer.rows > VMEM_LIMIT:
            raise ValidationError(
                f"layer {li} fan-in {layer.rows} exceeds the membrane "
                f"register range (+-{VMEM_LIMIT})")
        col_edges = list(range(0, layer.cols, cfg.max_cols)) + [layer.cols]
        blocks = []
        for r0 in range(0, layer.rows, cfg.max_rows):
            r1 = min(r0 + cfg.max_rows, layer.rows)
            arrays = [SynapseArray(layer.weight_bits[r0:r1, c0:c1], cell,
                                   cfg.max_rows, cfg.max_cols)
                      for c0, c1 in zip(col_edges[:-1], col_edges[1:])]
            blocks.append(RowBlock(r0, r1 - r0, arrays))
        tiles.append(Tile(li, blocks, NeuronBank(layer.thresholds), cell))

    for a, b in zip(tiles[:-1], tiles[1:]):
        if a.out_width != b.in_width:
            raise ValidationError(
                f"tile {a.index} feeds {a.out_width} spikes into tile "
                f"{b.index} expecting {b.in_width}")
    return Network(tiles, cfg, params)


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------

def run_inference(network: Network, input_spikes: np.ndarray,
                  stats: SimStats | None = None) -> tuple[int, SimStats]:
    """Simulate one sample; returns (predicted class, stats).

    Tiles run in sequence: latch, step until every request register drains,
    fire-check (hidden tiles) and hand the spikes on.  The final tile's
    prediction is argmax over membrane potentials (ties to the lowest
    class index); its neurons never fire.
    """
    if stats is None:
        stats = network.new_stats()
    spikes = np.asarray(input_spikes).astype(np.uint8, copy=False)
    cfg = network.cfg
    overhead = cfg.pipeline_drain_cycles + cfg.fire_handoff_cycles

    sample_cycles = []
    source_bank = None
    for tile in network.tiles:
        latched = tile.latch(spikes)
        steps = 0
        granted = 0
        while tile.pending:
            rows = tile.step(stats)
            granted += len(rows)
            if source_bank is not None:
                mask = np.zeros(source_bank.size, dtype=bool)
                mask[rows] = True
                source_bank.grant_ack(mask)
            steps += 1
        if granted != latched:
            raise SimulationError(
                f"tile {tile.index} consumed {granted} of {latched} spikes")
        if source_bank is not None and source_bank.request.any():
            raise SimulationError(
                f"tile {tile.index - 1} has ungranted spike requests left")

        cycles = steps + overhead
        stats.per_tile_cycles[tile.index] += cycles
        sample_cycles.append(cycles)

        if tile is network.tiles[-1]:
            if np.abs(tile.bank.v_mem).max(initial=0) > VMEM_LIMIT:
                raise SimulationError("output membrane exceeded register range")
            prediction = int(np.argmax(tile.bank.v_mem))
        else:
            fired = tile.bank.fire_check(r_empty=True)
            stats.fire_compares += tile.out_width
            stats.fires += int(fired.sum())
            spikes = fired.astype(np.uint8)
            source_bank = tile.bank

    stats.n_samples += 1
    stats.bottleneck_cycles += max(sample_cycles)
    return prediction, stats


@dataclass
class DatasetResult:
    predictions: np.ndarray
    accuracy: float
    stats: SimStats


def run_dataset(network: Network, samples: np.ndarray,
                labels: np.ndarray | None = None) -> DatasetResult:
    """Simulate samples in order; deterministic given inputs and config."""
    samples = np.asarray(samples)
    if samples.ndim != 2 or samples.shape[1] != network.tiles[0].in_width:
        raise ValidationError(
            f"samples must be (N, {network.tiles[0].in_width}) bits, "
            f"got {samples.shape}")
    stats = network.new_stats()
    predictions = np.empty(samples.shape[0], dtype=np.int64)
    for i in range(samples.shape[0]):
        predictions[i], _ = run_inference(network, samples[i], stats)
    accuracy = float("nan")
    if labels is not None:
        labels = np.asarray(labels)
        if labels.shape[0] != samples.shape[0]:
            raise ValidationError("label count does not match sample count")
        accuracy = float((predictions == labels).mean()) if len(labels) else 0.0
    return DatasetResult(predictions, accuracy, stats)
