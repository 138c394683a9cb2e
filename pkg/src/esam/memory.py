"""Functional model of one multiport synapse SRAM array.

Rows are read through the decoupled inference ports (one row per granted
port per cycle); the transposed port reads/writes whole columns for weight
updates.  Sensing inverts twice along the decoupled path (buffer transistor
off the complementary storage node), so functionally a port read simply
mirrors the stored bit.  Electrical behaviour (precharge scaling, sense
timing, write assist) is folded into the per-event energies of the config.

Every access bumps an event counter; energy accounting later is a pure
function of those counters.
"""

from __future__ import annotations

import numpy as np

from .arbiter import ArbiterResult
from .config import CellVariant
from .errors import ValidationError


class SynapseArray:
    """An R x C binary weight array with p decoupled read ports.

    Dimensions are fixed at construction; weight bits change only through
    `transposed_write_column`.  A cycle may serve at most
    `variant.inference_ports` row reads (the baseline 1RW cell reads through
    its single shared port, one row per cycle).
    """

    def __init__(self, weights, variant: CellVariant,
                 max_rows: int = 128, max_cols: int = 128):
        w = np.asarray(weights)
        if w.ndim != 2:
            raise ValidationError(f"weights must be 2-D, got shape {w.shape}")
        if not np.isin(w, (0, 1)).all():
            raise ValidationError("weights must be 0/1 bits")
        rows, cols = w.shape
        if not 1 <= rows <= max_rows:
            raise ValidationError(f"array rows {rows} outside 1..{max_rows}")
        if not 1 <= cols <= max_cols:
            raise ValidationError(f"array cols {cols} outside 1..{max_cols}")
        self._weights = w.astype(np.uint8)
        self._weights.flags.writeable = False
        self.variant = variant
        self.reads_per_port = [0] * max(variant.inference_ports, 1)
        self.transposed_reads = 0
        self.transposed_writes = 0

    @property
    def rows(self) -> int:
        return self._weights.shape[0]

    @property
    def cols(self) -> int:
        return self._weights.shape[1]

    @property
    def weights(self) -> np.ndarray:
        """Read-only view of the stored bits."""
        return self._weights

    # ------------------------------------------------------------------
    # Inference path: row-wise reads through the decoupled ports
    # ------------------------------------------------------------------

    def read_rows(self, grants: ArbiterResult) -> tuple[np.ndarray, np.ndarray]:
        """Serve one cycle of granted row reads.

        Returns (port_bits, valids): port_bits[k] is the weight row granted
        to port k, or all zeros for idle ports; valids mirrors the grant
        flags so downstream logic never mistakes an idle port for real data.
        """
        ports = self.variant.inference_ports
        indices = grants.granted_indices()
        if sum(1 for i in indices if i is not None) > ports:
            raise ValidationError(
                f"{sum(v for v in grants.valid)} grants exceed the "
                f"{ports} read port(s) of this array")
        port_bits = np.zeros((ports, self.cols), dtype=np.uint8)
        valids = np.zeros(ports, dtype=bool)
        for k, row in enumerate(indices[:ports]):
            if row is None:
                continue
            if row >= self.rows:
                raise ValidationError(
                    f"grant on port {k} targets row {row} of a "
                    f"{self.rows}-row array")
            port_bits[k] = self._weights[row]
            valids[k] = True
            self.reads_per_port[k] += self.cols
        return port_bits, valids

    # ------------------------------------------------------------------
    # Learning path: column-wise access through the transposed port
    # ------------------------------------------------------------------

    def column_access_cycles(self, col_mux_factor: int) -> int:
        """Cycles for one full-column access.

        With the transposed port, the shared sense amplifiers cover
        col_mux_factor rows each, so a column costs that many cycles
        regardless of height.  Without it (baseline 6T), every row must be
        visited through the single shared port.
        """
        if self.variant.has_transposed_rw:
            return col_mux_factor
        return self.rows

    def transposed_read_column(self, col: int, col_mux_factor: int = 4
                               ) -> tuple[np.ndarray, int]:
        """Read weights[:, col]; returns (bits, cycles)."""
        if not 0 <= col < self.cols:
            raise ValidationError(f"column {col} out of range for {self.cols} cols")
        cycles = self.column_access_cycles(col_mux_factor)
        self.transposed_reads += 1
        return self._weights[:, col].copy(), cycles

    def transposed_write_column(self, col: int, bits, col_mux_factor: int = 4) -> int:
        """Overwrite weights[:, col]; returns the cycle cost."""
        if not 0 <= col < self.cols:
            raise ValidationError(f"column {col} out of range for {self.cols} cols")
        b = np.asarray(bits)
        if b.shape != (self.rows,):
            raise ValidationError(
                f"column data has shape {b.shape}, expected ({self.rows},)")
        if not np.isin(b, (0, 1)).all():
            raise ValidationError("column data must be 0/1 bits")
        self._weights.flags.writeable = True
        self._weights[:, col] = b
        self._weights.flags.writeable = False
        self.transposed_writes += 1
        return self.column_access_cycles(col_mux_factor)
