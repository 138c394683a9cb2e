"""Integrate-and-fire neurons with validity-gated accumulation.

Each neuron keeps a signed membrane potential, a threshold, and an output
request flag.  Per cycle the sensed port bits are decoded to +1/-1 and
summed into the membrane; a port's contribution is gated by its validity
flag so an idle port is never read as a spurious '+1'.  Once the tile's
request vector is empty the membrane is compared against the threshold
(>= semantics); on fire the request flag is raised and the membrane resets
to zero (no residual carry-over).  A downstream grant clears the flag.

`Neuron` carries the per-neuron semantics; `NeuronBank` is the vectorized
form the engine uses, with identical behaviour (cross-checked in tests).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import SimulationError

# Membrane register width (signed).  11 bits cover +-1023, enough for the
# 768-input first layer; building a network whose fan-in exceeds this is an
# error rather than silent wrap-around.
VMEM_BITS = 11
VMEM_LIMIT = (1 << (VMEM_BITS - 1)) - 1


@dataclass(frozen=True)
class Neuron:
    """State of a single integrate-and-fire neuron."""

    v_mem: int = 0
    v_th: int = 0
    request: int = 0  # pending output spike, 0/1


def accumulate(state: Neuron, bits, valids) -> Neuron:
    """Add the +-1 decode of each valid port bit to the membrane."""
    if len(bits) != len(valids):
        raise ValueError(f"{len(bits)} bits for {len(valids)} validity flags")
    delta = sum(2 * int(b) - 1 for b, v in zip(bits, valids) if v)
    return replace(state, v_mem=state.v_mem + delta)


def fire_check(state: Neuron, r_empty: bool) -> tuple[Neuron, bool]:
    """Threshold compare, enabled only once all tile requests are served.

    Fires when v_mem >= v_th; firing raises the request flag and resets the
    membrane to zero.
    """
    if not r_empty or state.v_mem < state.v_th:
        return state, False
    return replace(state, v_mem=0, request=1), True


def grant_ack(state: Neuron, granted: int) -> Neuron:
    """Clear the request flag once the next tile grants the spike."""
    return replace(state, request=0) if granted else state


class NeuronBank:
    """Vectorized neuron array for one tile (one engine worker per tile)."""

    def __init__(self, thresholds):
        th = np.asarray(thresholds, dtype=np.int64)
        if th.ndim != 1:
            raise ValueError("thresholds must be a 1-D vector")
        self.v_th = th
        self.v_mem = np.zeros(th.shape[0], dtype=np.int64)
        self.request = np.zeros(th.shape[0], dtype=np.uint8)
        self.refire_attempts = 0  # diagnostic: fire while request still pending

    @property
    def size(self) -> int:
        return self.v_mem.shape[0]

    def reset(self):
        self.v_mem[:] = 0
        self.request[:] = 0

    def accumulate(self, port_bits: np.ndarray, valids: np.ndarray):
        """port_bits: (ports, size) sensed bits; valids: (ports,) flags."""
        if not valids.any():
            return
        live = port_bits[valids]
        # sum of (2b - 1) over valid ports
        self.v_mem += 2 * live.sum(axis=0, dtype=np.int64) - live.shape[0]

    def fire_check(self, r_empty: bool) -> np.ndarray:
        """Returns the fired mask; fired neurons reset to zero potential."""
        if not r_empty:
            return np.zeros(self.size, dtype=bool)
        if np.abs(self.v_mem).max(initial=0) > VMEM_LIMIT:
            raise SimulationError(
                f"membrane potential exceeded the {VMEM_BITS}-bit register")
        fired = self.v_mem >= self.v_th
        self.refire_attempts += int((fired & (self.request == 1)).sum())
        self.request[fired] = 1
        self.v_mem[fired] = 0
        return fired

    def grant_ack(self, granted_mask: np.ndarray):
        self.request[granted_mask] = 0
