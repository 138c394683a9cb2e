"""Fixed-priority spike arbitration.

A 1-port arbiter is a fixed priority encoder: it grants the pending request
with the lowest index (leftmost bit) and masks it out of the request vector.
A p-port arbiter cascades p of these, each stage encoding the residual of
the previous one, so up to p requests are granted per clock cycle.

The encoder's gate-level structure is a chain of identical subblocks
carrying a blocking signal s:

    s[i+1] = s[i] | r[i]        (s[0] = 0)
    g[i]   = r[i] & ~s[i]
    r'[i]  = r[i] & ~g[i]
    no_request = ~s[n]

In integer form s is the exclusive prefix-OR of r, so g = r & ~(prefix_or)
reduces to isolating the lowest set bit: r & -r.  `priority_encode` uses
that closed form; the chain is spelled out bit-by-bit in the test suite as
an independent reference.

The chain makes the flat encoder's critical path grow linearly with the
vector width.  `arbitrate_tree` models the mitigation: short base encoders
over fixed-width blocks plus one top-level encoder arbitrating between
non-empty blocks.  Its grants are bit-identical to the flat encoder's;
only the logic depth (see `logic_depth`) differs.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bitvec import BitVector

MAX_PORTS = 4


@dataclass(frozen=True)
class ArbiterResult:
    """Outcome of one arbitration cycle.

    grants[k] is one-hot if port k granted a request and all-zero otherwise;
    valid[k] mirrors that.  residual is the request vector with every
    granted bit masked out.  no_request is true iff the input vector was
    empty (nothing granted on any port).
    """

    grants: tuple[BitVector, ...]
    valid: tuple[bool, ...]
    residual: BitVector
    no_request: bool

    def granted_indices(self) -> list[int | None]:
        """Per-port granted row index (None for idle ports)."""
        return [g.lowest_set_index() if v else None
                for g, v in zip(self.grants, self.valid)]


def priority_encode(request: BitVector) -> tuple[BitVector, bool, BitVector]:
    """Grant the highest-priority (lowest-index) pending request.

    Returns (grant, no_request, residual).  grant is one-hot, or all-zero
    with no_request set when the request vector is empty; residual is the
    request vector with the granted bit cleared.
    """
    r = request.value
    g = r & -r  # lowest set bit == r & ~(exclusive prefix-OR of r)
    return (request.with_value(g), r == 0, request.with_value(r & ~g))


def arbitrate(request: BitVector, p: int) -> ArbiterResult:
    """Run the p-port cascaded arbiter for one clock cycle.

    Port k encodes the residual left by port k-1, so the union of grants is
    the p lowest set indices of the request vector (all of them if fewer
    than p are pending).
    """
    if not 1 <= p <= MAX_PORTS:
        raise ValueError(f"port count must be in 1..{MAX_PORTS}, got {p}")
    grants = []
    valid = []
    residual = request
    for _ in range(p):
        grant, no_req, residual = priority_encode(residual)
        grants.append(grant)
        valid.append(not no_req)
    return ArbiterResult(tuple(grants), tuple(valid), residual,
                         no_request=request.is_zero)


def _tree_encode(request: BitVector, base_width: int) -> tuple[BitVector, bool, BitVector]:
    """Priority-encode via base encoders per block + one top-level encoder.

    Blocks of base_width bits are encoded independently; the top-level
    encoder picks the first non-empty block, and its base encoder's grant is
    the winner.  Output is identical to the flat encoder by construction.
    """
    n = request.n
    n_blocks = (n + base_width - 1) // base_width
    block_mask = (1 << base_width) - 1

    block_pending = 0
    block_grants = []
    for b in range(n_blocks):
        block_bits = (request.value >> (b * base_width)) & block_mask
        block_grants.append(block_bits & -block_bits)
        if block_bits:
            block_pending |= 1 << b

    if block_pending == 0:
        return request.with_value(0), True, request

    top_grant = block_pending & -block_pending
    winner = top_grant.bit_length() - 1
    g = block_grants[winner] << (winner * base_width)
    return (request.with_value(g), False, request.with_value(request.value & ~g))


def arbitrate_tree(request: BitVector, p: int, base_width: int) -> ArbiterResult:
    """p-port arbitration with each 1-port stage built as an encoder tree.

    Functionally equivalent to `arbitrate`; masking between cascaded stages
    is applied on the full-width residual, exactly as in the flat design.
    """
    if not 1 <= p <= MAX_PORTS:
        raise ValueError(f"port count must be in 1..{MAX_PORTS}, got {p}")
    if base_width < 2:
        raise ValueError(f"base encoder width must be >= 2, got {base_width}")
    grants = []
    valid = []
    residual = request
    for _ in range(p):
        grant, no_req, residual = _tree_encode(residual, base_width)
        grants.append(grant)
        valid.append(not no_req)
    return ArbiterResult(tuple(grants), tuple(valid), residual,
                         no_request=request.is_zero)


def logic_depth(n: int, base_width: int | None = None) -> int:
    """Subblock count on the encoder's critical path.

    Flat encoder: one subblock per bit of the s-chain, so depth n.  Tree:
    the base chain (base_width) plus the top-level chain over block flags
    (ceil(n / base_width)).  Units are subblocks, not time; stage timing
    lives in the hardware config.
    """
    if n < 1:
        raise ValueError(f"encoder width must be >= 1, got {n}")
    if base_width is None:
        return n
    if base_width < 2:
        raise ValueError(f"base encoder width must be >= 2, got {base_width}")
    return base_width + (n + base_width - 1) // base_width
