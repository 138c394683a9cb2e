"""Arbiter correctness against brute-force oracles.

Two independent references are used:
  * a "p lowest set indices" oracle computed directly from the request bits,
  * a literal bit-by-bit emulation of the encoder subblock chain.
Exhaustive for short vectors, randomized for the full 128-bit width.
"""

import random

import pytest

from esam.bitvec import BitVector
from esam.arbiter import (
    arbitrate,
    arbitrate_tree,
    logic_depth,
    priority_encode,
)


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------

def oracle_lowest_indices(r: BitVector, p: int) -> list[int]:
    """The p highest-priority request indices, straight from the bit list."""
    return [i for i in range(r.n) if r.bit(i)][:p]


def chain_encode(r: BitVector) -> tuple[BitVector, bool, BitVector]:
    """Gate-accurate subblock chain: s[i+1] = s[i] | r[i], g = r & ~s."""
    s = 0
    g_bits = []
    r_bits = []
    for i in range(r.n):
        ri = r.bit(i)
        gi = ri & (1 - s)
        g_bits.append(gi)
        r_bits.append(ri & (1 - gi))
        s = s | ri
    return BitVector.from_bits(g_bits), s == 0, BitVector.from_bits(r_bits)


def check_result(r: BitVector, p: int, res) -> None:
    expected = oracle_lowest_indices(r, p)
    granted = [g for g in res.granted_indices() if g is not None]
    assert granted == expected
    assert list(res.valid) == [k < len(expected) for k in range(p)]
    for g, v in zip(res.grants, res.valid):
        assert g.popcount == (1 if v else 0)
    union = 0
    for g in res.grants:
        assert union & g.value == 0  # pairwise disjoint
        union |= g.value
    assert res.residual.value == r.value & ~union
    assert res.no_request == r.is_zero
    assert res.residual.popcount == r.popcount - sum(res.valid)


# ---------------------------------------------------------------------------
# priority_encode
# ---------------------------------------------------------------------------

def test_priority_encode_spec_vectors():
    g, nor, rp = priority_encode(BitVector.from_string("00000000"))
    assert (g.to_string(), nor, rp.to_string()) == ("00000000", True, "00000000")

    g, nor, rp = priority_encode(BitVector.from_string("01010001"))
    assert (g.to_string(), nor, rp.to_string()) == ("01000000", False, "00010001")

    g, nor, rp = priority_encode(BitVector.from_string("10000000"))
    assert (g.to_string(), nor, rp.to_string()) == ("10000000", False, "00000000")


@pytest.mark.parametrize("n", range(1, 13))
def test_priority_encode_matches_chain_exhaustive(n):
    for value in range(1 << n):
        r = BitVector(n, value)
        assert priority_encode(r) == chain_encode(r)


def test_priority_encode_never_regrants():
    rng = random.Random(7)
    for _ in range(500):
        r = BitVector(128, rng.getrandbits(128))
        seen = 0
        while not r.is_zero:
            g, _, r = priority_encode(r)
            assert g.value & seen == 0
            seen |= g.value


# ---------------------------------------------------------------------------
# arbitrate / arbitrate_tree
# ---------------------------------------------------------------------------

def test_arbitrate_spec_vectors():
    res = arbitrate(BitVector.from_string("01010001"), 2)
    assert res.granted_indices() == [1, 3]
    assert res.residual.to_string() == "00000001"

    res = arbitrate(BitVector.from_string("11110000"), 4)
    assert res.granted_indices() == [0, 1, 2, 3]
    assert res.residual.is_zero

    res = arbitrate(BitVector.from_string("00000001"), 4)
    assert res.granted_indices() == [7, None, None, None]
    assert list(res.valid) == [True, False, False, False]
    assert res.residual.is_zero


def test_arbitrate_port_range_checked():
    r = BitVector(8, 0x5A)
    for p in (0, 5, -1):
        with pytest.raises(ValueError):
            arbitrate(r, p)
        with pytest.raises(ValueError):
            arbitrate_tree(r, p, 4)
    with pytest.raises(ValueError):
        arbitrate_tree(r, 2, 1)


@pytest.mark.parametrize("n", range(1, 13))
def test_arbitrate_exhaustive_small_widths(n):
    for value in range(1 << n):
        r = BitVector(n, value)
        for p in range(1, 5):
            res = arbitrate(r, p)
            check_result(r, p, res)
            for base_width in (2, 4, 8):
                assert arbitrate_tree(r, p, base_width) == res


def test_arbitrate_randomized_128bit():
    rng = random.Random(2024)
    for _ in range(2000):
        r = BitVector(128, rng.getrandbits(128))
        for p in range(1, 5):
            res = arbitrate(r, p)
            check_result(r, p, res)
            assert arbitrate_tree(r, p, 16) == res


def test_tree_spec_vectors():
    r = BitVector.from_indices(128, [5, 70])
    res = arbitrate_tree(r, 2, 32)
    assert res.granted_indices() == [5, 70]

    res = arbitrate_tree(BitVector.ones(128), 4, 16)
    assert res.granted_indices() == [0, 1, 2, 3]


def test_repeated_arbitration_drains_in_ceil_popcount_over_p():
    rng = random.Random(99)
    for _ in range(200):
        r = BitVector(128, rng.getrandbits(128))
        p = rng.randint(1, 4)
        k = r.popcount
        cycles = 0
        cur = r
        while not cur.is_zero:
            cur = arbitrate(cur, p).residual
            cycles += 1
        assert cycles == -(-k // p)  # ceil(k / p)


# ---------------------------------------------------------------------------
# logic depth
# ---------------------------------------------------------------------------

def test_logic_depth_flat_and_tree():
    assert logic_depth(128) == 128
    assert logic_depth(128, 16) == 16 + 8
    assert logic_depth(8, 8) == 8 + 1  # tree never beats flat at one block


def test_logic_depth_tree_beats_flat_at_128():
    for base_width in range(4, 65):
        assert logic_depth(128, base_width) < logic_depth(128)


def test_logic_depth_validation():
    with pytest.raises(ValueError):
        logic_depth(0)
    with pytest.raises(ValueError):
        logic_depth(128, 1)
