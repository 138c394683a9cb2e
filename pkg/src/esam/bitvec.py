"""Fixed-width bit vectors for spike request/grant bookkeeping.

Convention used throughout the project: index 0 is the leftmost bit and has
the highest arbitration priority.  Internally the bits live in a plain
integer with index i mapped to bit i of the integer, so bitwise masking and
popcounts stay cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator


@dataclass(frozen=True)
class BitVector:
    """An immutable vector of n bits; index 0 = leftmost = highest priority."""

    n: int
    value: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"bit vector length must be >= 1, got {self.n}")
        if self.value < 0 or self.value >> self.n:
            raise ValueError(f"value 0x{self.value:x} does not fit in {self.n} bits")

    # ---------------- constructors ----------------

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitVector":
        bits = list(bits)
        value = 0
        for i, b in enumerate(bits):
            if b not in (0, 1):
                raise ValueError(f"bit {i} is {b!r}, expected 0 or 1")
            value |= b << i
        return cls(len(bits), value)

    @classmethod
    def from_string(cls, s: str) -> "BitVector":
        """Parse e.g. "01010001"; the leftmost character is index 0."""
        return cls.from_bits(int(c) for c in s)

    @classmethod
    def from_indices(cls, n: int, indices: Iterable[int]) -> "BitVector":
        value = 0
        for i in indices:
            if not 0 <= i < n:
                raise ValueError(f"index {i} out of range for width {n}")
            value |= 1 << i
        return cls(n, value)

    @classmethod
    def zeros(cls, n: int) -> "BitVector":
        return cls(n, 0)

    @classmethod
    def ones(cls, n: int) -> "BitVector":
        return cls(n, (1 << n) - 1)

    # ---------------- queries ----------------

    def bit(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(f"index {i} out of range for width {self.n}")
        return (self.value >> i) & 1

    @property
    def popcount(self) -> int:
        return self.value.bit_count()

    @property
    def is_zero(self) -> bool:
        return self.value == 0

    def set_indices(self) -> list[int]:
        """Indices of set bits, in priority (ascending index) order."""
        return [i for i in range(self.n) if (self.value >> i) & 1]

    def lowest_set_index(self) -> int | None:
        if self.value == 0:
            return None
        return (self.value & -self.value).bit_length() - 1

    # ---------------- bit algebra ----------------

    def with_value(self, value: int) -> "BitVector":
        return BitVector(self.n, value)

    def __and__(self, other: "BitVector") -> "BitVector":
        self._check_width(other)
        return BitVector(self.n, self.value & other.value)

    def __or__(self, other: "BitVector") -> "BitVector":
        self._check_width(other)
        return BitVector(self.n, self.value | other.value)

    def __xor__(self, other: "BitVector") -> "BitVector":
        self._check_width(other)
        return BitVector(self.n, self.value ^ other.value)

    def __invert__(self) -> "BitVector":
        return BitVector(self.n, self.value ^ ((1 << self.n) - 1))

    def _check_width(self, other: "BitVector"):
        if self.n != other.n:
            raise ValueError(f"width mismatch: {self.n} vs {other.n}")

    # ---------------- misc ----------------

    def to_string(self) -> str:
        return "".join(str((self.value >> i) & 1) for i in range(self.n))

    def __iter__(self) -> Iterator[int]:
        return ((self.value >> i) & 1 for i in range(self.n))

    def __len__(self) -> int:
        return self.n

    def __str__(self) -> str:
        return self.to_string()
