"""Fixed-length bit strings, most-significant bit first."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator


@dataclass(frozen=True, slots=True)
class BitString:
    """An immutable sequence of ``length`` bits packed into an int.

    Bit 0 of the sequence is the most significant bit of ``value``.
    """

    value: int
    length: int

    def __post_init__(self) -> None:
        if self.length < 0:
            raise ValueError("negative bit length")
        if self.value < 0 or self.value >> self.length:
            raise ValueError(f"value does not fit in {self.length} bits")

    @classmethod
    def from_bits(cls, text: str) -> BitString:
        """Parse a literal such as ``"1011"``."""
        if any(ch not in "01" for ch in text):
            raise ValueError(f"not a bit literal: {text!r}")
        return cls(int(text, 2) if text else 0, len(text))

    @classmethod
    def from_hex(cls, text: str, length: int) -> BitString:
        return cls(int(text, 16) if text else 0, length)

    @classmethod
    def zeros(cls, length: int) -> BitString:
        return cls(0, length)

    def hex(self) -> str:
        """Lowercase hex, left-padded to the declared bit length."""
        width = (self.length + 3) // 4
        return format(self.value, "x").zfill(width) if width else ""

    def bits(self) -> str:
        return format(self.value, "b").zfill(self.length) if self.length else ""

    def bit(self, index: int) -> int:
        if not 0 <= index < self.length:
            raise IndexError(index)
        return (self.value >> (self.length - 1 - index)) & 1

    def __iter__(self) -> Iterator[int]:
        for i in range(self.length):
            yield self.bit(i)

    def __len__(self) -> int:
        return self.length

    def __xor__(self, other: BitString) -> BitString:
        if not isinstance(other, BitString):
            return NotImplemented
        if other.length != self.length:
            raise ValueError(f"xor of {self.length}-bit and {other.length}-bit strings")
        return BitString(self.value ^ other.value, self.length)

    def __add__(self, other: BitString) -> BitString:
        """Concatenation."""
        if not isinstance(other, BitString):
            return NotImplemented
        return BitString((self.value << other.length) | other.value, self.length + other.length)

    def slice(self, start: int, stop: int) -> BitString:
        if not 0 <= start <= stop <= self.length:
            raise IndexError((start, stop))
        width = stop - start
        return BitString((self.value >> (self.length - stop)) & ((1 << width) - 1), width)

    def __repr__(self) -> str:
        if self.length <= 32:
            return f"BitString('{self.bits()}')"
        return f"BitString(0x{self.hex()}, {self.length})"
