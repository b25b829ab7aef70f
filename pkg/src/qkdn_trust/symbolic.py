"""Symbolic bookkeeping for protocol values.

Every primitive random value in a run (the secret, party randomness, share
payloads, link keys) is declared once in a :class:`VarSpace` together with
its true value. Derived values carry an :class:`Expr`: a concatenation of
segments, each segment the XOR of whole, equal-length primitives. That is
enough for every construction simulated here, and it maps one-to-one onto
GF(2) rows, one row per bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .bits import BitString

KINDS = ("secret", "randomness", "share", "link_key")


@dataclass(frozen=True)
class Var:
    name: str
    length: int
    kind: str
    offset: int

    def column(self, bit: int) -> int:
        return self.offset + bit


@dataclass(frozen=True)
class Expr:
    segments: tuple[tuple[frozenset[str], int], ...]

    @classmethod
    def var(cls, name: str, length: int) -> Expr:
        return cls(((frozenset({name}), length),))

    @property
    def length(self) -> int:
        return sum(n for _, n in self.segments)

    @property
    def names(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for terms, _ in self.segments:
            out |= terms
        return out

    def __xor__(self, other: Expr) -> Expr:
        if [n for _, n in self.segments] != [n for _, n in other.segments]:
            raise ValueError("xor of expressions with different segment layouts")
        return Expr(tuple((a ^ b, n) for (a, n), (b, _) in zip(self.segments, other.segments)))

    def __add__(self, other: Expr) -> Expr:
        return Expr(self.segments + other.segments)

    def is_single(self, name: str) -> bool:
        return len(self.segments) == 1 and self.segments[0][0] == frozenset({name})

    def render(self) -> str:
        def seg(terms: frozenset[str]) -> str:
            return "⊕".join(sorted(terms)) if terms else "0"

        return "∥".join(seg(t) for t, _ in self.segments)


class VarSpace:
    """Registry of primitive unknowns and their true values for one run."""

    def __init__(self) -> None:
        self._vars: dict[str, Var] = {}
        self._values: dict[str, BitString] = {}
        self.width = 0

    def declare(self, name: str, value: BitString, kind: str) -> Expr:
        if kind not in KINDS:
            raise ValueError(f"unknown variable kind {kind!r}")
        if name in self._vars:
            raise ValueError(f"variable {name!r} declared twice")
        self._vars[name] = Var(name, value.length, kind, self.width)
        self._values[name] = value
        self.width += value.length
        return Expr.var(name, value.length)

    def __contains__(self, name: str) -> bool:
        return name in self._vars

    def __getitem__(self, name: str) -> Var:
        return self._vars[name]

    def variables(self) -> list[Var]:
        return list(self._vars.values())

    def value(self, name: str) -> BitString:
        return self._values[name]

    def values(self) -> dict[str, BitString]:
        return dict(self._values)

    def columns(self, names: Iterable[str]) -> list[int]:
        cols = []
        for name in names:
            var = self._vars[name]
            cols.extend(range(var.offset, var.offset + var.length))
        return cols

    def rows(self, expr: Expr) -> list[int]:
        """One GF(2) column mask per bit of ``expr``, most significant bit first."""
        rows = []
        for terms, length in expr.segments:
            for bit in range(length):
                mask = 0
                for name in terms:
                    var = self._vars[name]
                    if var.length != length:
                        raise ValueError(f"{name} has {var.length} bits, segment has {length}")
                    mask ^= 1 << var.column(bit)
                rows.append(mask)
        return rows

    def evaluate(self, expr: Expr) -> BitString:
        value = total = 0
        for terms, length in expr.segments:
            acc = 0
            for name in terms:
                acc ^= self._values[name].value
            value = (value << length) | acc
            total += length
        return BitString(value, total)

    def column_value(self, column: int) -> int:
        for var in self._vars.values():
            if var.offset <= column < var.offset + var.length:
                return self._values[var.name].bit(column - var.offset)
        raise IndexError(column)

    def assignment(self) -> int:
        """The true value of every column packed into one int."""
        out = 0
        for var in self._vars.values():
            for bit in range(var.length):
                if self._values[var.name].bit(bit):
                    out |= 1 << var.column(bit)
        return out
