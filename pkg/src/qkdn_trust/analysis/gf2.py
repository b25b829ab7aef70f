"""GF(2) elimination over int bitsets.

Rows are Python ints (bit c set = column c present) with an optional
constant bit, so a row can stand for an affine equation ``<mask, x> = const``.
"""

from __future__ import annotations

from typing import Iterable, Sequence


class XorBasis:
    """Echelon basis keyed by each row's leading (highest) column.

    Inserting never disturbs existing rows, so the set of leading columns
    only grows; that makes incremental span questions cheap.
    """

    def __init__(self, rows: Iterable[int] = ()) -> None:
        self._rows: dict[int, tuple[int, int]] = {}
        for r in rows:
            self.insert(r)

    def reduce(self, mask: int, const: int = 0) -> tuple[int, int]:
        while mask:
            lead = mask.bit_length() - 1
            row = self._rows.get(lead)
            if row is None:
                return mask, const
            mask ^= row[0]
            const ^= row[1]
        return 0, const

    def insert(self, mask: int, const: int = 0) -> int | None:
        """Add a row; returns its new leading column, or None if it was already in the span."""
        mask, const = self.reduce(mask, const)
        if not mask:
            return None
        lead = mask.bit_length() - 1
        self._rows[lead] = (mask, const)
        return lead

    def contains(self, mask: int) -> bool:
        return self.reduce(mask)[0] == 0

    def solve(self, mask: int) -> int | None:
        """Value of the functional ``mask`` forced by the equations, or None if undetermined."""
        rest, const = self.reduce(mask)
        return const if rest == 0 else None

    @property
    def rank(self) -> int:
        return len(self._rows)

    def rows(self) -> list[tuple[int, int]]:
        return [self._rows[k] for k in sorted(self._rows)]

    def copy(self) -> XorBasis:
        out = XorBasis()
        out._rows = dict(self._rows)
        return out


def rank(rows: Iterable[int]) -> int:
    return XorBasis(rows).rank


def intersection_dim(a: Sequence[int], b: Sequence[int]) -> int:
    """dim(span a ∩ span b) = rank a + rank b - rank(a ∪ b)."""
    return rank(a) + rank(b) - rank([*a, *b])


def columns_of(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def permute(mask: int, mapping: dict[int, int]) -> int:
    out = 0
    while mask:
        low = mask & -mask
        out |= 1 << mapping[low.bit_length() - 1]
        mask ^= low
    return out


def project(rows: Iterable[tuple[int, int]], keep: Sequence[int]) -> list[tuple[int, int]]:
    """Affine constraints the equations impose on the ``keep`` columns alone.

    All other columns are eliminated first by giving them the highest
    positions; leftover rows whose leading column is a kept one mention only
    kept columns and generate the projection.
    """
    rows = list(rows)
    cols: set[int] = set()
    for m, _ in rows:
        cols.update(columns_of(m))
    keep_set = set(keep)
    order = list(keep) + sorted(cols - keep_set)
    fwd = {c: i for i, c in enumerate(order)}
    back = {i: c for c, i in fwd.items()}
    basis = XorBasis()
    for m, v in rows:
        basis.insert(permute(m, fwd), v)
    n_keep = len(keep)
    return [(permute(m, back), v) for m, v in basis.rows() if m.bit_length() - 1 < n_keep]
