"""Exact deduction over GF(2) for XOR and concatenation protocols."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ..errors import AnalysisError
from ..fabric import Entry, Transcript
from ..symbolic import VarSpace
from .gf2 import XorBasis


@dataclass(frozen=True)
class Row:
    mask: int
    value: int
    label: str


@dataclass
class LinearView:
    """One equation per observed bit, over the run's primitive columns."""

    space: VarSpace
    rows: list[Row] = field(default_factory=list)

    def basis_variables(self) -> list[tuple[str, int]]:
        return [(v.name, b) for v in self.space.variables() for b in range(v.length)]

    def basis(self) -> XorBasis:
        out = XorBasis()
        for r in self.rows:
            out.insert(r.mask, r.value)
        return out

    def equations(self) -> list[tuple[int, int]]:
        return [(r.mask, r.value) for r in self.rows]

    def consistent_with_truth(self) -> bool:
        truth = self.space.assignment()
        return all(((r.mask & truth).bit_count() & 1) == r.value for r in self.rows)


def entry_rows(entry: Entry, space: VarSpace) -> list[Row]:
    if entry.expr is None:
        raise AnalysisError(f"{entry.label} has no linear form; use the enumeration engine")
    masks = space.rows(entry.expr)
    return [Row(m, entry.value.bit(i), entry.label) for i, m in enumerate(masks)]


def view_entries(transcripts: Iterable[Transcript | Sequence[Entry]]) -> list[Entry]:
    out: list[Entry] = []
    for t in transcripts:
        out.extend(t.entries if isinstance(t, Transcript) else t)
    return out


def build_linear_view(transcripts: Iterable[Transcript | Sequence[Entry]], space: VarSpace) -> LinearView:
    view = LinearView(space)
    for entry in view_entries(transcripts):
        view.rows.extend(entry_rows(entry, space))
    return view


def span_closure(view: LinearView, targets: Sequence[int]) -> dict[int, int]:
    """Indices of ``targets`` lying in the row span, with the value the view forces on each."""
    basis = view.basis()
    out = {}
    for i, t in enumerate(targets):
        value = basis.solve(t)
        if value is not None:
            out[i] = value
    return out
