"""FAT / PAT / NAT classification of nodes and coalitions.

A view is what a set of honest-but-curious nodes logged during a run. Its
level is

* FAT when every bit of the end-to-end secret is determined,
* NAT when the secret's posterior equals its prior and the view is
  statistically independent of the protocol's share material,
* PAT otherwise.

Share material is whatever pieces the protocol splits the secret into
(multipath fragments or shares, the decentralized halves). Chain forwarding
and the centralized mask protocol route no pieces, so for them only the
secret itself counts.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from ..errors import AnalysisError, ConfigurationError
from ..fabric import Entry
from ..protocols import ProtocolRun, ShamirLayout
from ..sharing import share_width
from ..symbolic import VarSpace
from .enumeration import DEFAULT_LIMIT_BITS, entropy_of_counts, enumerate_posterior, evaluate_table, polynomial_domain
from .gf2 import XorBasis, columns_of, intersection_dim, permute, project
from .linear import LinearView, Row, entry_rows, span_closure

LEVELS = ("NAT", "PAT", "FAT")
ENGINES = ("auto", "linear", "enumeration")


@dataclass(frozen=True)
class TrustVerdict:
    level: str
    determined_bits: int
    secret_bits: int
    posterior_entropy_bits: float | None
    correlation_witness: str | None
    engine: str

    def __post_init__(self) -> None:
        if self.level not in LEVELS:
            raise ValueError(f"unknown level {self.level!r}")
        if (self.level == "FAT") != (self.determined_bits == self.secret_bits):
            raise ValueError("FAT exactly when every secret bit is determined")
        if self.level == "NAT" and (self.determined_bits or self.correlation_witness):
            raise ValueError("a NAT view determines nothing and has no witness")

    def rank(self) -> int:
        return LEVELS.index(self.level)

    def to_dict(self) -> dict:
        return asdict(self)


def _level(all_determined: bool, uniform: bool, independent: bool) -> str:
    if all_determined:
        return "FAT"
    if uniform and independent:
        return "NAT"
    return "PAT"


def _rows(entries: Sequence[Entry], space: VarSpace) -> list[list[Row]]:
    return [entry_rows(e, space) for e in entries]


def _describe(entry: Entry) -> str:
    where = f" from {entry.peer}" if entry.role == "received" and entry.peer else ""
    tap = " (tapped)" if entry.tapped else ""
    return f"{entry.role} {entry.label}{where}{tap}"


def _material_rows(run: ProtocolRun) -> list[int]:
    out: list[int] = []
    for _, e in run.material:
        out.extend(run.topology.space.rows(e))
    return out


# -- linear engine ---------------------------------------------------------------------


def linear_verdict(run: ProtocolRun, entries: Sequence[Entry]) -> TrustVerdict:
    space = run.topology.space
    per_entry = _rows(entries, space)
    view = LinearView(space, [r for rows in per_entry for r in rows])
    targets = space.rows(run.secret_expr)
    solved = span_closure(view, targets)
    truth = space.evaluate(run.secret_expr)
    for i, value in solved.items():
        if truth.bit(i) != value:
            raise AnalysisError(f"unsound deduction of secret bit {i}")
    masks = [r.mask for r in view.rows]
    shared = intersection_dim(masks, targets)
    entropy = float(len(targets) - shared)

    material = _material_rows(run)
    witness = None
    if material:
        vb, vmb = XorBasis(), XorBasis(material)
        m_rank = vmb.rank
        for entry, rows in zip(entries, per_entry):
            for r in rows:
                vb.insert(r.mask)
                vmb.insert(r.mask)
            if vb.rank + m_rank - vmb.rank > 0:
                witness = _describe(entry)
                break
    level = _level(len(solved) == len(targets), shared == 0, witness is None)
    return TrustVerdict(level, len(solved), len(targets), entropy, witness, "linear")


# -- enumeration engine -----------------------------------------------------------------


def enumeration_verdict(run: ProtocolRun, entries: Sequence[Entry], limit_bits: int = DEFAULT_LIMIT_BITS) -> TrustVerdict:
    space = run.topology.space
    per_entry = _rows(entries, space)
    eqs = [(r.mask, r.value) for rows in per_entry for r in rows]
    targets = space.rows(run.secret_expr)
    material = _material_rows(run)
    post = enumerate_posterior(eqs, targets, material, limit_bits=limit_bits)
    witness = None
    if not post.independent:
        prefix: list[tuple[int, int]] = []
        for entry, rows in zip(entries, per_entry):
            prefix.extend((r.mask, r.value) for r in rows)
            if not enumerate_posterior(prefix, targets, material, limit_bits=limit_bits).independent:
                witness = _describe(entry)
                break
    level = _level(post.determined_bits == len(targets), post.uniform, post.independent)
    return TrustVerdict(level, post.determined_bits, len(targets), round(post.entropy_bits, 9), witness, "enumeration")


# -- Shamir engine ----------------------------------------------------------------------


def _shamir_columns(space: VarSpace, layout: ShamirLayout, secret_name: str) -> list[tuple[int, int]]:
    """(column, chunk) for every column fixed by the sharing polynomials."""
    out = []
    s = space[secret_name]
    for c, (lo, hi) in enumerate(layout.chunks()):
        out.extend((s.column(b), c) for b in range(lo, hi))
    width = share_width(layout.q)
    for name in layout.share_vars:
        v = space[name]
        out.extend((v.column(b), b // width) for b in range(v.length))
    return out


def _chunk_bits(layout: ShamirLayout, chunk: int, coeffs: np.ndarray) -> np.ndarray:
    """Per polynomial: the secret chunk's bits, then each share's encoded bits."""
    lo, hi = layout.chunks()[chunk]
    w = hi - lo
    width = share_width(layout.q)
    cols = [(coeffs[:, 0] >> (w - 1 - b)) & 1 for b in range(w)]
    for i in range(1, layout.k + 1):
        y = evaluate_table(coeffs, i, layout.q)
        cols.extend((y >> (width - 1 - b)) & 1 for b in range(width))
    return np.stack(cols, axis=1)


def shamir_verdict(run: ProtocolRun, entries: Sequence[Entry]) -> TrustVerdict:
    """Eliminate the link keys, then enumerate polynomials against what is left."""
    layout = run.shamir
    assert layout is not None
    space = run.topology.space
    (secret_name,) = run.secret_expr.names
    poly_cols = _shamir_columns(space, layout, secret_name)
    chunk_of = dict(poly_cols)
    keep = [c for c, _ in poly_cols]
    per_entry = _rows(entries, space)
    eqs = [(r.mask, r.value) for rows in per_entry for r in rows]
    residual = project(eqs, keep)

    by_chunk: dict[int, list[tuple[int, int]]] = {}
    for mask, value in residual:
        chunks = {chunk_of[c] for c in columns_of(mask)}
        if len(chunks) != 1:
            raise AnalysisError("view couples several Shamir chunks; joint enumeration is out of range")
        by_chunk.setdefault(chunks.pop(), []).append((mask, value))

    width = share_width(layout.q)
    s = space[secret_name]
    entropy, determined, uniform = 0.0, 0, True
    for c, (lo, hi) in enumerate(layout.chunks()):
        w = hi - lo
        coeffs = polynomial_domain(layout.q, layout.t, nonzero_leading=layout.nonzero_leading, secret_bound=1 << w)
        bits = _chunk_bits(layout, c, coeffs)
        local = {s.column(lo + b): b for b in range(w)}
        for i, name in enumerate(layout.share_vars):
            v = space[name]
            for b in range(width):
                local[v.column(c * width + b)] = w + i * width + b
        ok = np.ones(len(coeffs), dtype=bool)
        for mask, value in by_chunk.get(c, []):
            idx = [local[col] for col in columns_of(mask)]
            ok &= (bits[:, idx].sum(axis=1) & 1) == value
        if not ok.any():
            raise AnalysisError("no polynomial reproduces the observed view")
        prior = np.bincount(coeffs[:, 0], minlength=1 << w)
        post = np.bincount(coeffs[ok, 0], minlength=1 << w)
        entropy += entropy_of_counts(post)
        if not np.array_equal(post * prior.sum(), prior * post.sum()):
            uniform = False
        secret_bits = bits[ok][:, :w]
        determined += int(np.all(secret_bits == secret_bits[0], axis=0).sum())

    truth = space.value(secret_name)
    witness = None
    share_cols = [c for name in layout.share_vars for c in space.columns([name])]
    basis = XorBasis()
    order = share_cols + sorted(set(range(space.width)) - set(share_cols))
    fwd = {col: i for i, col in enumerate(order)}
    for entry, rows in zip(entries, per_entry):
        hit = False
        for r in rows:
            lead = basis.insert(permute(r.mask, fwd))
            if lead is not None and lead < len(share_cols):
                hit = True
        if hit:
            witness = _describe(entry)
            break
    level = _level(determined == truth.length, uniform, witness is None)
    return TrustVerdict(level, determined, truth.length, round(entropy, 9), witness, "shamir-enumeration")


# -- public entry points -----------------------------------------------------------------


def classify_entries(run: ProtocolRun, entries: Sequence[Entry], engine: str = "auto") -> TrustVerdict:
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}")
    if run.shamir is not None:
        if engine == "linear":
            raise AnalysisError("Shamir payloads are field arithmetic; the linear engine cannot judge them")
        return shamir_verdict(run, entries)
    if engine == "enumeration":
        return enumeration_verdict(run, entries)
    return linear_verdict(run, entries)


def classify_node(run: ProtocolRun, node: str, engine: str = "auto") -> TrustVerdict:
    if node not in run.topology.nodes:
        raise ConfigurationError(f"unknown node {node!r}")
    return classify_entries(run, run.topology.transcripts[node].entries, engine)


def classify_coalition(run: ProtocolRun, members: Iterable[str], engine: str = "auto") -> TrustVerdict:
    members = list(dict.fromkeys(members))
    unknown = [m for m in members if m not in run.topology.nodes]
    if unknown:
        raise ConfigurationError(f"unknown coalition member(s): {', '.join(unknown)}")
    entries = [e for m in members for e in run.topology.transcripts[m].entries]
    return classify_entries(run, entries, engine)


def breaking_coalition(run: ProtocolRun, max_size: int = 6) -> tuple[str, ...] | None:
    """Smallest set of relays whose pooled views reach FAT, searched by increasing size."""
    relays = sorted(set(run.intermediates))
    for size in range(1, min(len(relays), max_size) + 1):
        for combo in combinations(relays, size):
            if classify_coalition(run, combo).level == "FAT":
                return combo
    return None
