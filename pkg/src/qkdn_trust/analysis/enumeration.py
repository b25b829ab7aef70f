"""Exhaustive posterior computation at desk scale.

Two enumerators live here. :func:`enumerate_posterior` walks every
assignment of the unknown bits behind a linear view; it never eliminates,
so it serves as an oracle for the span engine. :func:`shamir_posterior`
walks every polynomial over a small prime field.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Sequence

import numpy as np

from ..errors import AnalysisError
from .gf2 import columns_of

DEFAULT_LIMIT_BITS = 16
MAX_POLYNOMIALS = 13**4


@dataclass(frozen=True)
class Posterior:
    entropy_bits: float
    uniform: bool
    determined_bits: int
    independent: bool
    unknown_bits: int


def entropy_of_counts(counts: np.ndarray) -> float:
    counts = counts[counts > 0]
    total = counts.sum()
    if total == 0:
        raise AnalysisError("empty posterior: the view is inconsistent")
    p = counts / total
    return float(abs(-(p * np.log2(p)).sum()))


def _components(rows: Sequence[int]) -> list[list[int]]:
    parent: dict[int, int] = {}

    def find(c: int) -> int:
        while parent[c] != c:
            parent[c] = parent[parent[c]]
            c = parent[c]
        return c

    for m in rows:
        cols = columns_of(m)
        for c in cols:
            parent.setdefault(c, c)
        for c in cols[1:]:
            ra, rb = find(cols[0]), find(c)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[int]] = {}
    for c in parent:
        groups.setdefault(find(c), []).append(c)
    return [sorted(g) for g in sorted(groups.values())]


def _local(masks: Sequence[int], cols: list[int]) -> np.ndarray:
    index = {c: i for i, c in enumerate(cols)}
    out = np.zeros((len(masks), len(cols)), dtype=np.int64)
    for r, m in enumerate(masks):
        for c in columns_of(m):
            out[r, index[c]] = 1
    return out


def _pattern_ids(bits: np.ndarray) -> np.ndarray:
    if bits.shape[1] == 0:
        return np.zeros(bits.shape[0], dtype=np.int64)
    _, inverse = np.unique(bits, axis=0, return_inverse=True)
    return inverse.reshape(-1)


def _independent(a: np.ndarray, b: np.ndarray) -> bool:
    """Exact test that the pattern variables ``a`` and ``b`` factorise under the uniform prior."""
    ia, ib = _pattern_ids(a), _pattern_ids(b)
    na, nb = ia.max() + 1, ib.max() + 1
    joint = np.bincount(ia * nb + ib, minlength=na * nb).reshape(na, nb)
    n = joint.sum()
    return bool(np.array_equal(joint * n, np.outer(joint.sum(1), joint.sum(0))))


def enumerate_posterior(
    view: Sequence[tuple[int, int]],
    target: Sequence[int],
    material: Sequence[int] = (),
    *,
    limit_bits: int = DEFAULT_LIMIT_BITS,
) -> Posterior:
    """Posterior of the target functionals given the observed view, by brute force.

    Every primitive bit is an independent fair coin. Columns that never
    meet in a row are independent, so the problem splits into connected
    components, each enumerated exhaustively. A component wider than
    ``limit_bits`` is refused rather than approximated.
    """
    if any(m == 0 and v for m, v in view):
        raise AnalysisError("view contains the equation 0 = 1")
    view = [(m, v) for m, v in view if m]
    masks = [m for m, _ in view]
    comps = _components([*masks, *target, *material])
    entropy, uniform, determined, independent, unknown = 0.0, True, 0, True, 0
    for cols in comps:
        n = len(cols)
        if n > limit_bits:
            raise AnalysisError(f"component of {n} unknown bits exceeds the {limit_bits}-bit enumeration limit")
        unknown += n
        colset = set(cols)
        v_rows = [(m, v) for m, v in view if columns_of(m)[0] in colset]
        t_rows = [m for m in target if m and columns_of(m)[0] in colset]
        m_rows = [m for m in material if m and columns_of(m)[0] in colset]
        assign = (np.arange(1 << n, dtype=np.int64)[:, None] >> np.arange(n)) & 1

        def evaluate(rows: Sequence[int]) -> np.ndarray:
            if not rows:
                return np.zeros((1 << n, 0), dtype=np.int64)
            return (assign @ _local(rows, cols).T) & 1

        vb = evaluate([m for m, _ in v_rows])
        tb = evaluate(t_rows)
        mb = evaluate(m_rows)
        observed = np.array([v for _, v in v_rows], dtype=np.int64)
        consistent = np.all(vb == observed, axis=1) if v_rows else np.ones(1 << n, dtype=bool)
        if not consistent.any():
            raise AnalysisError("no assignment reproduces the observed view")

        if t_rows:
            tid = _pattern_ids(tb)
            prior = np.bincount(tid, minlength=tid.max() + 1)
            post = np.bincount(tid[consistent], minlength=tid.max() + 1)
            entropy += entropy_of_counts(post)
            if not np.array_equal(post * prior.sum(), prior * post.sum()):
                uniform = False
            sub = tb[consistent]
            determined += int(np.all(sub == sub[0], axis=0).sum())
        if m_rows and v_rows and not _independent(vb, mb):
            independent = False
    return Posterior(entropy, uniform, determined, independent, unknown)


def posterior_entropy(view: Sequence[tuple[int, int]], target: Sequence[int], *,
                      limit_bits: int = DEFAULT_LIMIT_BITS) -> float:
    """Exact Shannon entropy (bits) of the target given the view."""
    return enumerate_posterior(view, target, limit_bits=limit_bits).entropy_bits


# -- Shamir ------------------------------------------------------------------------


def check_shamir_domain(q: int, t: int) -> None:
    if q**t > MAX_POLYNOMIALS:
        raise AnalysisError(f"{q}^{t} polynomials exceed the enumeration limit of {MAX_POLYNOMIALS}")


@lru_cache(maxsize=64)
def coefficient_table(q: int, t: int) -> np.ndarray:
    """Every coefficient vector (constant term first) of degree <= t-1 over Z_q."""
    check_shamir_domain(q, t)
    return np.array(list(product(range(q), repeat=t)), dtype=np.int64).reshape(-1, t)


def evaluate_table(coeffs: np.ndarray, x: int, q: int) -> np.ndarray:
    powers = np.array([pow(x, j, q) for j in range(coeffs.shape[1])], dtype=np.int64)
    return (coeffs @ powers) % q


def polynomial_domain(q: int, t: int, *, nonzero_leading: bool = False, secret_bound: int | None = None) -> np.ndarray:
    coeffs = coefficient_table(q, t)
    keep = np.ones(len(coeffs), dtype=bool)
    if nonzero_leading and t >= 2:
        keep &= coeffs[:, t - 1] != 0
    if secret_bound is not None:
        keep &= coeffs[:, 0] < secret_bound
    return coeffs[keep]


def shamir_posterior(
    points: Sequence[tuple[int, int]],
    q: int,
    t: int,
    *,
    nonzero_leading: bool = False,
    secret_bound: int | None = None,
) -> np.ndarray:
    """Counts, indexed by candidate secret, of polynomials through ``points``."""
    coeffs = polynomial_domain(q, t, nonzero_leading=nonzero_leading, secret_bound=secret_bound)
    keep = np.ones(len(coeffs), dtype=bool)
    for x, y in points:
        keep &= evaluate_table(coeffs, x, q) == y
    return np.bincount(coeffs[keep, 0], minlength=q)


def shamir_entropy(points: Sequence[tuple[int, int]], q: int, t: int, **kw) -> float:
    return entropy_of_counts(shamir_posterior(points, q, t, **kw))

