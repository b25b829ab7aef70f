"""A quick invariant suite, runnable from the command line with ``qkdn check``."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Callable

from . import presets
from .analysis.enumeration import shamir_posterior
from .harness import emit_report, run_scenario, run_scenario_full
from .rng import Rng
from .scenario import apply_tap
from .sharing import FieldElement, shamir_reconstruct, shamir_split


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str


def _telescoping(seeds: int) -> str | None:
    for n in range(1, 9):
        for seed in range(seeds):
            r = run_scenario(presets.centralized(n, 16, seed))
            if not r.checks.get("combined_equals_secret_xor_last_key"):
                return f"N={n} seed={seed}"
    return None


def _agreement(seeds: int) -> str | None:
    makers = {
        "fat_chain": lambda s: presets.fat_chain(3, 16, s),
        "pat_xor": lambda s: presets.pat_xor(3, 16, s),
        "pat_shamir": lambda s: presets.pat_shamir(7, 2, 3, 16, s),
        "decentralized": lambda s: presets.decentralized(2, 16, s),
        "centralized": lambda s: presets.centralized(3, 16, s),
    }
    for name, make in makers.items():
        for seed in range(seeds):
            r = run_scenario(make(seed))
            if not r.key_match:
                return f"{name} seed={seed}"
    return None


def _threshold() -> str | None:
    for q in (5, 7):
        for k in range(1, 4):
            for t in range(1, k + 1):
                rng = Rng(q * 100 + t * 10 + k).stream("threshold")
                for secret in range(q):
                    shares = shamir_split(FieldElement(secret, q), t, k, rng)
                    for subset in combinations(shares, t):
                        if shamir_reconstruct(list(subset), t).value != secret:
                            return f"reconstruct q={q} t={t} k={k}"
                    for subset in combinations(shares, t - 1):
                        counts = shamir_posterior([(s.index, s.payload.value) for s in subset], q, t)
                        if len(set(counts.tolist())) != 1:
                            return f"posterior q={q} t={t} k={k}"
    return None


def _matrix() -> str | None:
    expected = [
        (presets.fat_chain(3, 8, 1), {"n1": "FAT", "n2": "FAT", "n3": "FAT"}),
        (presets.pat_xor(3, 8, 1), {"p1r1": "PAT", "p2r1": "PAT", "p3r1": "PAT"}),
        (presets.pat_shamir(5, 2, 3, 8, 1), {"p1r1": "PAT", "p2r1": "PAT", "p3r1": "PAT"}),
        (presets.decentralized(2, 8, 1), {"n1": "PAT", "n2": "PAT", "sat": "PAT"}),
        (presets.centralized(3, 8, 1), {"n1": "NAT", "n2": "NAT", "n3": "NAT", "kms": "NAT"}),
    ]
    for scenario, levels in expected:
        r = run_scenario(scenario)
        for node, level in levels.items():
            if r.level(node) != level:
                return f"{scenario.protocol}: {node} is {r.level(node)}, expected {level}"
    return None


def _tap() -> str | None:
    base = presets.centralized(3, 8, 5)
    before = run_scenario(base).level("n3")
    after = run_scenario(apply_tap(base, "kms-bob", ["n3"])).level("n3")
    if (before, after) != ("NAT", "FAT"):
        return f"n3 went {before} -> {after}"
    return None


def _never_transmitted(seeds: int) -> str | None:
    for seed in range(seeds):
        r = run_scenario(presets.decentralized(3, 16, seed))
        if not r.checks["hidden_halves_never_transmitted"]:
            return f"seed={seed}"
    return None


def _determinism() -> str | None:
    for scenario in (presets.fat_chain(2, 16, 42), presets.decentralized(2, 8, 42)):
        if emit_report(run_scenario(scenario)) != emit_report(run_scenario(scenario)):
            return scenario.protocol
    return None


def _replay(seeds: int) -> str | None:
    for seed in range(seeds):
        for s in (presets.fat_chain(2, 8, seed), presets.pat_shamir(7, 2, 3, 8, seed), presets.centralized(2, 8, seed)):
            report, _ = run_scenario_full(s)
            if not report.checks["wire_replay"]:
                return f"{s.protocol} seed={seed}"
    return None


SUITE: list[tuple[str, Callable[[], str | None]]] = [
    ("centralized combine telescopes to K_S xor last key", lambda: _telescoping(25)),
    ("end-to-end key agreement", lambda: _agreement(20)),
    ("shamir threshold and (t-1)-share secrecy", _threshold),
    ("verdict matrix", _matrix),
    ("tapped KMS channel escalates the last relay", _tap),
    ("hidden halves never transmitted", lambda: _never_transmitted(50)),
    ("reports are deterministic", _determinism),
    ("wire log replays", lambda: _replay(10)),
]


def run_checks() -> list[CheckResult]:
    out = []
    for name, fn in SUITE:
        failure = fn()
        out.append(CheckResult(name, failure is None, failure or "ok"))
    return out
