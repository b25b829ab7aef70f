"""Deterministic execution of a scenario and the run report it produces."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Sequence

from .analysis.trust import LEVELS, TrustVerdict, breaking_coalition, classify_coalition, classify_node
from .bits import BitString
from .centralized import centralized_send
from .decentralized import dkms_exchange
from .errors import ConfigurationError, ProtocolAbort
from .fabric import Topology, build_topology, pool_level, provision_link_keys
from .protocols import (
    PathSet,
    ProtocolRun,
    ShamirScheme,
    XorScheme,
    fat_send,
    find_disjoint_paths,
    pat_multipath_send,
)
from .rng import Rng
from .scenario import Scenario
from .sharing import chunk_bounds, share_width
from .symbolic import Expr

REPORT_FORMATS = ("json", "text")


@dataclass
class RunReport:
    scenario: dict
    protocol: str
    delivered: bool
    key_match: bool
    aborted: str | None
    chain_length: int | None
    paths: list[list[str]]
    disjoint: bool
    keys_consumed: dict[str, int]
    pool_remaining: dict[str, int]
    nodes: dict[str, dict]
    coalitions: list[dict]
    expected_level: str
    escalations: list[dict]
    coalition_bound: dict | None
    checks: dict[str, bool]
    wire: list[dict]
    values: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.key_match and not self.delivered:
            raise ValueError("key_match implies delivered")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> RunReport:
        return cls(**data)

    def verdict(self, node: str) -> dict:
        return self.nodes[node]["verdict"]

    def level(self, node: str) -> str:
        return self.nodes[node]["verdict"]["level"]

    def coalition_level(self, members: Sequence[str]) -> str:
        want = sorted(members)
        for c in self.coalitions:
            if sorted(c["members"]) == want:
                return c["verdict"]["level"]
        raise KeyError(",".join(members))


# -- execution ----------------------------------------------------------------------------


def link_key_bits(scenario: Scenario) -> int:
    """Length of every link key the selected protocol consumes."""
    L = scenario.secret_bits
    if scenario.protocol == "decentralized":
        need = L // 2
    elif scenario.protocol == "pat_shamir":
        need = len(chunk_bounds(L, scenario.q)) * share_width(scenario.q)
    else:
        need = L
    if scenario.key_bits is not None and scenario.key_bits != need:
        raise ConfigurationError(f"{scenario.protocol} with {L}-bit secrets needs {need}-bit link keys, "
                                 f"scenario asks for {scenario.key_bits}")
    return need


def prepare(scenario: Scenario) -> Topology:
    """Topology with taps applied and every key pool provisioned from its own stream."""
    topo = build_topology(scenario.topology)
    for ch, nodes in scenario.taps:
        topo.tap(ch, nodes)
    for end in (scenario.alice, scenario.bob):
        if end not in topo.nodes:
            raise ConfigurationError(f"unknown end host {end!r}")
    rng = Rng(scenario.seed)
    bits = link_key_bits(scenario)
    for link_id in sorted(topo.links):
        provision_link_keys(topo, topo.links[link_id], scenario.pool_keys, bits, rng.stream(f"link:{link_id}"))
    return topo


def _multipath_paths(topo: Topology, s: Scenario, k: int) -> PathSet:
    if s.paths is None:
        return find_disjoint_paths(topo, s.alice, s.bob, k)
    for p in s.paths:
        for a, b in zip(p, p[1:]):
            topo.link_between(a, b)
    return PathSet.of(s.paths)


def execute(scenario: Scenario, topo: Topology | None = None) -> ProtocolRun:
    """Run the scenario's protocol. A protocol abort is re-raised with ``exc.run`` attached."""
    topo = topo if topo is not None else prepare(scenario)
    rng = Rng(scenario.seed)
    s = scenario
    L = s.secret_bits
    if s.protocol == "decentralized":
        if s.satellite is None:
            raise ConfigurationError("decentralized needs a satellite node")
        return dkms_exchange(topo, s.alice, s.bob, s.satellite, rng.stream("party:alice"),
                             rng.stream("party:bob"), L, swap_paths=s.swap_paths)
    secret = rng.stream("party:alice:secret").bits(L)
    if s.protocol == "fat_chain":
        path = s.paths[0] if s.paths else None
        return fat_send(topo, s.alice, s.bob, secret, path)
    if s.protocol == "centralized":
        return centralized_send(topo, s.alice, s.bob, s.central, secret)
    if s.protocol == "pat_xor":
        scheme: XorScheme | ShamirScheme = XorScheme(s.k)
    else:
        scheme = ShamirScheme(s.q, s.t, s.k, s.nonzero_leading)
    paths = _multipath_paths(topo, s, scheme.k)
    return pat_multipath_send(topo, s.alice, s.bob, secret, scheme, paths, rng.stream("party:alice:split"),
                              dropped=s.drop_paths, allow_overlap=not s.disjoint)


# -- report assembly -----------------------------------------------------------------------


def _segments(expr: Expr | None) -> list[list[str]] | None:
    if expr is None:
        return None
    return [sorted(names) for names, _ in expr.segments]


def _wire(topo: Topology) -> list[dict]:
    return [
        {
            "seq": m.seq,
            "from": m.sender,
            "to": m.receiver,
            "channel": m.channel,
            "label": m.label,
            "bits": m.payload.length,
            "payload": m.payload.hex(),
            "terms": _segments(m.expr),
            "header": dict(m.header),
        }
        for m in topo.wire
    ]


def replay_wire(wire: Sequence[dict], values: dict[str, str], lengths: dict[str, int]) -> bool:
    """Recompute every payload from its logged terms and the logged primitive values."""
    for msg in wire:
        if msg["terms"] is None:
            return False
        out = BitString(0, 0)
        for names in msg["terms"]:
            widths = {lengths[n] for n in names}
            if len(widths) != 1:
                return False
            seg = BitString.zeros(widths.pop())
            for n in names:
                seg = seg ^ BitString.from_hex(values[n], lengths[n])
            out = out + seg
        if out.length != msg["bits"] or out.hex() != msg["payload"]:
            return False
    return True


def hidden_halves(run: ProtocolRun) -> list[str]:
    return [n for n in ("K'_A2", "K'_B2") if n in run.topology.space]


def _never_transmitted(run: ProtocolRun) -> bool:
    """No message carries a hidden half on its own (judged on the message's symbolic form)."""
    space = run.topology.space
    for name in hidden_halves(run):
        alone = Expr.var(name, space[name].length)
        for t in run.topology.transcripts.values():
            for e in t.entries:
                if e.role in ("sent", "received") and e.expr == alone:
                    return False
    return True


def payload_collisions(run: ProtocolRun) -> list[tuple[str, str, str]]:
    """(half, node, label) for every sent or received payload equal in value to a hidden half.

    Short halves collide with unrelated ciphertexts by chance, so this is
    only meaningful for long secrets.
    """
    space = run.topology.space
    out = []
    for name in hidden_halves(run):
        value = space.value(name)
        for node, t in run.topology.transcripts.items():
            out.extend((name, node, e.label) for e in t.entries
                       if e.role in ("sent", "received") and e.value == value)
    return out


def _telescoping(run: ProtocolRun) -> bool:
    combined = run.details.get("combined")
    if combined is None:
        return False
    last = run.topology.space.value(f"K_{{{run.details['last_key']}}}")
    return combined == run.secret ^ last


def _checks(run: ProtocolRun, wire: list[dict], values: dict[str, str], lengths: dict[str, int]) -> dict[str, bool]:
    checks = {"wire_replay": replay_wire(wire, values, lengths)}
    if run.protocol == "centralized" and run.aborted is None:
        # the combined value, read back from the wire log
        c_msgs = [m for m in wire if m["label"] == "C"]
        last = run.details["last_key"]
        last_hex = values[f"K_{{{last}}}"]
        secret = run.secret
        assert secret is not None
        expect = secret ^ BitString.from_hex(last_hex, secret.length)
        checks["combined_equals_secret_xor_last_key"] = (
            len(c_msgs) == 1 and c_msgs[0]["payload"] == expect.hex() and _telescoping(run)
        )
    if run.protocol == "decentralized":
        checks["hidden_halves_never_transmitted"] = _never_transmitted(run)
    return checks


def _verdict_dict(v: TrustVerdict) -> dict:
    return v.to_dict()


def _role(run: ProtocolRun, node: str) -> str:
    if node in (run.alice, run.bob):
        return "endpoint"
    if node in run.intermediates:
        return "intermediate"
    return "bystander"


def _coalition_bound(run: ProtocolRun, scenario: Scenario) -> dict | None:
    if run.protocol not in ("pat_xor", "pat_shamir"):
        return None
    designed = scenario.k if run.protocol == "pat_xor" else scenario.t
    breaking = breaking_coalition(run) if run.aborted is None else None
    return {
        "designed_paths": designed,
        "disjoint": run.disjoint,
        "breaking_coalition": list(breaking) if breaking is not None else None,
        "weakened": breaking is not None and len(breaking) < designed,
    }


def build_report(scenario: Scenario, run: ProtocolRun) -> RunReport:
    topo = run.topology
    nodes = {}
    for name in sorted(topo.nodes):
        nodes[name] = {
            "kind": topo.nodes[name].kind,
            "role": _role(run, name),
            "verdict": _verdict_dict(classify_node(run, name)),
        }
    coalitions = [
        {"members": list(members), "verdict": _verdict_dict(classify_coalition(run, members))}
        for members in scenario.coalitions
    ]
    expected = LEVELS.index(run.expected_level)
    escalations = []
    for name in sorted(topo.nodes):
        if name in (run.alice, run.bob):
            continue
        baseline = expected if name in run.intermediates else 0
        observed = nodes[name]["verdict"]["level"]
        if LEVELS.index(observed) > baseline:
            escalations.append({"node": name, "expected": LEVELS[baseline], "observed": observed})

    space = topo.space
    values = {v.name: space.value(v.name).hex() for v in space.variables()}
    lengths = {v.name: v.length for v in space.variables()}
    wire = _wire(topo)
    return RunReport(
        scenario=scenario.to_dict(),
        protocol=run.protocol,
        delivered=run.delivered is not None,
        key_match=run.key_match,
        aborted=run.aborted,
        chain_length=scenario.chain_length(),
        paths=[list(p) for p in run.paths],
        disjoint=run.disjoint,
        keys_consumed={l: topo.links[l].drawn for l in sorted(topo.links)},
        pool_remaining={l: pool_level(topo, topo.links[l]) for l in sorted(topo.links)},
        nodes=nodes,
        coalitions=coalitions,
        expected_level=run.expected_level,
        escalations=escalations,
        coalition_bound=_coalition_bound(run, scenario),
        checks=_checks(run, wire, values, lengths),
        wire=wire,
        values=values,
    )


def run_scenario_full(scenario: Scenario) -> tuple[RunReport, ProtocolRun]:
    topo = prepare(scenario)
    try:
        run = execute(scenario, topo)
    except ProtocolAbort as exc:
        run = getattr(exc, "run", None)
        if run is None:
            raise
    return build_report(scenario, run), run


def run_scenario(scenario: Scenario) -> RunReport:
    """Provision, execute, classify every node and coalition, and assemble the report."""
    return run_scenario_full(scenario)[0]


# -- serialisation ------------------------------------------------------------------------------


def emit_report(report: RunReport, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    if fmt == "text":
        return _text(report)
    raise ConfigurationError(f"unknown report format {fmt!r}; expected json or text")


def parse_report(text: str) -> RunReport:
    return RunReport.from_dict(json.loads(text))


def _text(r: RunReport) -> str:
    sc = r.scenario
    lines = [
        f"protocol   {r.protocol}  secret_bits={sc['secret_bits']}  seed={sc['seed']}",
        f"delivered  {'yes' if r.delivered else 'no'}  key_match={'yes' if r.key_match else 'no'}",
    ]
    if r.aborted:
        lines.append(f"aborted    {r.aborted}")
    if r.paths:
        lines.append("paths      " + "; ".join(">".join(p) for p in r.paths))
    lines.append("")
    lines.append("node verdicts")
    for name, info in r.nodes.items():
        v = info["verdict"]
        ent = "-" if v["posterior_entropy_bits"] is None else f"{v['posterior_entropy_bits']:g}"
        line = (f"  {name:<10} {info['kind']:<12} {v['level']}  determined {v['determined_bits']}/{v['secret_bits']}"
                f"  H={ent}")
        if v["correlation_witness"]:
            line += f"  witness: {v['correlation_witness']}"
        lines.append(line)
    if r.coalitions:
        lines.append("")
        lines.append("coalitions")
        for c in r.coalitions:
            v = c["verdict"]
            lines.append(f"  {','.join(c['members']):<20} {v['level']}  determined {v['determined_bits']}/{v['secret_bits']}")
    if r.escalations:
        lines.append("")
        lines.append("escalations")
        for e in r.escalations:
            lines.append(f"  {e['node']}: expected {e['expected']}, observed {e['observed']}")
    if r.coalition_bound:
        b = r.coalition_bound
        lines.append("")
        lines.append(f"coalition bound  designed {b['designed_paths']} paths, breaking coalition "
                     f"{','.join(b['breaking_coalition']) if b['breaking_coalition'] else 'none'}"
                     f"{' (weakened)' if b['weakened'] else ''}")
    lines.append("")
    lines.append("checks")
    for k, ok in sorted(r.checks.items()):
        lines.append(f"  {k:<40} {'ok' if ok else 'FAILED'}")
    lines.append("")
    lines.append("keys consumed  " + ", ".join(f"{k}={v}" for k, v in r.keys_consumed.items()))
    lines.append("")
    lines.append("wire")
    for m in r.wire:
        hop = f"{m['from']}->{m['to']}"
        lines.append(f"  #{m['seq']:<3} {hop:<14} [{m['channel']}] {m['label']} = {m['payload']}")
    return "\n".join(lines) + "\n"
