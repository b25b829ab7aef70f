"""Scenario files: an INI-style description of one simulated run.

Example::

    [topology]
    nodes = alice:end_host, n1:relay, n2:relay, bob:end_host
    qlinks = alice-n1, n1-n2, n2-bob
    [scenario]
    protocol = fat_chain
    secret_bits = 16
    seed = 42
    coalitions = n1; n1,n2
"""

from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, field, replace

from .errors import ConfigurationError
from .fabric import TopologySpec, parse_pair
from .sharing import is_prime

PROTOCOLS = ("fat_chain", "pat_xor", "pat_shamir", "decentralized", "centralized")

TOPOLOGY_KEYS = {"nodes", "qlinks", "cchannels"}
SCENARIO_KEYS = {
    "protocol", "secret_bits", "seed", "q", "t", "k", "nonzero_leading", "paths", "disjoint",
    "drop_paths", "pool_keys", "key_bits", "alice", "bob", "satellite", "central", "swap_paths",
    "taps", "coalitions",
}


@dataclass(frozen=True)
class Scenario:
    topology: TopologySpec
    protocol: str
    secret_bits: int
    seed: int = 0
    q: int | None = None
    t: int | None = None
    k: int | None = None
    nonzero_leading: bool = False
    paths: tuple[tuple[str, ...], ...] | None = None
    disjoint: bool = True
    drop_paths: tuple[int, ...] = ()
    pool_keys: int = 2
    key_bits: int | None = None
    alice: str = "alice"
    bob: str = "bob"
    satellite: str | None = None
    central: str | None = None
    swap_paths: bool = False
    taps: tuple[tuple[str, tuple[str, ...]], ...] = ()
    coalitions: tuple[tuple[str, ...], ...] = field(default_factory=tuple)

    def with_seed(self, seed: int) -> Scenario:
        check_seed(seed)
        return replace(self, seed=seed)

    def chain_length(self) -> int | None:
        """Relay count N when the quantum links form a single alice..bob chain."""
        adj: dict[str, list[str]] = {}
        for a, b in self.topology.qlinks:
            adj.setdefault(a, []).append(b)
            adj.setdefault(b, []).append(a)
        path, prev, cur = [self.alice], None, self.alice
        while cur != self.bob:
            nxt = [n for n in adj.get(cur, []) if n != prev]
            if len(nxt) != 1 or nxt[0] in path:
                return None
            prev, cur = cur, nxt[0]
            path.append(cur)
        return len(path) - 2

    def to_dict(self) -> dict:
        d = asdict(self)
        d["topology"] = {
            "nodes": [list(n) for n in self.topology.nodes],
            "qlinks": [list(l) for l in self.topology.qlinks],
            "cchannels": [[a, b, "secure" if s else "open"] for a, b, s in self.topology.cchannels],
        }
        d["paths"] = [list(p) for p in self.paths] if self.paths is not None else None
        d["drop_paths"] = list(self.drop_paths)
        d["taps"] = [[ch, list(ns)] for ch, ns in self.taps]
        d["coalitions"] = [list(c) for c in self.coalitions]
        return d


def check_seed(seed: int) -> None:
    if not 0 <= seed < 2**64:
        raise ConfigurationError(f"seed must be a 64-bit unsigned integer, got {seed}")


def _items(text: str, sep: str = ",") -> list[str]:
    return [p.strip() for p in text.split(sep) if p.strip()]


def _int(section: configparser.SectionProxy, key: str, default: int | None = None) -> int | None:
    if key not in section:
        return default
    try:
        return int(section[key], 0)
    except ValueError:
        raise ConfigurationError(f"{key} must be an integer, got {section[key]!r}") from None


def _bool(section: configparser.SectionProxy, key: str, default: bool) -> bool:
    if key not in section:
        return default
    try:
        return section.getboolean(key)
    except ValueError:
        raise ConfigurationError(f"{key} must be a boolean, got {section[key]!r}") from None


def _node(item: str) -> tuple[str, str]:
    name, sep, kind = item.partition(":")
    if not sep:
        raise ConfigurationError(f"node {item!r} needs a kind, e.g. {item}:relay")
    return name.strip(), kind.strip()


def _channel(item: str) -> tuple[str, str, bool]:
    pair, _, attr = item.partition(":")
    attr = attr.strip() or "secure"
    if attr not in ("secure", "open"):
        raise ConfigurationError(f"channel attribute must be secure or open, got {attr!r}")
    a, b = parse_pair(pair.strip())
    return a, b, attr == "secure"


def _tap(item: str) -> tuple[str, tuple[str, ...]]:
    ch, sep, nodes = item.partition(":")
    if not sep or not _items(nodes):
        raise ConfigurationError(f"tap {item!r} must look like channel:node[,node...]")
    return ch.strip(), tuple(_items(nodes))


def parse_scenario(text: str) -> Scenario:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed scenario: {exc}") from None
    extra = set(parser.sections()) - {"topology", "scenario"}
    if extra:
        raise ConfigurationError(f"unknown section(s): {', '.join(sorted(extra))}")
    for name in ("topology", "scenario"):
        if not parser.has_section(name):
            raise ConfigurationError(f"missing [{name}] section")
    topo, sc = parser["topology"], parser["scenario"]
    for section, allowed in ((topo, TOPOLOGY_KEYS), (sc, SCENARIO_KEYS)):
        unknown = set(section) - allowed
        if unknown:
            raise ConfigurationError(f"unknown key(s) in [{section.name}]: {', '.join(sorted(unknown))}")

    if "nodes" not in topo:
        raise ConfigurationError("topology needs nodes")
    spec = TopologySpec(
        nodes=tuple(_node(i) for i in _items(topo["nodes"])),
        qlinks=tuple(parse_pair(i) for i in _items(topo.get("qlinks", ""))),
        cchannels=tuple(_channel(i) for i in _items(topo.get("cchannels", ""))),
    )

    protocol = sc.get("protocol")
    if protocol is None:
        raise ConfigurationError("missing protocol")
    if protocol not in PROTOCOLS:
        raise ConfigurationError(f"unknown protocol {protocol!r}; expected one of {', '.join(PROTOCOLS)}")
    secret_bits = _int(sc, "secret_bits")
    if secret_bits is None:
        raise ConfigurationError("missing secret_bits")
    if secret_bits < 1:
        raise ConfigurationError("secret_bits must be positive")
    seed = _int(sc, "seed", 0)
    check_seed(seed)

    names = [n for n, _ in spec.nodes]
    kinds = dict(spec.nodes)

    def first_of(kind: str) -> str | None:
        return next((n for n in names if kinds[n] == kind), None)

    hosts = [n for n in names if kinds[n] == "end_host"]
    alice = sc.get("alice", "alice" if "alice" in kinds else (hosts[0] if hosts else "alice"))
    bob = sc.get("bob", "bob" if "bob" in kinds else (hosts[1] if len(hosts) > 1 else "bob"))

    paths = None
    if "paths" in sc:
        paths = tuple(tuple(_items(p, ">")) for p in _items(sc["paths"], ";"))
    scenario = Scenario(
        topology=spec,
        protocol=protocol,
        secret_bits=secret_bits,
        seed=seed,
        q=_int(sc, "q"),
        t=_int(sc, "t"),
        k=_int(sc, "k"),
        nonzero_leading=_bool(sc, "nonzero_leading", False),
        paths=paths,
        disjoint=_bool(sc, "disjoint", True),
        drop_paths=tuple(int(x) for x in _items(sc.get("drop_paths", ""))),
        pool_keys=_int(sc, "pool_keys", 2),
        key_bits=_int(sc, "key_bits"),
        alice=alice,
        bob=bob,
        satellite=sc.get("satellite", first_of("satellite")),
        central=sc.get("central", first_of("central_kms")),
        swap_paths=_bool(sc, "swap_paths", False),
        taps=tuple(_tap(i) for i in _items(sc.get("taps", ""), ";")),
        coalitions=tuple(tuple(_items(c)) for c in _items(sc.get("coalitions", ""), ";")),
    )
    validate(scenario)
    return scenario


def validate(s: Scenario) -> None:
    """Parameter consistency that does not need a built topology."""
    if s.pool_keys < 0:
        raise ConfigurationError("pool_keys must be >= 0")
    if s.protocol == "pat_shamir":
        if None in (s.q, s.t, s.k):
            raise ConfigurationError("pat_shamir needs q, t and k")
        if not is_prime(s.q):
            raise ConfigurationError(f"q = {s.q} is not prime")
        if not 1 <= s.t <= s.k:
            raise ConfigurationError(f"need 1 <= t <= k, got t={s.t}, k={s.k}")
        if s.k >= s.q:
            raise ConfigurationError(f"k = {s.k} shares need q > k")
    elif s.q is not None and not is_prime(s.q):
        raise ConfigurationError(f"q = {s.q} is not prime")
    if s.protocol == "pat_xor" and (s.k is None or s.k < 2):
        raise ConfigurationError("pat_xor needs k >= 2")
    if s.protocol == "decentralized" and s.secret_bits % 2:
        raise ConfigurationError(f"decentralized needs an even secret_bits, got {s.secret_bits}")
    if s.paths is not None and s.k is not None and len(s.paths) != s.k:
        raise ConfigurationError(f"{len(s.paths)} explicit paths for k = {s.k}")
    if any(i < 1 or (s.k is not None and i > s.k) for i in s.drop_paths):
        raise ConfigurationError("drop_paths must name 1-based path indices")


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read scenario {path}: {exc.strerror}") from None
    return parse_scenario(text)


def apply_tap(scenario: Scenario, channel: str, nodes: tuple[str, ...] | list[str]) -> Scenario:
    """A copy of ``scenario`` in which ``nodes`` overhear every message on ``channel``."""
    from .fabric import build_topology

    topo = build_topology(scenario.topology)
    topo.tap(channel, nodes)  # validates channel and node names
    return replace(scenario, taps=scenario.taps + ((channel, tuple(nodes)),))
