"""Network model: nodes, quantum links with key pools, classical channels.

A :class:`Topology` is also the mutable state of one run. It owns every
node's transcript, the wire log, and the :class:`VarSpace` of primitive
values, so drawing a key or sending a message records the honest-but-curious
view as a side effect.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from .bits import BitString
from .errors import ConfigurationError, KeyExhausted
from .rng import RandomSource
from .symbolic import Expr, VarSpace

NODE_KINDS = ("end_host", "relay", "satellite", "central_kms")
ROLES = ("held_key", "received", "sent", "computed")


@dataclass(frozen=True)
class Node:
    name: str
    kind: str


@dataclass
class LinkKey:
    key_id: str
    value: BitString
    consumed: bool = False


@dataclass
class QuantumLink:
    link_id: str
    endpoints: tuple[str, str]
    pool: list[LinkKey] = field(default_factory=list)
    provisioned: int = 0
    drawn: int = 0

    def has(self, node: str) -> bool:
        return node in self.endpoints

    def key(self, key_id: str) -> LinkKey:
        for k in self.pool:
            if k.key_id == key_id:
                return k
        raise KeyError(key_id)


@dataclass
class ClassicalChannel:
    """A classical channel. ``kind`` is ``link`` for the public side of a quantum link."""

    channel_id: str
    endpoints: tuple[str, str]
    secure: bool
    kind: str = "classical"
    taps: set[str] = field(default_factory=set)


class Entry(NamedTuple):
    """One line of a node's view. A tuple rather than a dataclass: runs log many of these."""

    role: str
    label: str
    value: BitString
    expr: Expr | None
    peer: str | None = None
    channel: str | None = None
    tapped: bool = False


class Transcript:
    """Append-only log of everything one node held, computed, sent or received."""

    def __init__(self, owner: str) -> None:
        self.owner = owner
        self._entries: list[Entry] = []

    def append(self, entry: Entry) -> None:
        if entry.role not in ROLES:
            raise ValueError(f"unknown transcript role {entry.role!r}")
        self._entries.append(entry)

    @property
    def entries(self) -> tuple[Entry, ...]:
        return tuple(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)


@dataclass(frozen=True)
class Message:
    seq: int
    sender: str
    receiver: str
    channel: str
    payload: BitString
    label: str
    expr: Expr | None
    header: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class TopologySpec:
    nodes: tuple[tuple[str, str], ...]
    qlinks: tuple[tuple[str, str], ...]
    cchannels: tuple[tuple[str, str, bool], ...] = ()


class Topology:
    def __init__(self) -> None:
        self.nodes: dict[str, Node] = {}
        self.links: dict[str, QuantumLink] = {}
        self.channels: dict[str, ClassicalChannel] = {}
        self.transcripts: dict[str, Transcript] = {}
        self.space = VarSpace()
        self.wire: list[Message] = []
        self._link_at: dict[frozenset[str], QuantumLink] = {}
        self._channel_at: dict[tuple[frozenset[str], str], ClassicalChannel] = {}

    def add_link(self, link: QuantumLink) -> None:
        self.links[link.link_id] = link
        self._link_at[frozenset(link.endpoints)] = link

    def add_channel(self, ch: ClassicalChannel) -> None:
        self.channels[ch.channel_id] = ch
        self._channel_at.setdefault((frozenset(ch.endpoints), ch.kind), ch)

    # lookups

    def link_between(self, a: str, b: str) -> QuantumLink:
        link = self._link_at.get(frozenset((a, b)))
        if link is None or a == b:
            raise ConfigurationError(f"no quantum link between {a} and {b}")
        return link

    def channel_between(self, a: str, b: str, kind: str | None = None) -> ClassicalChannel:
        pair = frozenset((a, b))
        for k in ((kind,) if kind is not None else ("link", "classical")):
            ch = self._channel_at.get((pair, k))
            if ch is not None and a != b:
                return ch
        raise ConfigurationError(f"no {kind or 'classical'} channel between {a} and {b}")

    def resolve_channel(self, ref: str) -> ClassicalChannel:
        """Find a channel by id or by ``a-b`` endpoint pair in either order."""
        if ref in self.channels:
            return self.channels[ref]
        a, sep, b = ref.partition("-")
        if sep:
            matches = [c for c in self.channels.values() if set(c.endpoints) == {a, b}]
            if len(matches) == 1:
                return matches[0]
        raise ConfigurationError(f"unknown channel {ref!r}")

    def neighbors(self, node: str) -> list[str]:
        out = []
        for link in self.links.values():
            if node in link.endpoints:
                out.append(link.endpoints[1] if link.endpoints[0] == node else link.endpoints[0])
        return sorted(out)

    def chain(self, alice: str, bob: str) -> list[str]:
        """The unique simple quantum-link path alice .. bob when the links form one chain."""
        if alice not in self.nodes or bob not in self.nodes:
            raise ConfigurationError(f"unknown chain end {alice if alice not in self.nodes else bob}")
        path, prev, cur = [alice], None, alice
        while cur != bob:
            nxt = [n for n in self.neighbors(cur) if n != prev]
            if len(nxt) != 1:
                raise ConfigurationError(f"quantum links do not form a chain {alice}..{bob} (at {cur})")
            prev, cur = cur, nxt[0]
            if cur in path:
                raise ConfigurationError("quantum links contain a cycle")
            path.append(cur)
        if len(self.neighbors(bob)) != 1 and len(path) > 1:
            raise ConfigurationError(f"{bob} is not the end of the chain")
        return path

    def tap(self, channel_ref: str, nodes: Iterable[str]) -> ClassicalChannel:
        ch = self.resolve_channel(channel_ref)
        for n in nodes:
            if n not in self.nodes:
                raise ConfigurationError(f"unknown tapping node {n!r}")
            ch.taps.add(n)
        ch.secure = False
        return ch

    # transcript plumbing

    def log(self, node: str, role: str, label: str, value: BitString, expr: Expr | None, **kw) -> None:
        if expr is not None and self.space.evaluate(expr) != value:
            raise AssertionError(f"bookkeeping mismatch for {label} at {node}")
        self.transcripts[node].append(Entry(role, label, value, expr, **kw))

    def send(
        self,
        sender: str,
        receiver: str,
        payload: BitString,
        label: str,
        expr: Expr | None,
        *,
        channel: ClassicalChannel | None = None,
        header: dict[str, str] | None = None,
    ) -> Message:
        if channel is None:
            try:
                channel = self.channel_between(sender, receiver, "link")
            except ConfigurationError:
                channel = self.channel_between(sender, receiver)
        if set(channel.endpoints) != {sender, receiver}:
            raise ConfigurationError(f"channel {channel.channel_id} does not join {sender} and {receiver}")
        msg = Message(
            len(self.wire), sender, receiver, channel.channel_id, payload, label, expr,
            tuple(sorted((header or {}).items())),
        )
        self.wire.append(msg)
        self.log(sender, "sent", label, payload, expr, peer=receiver, channel=channel.channel_id)
        self.log(receiver, "received", label, payload, expr, peer=sender, channel=channel.channel_id)
        for tapper in sorted(channel.taps - {sender, receiver}):
            self.log(tapper, "received", label, payload, expr, peer=sender, channel=channel.channel_id, tapped=True)
        return msg


def _pair(text: str) -> tuple[str, str]:
    a, sep, b = text.partition("-")
    if not sep or not a or not b:
        raise ConfigurationError(f"malformed endpoint pair {text!r}")
    return a, b


def build_topology(spec: TopologySpec) -> Topology:
    """Validate ``spec`` and return a fresh Topology with empty pools and transcripts."""
    topo = Topology()
    for name, kind in spec.nodes:
        if kind not in NODE_KINDS:
            raise ConfigurationError(f"unknown node kind {kind!r} for {name}")
        if name in topo.nodes:
            raise ConfigurationError(f"duplicate node name {name!r}")
        if not name or "-" in name:
            raise ConfigurationError(f"invalid node name {name!r}")
        topo.nodes[name] = Node(name, kind)
        topo.transcripts[name] = Transcript(name)

    def check_ends(a: str, b: str, what: str) -> None:
        for n in (a, b):
            if n not in topo.nodes:
                raise ConfigurationError(f"{what} {a}-{b} names unknown node {n!r}")
        if a == b:
            raise ConfigurationError(f"{what} {a}-{b} is a self loop")

    seen: set[frozenset[str]] = set()
    for a, b in spec.qlinks:
        check_ends(a, b, "quantum link")
        link_id = f"{a}-{b}"
        if frozenset((a, b)) in seen:
            raise ConfigurationError(f"duplicate quantum link {link_id}")
        seen.add(frozenset((a, b)))
        topo.add_link(QuantumLink(link_id, (a, b)))
        topo.add_channel(ClassicalChannel(link_id, (a, b), secure=False, kind="link"))
    seen.clear()
    for a, b, secure in spec.cchannels:
        check_ends(a, b, "classical channel")
        if frozenset((a, b)) in seen:
            raise ConfigurationError(f"duplicate classical channel {a}-{b}")
        seen.add(frozenset((a, b)))
        ch_id = f"{a}-{b}"
        if ch_id in topo.channels:  # the pair also has a quantum link
            ch_id += "/classical"
        topo.add_channel(ClassicalChannel(ch_id, (a, b), secure=secure))
    return topo


def parse_pair(text: str) -> tuple[str, str]:
    return _pair(text)


def provision_link_keys(topo: Topology, link: QuantumLink, count: int, bit_length: int, rng: RandomSource) -> list[LinkKey]:
    """Append ``count`` fresh uniform keys to ``link``'s pool (seen by both endpoints)."""
    if link.link_id not in topo.links or topo.links[link.link_id] is not link:
        raise ConfigurationError(f"link {link.link_id} is not part of this topology")
    if count < 0 or bit_length < 1:
        raise ConfigurationError("need count >= 0 and bit_length >= 1")
    fresh = []
    for _ in range(count):
        key = LinkKey(f"{link.link_id}#{link.provisioned}", rng.bits(bit_length))
        link.provisioned += 1
        fresh.append(key)
    link.pool.extend(fresh)
    return fresh


def key_label(key_id: str) -> str:
    return f"K_{{{key_id}}}"


def draw_key(topo: Topology, link: QuantumLink, caller: str) -> tuple[str, BitString]:
    """Consume the oldest unconsumed key; both endpoints log it as held material."""
    if not link.has(caller):
        raise ConfigurationError(f"{caller} is not an endpoint of {link.link_id}")
    for key in link.pool:
        if not key.consumed:
            break
    else:
        raise KeyExhausted(f"key pool of {link.link_id} is exhausted")
    key.consumed = True
    link.drawn += 1
    expr = topo.space.declare(key_label(key.key_id), key.value, "link_key")
    for node in link.endpoints:
        topo.log(node, "held_key", key_label(key.key_id), key.value, expr, channel=link.link_id)
    return key.key_id, key.value


def pool_level(topo: Topology, link: QuantumLink) -> int:
    return sum(1 for k in link.pool if not k.consumed)


def key_expr(topo: Topology, key_id: str) -> Expr:
    var = topo.space[key_label(key_id)]
    return Expr.var(var.name, var.length)


def relay_paths_graph(topo: Topology, include_classical: bool = False) -> dict[str, list[str]]:
    adj: dict[str, set[str]] = {n: set() for n in topo.nodes}
    for link in topo.links.values():
        a, b = link.endpoints
        adj[a].add(b)
        adj[b].add(a)
    if include_classical:
        for ch in topo.channels.values():
            a, b = ch.endpoints
            adj[a].add(b)
            adj[b].add(a)
    return {n: sorted(v) for n, v in adj.items()}


__all__ = [
    "ClassicalChannel", "Entry", "LinkKey", "Message", "Node", "QuantumLink", "Topology",
    "TopologySpec", "Transcript", "build_topology", "draw_key", "key_expr", "key_label",
    "parse_pair", "pool_level", "provision_link_keys", "relay_paths_graph",
]
