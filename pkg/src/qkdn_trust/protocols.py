"""Chain forwarding through trusted relays and its multipath extension."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .bits import BitString
from .errors import ConfigurationError, ProtocolAbort
from .fabric import (
    Message,
    QuantumLink,
    Topology,
    draw_key,
    key_expr,
    key_label,
    relay_paths_graph,
)
from .rng import RandomSource
from .sharing import (
    FieldElement,
    Share,
    chunk_bounds,
    chunk_secret,
    decode_field_values,
    encode_field_values,
    shamir_reconstruct,
    shamir_split,
    share_width,
    unchunk_secret,
    xor_combine,
    xor_split,
)
from .symbolic import Expr

SECRET = "K_S"


@dataclass(frozen=True)
class PathSet:
    paths: tuple[tuple[str, ...], ...]
    disjoint: bool

    @classmethod
    def of(cls, paths: Sequence[Sequence[str]]) -> PathSet:
        paths = tuple(tuple(p) for p in paths)
        seen: set[str] = set()
        disjoint = True
        for p in paths:
            inner = set(p[1:-1])
            if inner & seen:
                disjoint = False
            seen |= inner
        return cls(paths, disjoint)

    def __len__(self) -> int:
        return len(self.paths)

    def relays(self) -> set[str]:
        return {n for p in self.paths for n in p[1:-1]}


@dataclass(frozen=True)
class XorScheme:
    k: int
    name: str = "xor"


@dataclass(frozen=True)
class ShamirScheme:
    q: int
    t: int
    k: int
    nonzero_leading: bool = False
    name: str = "shamir"


@dataclass(frozen=True)
class ShamirLayout:
    """What the analyzer needs to enumerate polynomials behind a Shamir run."""

    q: int
    t: int
    k: int
    secret_bits: int
    nonzero_leading: bool
    share_vars: tuple[str, ...]

    def chunks(self) -> list[tuple[int, int]]:
        return chunk_bounds(self.secret_bits, self.q)


@dataclass
class ProtocolRun:
    """Outcome of one protocol execution plus what the analyzer needs to judge it."""

    protocol: str
    topology: Topology
    alice: str
    bob: str
    secret_expr: Expr
    expected_level: str
    intermediates: tuple[str, ...] = ()
    material: list[tuple[str, Expr]] = field(default_factory=list)
    paths: tuple[tuple[str, ...], ...] = ()
    disjoint: bool = True
    secret: BitString | None = None
    delivered: BitString | None = None
    alice_result: BitString | None = None
    shamir: ShamirLayout | None = None
    details: dict = field(default_factory=dict)
    aborted: str | None = None

    @property
    def key_match(self) -> bool:
        if self.delivered is None or self.secret is None:
            return False
        if self.alice_result is not None and self.alice_result != self.delivered:
            return False
        return self.delivered == self.secret


def _abort(run: ProtocolRun, exc: ProtocolAbort) -> ProtocolAbort:
    run.aborted = str(exc)
    exc.run = run  # type: ignore[attr-defined]
    return exc


# -- single hops and whole chains ---------------------------------------------


def _encrypt_first_hop(topo: Topology, sender: str, receiver: str, value: BitString, label: str, expr: Expr,
                       header: dict[str, str] | None = None) -> Message:
    link = topo.link_between(sender, receiver)
    key_id, key = draw_key(topo, link, sender)
    if key.length != value.length:
        raise ConfigurationError(f"{key.length}-bit link key on {link.link_id} for a {value.length}-bit value")
    hdr = {"key_id": key_id, "plain": label, **(header or {})}
    return topo.send(sender, receiver, value ^ key, f"{label}⊕{key_label(key_id)}",
                     expr ^ key_expr(topo, key_id), header=hdr)


def _inbound_key(topo: Topology, node: str, inbound: Message) -> tuple[str, BitString]:
    header = dict(inbound.header)
    link = topo.link_between(inbound.sender, node)
    return header["key_id"], link.key(header["key_id"]).value


def fat_relay_hop(topo: Topology, node: str, inbound: Message, outbound: QuantumLink | str) -> Message:
    """Decrypt with the inbound link key, re-encrypt with a fresh outbound key, forward."""
    if inbound.receiver != node:
        raise ConfigurationError(f"message for {inbound.receiver} handed to {node}")
    nxt = outbound if isinstance(outbound, str) else next(n for n in outbound.endpoints if n != node)
    header = dict(inbound.header)
    plain = header.pop("plain")
    key_in_id, key_in = _inbound_key(topo, node, inbound)
    header.pop("key_id")
    # the plaintext passes through the relay: it is credited as computed knowledge
    intermediate = inbound.payload ^ key_in
    plain_expr = inbound.expr ^ key_expr(topo, key_in_id)
    topo.log(node, "computed", plain, intermediate, plain_expr)
    return _encrypt_first_hop(topo, node, nxt, intermediate, plain, plain_expr, header)


def relay_reencrypt(payload: BitString, key_in: BitString, key_out: BitString) -> BitString:
    return payload ^ key_in ^ key_out


def forward(topo: Topology, path: Sequence[str], value: BitString, label: str, expr: Expr,
            header: dict[str, str] | None = None) -> BitString:
    """Hop-by-hop one-time-pad forwarding of ``value`` along ``path``; returns what the last node decrypts."""
    if len(path) < 2:
        raise ConfigurationError("a path needs at least two nodes")
    msg = _encrypt_first_hop(topo, path[0], path[1], value, label, expr, header)
    for i in range(1, len(path) - 1):
        msg = fat_relay_hop(topo, path[i], msg, path[i + 1])
    end = path[-1]
    key_id, key = _inbound_key(topo, end, msg)
    recovered = msg.payload ^ key
    topo.log(end, "computed", label, recovered, msg.expr ^ key_expr(topo, key_id))
    return recovered


def fat_send(topo: Topology, alice: str, bob: str, secret: BitString, path: Sequence[str] | None = None) -> ProtocolRun:
    """Alice's secret crosses the relay chain; every relay sees it in the clear."""
    if secret.length == 0:
        raise ConfigurationError("empty secret")
    path = list(path) if path is not None else topo.chain(alice, bob)
    if path[0] != alice or path[-1] != bob:
        raise ConfigurationError("path must run from alice to bob")
    s = topo.space.declare(SECRET, secret, "secret")
    run = ProtocolRun("fat_chain", topo, alice, bob, s, "FAT", tuple(path[1:-1]),
                      paths=(tuple(path),), secret=secret)
    topo.log(alice, "held_key", SECRET, secret, s)
    try:
        run.delivered = forward(topo, path, secret, SECRET, s)
    except ProtocolAbort as exc:
        raise _abort(run, exc)
    return run


# -- path discovery -------------------------------------------------------------


def find_disjoint_paths(topo: Topology, alice: str, bob: str, k: int, *, include_classical: bool = False) -> PathSet:
    """k node-disjoint alice..bob paths via unit-capacity max flow on the split-node graph.

    Augmenting paths are found by BFS over sorted neighbours, so results are
    deterministic and prefer short, lexicographically small paths.
    """
    if k < 1:
        raise ConfigurationError("k must be at least 1")
    adj = relay_paths_graph(topo, include_classical)
    if alice not in adj or bob not in adj:
        raise ConfigurationError("unknown endpoint")

    def n_in(v: str) -> tuple[str, str]:
        return (v, "out") if v == alice else (v, "in")

    def n_out(v: str) -> tuple[str, str]:
        return (v, "in") if v == bob else (v, "out")

    cap: dict[tuple, dict[tuple, int]] = {}

    def add(u, v, c):
        cap.setdefault(u, {})[v] = cap.get(u, {}).get(v, 0) + c
        cap.setdefault(v, {}).setdefault(u, 0)

    for v in sorted(adj):
        if v not in (alice, bob):
            add((v, "in"), (v, "out"), 1)
        for w in adj[v]:
            if w != alice and v != bob:
                add(n_out(v), n_in(w), 1)

    original = {u: {v: c for v, c in nbrs.items() if c > 0} for u, nbrs in cap.items()}
    source, sink = n_out(alice), n_in(bob)
    flow = 0
    while flow < k:
        parent = {source: None}
        queue = deque([source])
        while queue and sink not in parent:
            u = queue.popleft()
            for v in sorted(cap.get(u, {})):
                if v not in parent and cap[u][v] > 0:
                    parent[v] = u
                    queue.append(v)
        if sink not in parent:
            break
        v = sink
        while parent[v] is not None:
            u = parent[v]
            cap[u][v] -= 1
            cap[v][u] += 1
            v = u
        flow += 1
    if flow < k:
        raise ConfigurationError(f"only {flow} node-disjoint paths between {alice} and {bob}, {k} requested")

    remaining = {u: {v: original[u][v] - cap[u][v] for v in original[u]} for u in original}
    paths = []
    for _ in range(flow):
        path, u = [alice], source
        while u != sink:
            w = next(w for w in sorted(remaining[u]) if remaining[u][w] > 0)
            remaining[u][w] -= 1
            if w[0] != path[-1]:
                path.append(w[0])
            u = w
        paths.append(tuple(path))
    return PathSet.of(sorted(paths, key=lambda p: (len(p), p))[:k])


# -- multipath ---------------------------------------------------------------------


def _check_paths(paths: PathSet, alice: str, bob: str, k: int, allow_overlap: bool) -> None:
    if len(paths) != k:
        raise ConfigurationError(f"scheme needs {k} paths, got {len(paths)}")
    for p in paths.paths:
        if p[0] != alice or p[-1] != bob:
            raise ConfigurationError(f"path {'>'.join(p)} does not run from {alice} to {bob}")
    if not paths.disjoint and not allow_overlap:
        raise ConfigurationError("paths overlap; set allow_overlap to waive disjointness")


def pat_multipath_send(
    topo: Topology,
    alice: str,
    bob: str,
    secret: BitString,
    scheme: XorScheme | ShamirScheme,
    paths: PathSet,
    rng: RandomSource,
    *,
    dropped: Sequence[int] = (),
    allow_overlap: bool = False,
) -> ProtocolRun:
    """Split the secret, forward piece i along path i, recombine at Bob.

    ``dropped`` lists 1-based path indices whose piece never leaves Alice.
    """
    if secret.length == 0:
        raise ConfigurationError("empty secret")
    _check_paths(paths, alice, bob, scheme.k, allow_overlap)
    space = topo.space
    s = space.declare(SECRET, secret, "secret")
    protocol = "pat_xor" if isinstance(scheme, XorScheme) else "pat_shamir"
    run = ProtocolRun(protocol, topo, alice, bob, s, "PAT", tuple(sorted(paths.relays())),
                      paths=paths.paths, disjoint=paths.disjoint, secret=secret)
    topo.log(alice, "held_key", SECRET, secret, s)
    try:
        if isinstance(scheme, XorScheme):
            _xor_branch(run, secret, scheme, paths, rng, set(dropped))
        else:
            _shamir_branch(run, secret, scheme, paths, rng, set(dropped))
    except ProtocolAbort as exc:
        raise _abort(run, exc)
    return run


def _xor_branch(run: ProtocolRun, secret: BitString, scheme: XorScheme, paths: PathSet,
                rng: RandomSource, dropped: set[int]) -> None:
    topo, alice, bob = run.topology, run.alice, run.bob
    fragments = xor_split(secret, scheme.k, rng)
    exprs = []
    for i, frag in enumerate(fragments[:-1], start=1):
        e = topo.space.declare(f"K_S{i}", frag, "randomness")
        topo.log(alice, "held_key", f"K_S{i}", frag, e)
        exprs.append(e)
    last = run.secret_expr
    for e in exprs:
        last = last ^ e
    topo.log(alice, "computed", f"K_S{scheme.k}", fragments[-1], last)
    exprs.append(last)
    run.material = [(f"K_S{i}", e) for i, e in enumerate(exprs, start=1)]

    received = []
    for i, (path, frag, e) in enumerate(zip(paths.paths, fragments, exprs), start=1):
        if i in dropped:
            continue
        received.append(forward(topo, path, frag, f"K_S{i}", e))
    if len(received) < scheme.k:
        raise ProtocolAbort(f"xor recombination needs all {scheme.k} fragments, {len(received)} arrived")
    run.delivered = xor_combine(received)
    topo.log(bob, "computed", SECRET, run.delivered, run.secret_expr)


def _shamir_branch(run: ProtocolRun, secret: BitString, scheme: ShamirScheme, paths: PathSet,
                   rng: RandomSource, dropped: set[int]) -> None:
    topo, alice, bob = run.topology, run.alice, run.bob
    q, t, k = scheme.q, scheme.t, scheme.k
    per_chunk = [shamir_split(c, t, k, rng, nonzero_leading=scheme.nonzero_leading)
                 for c in chunk_secret(secret, q)]
    share_vars = []
    encoded = []
    for i in range(1, k + 1):
        payload = encode_field_values([shares[i - 1].payload.value for shares in per_chunk], q)
        name = f"K_S{i}"
        e = topo.space.declare(name, payload, "share")
        topo.log(alice, "computed", name, payload, e)
        share_vars.append(name)
        encoded.append((payload, e))
    run.material = [(name, e) for name, (_, e) in zip(share_vars, encoded)]
    run.shamir = ShamirLayout(q, t, k, secret.length, scheme.nonzero_leading, tuple(share_vars))
    run.details["share_width"] = share_width(q)

    arrived: dict[int, BitString] = {}
    for i, (path, (payload, e)) in enumerate(zip(paths.paths, encoded), start=1):
        if i in dropped:
            continue
        arrived[i] = forward(topo, path, payload, f"K_S{i}", e, header={"index": str(i)})
    if len(arrived) < t:
        raise ProtocolAbort(f"only {len(arrived)} of the {t} required shares arrived")
    used = sorted(arrived)[:t]
    chunks = []
    for c in range(len(per_chunk)):
        pts = [Share("shamir", i, FieldElement(decode_field_values(arrived[i], q)[c], q)) for i in used]
        chunks.append(shamir_reconstruct(pts, t))
    run.delivered = unchunk_secret(chunks, secret.length)
    run.details["shares_used"] = used
    topo.log(bob, "computed", SECRET, run.delivered, run.secret_expr)
