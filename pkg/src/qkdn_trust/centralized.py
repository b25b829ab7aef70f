"""Centralized mask protocol.

Alice submits K_S xor her first link key, each relay submits the xor of its
two adjacent link keys, and the central manager folds all masks. Interior
keys cancel pairwise, leaving K_S xor the last link key, which only Bob can
strip.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from operator import xor
from typing import Sequence

from .bits import BitString
from .errors import ConfigurationError, ProtocolAbort
from .fabric import Topology, draw_key, key_expr, key_label
from .protocols import SECRET, ProtocolRun, _abort


@dataclass(frozen=True)
class Mask:
    origin: str
    value: BitString
    label: str


def make_alice_mask(secret: BitString, link_key: BitString, origin: str = "alice", label: str = "K_S⊕K_A1") -> Mask:
    return Mask(origin, secret ^ link_key, label)


def make_relay_mask(node: str, key_in: BitString, key_out: BitString, label: str | None = None) -> Mask:
    return Mask(node, key_in ^ key_out, label or f"mask({node})")


def central_combine(masks: Sequence[Mask], expected_origins: Sequence[str] | None = None) -> BitString:
    """XOR-fold the masks. With ``expected_origins`` a missing or extra mask is an error."""
    if not masks:
        raise ProtocolAbort("no masks submitted")
    if expected_origins is not None:
        got = [m.origin for m in masks]
        missing = [o for o in expected_origins if o not in got]
        if missing:
            raise ProtocolAbort(f"masks missing from {', '.join(missing)}; the fold would not telescope")
        if sorted(got) != sorted(expected_origins):
            raise ProtocolAbort("unexpected or duplicate mask origins")
    lengths = {m.value.length for m in masks}
    if len(lengths) != 1:
        raise ValueError(f"mask lengths differ: {sorted(lengths)}")
    return reduce(xor, (m.value for m in masks))


def bob_recover(combined: BitString, link_key: BitString) -> BitString:
    return combined ^ link_key


def centralized_send(topo: Topology, alice: str, bob: str, central: str | None, secret: BitString) -> ProtocolRun:
    """Deliver ``secret`` to Bob through the central key manager."""
    if secret.length == 0:
        raise ConfigurationError("empty secret")
    chain = topo.chain(alice, bob)
    s = topo.space.declare(SECRET, secret, "secret")
    run = ProtocolRun("centralized", topo, alice, bob, s, "NAT",
                      intermediates=tuple(chain[1:-1]) + ((central,) if central in topo.nodes else ()),
                      paths=(tuple(chain),), secret=secret)
    topo.log(alice, "held_key", SECRET, secret, s)
    try:
        if central is None or central not in topo.nodes:
            raise ProtocolAbort("no central key manager: the single point of failure is down")
        channels = {}
        for node in [*chain[:-1], bob]:
            try:
                channels[node] = topo.channel_between(node, central, "classical")
            except ConfigurationError:
                raise ProtocolAbort(f"{node} has no channel to the central key manager") from None

        # each link key is drawn once by its upstream endpoint
        keys: list[tuple[str, BitString]] = []
        for a, b in zip(chain, chain[1:]):
            key_id, value = draw_key(topo, topo.link_between(a, b), a)
            if value.length != secret.length:
                raise ConfigurationError(f"{value.length}-bit link key for a {secret.length}-bit secret")
            keys.append((key_id, value))

        masks = []
        first_id, first = keys[0]
        m = make_alice_mask(secret, first, alice, f"K_S⊕{key_label(first_id)}")
        topo.log(alice, "computed", m.label, m.value, s ^ key_expr(topo, first_id))
        masks.append((m, s ^ key_expr(topo, first_id)))
        for i, node in enumerate(chain[1:-1]):
            (in_id, k_in), (out_id, k_out) = keys[i], keys[i + 1]
            expr = key_expr(topo, in_id) ^ key_expr(topo, out_id)
            m = make_relay_mask(node, k_in, k_out, f"{key_label(in_id)}⊕{key_label(out_id)}")
            topo.log(node, "computed", m.label, m.value, expr)
            masks.append((m, expr))
        for m, expr in masks:
            topo.send(m.origin, central, m.value, m.label, expr, channel=channels[m.origin])

        combined = central_combine([m for m, _ in masks], expected_origins=chain[:-1])
        c_expr = reduce(xor, (e for _, e in masks))
        topo.log(central, "computed", "C", combined, c_expr)
        topo.send(central, bob, combined, "C", c_expr, channel=channels[bob])
        last_id, last = keys[-1]
        run.details["combined"] = combined
        run.details["last_key"] = last_id
        run.delivered = bob_recover(combined, last)
        topo.log(bob, "computed", SECRET, run.delivered, c_expr ^ key_expr(topo, last_id))
    except ProtocolAbort as exc:
        raise _abort(run, exc)
    return run
