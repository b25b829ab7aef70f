"""Honest-but-curious trust analysis: what each node can deduce from its transcript."""

from .enumeration import (
    Posterior,
    enumerate_posterior,
    posterior_entropy,
    shamir_entropy,
    shamir_posterior,
)
from .linear import LinearView, Row, build_linear_view, span_closure
from .trust import (
    LEVELS,
    TrustVerdict,
    breaking_coalition,
    classify_coalition,
    classify_entries,
    classify_node,
    enumeration_verdict,
    linear_verdict,
    shamir_verdict,
)

__all__ = [
    "LEVELS", "LinearView", "Posterior", "Row", "TrustVerdict", "breaking_coalition",
    "build_linear_view", "classify_coalition", "classify_entries", "classify_node",
    "enumerate_posterior", "enumeration_verdict", "linear_verdict", "posterior_entropy",
    "shamir_entropy", "shamir_posterior", "shamir_verdict", "span_closure",
]
