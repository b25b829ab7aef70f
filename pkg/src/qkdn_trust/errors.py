"""Exception hierarchy shared by every layer of the simulator."""

from __future__ import annotations


class QkdnError(Exception):
    """Base class for simulator errors."""


class ConfigurationError(QkdnError, ValueError):
    """Scenario, topology or parameter error detected before or during setup."""


class ProtocolAbort(QkdnError):
    """A protocol run stopped before delivery. Partial transcripts are kept."""


class KeyExhausted(ProtocolAbort):
    """A link's key pool had no unconsumed key left."""


class AnalysisError(QkdnError):
    """The trust analyzer refused a view (non-linear content or oversized domain)."""
