"""Phase retrieval from intensity data via the transport-of-intensity and
transport-of-phase equations."""

__version__ = "0.1.0"
