"""Per-instance selection of alldifferent propagators."""

__version__ = "0.1.0"
