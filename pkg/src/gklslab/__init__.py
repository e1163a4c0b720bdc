"""GKLS test-function generator, benchmarking protocol and landscape analysis."""

__version__ = "0.1.0"
