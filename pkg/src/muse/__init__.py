"""Verification of semantics-guided synthesis candidates with fixed-point semantics."""

__version__ = "0.1.0"
