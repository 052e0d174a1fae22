"""Deterministic chase, safety classes and acyclicity analysis for quad-systems with bridge rules."""

__version__ = "0.1.0"
