"""Deterministic matplotlib figures for acdiff experiment CSV artifacts."""

__version__ = "0.1.0"
