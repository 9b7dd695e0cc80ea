"""Circular sequent calculi with multicut reduction."""

__version__ = "0.1.0"
