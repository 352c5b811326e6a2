"""Realism-based nonlocality for bipartite and tripartite qubit states."""

__version__ = "0.1.0"
