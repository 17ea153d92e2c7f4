"""Deterministic adversarial simulator for an optimistic rollup core:
sparse Merkle state commitments, interactive bisection fraud proofs, and a
KZG-backed data-availability committee, driven by a tick-based scenario
engine."""

__version__ = "0.1.0"
