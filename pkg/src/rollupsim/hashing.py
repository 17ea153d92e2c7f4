"""Domain-separated SHA-256 hashing.

Every hash in the protocol goes through :func:`tagged_hash` so that digests
from different contexts can never collide: a tree node can't be confused with
an account snapshot, a transaction-chain link can't be replayed as a leaf.
The tag is a single prefix byte, fixed forever.
"""

from __future__ import annotations

import hashlib

DIGEST_SIZE = 32

# Domain tags. One byte each; values are frozen (changing any of them changes
# every commitment in the system).
LEAF = b"\x00"
NODE = b"\x01"
TX_CHAIN = b"\x02"
ACCOUNT = b"\x03"
ADDRESS = b"\x04"

# Reserved digest standing for "nothing here": the value of an absent tree
# leaf and the seed of each slot's transaction hash chain.  All zeroes, so it
# is trivially distinguishable in dumps and can't be produced by SHA-256 in
# practice.
NULL_DIGEST = b"\x00" * DIGEST_SIZE


def tagged_hash(tag: bytes, payload: bytes) -> bytes:
    """SHA-256 of a one-byte domain tag followed by the payload."""
    if len(tag) != 1:
        raise ValueError("domain tag must be exactly one byte")
    return hashlib.sha256(tag + payload).digest()


def tagged_hash2(tag: bytes, left: bytes, right: bytes) -> bytes:
    """Two-argument form for interior tree nodes; concatenation is safe
    because both children are fixed-width digests."""
    return hashlib.sha256(tag + left + right).digest()
