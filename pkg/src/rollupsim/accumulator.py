"""Append-only Merkle accumulator over registered blob commitments.

Backed by the same sparse Merkle tree as the rollup state, keyed by
registration index, so membership proofs reuse the existing proof
machinery. Samplers verify a commitment belongs to the registry before
trusting any opening against it.
"""

from __future__ import annotations

from .hashing import ADDRESS, LEAF, tagged_hash
from .smt import MerkleProof, SmtKey, SparseMerkleTree, verify_proof


def index_key(index: int) -> SmtKey:
    if index < 0:
        raise ValueError("index must be non-negative")
    return SmtKey(tagged_hash(ADDRESS, index.to_bytes(8, "big")))


def commitment_leaf(commitment_bytes: bytes) -> bytes:
    return tagged_hash(LEAF, commitment_bytes)


class CommitmentAccumulator:
    """Registry positions 0, 1, 2, ... each holding one commitment."""

    def __init__(self) -> None:
        self._tree = SparseMerkleTree()
        self._commitments: list[bytes] = []

    def __len__(self) -> int:
        return len(self._commitments)

    @property
    def root(self) -> bytes:
        return self._tree.root

    def append(self, commitment_bytes: bytes) -> int:
        index = len(self._commitments)
        self._tree = self._tree.update(index_key(index), commitment_leaf(commitment_bytes))
        self._commitments.append(bytes(commitment_bytes))
        return index

    def get(self, index: int) -> bytes:
        if not 0 <= index < len(self._commitments):
            raise IndexError("no commitment at index")
        return self._commitments[index]

    def prove(self, index: int) -> MerkleProof:
        if not 0 <= index < len(self._commitments):
            raise IndexError("no commitment at index")
        return self._tree.prove(index_key(index))


def verify_membership(root: bytes, index: int, commitment_bytes: bytes, proof: MerkleProof) -> bool:
    if proof.key != index_key(index):
        return False
    if proof.value != commitment_leaf(commitment_bytes):
        return False
    return verify_proof(root, proof)
