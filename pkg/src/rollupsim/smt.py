"""Sparse Merkle tree over the full 256-bit key space.

Fixed depth 256, SHA-256 interior nodes, and a reserved all-zero leaf digest
for absent keys, so every key has a proof whether or not it is present
(non-inclusion is just inclusion of the default leaf).  Empty subtrees hash
to a per-depth default that is precomputed once, which keeps the tree sparse:
only the path down to real leaves is materialised.

Trees are immutable.  ``update`` returns a new tree sharing all untouched
branches with the old one, so keeping many historical roots around (one per
slot, say) costs one path per change, not one copy per version.
"""

from __future__ import annotations

from dataclasses import dataclass

from .hashing import NODE, NULL_DIGEST, tagged_hash2

KEY_BITS = 256
DEFAULT_LEAF = NULL_DIGEST

# DEFAULTS[d] = digest of an empty subtree whose root sits at depth d
# (d = 256 is a leaf, d = 0 the tree root).
DEFAULTS = [b""] * (KEY_BITS + 1)
DEFAULTS[KEY_BITS] = DEFAULT_LEAF
for _d in range(KEY_BITS - 1, -1, -1):
    DEFAULTS[_d] = tagged_hash2(NODE, DEFAULTS[_d + 1], DEFAULTS[_d + 1])

EMPTY_ROOT = DEFAULTS[0]

# Internal node = (digest, left, right); leaf node = the value digest itself;
# None = empty subtree.  Leaves hold 32-byte digests, never raw values.


class SmtKey:
    """A 256-bit tree key.  Construct from 32 bytes; compares and hashes by
    value."""

    __slots__ = ("ival",)

    def __init__(self, data: bytes):
        if len(data) != 32:
            raise ValueError("key must be exactly 32 bytes")
        self.ival = int.from_bytes(data, "big")

    @classmethod
    def from_int(cls, ival: int) -> "SmtKey":
        if not 0 <= ival < (1 << KEY_BITS):
            raise ValueError("key out of range")
        key = cls.__new__(cls)
        key.ival = ival
        return key

    def to_bytes(self) -> bytes:
        return self.ival.to_bytes(32, "big")

    def bit(self, depth: int) -> int:
        """Branch bit at ``depth`` (0 = root decision, 255 = leaf decision)."""
        return (self.ival >> (KEY_BITS - 1 - depth)) & 1

    def __eq__(self, other) -> bool:
        return isinstance(other, SmtKey) and self.ival == other.ival

    def __hash__(self) -> int:
        return hash(self.ival)

    def __repr__(self) -> str:
        return f"SmtKey({self.to_bytes().hex()[:16]}…)"


@dataclass(frozen=True)
class MerkleProof:
    """Membership witness for one key: the leaf value (None when absent) and
    all 256 sibling digests ordered leaf to root."""

    key: SmtKey
    value: bytes | None
    siblings: tuple[bytes, ...]

    def to_bytes(self) -> bytes:
        """key ‖ presence flag ‖ value (zero-filled when absent) ‖ siblings."""
        flag = b"\x01" if self.value is not None else b"\x00"
        value = self.value if self.value is not None else b"\x00" * 32
        return self.key.to_bytes() + flag + value + b"".join(self.siblings)

    @classmethod
    def from_bytes(cls, data: bytes) -> "MerkleProof":
        if len(data) != 32 + 1 + 32 + KEY_BITS * 32:
            raise ValueError("malformed proof: wrong length")
        key = SmtKey(data[:32])
        flag = data[32]
        if flag not in (0, 1):
            raise ValueError("malformed proof: bad presence flag")
        value = data[33:65] if flag == 1 else None
        sib = tuple(data[65 + 32 * i : 97 + 32 * i] for i in range(KEY_BITS))
        return cls(key, value, sib)


def _node_digest(node, depth: int) -> bytes:
    if node is None:
        return DEFAULTS[depth]
    if isinstance(node, bytes):
        return node
    return node[0]


class SparseMerkleTree:
    """Persistent sparse Merkle tree.  All mutators return a new tree."""

    __slots__ = ("_root", "_count")

    def __init__(self, _root=None, _count: int = 0):
        self._root = _root
        self._count = _count

    @property
    def root(self) -> bytes:
        return _node_digest(self._root, 0)

    def __len__(self) -> int:
        return self._count

    def get(self, key: SmtKey) -> bytes | None:
        node = self._root
        ival = key.ival
        for depth in range(KEY_BITS):
            if node is None:
                return None
            bit = (ival >> (KEY_BITS - 1 - depth)) & 1
            node = node[2] if bit else node[1]
        return node

    def update(self, key: SmtKey, value: bytes | None) -> "SparseMerkleTree":
        """Set ``key`` to a 32-byte value digest, or delete it when value is
        None (or the reserved default, which means the same thing)."""
        if value is not None:
            if len(value) != 32:
                raise ValueError("leaf value must be a 32-byte digest")
            if value == DEFAULT_LEAF:
                value = None

        ival = key.ival
        # Walk down recording the sibling subtree at every level.
        siblings = []
        node = self._root
        for depth in range(KEY_BITS):
            if node is None:
                left = right = None
            else:
                left, right = node[1], node[2]
            if (ival >> (KEY_BITS - 1 - depth)) & 1:
                siblings.append(left)
                node = right
            else:
                siblings.append(right)
                node = left

        was_present = node is not None
        if node == value or (node is None and value is None):
            return self  # no-op write; share everything

    # Rebuild the path bottom-up around the new leaf.
        child = value
        for depth in range(KEY_BITS - 1, -1, -1):
            sib = siblings[depth]
            if child is None and sib is None:
                child = None
                continue
            cd = _node_digest(child, depth + 1)
            sd = _node_digest(sib, depth + 1)
            if (ival >> (KEY_BITS - 1 - depth)) & 1:
                child = (tagged_hash2(NODE, sd, cd), sib, child)
            else:
                child = (tagged_hash2(NODE, cd, sd), child, sib)

        count = self._count + (value is not None) - was_present
        return SparseMerkleTree(child, count)

    def prove(self, key: SmtKey) -> MerkleProof:
        """Membership proof for ``key`` against this tree's root; works for
        absent keys too (value comes back None)."""
        ival = key.ival
        sibs_top_down = []
        node = self._root
        for depth in range(KEY_BITS):
            if node is None:
                left = right = None
            else:
                left, right = node[1], node[2]
            if (ival >> (KEY_BITS - 1 - depth)) & 1:
                sibs_top_down.append(_node_digest(left, depth + 1))
                node = right
            else:
                sibs_top_down.append(_node_digest(right, depth + 1))
                node = left
        return MerkleProof(key, node, tuple(reversed(sibs_top_down)))

    def leaves(self) -> list[tuple[SmtKey, bytes]]:
        """All (key, value) pairs, ascending by key."""
        out: list[tuple[SmtKey, bytes]] = []
        stack = [(self._root, 0, 0)]
        while stack:
            node, depth, prefix = stack.pop()
            if node is None:
                continue
            if depth == KEY_BITS:
                out.append((SmtKey.from_int(prefix), node))
                continue
            # Right pushed first so the left branch pops first (ascending).
            stack.append((node[2], depth + 1, (prefix << 1) | 1))
            stack.append((node[1], depth + 1, prefix << 1))
        return out

    @classmethod
    def from_items(cls, items: dict[SmtKey, bytes]) -> "SparseMerkleTree":
        """Bulk construction; equivalent to folding ``update`` but builds each
        interior node exactly once."""
        pairs = sorted(
            ((k.ival, v) for k, v in items.items() if v != DEFAULT_LEAF),
            key=lambda p: p[0],
        )
        for _, v in pairs:
            if len(v) != 32:
                raise ValueError("leaf value must be a 32-byte digest")

        def build(lo: int, hi: int, depth: int, prefix: int):
            if lo == hi:
                return None
            if depth == KEY_BITS:
                if hi - lo != 1:
                    raise ValueError("duplicate key")
                return pairs[lo][1]
            # Keys in [lo, hi) share `prefix`; split on the next bit.
            boundary = (2 * prefix + 1) << (KEY_BITS - 1 - depth)
            mid = lo
            while mid < hi and pairs[mid][0] < boundary:
                mid += 1
            left = build(lo, mid, depth + 1, prefix << 1)
            right = build(mid, hi, depth + 1, (prefix << 1) | 1)
            if left is None and right is None:
                return None
            ld = _node_digest(left, depth + 1)
            rd = _node_digest(right, depth + 1)
            return (tagged_hash2(NODE, ld, rd), left, right)

        return cls(build(0, len(pairs), 0, 0), len(pairs))


def verify_proof(root: bytes, proof: MerkleProof) -> bool:
    """Recompute leaf-to-root over the siblings and compare against root."""
    if len(proof.siblings) != KEY_BITS:
        return False
    value = proof.value
    if value is not None and len(value) != 32:
        return False
    h = value if value is not None else DEFAULT_LEAF
    ival = proof.key.ival
    for i, sib in enumerate(proof.siblings):
        if len(sib) != 32:
            return False
        # Sibling i sits at depth 256-i; bit i of the key says which side the
        # current node is on.
        if (ival >> i) & 1:
            h = tagged_hash2(NODE, sib, h)
        else:
            h = tagged_hash2(NODE, h, sib)
    return h == root


class TransitionError(Exception):
    """Raised when a root transition can't be carried out."""


class InvalidProof(TransitionError):
    pass


class MissingProof(TransitionError):
    pass


def smt_transition(
    root: bytes,
    proofs: list[MerkleProof],
    new_values: list[tuple[SmtKey, bytes | None]],
) -> bytes:
    """Compute the root after writing ``new_values``, given only ``root`` and
    one proof per written key.

    This is the stateless form of ``update``: a verifier that holds no tree
    can still check a claimed root transition.  Writes are applied in order,
    and path digests computed by earlier writes override the corresponding
    proof siblings of later ones, so overlapping paths stay consistent.
    """
    proof_by_key: dict[int, MerkleProof] = {}
    for proof in proofs:
        if not verify_proof(root, proof):
            raise InvalidProof(f"proof for key {proof.key!r} does not match root")
        proof_by_key[proof.key.ival] = proof

    seen: set[int] = set()
    for key, _ in new_values:
        if key.ival in seen:
            raise ValueError("duplicate key in transition")
        seen.add(key.ival)
        if key.ival not in proof_by_key:
            raise MissingProof(f"no proof supplied for key {key!r}")

    if not new_values:
        return root

    # (depth, prefix) -> digest for every path node recomputed so far.
    updated: dict[tuple[int, int], bytes] = {}
    current = root
    for key, value in new_values:
        if value == DEFAULT_LEAF:
            value = None
        if value is not None and len(value) != 32:
            raise ValueError("leaf value must be a 32-byte digest")
        proof = proof_by_key[key.ival]
        ival = key.ival
        h = value if value is not None else DEFAULT_LEAF
        updated[(KEY_BITS, ival)] = h
        for i in range(KEY_BITS):
            depth = KEY_BITS - i
            sib = updated.get((depth, (ival >> i) ^ 1))
            if sib is None:
                sib = proof.siblings[i]
            if (ival >> i) & 1:
                h = tagged_hash2(NODE, sib, h)
            else:
                h = tagged_hash2(NODE, h, sib)
            updated[(depth - 1, ival >> (i + 1))] = h
        current = h
    return current
