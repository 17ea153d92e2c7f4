"""Data-availability committee members and sampling parties.

Members hold blobs off-chain, verify the commitment against the data
before signing, and serve point openings on request. Sampling parties
each draw a handful of evaluation points, verify every response against
the registered commitment, and pool enough verified points to
interpolate the polynomial and decode the original blob.

Member policies model the attacks the protocol must survive: signing
without checking, refusing to serve, serving corrupted data, or losing
the data outright.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .accumulator import CommitmentAccumulator, verify_membership
from .kzg import KzgCommitment, OpeningProof, TrustedSetup, commit, open_at, verify_opening
from .polynomial import (
    EncodingParams,
    Polynomial,
    SCALAR_MODULUS,
    decode_blob,
    encode_blob,
    interpolate,
)
from .signing import SigningKey
from .smt import MerkleProof

HONEST = "Honest"
WITHHOLD = "Withhold"
CORRUPT_BLOB = "CorruptBlob"
SIGN_BLIND = "SignBlind"
LOSE_DATA = "LoseData"

POLICIES = (HONEST, WITHHOLD, CORRUPT_BLOB, SIGN_BLIND, LOSE_DATA)


class DacError(Exception):
    """Base class for committee protocol failures."""


class CommitmentMismatch(DacError):
    """Honest member refused to sign: commitment does not match the blob."""


class NotStored(DacError):
    """Member cannot (or will not) serve openings for this commitment."""


class InsufficientSamples(DacError):
    """Fewer verified points than needed to pin down the polynomial."""


class CommitmentMismatchAfterReconstruction(DacError):
    """The interpolated polynomial does not commit to the registered cm."""


class DacMember:
    """One committee member: verify, sign, store, serve.

    The policy bends each of those duties in a specific dishonest way;
    everything a policy does stays deterministic so scenarios replay.
    """

    def __init__(
        self,
        member_id: str,
        signing_seed: bytes,
        setup: TrustedSetup,
        params: EncodingParams,
        policy: str = HONEST,
    ):
        if policy not in POLICIES:
            raise ValueError(f"unknown policy {policy!r}")
        self.id = member_id
        self.key = SigningKey(signing_seed)
        self.setup = setup
        self.params = params
        self.policy = policy
        self.store: dict[bytes, tuple[bytes, Polynomial]] = {}

    @property
    def verify_key(self) -> bytes:
        return self.key.verify_key

    def receive(self, blob: bytes, cm: KzgCommitment) -> bytes:
        """Check the blob against cm, store it, return a signature over
        the canonical commitment bytes. Dishonest policies deviate."""
        cm_bytes = cm.to_bytes()
        if self.policy == SIGN_BLIND:
            # signs whatever arrives; stores it too, so later openings
            # expose the mismatch instead of hiding it
            self.store[cm_bytes] = (blob, encode_blob(blob, self.params))
            return self.key.sign(cm_bytes)

        poly = encode_blob(blob, self.params)
        if commit(self.setup, poly) != cm:
            raise CommitmentMismatch(f"{self.id}: blob does not match commitment")

        if self.policy == LOSE_DATA:
            pass  # signed but never stored
        elif self.policy == CORRUPT_BLOB:
            damaged = bytes([blob[0] ^ 0x01]) + blob[1:] if blob else b"\x01"
            self.store[cm_bytes] = (damaged, encode_blob(damaged, self.params))
        else:
            self.store[cm_bytes] = (blob, poly)
        return self.key.sign(cm_bytes)

    def open(self, cm: KzgCommitment, points: list[int]) -> list[OpeningProof]:
        """Serve opening proofs at the requested points."""
        if self.policy in (WITHHOLD, LOSE_DATA):
            raise NotStored(f"{self.id} will not serve this commitment")
        entry = self.store.get(cm.to_bytes())
        if entry is None:
            raise NotStored(f"{self.id} does not hold this commitment")
        _, poly = entry
        return [open_at(self.setup, poly, point) for point in points]


@dataclass(frozen=True)
class SampleRequest:
    index: int
    points: tuple[int, ...]


@dataclass(frozen=True)
class SampleResponse:
    cm_bytes: bytes
    openings: tuple[OpeningProof, ...]
    membership: MerkleProof


@dataclass
class SamplingParty:
    """Holds an independent seeded point-drawing stream."""

    id: str
    rng: random.Random

    def draw(self, used: set[int]) -> int:
        # 256-bit draw space; collisions with other parties are detected
        # against the shared pool and redrawn
        while True:
            point = self.rng.randrange(SCALAR_MODULUS)
            if point not in used:
                used.add(point)
                return point


def points_per_party(n: int, party_count: int = 16) -> int:
    return -(-(n + 1) // party_count)


def sample_and_reconstruct(
    parties: list[SamplingParty],
    members: list[DacMember],
    cm: KzgCommitment,
    index: int,
    registry: CommitmentAccumulator,
    setup: TrustedSetup,
    params: EncodingParams,
    allow_extra_draws: bool = True,
) -> bytes:
    """Reconstruct a blob from distributed verified point openings.

    Every party first checks the commitment really is the registered one
    (membership proof against the registry root), then draws its share
    of distinct points and asks a member to open them. Only openings
    that pass KZG verification enter the pool; refusals and bad openings
    mark the member and, when extra draws are allowed, other members
    cover the shortfall. The decoded blob's polynomial must recommit to
    cm or the whole reconstruction is rejected.
    """
    if not parties or not members:
        raise ValueError("need at least one party and one member")
    needed = params.degree_bound + 1
    per_party = points_per_party(params.degree_bound, len(parties))
    cm_bytes = cm.to_bytes()
    membership = registry.prove(index)
    root = registry.root

    pool: dict[int, int] = {}
    used: set[int] = set()
    bad_members: set[int] = set()

    def try_member(member_index: int, party: SamplingParty, count: int) -> None:
        member = members[member_index]
        points = [party.draw(used) for _ in range(count)]
        try:
            proofs = member.open(cm, points)
        except NotStored:
            bad_members.add(member_index)
            return
        if len(proofs) != len(points):
            bad_members.add(member_index)
            return
        for point, proof in zip(points, proofs):
            if proof.point != point or not verify_opening(setup, cm, proof):
                bad_members.add(member_index)
                continue
            pool[point] = proof.value

    for pi, party in enumerate(parties):
        if not verify_membership(root, index, cm_bytes, membership):
            raise DacError("commitment is not in the registry")
        try_member(pi % len(members), party, per_party)

    if allow_extra_draws:
        while len(pool) < needed:
            before = len(pool)
            for pi, party in enumerate(parties):
                if len(pool) >= needed:
                    break
                for offset in range(len(members)):
                    mi = (pi + offset) % len(members)
                    if mi in bad_members:
                        continue
                    try_member(mi, party, 1)
                    break
            if len(pool) == before:
                break

    if len(pool) < needed:
        raise InsufficientSamples(f"{len(pool)} verified points, need {needed}")

    points = sorted(pool.items())[:needed]
    poly = interpolate(points, degree_bound=params.degree_bound)
    if commit(setup, poly) != cm:
        raise CommitmentMismatchAfterReconstruction("reconstructed polynomial does not match cm")
    return decode_blob(poly, params)
