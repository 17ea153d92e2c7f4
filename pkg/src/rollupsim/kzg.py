"""KZG polynomial commitments.

Standard scheme: commit(f) = [f(τ)]·G1 against powers of a discarded secret
τ, openings via the quotient polynomial witness, verification via one
pairing equation.  Commitments are additively homomorphic, which the data
audit leans on: a random linear combination of commitments equals the
commitment of the same combination of polynomials.

The setup here is a simulated ceremony: τ is derived from an explicit seed
so runs reproduce bit-for-bit, then dropped.  Fine for a simulator,
worthless for production.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .curve import (
    G1Point,
    G2Point,
    g1_gen_mul,
    g1_msm,
    g2_gen_mul,
    pairing_check,
)
from .polynomial import SCALAR_MODULUS, Polynomial


class KzgError(Exception):
    pass


class DegreeTooHigh(KzgError):
    pass


@dataclass(frozen=True)
class KzgCommitment:
    point: G1Point

    def to_bytes(self) -> bytes:
        return self.point.to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "KzgCommitment":
        return cls(G1Point.from_bytes(data))


@dataclass(frozen=True)
class OpeningProof:
    """Witness that the committed polynomial takes ``value`` at ``point``."""

    witness: G1Point
    point: int
    value: int

    def to_bytes(self) -> bytes:
        return (
            self.witness.to_bytes()
            + self.point.to_bytes(32, "big")
            + self.value.to_bytes(32, "big")
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "OpeningProof":
        if len(data) != 48 + 32 + 32:
            raise ValueError("opening proof must be 112 bytes")
        point = int.from_bytes(data[48:80], "big")
        value = int.from_bytes(data[80:], "big")
        if point >= SCALAR_MODULUS or value >= SCALAR_MODULUS:
            raise ValueError("scalar out of range")
        return cls(G1Point.from_bytes(data[:48]), point, value)


@dataclass(frozen=True)
class TrustedSetup:
    g1_powers: tuple[G1Point, ...]
    g2_powers: tuple[G2Point, ...]
    max_degree: int


def _derive_tau(ceremony_seed: bytes) -> int:
    digest = hashlib.sha256(b"kzg-ceremony" + ceremony_seed).digest()
    return int.from_bytes(digest, "big") % (SCALAR_MODULUS - 1) + 1


def kzg_setup(degree_bound: int, ceremony_seed: bytes) -> TrustedSetup:
    """Simulated powers-of-tau ceremony, deterministic in the seed."""
    if degree_bound < 1:
        raise ValueError("degree bound must be at least 1")
    tau = _derive_tau(ceremony_seed)
    g1_powers = []
    power = 1
    for _ in range(degree_bound + 1):
        g1_powers.append(G1Point(g1_gen_mul(power)))
        power = power * tau % SCALAR_MODULUS
    g2_powers = (G2Point.generator(), G2Point(g2_gen_mul(tau)))
    del tau
    return TrustedSetup(tuple(g1_powers), g2_powers, degree_bound)


def verification_setup(degree_bound: int, ceremony_seed: bytes) -> TrustedSetup:
    """The verifier's slice of the same ceremony: only the two G2 powers.

    Opening verification never touches the G1 power table, so a party
    that only checks proofs (the arbiter contract) can skip computing
    degree_bound + 1 fixed-base multiplications.
    """
    if degree_bound < 1:
        raise ValueError("degree bound must be at least 1")
    tau = _derive_tau(ceremony_seed)
    g2_powers = (G2Point.generator(), G2Point(g2_gen_mul(tau)))
    del tau
    return TrustedSetup((G1Point.generator(),), g2_powers, degree_bound)


def commit(setup: TrustedSetup, poly: Polynomial) -> KzgCommitment:
    if poly.degree > setup.max_degree:
        raise DegreeTooHigh(
            f"degree {poly.degree} > setup bound {setup.max_degree}"
        )
    point = g1_msm(list(setup.g1_powers[: len(poly.coeffs)]), list(poly.coeffs))
    return KzgCommitment(point)


def open_at(setup: TrustedSetup, poly: Polynomial, point: int) -> OpeningProof:
    if poly.degree > setup.max_degree:
        raise DegreeTooHigh(
            f"degree {poly.degree} > setup bound {setup.max_degree}"
        )
    point %= SCALAR_MODULUS
    quotient, value = poly.divide_by_linear(point)
    witness = g1_msm(
        list(setup.g1_powers[: len(quotient.coeffs)]), list(quotient.coeffs)
    )
    return OpeningProof(witness, point, value)


def verify_opening(
    setup: TrustedSetup, cm: KzgCommitment, proof: OpeningProof
) -> bool:
    """Check e(cm − [value]·G1, G2) = e(witness, [τ]·G2 − [point]·G2)."""
    lhs_g1 = cm.point - G1Point(g1_gen_mul(proof.value))
    rhs_g2 = setup.g2_powers[1] - G2Point(g2_gen_mul(proof.point))
    return pairing_check([(lhs_g1, setup.g2_powers[0]), (-proof.witness, rhs_g2)])


def combine_commitments(
    terms: list[tuple[int, KzgCommitment]]
) -> KzgCommitment:
    """Group-linear combination Σ scalar·cm."""
    return KzgCommitment(
        g1_msm([cm.point for _, cm in terms], [s for s, _ in terms])
    )
