import random

import pytest

from rollupsim.curve import G1Point, G2Point, pairing
from rollupsim.kzg import (
    DegreeTooHigh,
    KzgCommitment,
    OpeningProof,
    combine_commitments,
    commit,
    kzg_setup,
    open_at,
    verify_opening,
)
from rollupsim.polynomial import SCALAR_MODULUS, Polynomial


@pytest.fixture(scope="module")
def setup15():
    return kzg_setup(15, b"kzg-tests")


def rand_poly(rng, degree):
    return Polynomial.from_coeffs(
        [rng.randrange(SCALAR_MODULUS) for _ in range(degree)]
        + [rng.randrange(1, SCALAR_MODULUS)]
    )


def test_setup_shape_and_determinism():
    s = kzg_setup(1, b"seed-a")
    assert len(s.g1_powers) == 2
    assert len(s.g2_powers) == 2
    assert s.max_degree == 1
    assert s.g1_powers[0] == G1Point.generator()
    assert s.g2_powers[0] == G2Point.generator()
    again = kzg_setup(1, b"seed-a")
    assert again.g1_powers == s.g1_powers
    assert again.g2_powers == s.g2_powers
    other = kzg_setup(1, b"seed-b")
    assert other.g1_powers[1] != s.g1_powers[1]
    with pytest.raises(ValueError):
        kzg_setup(0, b"x")


def test_setup_powers_share_one_tau(setup15):
    # e([τ^k]G1, G2) = e([τ^(k-1)]G1, [τ]G2) chains every power to the same τ.
    g2, g2_tau = setup15.g2_powers
    for k in range(1, 5):
        lhs = pairing(setup15.g1_powers[k], g2)
        rhs = pairing(setup15.g1_powers[k - 1], g2_tau)
        assert lhs == rhs


def test_commit_zero_and_linearity(setup15):
    rng = random.Random(50)
    assert commit(setup15, Polynomial.zero()).point.is_identity()
    f = rand_poly(rng, 7)
    g = rand_poly(rng, 11)
    assert commit(setup15, f + g).point == (
        commit(setup15, f).point + commit(setup15, g).point
    )
    c = rng.randrange(1, SCALAR_MODULUS)
    assert commit(setup15, f.scale(c)).point == commit(setup15, f).point * c


def test_commit_matches_naive_power_sum(setup15):
    rng = random.Random(51)
    f = rand_poly(rng, 4)
    expected = G1Point.identity()
    for coeff, power in zip(f.coeffs, setup15.g1_powers):
        expected = expected + power * coeff
    assert commit(setup15, f).point == expected


def test_commit_rejects_excess_degree(setup15):
    with pytest.raises(DegreeTooHigh):
        commit(setup15, Polynomial.from_coeffs([1] * 17))
    with pytest.raises(DegreeTooHigh):
        open_at(setup15, Polynomial.from_coeffs([1] * 17), 3)


def test_open_constant_polynomial(setup15):
    proof = open_at(setup15, Polynomial.from_coeffs([42]), 99)
    assert proof.value == 42
    assert proof.witness.is_identity()
    assert verify_opening(setup15, commit(setup15, Polynomial.from_coeffs([42])), proof)


def test_honest_open_verifies(setup15):
    rng = random.Random(52)
    for _ in range(4):
        f = rand_poly(rng, rng.randrange(1, 15))
        cm = commit(setup15, f)
        z = rng.randrange(SCALAR_MODULUS)
        proof = open_at(setup15, f, z)
        assert proof.value == f.evaluate(z)
        assert verify_opening(setup15, cm, proof)


def test_mutated_proofs_rejected(setup15):
    rng = random.Random(53)
    f = rand_poly(rng, 9)
    cm = commit(setup15, f)
    proof = open_at(setup15, f, rng.randrange(SCALAR_MODULUS))
    assert verify_opening(setup15, cm, proof)
    bumped_value = OpeningProof(
        proof.witness, proof.point, (proof.value + 1) % SCALAR_MODULUS
    )
    assert not verify_opening(setup15, cm, bumped_value)
    bumped_point = OpeningProof(
        proof.witness, (proof.point + 1) % SCALAR_MODULUS, proof.value
    )
    assert not verify_opening(setup15, cm, bumped_point)
    bumped_witness = OpeningProof(
        proof.witness + G1Point.generator(), proof.point, proof.value
    )
    assert not verify_opening(setup15, cm, bumped_witness)


def test_proof_against_wrong_commitment(setup15):
    rng = random.Random(54)
    f = rand_poly(rng, 6)
    g = rand_poly(rng, 6)
    proof = open_at(setup15, f, 7)
    assert not verify_opening(setup15, commit(setup15, g), proof)


def test_combine_commitments_homomorphism(setup15):
    rng = random.Random(55)
    polys = [rand_poly(rng, rng.randrange(0, 15)) for _ in range(5)]
    scalars = [rng.randrange(SCALAR_MODULUS) for _ in polys]
    combined_cm = combine_commitments(
        [(r, commit(setup15, f)) for r, f in zip(scalars, polys)]
    )
    total = Polynomial.zero()
    for r, f in zip(scalars, polys):
        total = total + f.scale(r)
    assert combined_cm == commit(setup15, total)


def test_combine_commitments_edges(setup15):
    assert combine_commitments([]).point.is_identity()
    cm = commit(setup15, Polynomial.from_coeffs([3, 1]))
    assert combine_commitments([(1, cm)]) == cm


def test_serialization_round_trips(setup15):
    rng = random.Random(56)
    f = rand_poly(rng, 5)
    cm = commit(setup15, f)
    assert KzgCommitment.from_bytes(cm.to_bytes()) == cm
    proof = open_at(setup15, f, 11)
    blob = proof.to_bytes()
    assert len(blob) == 112
    assert OpeningProof.from_bytes(blob) == proof
    with pytest.raises(ValueError):
        OpeningProof.from_bytes(blob[:-1])
    with pytest.raises(ValueError):
        OpeningProof.from_bytes(
            blob[:48] + SCALAR_MODULUS.to_bytes(32, "big") + blob[80:]
        )
