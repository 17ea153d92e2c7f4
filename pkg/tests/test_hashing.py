import hashlib

import pytest

from rollupsim.hashing import (
    ACCOUNT,
    ADDRESS,
    LEAF,
    NODE,
    NULL_DIGEST,
    TX_CHAIN,
    tagged_hash,
    tagged_hash2,
)


def test_tags_are_distinct_single_bytes():
    tags = [LEAF, NODE, TX_CHAIN, ACCOUNT, ADDRESS]
    assert all(len(t) == 1 for t in tags)
    assert len(set(tags)) == len(tags)


def test_tagged_hash_is_prefixed_sha256():
    payload = b"hello"
    assert tagged_hash(NODE, payload) == hashlib.sha256(b"\x01hello").digest()
    assert tagged_hash2(NODE, b"ab", b"cd") == tagged_hash(NODE, b"abcd")


def test_domain_separation():
    payload = b"same bytes"
    assert tagged_hash(LEAF, payload) != tagged_hash(NODE, payload)
    assert tagged_hash(TX_CHAIN, payload) != tagged_hash(ACCOUNT, payload)


def test_empty_chain_seed_is_stable():
    assert NULL_DIGEST == bytes(32)
    # Pinned: the chain-link hash of an empty payload never changes.
    assert (
        tagged_hash(TX_CHAIN, b"").hex()
        == hashlib.sha256(b"\x02").hexdigest()
    )


def test_rejects_wide_tag():
    with pytest.raises(ValueError):
        tagged_hash(b"\x01\x02", b"payload")
