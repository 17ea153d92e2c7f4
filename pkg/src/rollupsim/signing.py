"""Thin Ed25519 wrappers for committee attestations.

Keys are derived from 32-byte seeds so scenario runs are reproducible;
signatures are the standard 64-byte form.
"""

from __future__ import annotations

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

SIGNATURE_SIZE = 64
VERIFY_KEY_SIZE = 32


class SigningKey:
    def __init__(self, seed: bytes):
        if len(seed) != 32:
            raise ValueError("seed must be 32 bytes")
        self._key = Ed25519PrivateKey.from_private_bytes(seed)
        self.verify_key = self._key.public_key().public_bytes_raw()

    def sign(self, message: bytes) -> bytes:
        return self._key.sign(message)


def verify_signature(verify_key: bytes, message: bytes, signature: bytes) -> bool:
    if len(verify_key) != VERIFY_KEY_SIZE or len(signature) != SIGNATURE_SIZE:
        return False
    try:
        Ed25519PublicKey.from_public_bytes(verify_key).verify(signature, message)
        return True
    except (InvalidSignature, ValueError):
        return False
