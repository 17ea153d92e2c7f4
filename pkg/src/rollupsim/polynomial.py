"""Scalar-field polynomials and blob encoding.

Field elements are plain ints reduced into [0, SCALAR_MODULUS); polynomials
are immutable coefficient tuples, lowest degree first, with trailing zeros
trimmed so equal polynomials compare equal.

Blobs ride in coefficient form: an 8-byte big-endian length header is
prepended to the payload and the whole stream is cut into 31-byte chunks,
one chunk per coefficient.  31 bytes (one less than the field byte size)
guarantees every chunk is a canonical field element.
"""

from __future__ import annotations

from dataclasses import dataclass

import gmpy2

from .curve import CURVE_ORDER

SCALAR_MODULUS = CURVE_ORDER
CHUNK_BYTES = 31
LENGTH_HEADER_BYTES = 8


class EncodingError(Exception):
    pass


class BlobTooLarge(EncodingError):
    pass


class MalformedEncoding(EncodingError):
    pass


class InterpolationError(Exception):
    pass


class DuplicatePoint(InterpolationError):
    pass


class InconsistentPoints(InterpolationError):
    pass


def fr(x: int) -> int:
    """Canonical representative of x in the scalar field."""
    return x % SCALAR_MODULUS


def fr_inv(x: int) -> int:
    return int(gmpy2.invert(x % SCALAR_MODULUS, SCALAR_MODULUS))


def fr_random(rng) -> int:
    """Uniform field element from a seeded generator."""
    return rng.randrange(SCALAR_MODULUS)


def batch_inverse(values: list[int]) -> list[int]:
    """Invert many nonzero elements with a single field inversion."""
    n = len(values)
    prefix = [0] * n
    acc = 1
    for i, v in enumerate(values):
        prefix[i] = acc
        acc = acc * v % SCALAR_MODULUS
    inv = fr_inv(acc)
    out = [0] * n
    for i in range(n - 1, -1, -1):
        out[i] = prefix[i] * inv % SCALAR_MODULUS
        inv = inv * values[i] % SCALAR_MODULUS
    return out


@dataclass(frozen=True)
class Polynomial:
    """Immutable polynomial over the scalar field, lowest degree first."""

    coeffs: tuple[int, ...]

    @classmethod
    def from_coeffs(cls, coeffs) -> "Polynomial":
        c = [x % SCALAR_MODULUS for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        return cls(tuple(c))

    @classmethod
    def zero(cls) -> "Polynomial":
        return cls(())

    @property
    def degree(self) -> int:
        """Degree, with -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def evaluate(self, z: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * z + c) % SCALAR_MODULUS
        return acc

    def __add__(self, other: "Polynomial") -> "Polynomial":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = (out[i] + c) % SCALAR_MODULUS
        return Polynomial.from_coeffs(out)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + other.scale(SCALAR_MODULUS - 1)

    def scale(self, k: int) -> "Polynomial":
        k %= SCALAR_MODULUS
        return Polynomial.from_coeffs(c * k % SCALAR_MODULUS for c in self.coeffs)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        if self.is_zero() or other.is_zero():
            return Polynomial.zero()
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = (out[i + j] + a * b) % SCALAR_MODULUS
        return Polynomial.from_coeffs(out)

    def divide_by_linear(self, z: int) -> tuple["Polynomial", int]:
        """Synthetic division by (x − z): returns (quotient, remainder);
        the remainder equals self(z)."""
        quotient = [0] * max(len(self.coeffs) - 1, 0)
        acc = 0
        for i in range(len(self.coeffs) - 1, -1, -1):
            acc = (acc * z + self.coeffs[i]) % SCALAR_MODULUS
            if i > 0:
                quotient[i - 1] = acc
        return Polynomial.from_coeffs(quotient), acc


def interpolate(
    points: list[tuple[int, int]], degree_bound: int | None = None
) -> Polynomial:
    """Lagrange interpolation through all given points.

    The result is the unique polynomial of degree < len(points) through
    every point.  With ``degree_bound`` set, a fitted degree above the bound
    means the points cannot come from one admissible polynomial and
    InconsistentPoints is raised (an over-determined consistency check:
    points genuinely on a low-degree polynomial interpolate back to it
    exactly, extra points or not).
    """
    if not points:
        raise InterpolationError("at least one point required")
    xs = [x % SCALAR_MODULUS for x, _ in points]
    ys = [y % SCALAR_MODULUS for _, y in points]
    if len(set(xs)) != len(xs):
        raise DuplicatePoint("points share an abscissa")

    # master(x) = Π (x − x_i), built incrementally.
    master = [1]
    for x in xs:
        nx = SCALAR_MODULUS - x if x else 0
        master = [0] + master
        for j in range(len(master) - 1):
            master[j] = (master[j] + master[j + 1] * nx) % SCALAR_MODULUS

    m = len(xs)
    numerators = []
    denominators = []
    for x in xs:
        # master / (x − x_i) by synthetic division; exact by construction.
        q = [0] * m
        acc = 0
        for i in range(m, 0, -1):
            acc = (acc * x + master[i]) % SCALAR_MODULUS
            q[i - 1] = acc
        numerators.append(q)
        # denominator = Π_{j≠i}(x_i − x_j) = q(x_i)
        d = 0
        for c in reversed(q):
            d = (d * x + c) % SCALAR_MODULUS
        denominators.append(d)

    inv_d = batch_inverse(denominators)
    out = [0] * m
    for q, y, di in zip(numerators, ys, inv_d):
        w = y * di % SCALAR_MODULUS
        if not w:
            continue
        for j, c in enumerate(q):
            out[j] = (out[j] + c * w) % SCALAR_MODULUS
    result = Polynomial.from_coeffs(out)
    if degree_bound is not None and result.degree > degree_bound:
        raise InconsistentPoints(
            f"fitted degree {result.degree} exceeds bound {degree_bound}"
        )
    return result


@dataclass(frozen=True)
class EncodingParams:
    """Blob shape: polynomials of degree ≤ degree_bound, chunk_bytes of
    payload per coefficient."""

    degree_bound: int
    chunk_bytes: int = CHUNK_BYTES

    @property
    def capacity(self) -> int:
        """Largest admissible blob in bytes."""
        return (self.degree_bound + 1) * self.chunk_bytes - LENGTH_HEADER_BYTES


def encode_blob(data: bytes, params: EncodingParams) -> Polynomial:
    """Byte blob → polynomial; injective over the admissible blob set."""
    if len(data) > params.capacity:
        raise BlobTooLarge(f"{len(data)} bytes > capacity {params.capacity}")
    stream = len(data).to_bytes(LENGTH_HEADER_BYTES, "big") + data
    n_chunks = -(-len(stream) // params.chunk_bytes)
    stream = stream.ljust(n_chunks * params.chunk_bytes, b"\x00")
    coeffs = [
        int.from_bytes(stream[i * params.chunk_bytes : (i + 1) * params.chunk_bytes], "big")
        for i in range(n_chunks)
    ]
    # Not trimmed through from_coeffs lightly: trailing zero chunks trim away
    # naturally and decode restores them from the declared length.
    return Polynomial.from_coeffs(coeffs)


def decode_blob(poly: Polynomial, params: EncodingParams) -> bytes:
    """Inverse of encode_blob; rejects anything encode_blob cannot emit."""
    if poly.degree > params.degree_bound:
        raise MalformedEncoding("polynomial exceeds the degree bound")
    limit = 1 << (8 * params.chunk_bytes)
    if any(c >= limit for c in poly.coeffs):
        raise MalformedEncoding("coefficient wider than one chunk")
    stream = b"".join(c.to_bytes(params.chunk_bytes, "big") for c in poly.coeffs)
    stream = stream.ljust(
        (params.degree_bound + 1) * params.chunk_bytes, b"\x00"
    )
    length = int.from_bytes(stream[:LENGTH_HEADER_BYTES], "big")
    if length > params.capacity:
        raise MalformedEncoding("declared length exceeds capacity")
    body = stream[LENGTH_HEADER_BYTES:]
    data, padding = body[:length], body[length:]
    if any(padding):
        raise MalformedEncoding("nonzero padding after declared payload")
    return data
