"""BLS12-381 pairing curve.

Everything the commitment scheme needs, built directly on gmpy2 integers:
the Fq / Fq2 / Fq6 / Fq12 tower, G1 and G2 in Jacobian coordinates, an
optimal-ate pairing with a shared final exponentiation for batched checks,
Pippenger multi-scalar multiplication, fixed-base generator tables, and the
usual 48/96-byte compressed point encodings.

Field elements are plain tuples and module-level functions rather than
classes; the multi-scalar paths run millions of field multiplications and
attribute dispatch is the dominant cost at that scale.  The two point
classes at the bottom are thin immutable wrappers for callers.
"""

from __future__ import annotations

import gmpy2
from gmpy2 import mpz

# Base field and curve constants.
P = mpz(int(
    "1a0111ea397fe69a4b1ba7b6434bacd764774b84f38512bf6730d2a0f6b0f624"
    "1eabfffeb153ffffb9feffffffffaaab",
    16,
))
CURVE_ORDER = int(
    "73eda753299d7d483339d80809a1d805"
    "53bda402fffe5bfeffffffff00000001",
    16,
)
B_COEFF = mpz(4)
# Magnitude of the BLS parameter; the actual parameter is its negation,
# which is why the Miller loop ends with a conjugation.
BLS_X = 0xD201000000010000
BLS_X_LEN = BLS_X.bit_length()

_ZERO = mpz(0)
_ONE = mpz(1)
_INV2 = mpz((int(P) + 1) // 2)

G1_GEN_AFFINE = (
    mpz(int(
        "17f1d3a73197d7942695638c4fa9ac0fc3688c4f9774b905a14e3a3f171bac58"
        "6c55e83ff97a1aeffb3af00adb22c6bb", 16)),
    mpz(int(
        "08b3f481e3aaa0f1a09e30ed741d8ae4fcf5e095d5d00af600db18cb2c04b3ed"
        "d03cc744a2888ae40caa232946c5e7e1", 16)),
)
G2_GEN_AFFINE = (
    (
        mpz(int(
            "024aa2b2f08f0a91260805272dc51051c6e47ad4fa403b02b4510b647ae3d177"
            "0bac0326a805bbefd48056c8c121bdb8", 16)),
        mpz(int(
            "13e02b6052719f607dacd3a088274f65596bd0d09920b61ab5da61bbdc7f5049"
            "334cf11213945d57e5ac7d055d042b7e", 16)),
    ),
    (
        mpz(int(
            "0ce5d527727d6e118cc9cdc6da2e351aadfd9baa8cbdd3a76d429a695160d12c"
            "923ac9cc3baca289e193548608b82801", 16)),
        mpz(int(
            "0606c4a02ea734cc32acd2b02bc28b99cb3e287e85a763af267492ab572e99ab"
            "3f370d275cec1da1aaa9075ff05f79be", 16)),
    ),
)


# ---------------------------------------------------------------------------
# Fq2 = Fq[u] / (u² + 1); elements are (c0, c1) meaning c0 + c1·u.

FQ2_ZERO = (_ZERO, _ZERO)
FQ2_ONE = (_ONE, _ZERO)


def fq2_add(a, b):
    return ((a[0] + b[0]) % P, (a[1] + b[1]) % P)


def fq2_sub(a, b):
    return ((a[0] - b[0]) % P, (a[1] - b[1]) % P)


def fq2_neg(a):
    return (-a[0] % P, -a[1] % P)


def fq2_conj(a):
    return (a[0], -a[1] % P)


def fq2_mul(a, b):
    a0, a1 = a
    b0, b1 = b
    t0 = a0 * b0
    t1 = a1 * b1
    return ((t0 - t1) % P, ((a0 + a1) * (b0 + b1) - t0 - t1) % P)


def fq2_sqr(a):
    a0, a1 = a
    return ((a0 + a1) * (a0 - a1) % P, (a0 * a1 * 2) % P)


def fq2_mul_int(a, k):
    return (a[0] * k % P, a[1] * k % P)


def fq2_mul_xi(a):
    """Multiply by the sextic non-residue ξ = 1 + u."""
    a0, a1 = a
    return ((a0 - a1) % P, (a0 + a1) % P)


def fq2_inv(a):
    a0, a1 = a
    d = gmpy2.invert((a0 * a0 + a1 * a1) % P, P)
    return (a0 * d % P, -a1 * d % P)


def fq2_pow(a, e: int):
    out = FQ2_ONE
    base = a
    while e > 0:
        if e & 1:
            out = fq2_mul(out, base)
        base = fq2_sqr(base)
        e >>= 1
    return out


def fq2_is_zero(a) -> bool:
    return a[0] == 0 and a[1] == 0


def fq2_sqrt(a):
    """Square root in Fq2 (p ≡ 3 mod 4 form), or None when a is a
    non-residue."""
    if fq2_is_zero(a):
        return FQ2_ZERO
    cand = fq2_pow(a, (int(P) - 3) // 4)
    alpha = fq2_mul(fq2_sqr(cand), a)
    x0 = fq2_mul(cand, a)
    if alpha == (P - 1, _ZERO):
        x = (-x0[1] % P, x0[0])
    else:
        x = fq2_mul(fq2_pow(fq2_add(alpha, FQ2_ONE), (int(P) - 1) // 2), x0)
    return x if fq2_sqr(x) == a else None


# ---------------------------------------------------------------------------
# Fq6 = Fq2[v] / (v³ − ξ); elements are (c0, c1, c2) meaning c0 + c1·v + c2·v².

FQ6_ZERO = (FQ2_ZERO, FQ2_ZERO, FQ2_ZERO)
FQ6_ONE = (FQ2_ONE, FQ2_ZERO, FQ2_ZERO)


def fq6_add(a, b):
    return (fq2_add(a[0], b[0]), fq2_add(a[1], b[1]), fq2_add(a[2], b[2]))


def fq6_sub(a, b):
    return (fq2_sub(a[0], b[0]), fq2_sub(a[1], b[1]), fq2_sub(a[2], b[2]))


def fq6_neg(a):
    return (fq2_neg(a[0]), fq2_neg(a[1]), fq2_neg(a[2]))


def fq6_mul(a, b):
    a0, a1, a2 = a
    b0, b1, b2 = b
    t0 = fq2_mul(a0, b0)
    t1 = fq2_mul(a1, b1)
    t2 = fq2_mul(a2, b2)
    c0 = fq2_add(
        t0,
        fq2_mul_xi(
            fq2_sub(fq2_sub(fq2_mul(fq2_add(a1, a2), fq2_add(b1, b2)), t1), t2)
        ),
    )
    c1 = fq2_add(
        fq2_sub(fq2_sub(fq2_mul(fq2_add(a0, a1), fq2_add(b0, b1)), t0), t1),
        fq2_mul_xi(t2),
    )
    c2 = fq2_add(
        fq2_sub(fq2_sub(fq2_mul(fq2_add(a0, a2), fq2_add(b0, b2)), t0), t2), t1
    )
    return (c0, c1, c2)


def fq6_sqr(a):
    return fq6_mul(a, a)


def fq6_mul_v(a):
    """Multiply by v (the non-residue that defines Fq12 over Fq6)."""
    return (fq2_mul_xi(a[2]), a[0], a[1])


def fq6_mul_by_01(a, b0, b1):
    """Multiply by the sparse element b0 + b1·v."""
    a0, a1, a2 = a
    t0 = fq2_mul(a0, b0)
    t1 = fq2_mul(a1, b1)
    c0 = fq2_add(t0, fq2_mul_xi(fq2_sub(fq2_mul(fq2_add(a1, a2), b1), t1)))
    c1 = fq2_sub(fq2_sub(fq2_mul(fq2_add(b0, b1), fq2_add(a0, a1)), t0), t1)
    c2 = fq2_add(fq2_sub(fq2_mul(fq2_add(a0, a2), b0), t0), t1)
    return (c0, c1, c2)


def fq6_mul_by_1(a, b1):
    """Multiply by the sparse element b1·v."""
    return (fq2_mul_xi(fq2_mul(a[2], b1)), fq2_mul(a[0], b1), fq2_mul(a[1], b1))


def fq6_inv(a):
    a0, a1, a2 = a
    t0 = fq2_sub(fq2_sqr(a0), fq2_mul_xi(fq2_mul(a1, a2)))
    t1 = fq2_sub(fq2_mul_xi(fq2_sqr(a2)), fq2_mul(a0, a1))
    t2 = fq2_sub(fq2_sqr(a1), fq2_mul(a0, a2))
    d = fq2_add(
        fq2_mul(a0, t0),
        fq2_mul_xi(fq2_add(fq2_mul(a2, t1), fq2_mul(a1, t2))),
    )
    d_inv = fq2_inv(d)
    return (fq2_mul(t0, d_inv), fq2_mul(t1, d_inv), fq2_mul(t2, d_inv))


# ---------------------------------------------------------------------------
# Fq12 = Fq6[w] / (w² − v); elements are (c0, c1) meaning c0 + c1·w.

FQ12_ONE = (FQ6_ONE, FQ6_ZERO)


def fq12_mul(a, b):
    a0, a1 = a
    b0, b1 = b
    t0 = fq6_mul(a0, b0)
    t1 = fq6_mul(a1, b1)
    c0 = fq6_add(t0, fq6_mul_v(t1))
    c1 = fq6_sub(fq6_sub(fq6_mul(fq6_add(a0, a1), fq6_add(b0, b1)), t0), t1)
    return (c0, c1)


def fq12_sqr(a):
    a0, a1 = a
    t = fq6_mul(a0, a1)
    c0 = fq6_sub(
        fq6_sub(fq6_mul(fq6_add(a0, a1), fq6_add(a0, fq6_mul_v(a1))), t),
        fq6_mul_v(t),
    )
    return (c0, fq6_add(t, t))


def fq12_conj(a):
    return (a[0], fq6_neg(a[1]))


def fq12_inv(a):
    a0, a1 = a
    d = fq6_inv(fq6_sub(fq6_sqr(a0), fq6_mul_v(fq6_sqr(a1))))
    return (fq6_mul(a0, d), fq6_neg(fq6_mul(a1, d)))


def fq12_mul_by_014(f, o0, o1, o4):
    """Multiply by a line: sparse Fq12 value (o0 + o1·v) + (o4·v)·w."""
    c0, c1 = f
    t0 = fq6_mul_by_01(c0, o0, o1)
    t1 = fq6_mul_by_1(c1, o4)
    o = fq2_add(o1, o4)
    out_c1 = fq6_sub(fq6_sub(fq6_mul_by_01(fq6_add(c1, c0), o0, o), t0), t1)
    out_c0 = fq6_add(fq6_mul_v(t1), t0)
    return (out_c0, out_c1)


def fq12_pow(a, e: int):
    out = FQ12_ONE
    base = a
    while e > 0:
        if e & 1:
            out = fq12_mul(out, base)
        base = fq12_sqr(base)
        e >>= 1
    return out


# Frobenius: the coefficient of w^j picks up ξ^(j·(p−1)/6) under x → x^p.
# The nested (Fq6, Fq6) layout corresponds to powers {0,2,4} and {1,3,5} of w.
_GAMMA = [fq2_pow((_ONE, _ONE), j * ((int(P) - 1) // 6)) for j in range(6)]


def fq12_frob(a):
    (x0, x1, x2), (y0, y1, y2) = a
    return (
        (
            fq2_conj(x0),
            fq2_mul(fq2_conj(x1), _GAMMA[2]),
            fq2_mul(fq2_conj(x2), _GAMMA[4]),
        ),
        (
            fq2_mul(fq2_conj(y0), _GAMMA[1]),
            fq2_mul(fq2_conj(y1), _GAMMA[3]),
            fq2_mul(fq2_conj(y2), _GAMMA[5]),
        ),
    )


def fq12_frob_n(a, n: int):
    for _ in range(n):
        a = fq12_frob(a)
    return a


def _fq4_sqr(a, b):
    """Square of a + b·t with t² = v, used inside the cyclotomic square."""
    a2 = fq2_sqr(a)
    b2 = fq2_sqr(b)
    first = fq2_add(fq2_mul_xi(b2), a2)
    second = fq2_sub(fq2_sub(fq2_sqr(fq2_add(a, b)), a2), b2)
    return first, second


def cyclotomic_sqr(f):
    """Granger-Scott squaring; valid only after the easy part of the final
    exponentiation has placed f in the cyclotomic subgroup."""
    (c0c0, c0c1, c0c2), (c1c0, c1c1, c1c2) = f
    t3, t4 = _fq4_sqr(c0c0, c1c1)
    t5, t6 = _fq4_sqr(c1c0, c0c2)
    t7, t8 = _fq4_sqr(c0c1, c1c2)
    t9 = fq2_mul_xi(t8)
    return (
        (
            fq2_add(fq2_mul_int(fq2_sub(t3, c0c0), 2), t3),
            fq2_add(fq2_mul_int(fq2_sub(t5, c0c1), 2), t5),
            fq2_add(fq2_mul_int(fq2_sub(t7, c0c2), 2), t7),
        ),
        (
            fq2_add(fq2_mul_int(fq2_add(t9, c1c0), 2), t9),
            fq2_add(fq2_mul_int(fq2_add(t4, c1c1), 2), t4),
            fq2_add(fq2_mul_int(fq2_add(t6, c1c2), 2), t6),
        ),
    )


def cyclotomic_exp(f, e: int):
    z = FQ12_ONE
    for i in range(e.bit_length() - 1, -1, -1):
        z = cyclotomic_sqr(z)
        if (e >> i) & 1:
            z = fq12_mul(z, f)
    return z


def final_exponentiation(f):
    """Raise a Miller-loop output to (p¹² − 1)/r."""
    t0 = fq12_mul(fq12_frob_n(f, 6), fq12_inv(f))
    t1 = fq12_mul(fq12_frob_n(t0, 2), t0)
    # Hard part; conjugation stands in for the negative sign of the curve
    # parameter, and inversion inside the cyclotomic subgroup is conjugation.
    t2 = fq12_conj(cyclotomic_exp(t1, BLS_X))
    t3 = fq12_mul(fq12_conj(cyclotomic_sqr(t1)), t2)
    t4 = fq12_conj(cyclotomic_exp(t3, BLS_X))
    t5 = fq12_conj(cyclotomic_exp(t4, BLS_X))
    t6 = fq12_mul(fq12_conj(cyclotomic_exp(t5, BLS_X)), cyclotomic_sqr(t2))
    t7 = fq12_conj(cyclotomic_exp(t6, BLS_X))
    out = fq12_mul(
        fq12_mul(
            fq12_frob_n(fq12_mul(t2, t5), 2),
            fq12_frob_n(fq12_mul(t4, t1), 3),
        ),
        fq12_mul(
            fq12_frob_n(fq12_mul(t6, fq12_conj(t1)), 1),
            fq12_mul(fq12_mul(t7, fq12_conj(t3)), t1),
        ),
    )
    return out


# ---------------------------------------------------------------------------
# G1: Jacobian (X, Y, Z) over Fq; the identity is Z = 0.

G1_INF = (_ONE, _ONE, _ZERO)


def g1_dbl(p):
    x, y, z = p
    if not z or not y:
        return G1_INF
    a = x * x % P
    b = y * y % P
    c = b * b % P
    d = 2 * ((x + b) * (x + b) - a - c) % P
    e = 3 * a % P
    f = e * e % P
    x3 = (f - 2 * d) % P
    y3 = (e * (d - x3) - 8 * c) % P
    z3 = 2 * y * z % P
    return (x3, y3, z3)


def g1_add(p, q):
    x1, y1, z1 = p
    if not z1:
        return q
    x2, y2, z2 = q
    if not z2:
        return p
    z1z1 = z1 * z1 % P
    z2z2 = z2 * z2 % P
    u1 = x1 * z2z2 % P
    u2 = x2 * z1z1 % P
    s1 = y1 * z2 * z2z2 % P
    s2 = y2 * z1 * z1z1 % P
    h = (u2 - u1) % P
    rr = (s2 - s1) % P
    if not h:
        if not rr:
            return g1_dbl(p)
        return G1_INF
    i = 4 * h * h % P
    j = h * i % P
    v = u1 * i % P
    x3 = (4 * rr * rr - j - 2 * v) % P
    y3 = (2 * rr * (v - x3) - 2 * s1 * j) % P
    z3 = ((z1 + z2) * (z1 + z2) - z1z1 - z2z2) * h % P
    return (x3, y3, z3)


def g1_neg(p):
    return (p[0], -p[1] % P, p[2])


def g1_mul_raw(p, k: int):
    """Double-and-add without reducing k; needed for order checks where
    multiplying by the group order itself must actually run."""
    if k == 0 or not p[2]:
        return G1_INF
    out = G1_INF
    for i in range(k.bit_length() - 1, -1, -1):
        out = g1_dbl(out)
        if (k >> i) & 1:
            out = g1_add(out, p)
    return out


def g1_mul(p, k: int):
    return g1_mul_raw(p, k % CURVE_ORDER)


def g1_to_affine(p):
    x, y, z = p
    if not z:
        return None
    zi = gmpy2.invert(z, P)
    zi2 = zi * zi % P
    return (x * zi2 % P, y * zi2 * zi % P)


def g1_eq(p, q) -> bool:
    x1, y1, z1 = p
    x2, y2, z2 = q
    if not z1 or not z2:
        return z1 == z2
    z1z1 = z1 * z1 % P
    z2z2 = z2 * z2 % P
    return (
        x1 * z2z2 % P == x2 * z1z1 % P
        and y1 * z2 * z2z2 % P == y2 * z1 * z1z1 % P
    )


# ---------------------------------------------------------------------------
# G2: Jacobian over Fq2.

G2_INF = (FQ2_ONE, FQ2_ONE, FQ2_ZERO)


def g2_dbl(p):
    x, y, z = p
    if fq2_is_zero(z) or fq2_is_zero(y):
        return G2_INF
    a = fq2_sqr(x)
    b = fq2_sqr(y)
    c = fq2_sqr(b)
    d = fq2_mul_int(fq2_sub(fq2_sub(fq2_sqr(fq2_add(x, b)), a), c), 2)
    e = fq2_mul_int(a, 3)
    f = fq2_sqr(e)
    x3 = fq2_sub(f, fq2_mul_int(d, 2))
    y3 = fq2_sub(fq2_mul(e, fq2_sub(d, x3)), fq2_mul_int(c, 8))
    z3 = fq2_mul_int(fq2_mul(y, z), 2)
    return (x3, y3, z3)


def g2_add(p, q):
    x1, y1, z1 = p
    if fq2_is_zero(z1):
        return q
    x2, y2, z2 = q
    if fq2_is_zero(z2):
        return p
    z1z1 = fq2_sqr(z1)
    z2z2 = fq2_sqr(z2)
    u1 = fq2_mul(x1, z2z2)
    u2 = fq2_mul(x2, z1z1)
    s1 = fq2_mul(fq2_mul(y1, z2), z2z2)
    s2 = fq2_mul(fq2_mul(y2, z1), z1z1)
    h = fq2_sub(u2, u1)
    rr = fq2_sub(s2, s1)
    if fq2_is_zero(h):
        if fq2_is_zero(rr):
            return g2_dbl(p)
        return G2_INF
    i = fq2_mul_int(fq2_sqr(h), 4)
    j = fq2_mul(h, i)
    v = fq2_mul(u1, i)
    x3 = fq2_sub(fq2_sub(fq2_mul_int(fq2_sqr(rr), 4), j), fq2_mul_int(v, 2))
    y3 = fq2_sub(
        fq2_mul(fq2_mul_int(rr, 2), fq2_sub(v, x3)),
        fq2_mul(fq2_mul_int(s1, 2), j),
    )
    z3 = fq2_mul(
        fq2_sub(fq2_sub(fq2_sqr(fq2_add(z1, z2)), z1z1), z2z2), h
    )
    return (x3, y3, z3)


def g2_neg(p):
    return (p[0], fq2_neg(p[1]), p[2])


def g2_mul_raw(p, k: int):
    if k == 0 or fq2_is_zero(p[2]):
        return G2_INF
    out = G2_INF
    for i in range(k.bit_length() - 1, -1, -1):
        out = g2_dbl(out)
        if (k >> i) & 1:
            out = g2_add(out, p)
    return out


def g2_mul(p, k: int):
    return g2_mul_raw(p, k % CURVE_ORDER)


def g2_to_affine(p):
    x, y, z = p
    if fq2_is_zero(z):
        return None
    zi = fq2_inv(z)
    zi2 = fq2_sqr(zi)
    return (fq2_mul(x, zi2), fq2_mul(fq2_mul(y, zi2), zi))


def g2_eq(p, q) -> bool:
    x1, y1, z1 = p
    x2, y2, z2 = q
    if fq2_is_zero(z1) or fq2_is_zero(z2):
        return fq2_is_zero(z1) == fq2_is_zero(z2)
    z1z1 = fq2_sqr(z1)
    z2z2 = fq2_sqr(z2)
    return fq2_mul(x1, z2z2) == fq2_mul(x2, z1z1) and fq2_mul(
        fq2_mul(y1, z2), z2z2
    ) == fq2_mul(fq2_mul(y2, z1), z1z1)


# ---------------------------------------------------------------------------
# Pairing: precompute line coefficients from Q, then evaluate along P.

def _line_coefficients(qx, qy):
    rx, ry, rz = qx, qy, FQ2_ONE
    coeffs = []
    for i in range(BLS_X_LEN - 2, -1, -1):
        t0 = fq2_sqr(ry)
        t1 = fq2_sqr(rz)
        t2 = fq2_mul_xi(fq2_mul_int(fq2_mul_int(t1, 3), 4))  # 3·b'·rz²
        t3 = fq2_mul_int(t2, 3)
        t4 = fq2_sub(fq2_sub(fq2_sqr(fq2_add(ry, rz)), t1), t0)
        coeffs.append(
            (fq2_sub(t2, t0), fq2_mul_int(fq2_sqr(rx), 3), fq2_neg(t4))
        )
        rx = fq2_mul(fq2_mul(fq2_mul(fq2_sub(t0, t3), rx), ry), (_INV2, _ZERO))
        ry = fq2_sub(
            fq2_sqr(fq2_mul(fq2_add(t0, t3), (_INV2, _ZERO))),
            fq2_mul_int(fq2_sqr(t2), 3),
        )
        rz = fq2_mul(t0, t4)
        if (BLS_X >> i) & 1:
            t0 = fq2_sub(ry, fq2_mul(qy, rz))
            t1 = fq2_sub(rx, fq2_mul(qx, rz))
            coeffs.append(
                (
                    fq2_sub(fq2_mul(t0, qx), fq2_mul(t1, qy)),
                    fq2_neg(t0),
                    t1,
                )
            )
            t2 = fq2_sqr(t1)
            t3 = fq2_mul(t2, t1)
            t4 = fq2_mul(t2, rx)
            t5 = fq2_add(
                fq2_sub(t3, fq2_mul_int(t4, 2)), fq2_mul(fq2_sqr(t0), rz)
            )
            rx = fq2_mul(t1, t5)
            ry = fq2_sub(
                fq2_mul(fq2_sub(t4, t5), t0), fq2_mul(t3, ry)
            )
            rz = fq2_mul(rz, t3)
    return coeffs


def _miller_loop(coeffs, px, py):
    f = FQ12_ONE
    j = 0
    for i in range(BLS_X_LEN - 2, -1, -1):
        c0, c1, c2 = coeffs[j]
        f = fq12_mul_by_014(f, c0, fq2_mul_int(c1, px), fq2_mul_int(c2, py))
        j += 1
        if (BLS_X >> i) & 1:
            c0, c1, c2 = coeffs[j]
            f = fq12_mul_by_014(
                f, c0, fq2_mul_int(c1, px), fq2_mul_int(c2, py)
            )
            j += 1
        if i:
            f = fq12_sqr(f)
    return fq12_conj(f)


def miller_loop_affine(p_aff, q_aff):
    """Single Miller loop over affine points; no final exponentiation."""
    if p_aff is None or q_aff is None:
        return FQ12_ONE
    return _miller_loop(_line_coefficients(q_aff[0], q_aff[1]), p_aff[0], p_aff[1])


# ---------------------------------------------------------------------------
# Multi-scalar multiplication (bucket method).

def _msm_window(n: int) -> int:
    if n < 32:
        return 4
    if n < 128:
        return 5
    if n < 512:
        return 7
    if n < 2048:
        return 8
    if n < 8192:
        return 10
    return 12


def g1_msm_jac(points, scalars):
    """Sum of k_i·P_i over Jacobian points; scalars are plain ints."""
    pairs = [
        (p, k % CURVE_ORDER)
        for p, k in zip(points, scalars, strict=True)
        if p[2] and k % CURVE_ORDER
    ]
    if not pairs:
        return G1_INF
    if len(pairs) == 1:
        return g1_mul(pairs[0][0], pairs[0][1])
    w = _msm_window(len(pairs))
    nwin = (255 + w - 1) // w
    mask = (1 << w) - 1
    total = G1_INF
    for win in range(nwin - 1, -1, -1):
        shift = win * w
        buckets = [None] * (mask + 1)
        for p, k in pairs:
            d = (k >> shift) & mask
            if d:
                cur = buckets[d]
                buckets[d] = p if cur is None else g1_add(cur, p)
        if win != nwin - 1:
            for _ in range(w):
                total = g1_dbl(total)
        running = G1_INF
        acc = G1_INF
        for d in range(mask, 0, -1):
            b = buckets[d]
            if b is not None:
                running = g1_add(running, b)
            acc = g1_add(acc, running)
        total = g1_add(total, acc)
    return total


# Fixed-base tables for the two generators: 8-bit windows, so one add per
# scalar byte.  Built lazily; the G2 table only matters when many opening
# verifications run in one process.

_FB_WINDOW = 8
_FB_ROWS = (255 + _FB_WINDOW - 1) // _FB_WINDOW
_g1_gen_table: list[list] | None = None
_g2_gen_table: list[list] | None = None


def _build_table(base, dbl, add):
    rows = []
    for _ in range(_FB_ROWS):
        row = [base]
        for _ in range((1 << _FB_WINDOW) - 2):
            row.append(add(row[-1], base))
        rows.append(row)
        for _ in range(_FB_WINDOW):
            base = dbl(base)
    return rows


def g1_gen_mul(k: int):
    """k times the G1 generator via the fixed-base table."""
    global _g1_gen_table
    if _g1_gen_table is None:
        _g1_gen_table = _build_table(
            (G1_GEN_AFFINE[0], G1_GEN_AFFINE[1], _ONE), g1_dbl, g1_add
        )
    k %= CURVE_ORDER
    out = G1_INF
    row = 0
    while k:
        d = k & ((1 << _FB_WINDOW) - 1)
        if d:
            out = g1_add(out, _g1_gen_table[row][d - 1])
        k >>= _FB_WINDOW
        row += 1
    return out


def g2_gen_mul(k: int):
    """k times the G2 generator via the fixed-base table."""
    global _g2_gen_table
    if _g2_gen_table is None:
        _g2_gen_table = _build_table(
            (G2_GEN_AFFINE[0], G2_GEN_AFFINE[1], FQ2_ONE), g2_dbl, g2_add
        )
    k %= CURVE_ORDER
    out = G2_INF
    row = 0
    while k:
        d = k & ((1 << _FB_WINDOW) - 1)
        if d:
            out = g2_add(out, _g2_gen_table[row][d - 1])
        k >>= _FB_WINDOW
        row += 1
    return out


# ---------------------------------------------------------------------------
# Point wrappers.

_COMPRESSED = 0x80
_INFINITY = 0x40
_SIGN = 0x20


def _fq_is_larger(y) -> bool:
    return int(y) > (int(P) - 1) // 2


def _fq2_is_larger(y) -> bool:
    if y[1] != 0:
        return _fq_is_larger(y[1])
    return _fq_is_larger(y[0])


class G1Point:
    """Immutable point on the base curve."""

    __slots__ = ("jac",)

    def __init__(self, jac):
        self.jac = jac

    @classmethod
    def generator(cls) -> "G1Point":
        return cls((G1_GEN_AFFINE[0], G1_GEN_AFFINE[1], _ONE))

    @classmethod
    def identity(cls) -> "G1Point":
        return cls(G1_INF)

    def is_identity(self) -> bool:
        return not self.jac[2]

    def to_affine(self):
        aff = g1_to_affine(self.jac)
        return None if aff is None else (int(aff[0]), int(aff[1]))

    def __add__(self, other: "G1Point") -> "G1Point":
        return G1Point(g1_add(self.jac, other.jac))

    def __sub__(self, other: "G1Point") -> "G1Point":
        return G1Point(g1_add(self.jac, g1_neg(other.jac)))

    def __neg__(self) -> "G1Point":
        return G1Point(g1_neg(self.jac))

    def __mul__(self, k: int) -> "G1Point":
        return G1Point(g1_mul(self.jac, k))

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, G1Point) and g1_eq(self.jac, other.jac)

    def __hash__(self) -> int:
        return hash(self.to_affine())

    def is_in_subgroup(self) -> bool:
        return g1_eq(g1_mul_raw(self.jac, CURVE_ORDER), G1_INF)

    def __repr__(self) -> str:
        return f"G1Point({self.to_bytes().hex()[:18]}…)"

    def to_bytes(self) -> bytes:
        aff = g1_to_affine(self.jac)
        if aff is None:
            return bytes([_COMPRESSED | _INFINITY]) + bytes(47)
        x, y = aff
        out = bytearray(int(x).to_bytes(48, "big"))
        out[0] |= _COMPRESSED
        if _fq_is_larger(y):
            out[0] |= _SIGN
        return bytes(out)

    @classmethod
    def from_bytes(cls, data: bytes, subgroup_check: bool = True) -> "G1Point":
        if len(data) != 48:
            raise ValueError("G1 encoding must be 48 bytes")
        flags = data[0]
        if not flags & _COMPRESSED:
            raise ValueError("only compressed encodings are supported")
        if flags & _INFINITY:
            if any(data[1:]) or flags & _SIGN or data[0] != (_COMPRESSED | _INFINITY):
                raise ValueError("malformed infinity encoding")
            return cls.identity()
        x = int.from_bytes(bytes([flags & 0x1F]) + data[1:], "big")
        if x >= P:
            raise ValueError("x coordinate out of range")
        x = mpz(x)
        y2 = (x * x * x + B_COEFF) % P
        y = gmpy2.powmod(y2, (int(P) + 1) // 4, P)
        if y * y % P != y2:
            raise ValueError("point is not on the curve")
        if bool(flags & _SIGN) != _fq_is_larger(y):
            y = -y % P
        point = cls((x, y, _ONE))
        if subgroup_check and not point.is_in_subgroup():
            raise ValueError("point is not in the prime-order subgroup")
        return point


class G2Point:
    """Immutable point on the quadratic twist."""

    __slots__ = ("jac",)

    def __init__(self, jac):
        self.jac = jac

    @classmethod
    def generator(cls) -> "G2Point":
        return cls((G2_GEN_AFFINE[0], G2_GEN_AFFINE[1], FQ2_ONE))

    @classmethod
    def identity(cls) -> "G2Point":
        return cls(G2_INF)

    def is_identity(self) -> bool:
        return fq2_is_zero(self.jac[2])

    def __add__(self, other: "G2Point") -> "G2Point":
        return G2Point(g2_add(self.jac, other.jac))

    def __sub__(self, other: "G2Point") -> "G2Point":
        return G2Point(g2_add(self.jac, g2_neg(other.jac)))

    def __neg__(self) -> "G2Point":
        return G2Point(g2_neg(self.jac))

    def __mul__(self, k: int) -> "G2Point":
        return G2Point(g2_mul(self.jac, k))

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, G2Point) and g2_eq(self.jac, other.jac)

    def __hash__(self) -> int:
        aff = g2_to_affine(self.jac)
        if aff is None:
            return hash(None)
        return hash((int(aff[0][0]), int(aff[0][1]), int(aff[1][0]), int(aff[1][1])))

    def is_in_subgroup(self) -> bool:
        return g2_eq(g2_mul_raw(self.jac, CURVE_ORDER), G2_INF)

    def __repr__(self) -> str:
        return f"G2Point({self.to_bytes().hex()[:18]}…)"

    def to_bytes(self) -> bytes:
        aff = g2_to_affine(self.jac)
        if aff is None:
            return bytes([_COMPRESSED | _INFINITY]) + bytes(95)
        x, y = aff
        out = bytearray(
            int(x[1]).to_bytes(48, "big") + int(x[0]).to_bytes(48, "big")
        )
        out[0] |= _COMPRESSED
        if _fq2_is_larger(y):
            out[0] |= _SIGN
        return bytes(out)

    @classmethod
    def from_bytes(cls, data: bytes, subgroup_check: bool = True) -> "G2Point":
        if len(data) != 96:
            raise ValueError("G2 encoding must be 96 bytes")
        flags = data[0]
        if not flags & _COMPRESSED:
            raise ValueError("only compressed encodings are supported")
        if flags & _INFINITY:
            if any(data[1:]) or data[0] != (_COMPRESSED | _INFINITY):
                raise ValueError("malformed infinity encoding")
            return cls.identity()
        x1 = int.from_bytes(bytes([flags & 0x1F]) + data[1:48], "big")
        x0 = int.from_bytes(data[48:], "big")
        if x0 >= P or x1 >= P:
            raise ValueError("x coordinate out of range")
        x = (mpz(x0), mpz(x1))
        y2 = fq2_add(fq2_mul(fq2_sqr(x), x), fq2_mul_xi((B_COEFF, _ZERO)))
        y = fq2_sqrt(y2)
        if y is None:
            raise ValueError("point is not on the curve")
        if bool(flags & _SIGN) != _fq2_is_larger(y):
            y = fq2_neg(y)
        point = cls((x, y, FQ2_ONE))
        if subgroup_check and not point.is_in_subgroup():
            raise ValueError("point is not in the prime-order subgroup")
        return point


def g1_msm(points: list[G1Point], scalars: list[int]) -> G1Point:
    """Sum of scalar·point over matched lists."""
    return G1Point(g1_msm_jac([p.jac for p in points], scalars))


def pairing(p: G1Point, q: G2Point):
    """Full pairing value in Fq12 (with final exponentiation)."""
    return final_exponentiation(
        miller_loop_affine(g1_to_affine(p.jac), g2_to_affine(q.jac))
    )


def pairing_check(pairs: list[tuple[G1Point, G2Point]]) -> bool:
    """True iff the product of pairings over all pairs is the identity.

    Runs one Miller loop per pair but a single shared final exponentiation,
    which is what makes batched verification cheap.
    """
    f = FQ12_ONE
    for p, q in pairs:
        if p.is_identity() or q.is_identity():
            continue
        f = fq12_mul(
            f, miller_loop_affine(g1_to_affine(p.jac), g2_to_affine(q.jac))
        )
    return final_exponentiation(f) == FQ12_ONE
