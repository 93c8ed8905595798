"""Enumeration of totally real cubic fields by reduced binary cubic forms.

A form F = (a, b, c, d) has Hessian H = (P, Q, R) with
P = b^2 - 3ac, Q = bc - 9ad, R = c^2 - 3bd and 4PR - Q^2 = 3 disc(F).
For disc(F) > 0 the Hessian is positive definite; F is *reduced* when
|Q| <= P <= R, a > 0 and b >= 0, with ties on the boundary broken by taking
the lexicographically smallest equivalent form.  Writing the roots of F(x, 1)
as t_1, t_2, t_3, one has P = (a^2/2) sum (t_i - t_j)^2, so AM-GM together
with P <= sqrt(D) gives a <= (2/3)^(3/2) D^(1/4), and |Q| <= P bounds b.

Davenport-Heilbronn: the cubic ring of F is maximal at p unless F = 0 mod p
or F is equivalent to a form with p^2 | a and p | b.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

from .admissibility import CyclicMarker, split_cubic_discriminant
from .arith import SPF_LIMIT, _spf_table, divisors, factor


def disc(F) -> int:
    a, b, c, d = F
    return b * b * c * c - 4 * a * c**3 - 4 * b**3 * d - 27 * a * a * d * d + 18 * a * b * c * d


def hessian(F) -> tuple[int, int, int]:
    a, b, c, d = F
    return b * b - 3 * a * c, b * c - 9 * a * d, c * c - 3 * b * d


def transform(F, M) -> tuple[int, int, int, int]:
    """F((x, y) -> (m00 x + m01 y, m10 x + m11 y)) divided by det M."""
    a, b, c, d = F
    (p, q), (r, s) = M
    det = p * s - q * r
    # expand F(p x + q y, r x + s y)
    A = a * p**3 + b * p * p * r + c * p * r * r + d * r**3
    B = 3 * a * p * p * q + b * (p * p * s + 2 * p * q * r) + c * (2 * p * r * s + q * r * r) + 3 * d * r * r * s
    C = 3 * a * p * q * q + b * (2 * p * q * s + q * q * r) + c * (p * s * s + 2 * q * r * s) + 3 * d * r * s * s
    D = a * q**3 + b * q * q * s + c * q * s * s + d * s**3
    return (A // det, B // det, C // det, D // det) if det == 1 else (-A, -B, -C, -D)


def is_reduced(F) -> bool:
    a, b, _, _ = F
    P, Q, R = hessian(F)
    return a > 0 and b >= 0 and abs(Q) <= P <= R


def canonical(F) -> tuple[int, int, int, int]:
    """Smallest reduced form GL2(Z)-equivalent to the reduced form F."""
    P, Q, R = hessian(F)

    def H(x, y):
        return P * x * x + Q * x * y + R * y * y

    box = [(x, y) for x in range(-2, 3) for y in range(-2, 3) if (x, y) != (0, 0)]
    vp = [v for v in box if H(*v) == P]
    vr = [w for w in box if H(*w) == R]
    best = None
    for v in vp:
        for w in vr:
            det = v[0] * w[1] - v[1] * w[0]
            if det not in (1, -1):
                continue
            G = transform(F, ((v[0], w[0]), (v[1], w[1])))
            if G[0] < 0:
                G = tuple(-x for x in G)
            if is_reduced(G) and (best is None or G < best):
                best = G
    return best


def is_irreducible(F) -> bool:
    a, b, c, d = F
    if a == 0 or d == 0:
        return False
    for q in divisors(abs(a)):
        for p in divisors(abs(d)):
            for s in (p, -p):
                if a * s**3 + b * s * s * q + c * s * q * q + d * q**3 == 0:
                    return False
    return True


def is_p_maximal(F, p: int) -> bool:
    """Whether the cubic ring of F is maximal at p (assumes p | disc)."""
    a, b, c, d = F
    if a % p == 0 and b % p == 0 and c % p == 0 and d % p == 0:
        return False
    if a % p == 0 and b % p == 0:
        return a % (p * p) != 0
    pp = p * p
    for r in range(p):
        val = ((a * r + b) * r + c) * r + d
        if val % p == 0 and (3 * a * r * r + 2 * b * r + c) % p == 0:
            return val % pp != 0
    return True


def _prime_square_divisors(D: int) -> list[int]:
    if D < SPF_LIMIT:
        spf = _spf_table()
        out, m = [], D
        while m > 1:
            p, k = spf[m], 0
            while m % p == 0:
                m //= p
                k += 1
            if k >= 2:
                out.append(p)
        return out
    return [p for p, k in factor(D).factors if k >= 2]


def is_maximal(F, D: int | None = None) -> bool:
    if D is None:
        D = disc(F)
    return all(is_p_maximal(F, p) for p in _prime_square_divisors(D))


def _scan(X: int, target: int | None = None):
    """Yield reduced forms with 0 < disc < X (or disc == target)."""
    Xr = target + 1 if target is not None else X
    sq = math.isqrt(Xr) + 1  # P <= sqrt(D) < sq
    amax = int((8 / 27) ** 0.5 * Xr**0.25) + 1
    for a in range(1, amax + 1):
        # P >= 1.5 a^(2/3) D^(1/3) >= 1.5 a^(2/3)
        pmin_a = max(1, int(1.5 * a ** (2 / 3)) - 1)
        if target is not None:
            pmin_a = max(pmin_a, int(1.5 * a ** (2 / 3) * target ** (1 / 3)) - 1)
        bmax = int(1.5 * a + 3 * math.sqrt(2 * sq)) + 1
        for b in range(0, bmax + 1):
            b2 = b * b
            # P = b^2 - 3ac in [pmin_a, sq]  ->  c range
            cmin = -((sq - b2) // (3 * a)) - 1
            cmax = (b2 - pmin_a) // (3 * a)
            for c in range(cmin, cmax + 1):
                P = b2 - 3 * a * c
                if P < pmin_a or P > sq:
                    continue
                if b > 1.5 * a + 3 * math.sqrt(2 * P) + 1:
                    continue
                bc = b * c
                c2 = c * c
                if target is not None:
                    yield from _solve_d(a, b, c, P, target)
                    continue
                # |bc - 9ad| <= P
                dlo = -((P - bc) // (9 * a))
                dhi = (bc + P) // (9 * a)
                if b > 0:
                    # R = c^2 - 3bd >= P
                    dhi = min(dhi, (c2 - P) // (3 * b))
                    # 4PR - Q^2 = 3D < 3X  ->  R < (3X + P^2)/(4P)
                    rmax = (3 * X + P * P) // (4 * P) + 1
                    dlo = max(dlo, -((rmax - c2) // (3 * b)) - 1)
                elif c2 < P:
                    continue
                for d in range(dlo, dhi + 1):
                    Q = bc - 9 * a * d
                    if abs(Q) > P:
                        continue
                    R = c2 - 3 * b * d
                    if R < P:
                        continue
                    D3 = 4 * P * R - Q * Q
                    if D3 >= 3 * X or D3 <= 0:
                        continue
                    yield (a, b, c, d), D3 // 3


def _solve_d(a, b, c, P, target):
    # disc is quadratic in d: -27a^2 d^2 + (18abc - 4b^3) d + (b^2c^2 - 4ac^3)
    A2 = 27 * a * a
    B1 = 18 * a * b * c - 4 * b**3
    C0 = b * b * c * c - 4 * a * c**3 - target
    delta = B1 * B1 + 4 * A2 * C0
    if delta < 0:
        return
    r = math.isqrt(delta)
    if r * r != delta:
        return
    for num in {B1 + r, B1 - r}:
        if num % (2 * A2) == 0:
            d = num // (2 * A2)
            F = (a, b, c, d)
            P2, Q, R = hessian(F)
            if abs(Q) <= P2 <= R:
                yield F, target


@dataclass(frozen=True, order=True)
class EnumeratedField:
    d_L: int
    form: tuple[int, int, int, int]
    galois: str = field(compare=False)
    d: int | None = field(compare=False)
    f: int = field(compare=False)

    def record(self) -> dict:
        a, b, c, dd = self.form
        return {"d_L": self.d_L, "a": a, "b": b, "c": c, "d": dd,
                "galois": self.galois, "disc_K": self.d, "f": self.f}


def _field_from_form(F, D) -> EnumeratedField:
    res = split_cubic_discriminant(D)
    if isinstance(res, CyclicMarker):
        return EnumeratedField(D, F, "cyclic", None, res.f)
    d, f = res
    return EnumeratedField(D, F, "s3", d, f.f)


def _accept(F, D) -> bool:
    P, Q, R = hessian(F)
    if F[1] == 0 or abs(Q) == P or P == R:
        if canonical(F) != F:
            return False
    return is_irreducible(F) and is_maximal(F, D)


def enumerate_fields(B: int) -> list[EnumeratedField]:
    """All totally real cubic fields with 0 < d_L < B, sorted by (d_L, form)."""
    out = [_field_from_form(F, D) for F, D in _scan(B) if _accept(F, D)]
    out.sort()
    return out


# public alias
enumerate = enumerate_fields  # noqa: A001


def fields_with_discriminant(D: int) -> list[EnumeratedField]:
    """All totally real cubic fields of discriminant exactly D."""
    out = [_field_from_form(F, D) for F, DD in _scan(D + 1, target=D) if _accept(F, DD)]
    out.sort()
    return out


@dataclass
class Multiplet:
    d: int | None
    f: int
    members: list[EnumeratedField]

    @property
    def m(self) -> int:
        return len(self.members)

    @property
    def d_L(self) -> int:
        return self.members[0].d_L


def group_multiplets(fields: list[EnumeratedField]) -> list[Multiplet]:
    by: dict[int, list[EnumeratedField]] = defaultdict(list)
    for F in fields:
        by[F.d_L].append(F)
    return [Multiplet(v[0].d, v[0].f, v) for _, v in sorted(by.items())]


def splitting_signature(F, primes) -> tuple[int, ...]:
    """Number of roots of F mod p (projectively) for each p; an isomorphism invariant for p unramified."""
    a, b, c, d = F
    out = []
    for p in primes:
        k = sum(1 for r in range(p) if (((a * r + b) * r + c) * r + d) % p == 0)
        k += a % p == 0
        out.append(k)
    return tuple(out)
