"""Real quadratic fields Q(sqrt d): units, class groups from form cycles, 3-virtual units.

Elements of K are stored as pairs (u, v) meaning (u + v*sqrt(d))/2 with
u = v*d (mod 2).  Binary quadratic forms are tuples (a, b, c) of
discriminant b^2 - 4ac = d.  A form with a > 0 corresponds to the ideal
a*Z + ((-b + sqrt d)/2)*Z; this correspondence respects composition.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath

from .arith import SPF_LIMIT, _spf_table, divisors, is_fundamental_discriminant

Form = tuple[int, int, int]


class PrincipalitySearchError(RuntimeError):
    """A generator search exceeded its step budget."""


# --- elements -----------------------------------------------------------

def qmul(x: tuple[int, int], y: tuple[int, int], d: int) -> tuple[int, int]:
    (u1, v1), (u2, v2) = x, y
    return (u1 * u2 + d * v1 * v2) // 2, (u1 * v2 + u2 * v1) // 2


def qnorm(x: tuple[int, int], d: int) -> int:
    u, v = x
    return (u * u - d * v * v) // 4


def qconj(x: tuple[int, int]) -> tuple[int, int]:
    return x[0], -x[1]


def qpow(x: tuple[int, int], n: int, d: int) -> tuple[int, int]:
    r = (2, 0)
    while n:
        if n & 1:
            r = qmul(r, x, d)
        x = qmul(x, x, d)
        n >>= 1
    return r


def to_omega(x: tuple[int, int], d: int) -> tuple[int, int]:
    """Coordinates over the integral basis (1, omega), omega = (d mod 2 + sqrt d)/2."""
    u, v = x
    return (u - v * (d % 2)) // 2, v


def from_omega(p: tuple[int, int], d: int) -> tuple[int, int]:
    p0, p1 = p
    return 2 * p0 + p1 * (d % 2), p1


def is_cube_in_K(x: tuple[int, int], d: int) -> bool:
    """Exact test whether (u + v sqrt d)/2 is the cube of an integer of K."""
    n = qnorm(x, d)
    r = round(abs(n) ** (1 / 3)) if abs(n) < 2**50 else _icbrt(abs(n))
    r = next((s for s in (r - 1, r, r + 1) if s**3 == abs(n)), None)
    if r is None:
        return False
    u, v = x
    digits = max(len(str(abs(u))), len(str(abs(v)))) + 30
    with mpmath.workdps(digits):
        sd = mpmath.sqrt(d)
        a = (u + v * sd) / 2
        b = (u - v * sd) / 2
        ra = mpmath.cbrt(a) if a >= 0 else -mpmath.cbrt(-a)
        rb = mpmath.cbrt(b) if b >= 0 else -mpmath.cbrt(-b)
        s = int(mpmath.nint(ra + rb))
        t = int(mpmath.nint((ra - rb) / sd))
    if (s - t * d) % 2:
        return False
    return qpow((s, t), 3, d) == (u, v)


def _icbrt(n: int) -> int:
    lo, hi = 0, 1 << (n.bit_length() // 3 + 2)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid**3 <= n:
            lo = mid
        else:
            hi = mid - 1
    return lo


# --- fundamental unit ---------------------------------------------------

def fundamental_unit(d: int) -> tuple[int, int, int]:
    """Return (x, y, N) with eta = (x + y sqrt d)/2 the fundamental unit and N its norm.

    Expands omega = (d mod 2 + sqrt d)/2 as a continued fraction; the
    convergent closing the first period gives eta = p - q * conj(omega).
    """
    if not is_fundamental_discriminant(d) or d < 0:
        raise ValueError(f"{d} is not a positive fundamental discriminant")
    s = math.isqrt(d)
    delta = d % 2
    P, Q = delta, 2
    p0, p1 = 0, 1
    q0, q1 = 1, 0
    k = 0
    while True:
        a = (P + s) // Q
        p0, p1 = p1, a * p1 + p0
        q0, q1 = q1, a * q1 + q0
        P = a * Q - P
        Q = (d - P * P) // Q
        k += 1
        if Q == 2:
            break
    # eta = p1 - q1 * conj(omega), conj(omega) = (delta - sqrt d)/2
    x, y = 2 * p1 - q1 * delta, q1
    norm = qnorm((x, y), d)
    assert norm == (-1) ** k and norm in (1, -1)
    return x, y, norm


# --- indefinite forms ---------------------------------------------------

def is_reduced(f: Form, d: int) -> bool:
    a, b, c = f
    if b <= 0 or b * b >= d:
        return False
    aa = 2 * abs(a)
    return (aa + b) ** 2 > d and (aa - b < 0 or (aa - b) ** 2 < d)


def rho(f: Form, d: int, s: int | None = None) -> tuple[Form, int]:
    """One reduction step; returns the new form and t with f o [[0,-1],[1,t]] = new form."""
    if s is None:
        s = math.isqrt(d)
    a, b, c = f
    m = 2 * abs(c)
    if abs(c) <= s:
        r = s - ((s + b) % m)
    else:
        r = (-b) % m
        if r > abs(c):
            r -= m
    t = (r + b) // (2 * c)
    return (c, r, (r * r - d) // (4 * c)), t


def _mat_step(M, t):
    # M * [[0, -1], [1, t]]
    (m00, m01), (m10, m11) = M
    return ((m01, -m00 + t * m01), (m11, -m10 + t * m11))


def reduce_form(f: Form, d: int, track: bool = False):
    """Apply rho until reduced; optionally return the SL2 transform as well."""
    s = math.isqrt(d)
    M = ((1, 0), (0, 1))
    steps = 0
    while not is_reduced(f, d):
        f, t = rho(f, d, s)
        if track:
            M = _mat_step(M, t)
        steps += 1
        if steps > 10000 + 4 * d:
            raise RuntimeError(f"reduction did not terminate for {f}")
    return (f, M) if track else f


def evaluate(f: Form, x: int, y: int) -> int:
    a, b, c = f
    return a * x * x + b * x * y + c * y * y


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def compose(f: Form, g: Form, d: int) -> Form:
    """Gauss composition of primitive forms of discriminant d (unreduced result)."""
    a1, b1, _ = f
    a2, b2, _ = g
    beta = (b1 + b2) // 2
    g1, x1, y1 = _xgcd(a1, a2)
    e, u, z = _xgcd(g1, beta)
    x, y = u * x1, u * y1
    A = a1 * a2 // (e * e)
    B = (x * a1 * b2 + y * a2 * b1 + z * (b1 * b2 + d) // 2) // e
    B %= 2 * abs(A)
    C, rem = divmod(B * B - d, 4 * A)
    assert rem == 0, (f, g)
    return (A, B, C)


def principal_form(d: int) -> Form:
    s = math.isqrt(d)
    b = s if (s - d) % 2 == 0 else s - 1
    return (1, b, (b * b - d) // 4)


def reduced_forms(d: int) -> list[Form]:
    out = []
    sd = math.isqrt(d)
    spf = _spf_table() if d // 4 < SPF_LIMIT else None
    for b in range(1 if d % 2 else 2, sd + 1, 2):
        N = (d - b * b) // 4
        # reduced iff sqrt(d) - b < 2a < sqrt(d) + b
        lo = (sd - b) // 2 + 1 if sd > b else 1
        hi = (sd + b) // 2
        if spf is None:
            divs = divisors(N)
        else:
            divs = [1]
            m = N
            while m > 1:
                p, e = spf[m], 0
                while m % p == 0:
                    m //= p
                    e += 1
                divs = [x * p**k for x in divs for k in range(e + 1)]
        for a in divs:
            if lo <= a <= hi:
                out.append((a, b, -N // a))
                out.append((-a, b, N // a))
    return out


# --- class groups -------------------------------------------------------

def _p_structure(sizes: list[int], p: int) -> list[int]:
    """Cyclic p-power factors from sizes[k] = |G[p^k]|, k = 0..K (sizes[K] = p-part)."""
    r = [round(math.log(n, p)) for n in sizes] + [round(math.log(sizes[-1], p))]
    out = []
    for k in range(1, len(sizes)):
        out += [p**k] * ((r[k] - r[k - 1]) - (r[k + 1] - r[k]))
    return out


def _invariant_factors(elementary: list[int]) -> list[int]:
    by_p: dict[int, list[int]] = {}
    for q in elementary:
        p = min(x for x in range(2, q + 1) if q % x == 0)
        by_p.setdefault(p, []).append(q)
    for v in by_p.values():
        v.sort(reverse=True)
    n = max((len(v) for v in by_p.values()), default=0)
    inv = []
    for i in range(n):
        inv.append(math.prod(v[i] for v in by_p.values() if i < len(v)))
    return inv


class NarrowClassGroup:
    """Narrow class group of discriminant d, one class per cycle of reduced forms."""

    def __init__(self, d: int):
        self.d = d
        self.s = math.isqrt(d)
        self.index: dict[Form, int] = {}
        self.cycles: list[list[Form]] = []
        for f in reduced_forms(d):
            if f in self.index:
                continue
            cyc = []
            g = f
            while g not in self.index:
                self.index[g] = len(self.cycles)
                cyc.append(g)
                g, _ = rho(g, d, self.s)
            self.cycles.append(cyc)
        self.reps = [min(c) for c in self.cycles]
        self.identity = self.index[principal_form(d)]
        self._mul: dict[tuple[int, int], int] = {}

    @property
    def order(self) -> int:
        return len(self.cycles)

    def class_of(self, f: Form) -> int:
        return self.index[reduce_form(f, self.d)]

    def mul(self, i: int, j: int) -> int:
        key = (i, j) if i <= j else (j, i)
        r = self._mul.get(key)
        if r is None:
            r = self.class_of(compose(self.reps[i], self.reps[j], self.d))
            self._mul[key] = r
        return r

    def pow(self, i: int, n: int) -> int:
        r = self.identity
        while n:
            if n & 1:
                r = self.mul(r, i)
            i = self.mul(i, i)
            n >>= 1
        return r

    def inverse(self, i: int) -> int:
        a, b, c = self.reps[i]
        return self.class_of((a, -b, c))

    def element_order(self, i: int) -> int:
        n, x = 1, i
        while x != self.identity:
            x = self.mul(x, i)
            n += 1
        return n

    def structure(self, modulo: int | None = None) -> list[int]:
        """Invariant factors of the group, or of its quotient by <modulo>."""
        h = self.order
        sub = {self.identity}
        if modulo is not None:
            x = modulo
            while x not in sub:
                sub.add(x)
                x = self.mul(x, modulo)
        hq = h // len(sub)
        elementary = []
        for p in _prime_divisors(hq):
            full = _p_part(hq, p)
            sizes, k = [1], 1
            while sizes[-1] < full:
                sizes.append(sum(1 for i in range(h) if self.pow(i, p**k) in sub) // len(sub))
                k += 1
            elementary += _p_structure(sizes, p)
        return sorted(_invariant_factors(elementary), reverse=True)


def _prime_divisors(n: int) -> list[int]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def _p_part(n: int, p: int) -> int:
    r = 1
    while n % p == 0:
        n //= p
        r *= p
    return r


@dataclass
class QuadraticField:
    d: int
    eta: tuple[int, int]
    eta_norm: int
    h: int
    h_narrow: int
    class_group: list[int]
    narrow_class_group: list[int]
    rho3: int
    torsion3: list[Form] = field(default_factory=list)

    @property
    def rho(self) -> int:
        return self.rho3


def _torsion3_basis(G: NarrowClassGroup) -> list[Form]:
    tors = [i for i in range(G.order) if i != G.identity and G.pow(i, 3) == G.identity]
    tors.sort(key=lambda i: G.reps[i])
    span = {G.identity}
    basis = []
    for i in tors:
        if i in span:
            continue
        basis.append(i)
        new = set(span)
        for x in span:
            y = G.mul(x, i)
            new.add(y)
            new.add(G.mul(y, i))
        span = new
    return [_positive_rep(G, i) for i in basis]


def _positive_rep(G: NarrowClassGroup, i: int) -> Form:
    # smallest reduced form of the class with a > 0 (ideal-friendly)
    return min(f for f in G.cycles[i] if f[0] > 0)


@lru_cache(maxsize=4096)
def narrow_group(d: int) -> NarrowClassGroup:
    if d < 0 or not is_fundamental_discriminant(d):
        raise ValueError(f"{d} is not a positive fundamental discriminant")
    return NarrowClassGroup(d)


@lru_cache(maxsize=65536)
def quadratic_field(d: int) -> QuadraticField:
    x, y, n = fundamental_unit(d)
    G = narrow_group(d)
    hn = G.order
    if n == -1:
        h, J = hn, None
    else:
        a0, b0, c0 = principal_form(d)
        J = G.class_of((-1, b0, -c0))
        h = hn // 2 if J != G.identity else hn
    ncyc = G.structure()
    cyc = G.structure(J) if J is not None and J != G.identity else ncyc
    tors = _torsion3_basis(G) if hn % 3 == 0 else []
    return QuadraticField(d, (x, y), n, h, hn, cyc, ncyc, len(tors), tors)


def class_group_generators(d: int) -> list[Form]:
    """Forms (a > 0) whose classes generate the narrow, hence also the wide, class group."""
    G = narrow_group(d)
    span = {G.identity}
    gens = []
    for i in sorted(range(G.order), key=lambda i: G.reps[i]):
        if i in span:
            continue
        gens.append(i)
        frontier = list(span)
        while frontier:
            new = []
            for x in frontier:
                y = G.mul(x, i)
                if y not in span:
                    span.add(y)
                    new.append(y)
            frontier = new
    return [_positive_rep(G, i) for i in gens]


def class_group(d: int) -> tuple[int, int, list[int], list[Form]]:
    K = quadratic_field(d)
    return K.h, K.h_narrow, K.class_group, K.torsion3


def three_rank(d: int) -> int:
    return quadratic_field(d).rho3


# --- ideals and 3-virtual units -----------------------------------------

def _hnf2(rows: list[tuple[int, int]]) -> tuple[int, int, int]:
    """HNF [[A, 0], [t, m]] of a full-rank lattice in Z^2 given by generators."""
    m, rest = 0, []
    gen = (0, 0)
    for u, v in rows:
        if v == 0:
            rest.append(u)
            continue
        if m == 0:
            gen, m = (u, v), v
            continue
        g, x, y = _xgcd(m, v)
        newgen = (x * gen[0] + y * u, g)
        # the combination killing the second coordinate
        rest.append((v // g) * gen[0] - (m // g) * u)
        gen, m = newgen, g
    A = 0
    for u in rest:
        A = math.gcd(A, u)
    if m < 0:
        gen, m = (-gen[0], -m), -m
    return A, gen[0] % A, m


@dataclass(frozen=True)
class Ideal:
    """Ideal A*Z + (t + m*omega)*Z in HNF."""
    d: int
    A: int
    t: int
    m: int

    def basis(self) -> list[tuple[int, int]]:
        return [(self.A, 0), (self.t, self.m)]

    @property
    def norm(self) -> int:
        return self.A * self.m

    def __mul__(self, other: "Ideal") -> "Ideal":
        d = self.d
        rows = []
        for p in self.basis():
            for q in other.basis():
                rows.append(to_omega(qmul(from_omega(p, d), from_omega(q, d), d), d))
        return Ideal(d, *_hnf2(rows))

    @classmethod
    def from_form(cls, f: Form, d: int) -> "Ideal":
        a, b, _ = f
        if a <= 0:
            raise ValueError("form must have a > 0")
        delta = d % 2
        return cls(d, a, ((-b - delta) // 2) % a, 1)

    def primitive_form(self) -> tuple[int, Form]:
        """(content, form) with self = content * ideal_of(form)."""
        m = self.m
        A, t = self.A // m, self.t // m
        B = -(2 * t + self.d % 2)
        return m, (A, B, (B * B - self.d) // (4 * A))


def principal_generator(I: Ideal, max_steps: int = 10**6) -> tuple[int, int]:
    """A generator of positive norm of a narrowly principal ideal, found by form reduction."""
    d = I.d
    content, (A, B, C) = I.primitive_form()
    g = (A, -B, C)  # value form of the basis (A, (-B + sqrt d)/2)
    red, M = reduce_form(g, d, track=True)
    s = math.isqrt(d)
    start, steps = red, 0
    while red[0] != 1:
        red, t = rho(red, d, s)
        M = _mat_step(M, t)
        steps += 1
        if steps > max_steps or red == start:
            raise PrincipalitySearchError(f"ideal {I} is not narrowly principal")
    x, y = M[0][0], M[1][0]
    alpha = (2 * x * A - y * B, y)
    assert qnorm(alpha, d) == A
    return content * alpha[0], content * alpha[1]


@dataclass(frozen=True)
class VirtualUnit:
    element: tuple[int, int]
    cube_root_ideal: Ideal | None
    kind: str  # "unit" or "nonunit"


def _coprime_rep(f: Form, modulus: int) -> Form:
    """A properly equivalent form with positive first coefficient coprime to modulus."""
    if f[0] > 0 and math.gcd(f[0], modulus) == 1:
        return f
    for r in range(1, 200):
        for x in range(-r, r + 1):
            for y in (r - abs(x), -(r - abs(x))):
                if math.gcd(x, y) != 1:
                    continue
                v = evaluate(f, x, y)
                if v > 0 and math.gcd(v, modulus) == 1:
                    _, z0, w0 = _xgcd(x, y)
                    # x*w - y*z = 1 with w = z0, z = -w0
                    z, w = -w0, z0
                    a, b, c = f
                    nb = 2 * a * x * z + b * (x * w + y * z) + 2 * c * y * w
                    nf = (v, nb, evaluate(f, z, w))
                    assert nb * nb - 4 * v * nf[2] == b * b - 4 * a * c
                    return nf
    raise RuntimeError(f"no representative of {f} coprime to {modulus}")


def virtual_units(K: QuadraticField, coprime_to: int = 1) -> list[VirtualUnit]:
    """Generators of the 3-Selmer space: eta and one theta per 3-torsion basis class."""
    d = K.d
    out = [VirtualUnit(K.eta, None, "unit")]
    for f in K.torsion3:
        j = Ideal.from_form(_coprime_rep(f, 6 * coprime_to), d)
        theta = principal_generator(j * j * j)
        if is_cube_in_K(theta, d):
            raise AssertionError("3-virtual unit is a cube")
        out.append(VirtualUnit(theta, j, "nonunit"))
    return out
