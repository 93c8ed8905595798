"""3-ring spaces of a real quadratic field and multiplicities of cubic discriminants.

For a conductor f the obstruction group is

    G_f = (O_K/f)^x / ((Z/f)^x * cubes),

an F_3-vector space of dimension t + w.  By CRT it splits into one local
factor per prime-power part of f.  A Selmer generator lies in the ring space
V(f) iff its image in G_f vanishes, so the defect is the rank of the image
of the Selmer basis, and the 3-rank of the ring class group mod f is
rho + t + w - defect.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

from . import linalg3
from .admissibility import Conductor, admissible_conductors, conductor, is_admissible
from .quadfield import QuadraticField, VirtualUnit, quadratic_field, to_omega, virtual_units


# --- arithmetic in O_K / m = (Z/m)[X]/(X^2 - delta X - c0) ---------------

def _mul(x, y, m, delta, c0):
    a, b = x
    c, d = y
    bd = b * d
    return (a * c + bd * c0) % m, (a * d + b * c + bd * delta) % m


def _pow(x, n, m, delta, c0):
    r = (1, 0)
    while n:
        if n & 1:
            r = _mul(r, x, m, delta, c0)
        x = _mul(x, x, m, delta, c0)
        n >>= 1
    return r


def _sqrt_mod(a: int, q: int) -> int:
    a %= q
    for r in range(q):
        if r * r % q == a:
            return r
    raise ValueError("no square root")


def _ring_params(d: int) -> tuple[int, int]:
    delta = d % 2
    return delta, (d - delta) // 4


class LocalMap:
    """F_3-linear map from elements of K coprime to p into one local factor of G_f."""

    def __init__(self, d: int, p: int, pk: int, kind: str):
        self.d, self.p, self.pk, self.kind = d, p, pk, kind
        self.delta, self.c0 = _ring_params(d)
        if p == 3:
            self._table, self.dim = _three_part_table(pk, self.delta, self.c0 % pk)
        elif kind == "split":
            self.dim = 1
            self._setup_split()
        else:
            self.dim = 1
            self._setup_inert()

    def _setup_split(self):
        q, delta, c0 = self.p, self.delta, self.c0
        # roots of X^2 - delta X - c0 mod q (q odd)
        inv2 = pow(2, -1, q)
        disc = (delta * delta + 4 * c0) % q
        s = _sqrt_mod(disc, q)
        self.roots = ((delta + s) * inv2 % q, (delta - s) * inv2 % q)
        self.zeta = next(pow(g, (q - 1) // 3, q) for g in range(2, q) if pow(g, (q - 1) // 3, q) != 1)

    def _setup_inert(self):
        q = self.p
        self.exp = (q * q - 1) // 3
        for a, b in product(range(q), range(1, q)):
            z = _pow((a, b), self.exp, q, self.delta, self.c0)
            if z != (1, 0):
                self.zeta = z
                break
        self.zeta2 = _mul(self.zeta, self.zeta, q, self.delta, self.c0)

    def image(self, alpha: tuple[int, int]) -> list[int]:
        """Coordinates of alpha = (u + v sqrt d)/2 in the local factor."""
        a0, a1 = to_omega(alpha, self.d)
        q = self.pk
        x = (a0 % q, a1 % q)
        if self.p == 3:
            return list(self._table[x])
        if self.kind == "split":
            r1, r2 = self.roots
            v1, v2 = (x[0] + x[1] * r1) % q, (x[0] + x[1] * r2) % q
            if v1 == 0 or v2 == 0:
                raise ValueError("element not coprime to the modulus")
            z = pow(v1 * pow(v2, -1, q), (q - 1) // 3, q)
            return [0 if z == 1 else (1 if z == self.zeta else 2)]
        z = _pow(x, self.exp, q, self.delta, self.c0)
        if z == (1, 0):
            return [0]
        if z == self.zeta:
            return [1]
        if z == self.zeta2:
            return [2]
        raise ValueError("element not coprime to the modulus")


@lru_cache(maxsize=None)
def _three_part_table(m: int, delta: int, c0: int):
    """Coordinates on (O_K/m)^x / ((Z/m)^x * cubes) for m a power of 3, by enumeration."""
    elems = [(a, b) for a in range(m) for b in range(m)]

    def unit(x):
        a, b = x
        # norm of a + b*omega is a^2 + delta*a*b - c0*b^2
        return (a * a + delta * a * b - c0 * b * b) % 3 != 0

    H = [x for x in elems if unit(x)]
    mul = lambda x, y: _mul(x, y, m, delta, c0)  # noqa: E731
    gens = {_mul(x, mul(x, x), m, delta, c0) for x in H} | {(a, 0) for a in range(m) if a % 3}
    S = {(1, 0)}
    frontier = list(S)
    while frontier:
        new = []
        for x in frontier:
            for g in gens:
                y = mul(x, g)
                if y not in S:
                    S.add(y)
                    new.append(y)
        frontier = new
    # greedy basis of H/S
    basis: list[tuple[int, int]] = []
    span = {x: () for x in S}
    for h in H:
        if h in span:
            continue
        basis.append(h)
        h2 = mul(h, h)
        new = {}
        for x, vec in span.items():
            new[x] = vec + (0,)
            new[mul(x, h)] = vec + (1,)
            new[mul(x, h2)] = vec + (2,)
        span = new
    assert len(span) == len(H)
    k = len(basis)
    table = {x: vec + (0,) * (k - len(vec)) for x, vec in span.items()}
    return table, k


@dataclass
class RingSpace:
    modulus: Conductor
    basis_image: list[list[int]]
    defect: int
    generators: list[VirtualUnit]

    @property
    def obstruction_dim(self) -> int:
        return len(self.basis_image[0]) if self.basis_image else 0

    @property
    def dim(self) -> int:
        return len(self.basis_image) - self.defect


@lru_cache(maxsize=None)
def _local_map(d: int, p: int, pk: int, kind: str) -> LocalMap:
    return LocalMap(d, p, pk, kind)


def _coprime_modulus(f: Conductor) -> int:
    return math.prod(f.primes) if f.primes else 1


def ring_space(K: QuadraticField, f: Conductor | int, gens: list[VirtualUnit] | None = None) -> RingSpace:
    if isinstance(f, int):
        f = conductor(f, K.d)
    if gens is None:
        gens = virtual_units(K, _coprime_modulus(f))
    maps = [_local_map(K.d, p, pk, kind) for p, pk, kind in f.parts()]
    rows = []
    for g in gens:
        row = []
        for lm in maps:
            row += lm.image(g.element)
        rows.append(row)
    dim_g = sum(lm.dim for lm in maps)
    assert dim_g == f.t + f.w, (K.d, f.f, dim_g)
    defect = linalg3.rank(rows) if dim_g else 0
    return RingSpace(f, rows, defect, gens)


def ring_class_rank(K: QuadraticField, f: Conductor, gens=None) -> int:
    rs = ring_space(K, f, gens)
    return K.rho3 + f.t + f.w - rs.defect


@dataclass(frozen=True)
class MultiplicityRecord:
    d: int
    f: int
    rho_f: int
    m: int


def admissible_divisors(f: int, d: int) -> list[int]:
    divs = [c for c in range(1, f + 1) if f % c == 0 and is_admissible(c, d)]
    return sorted(divs, key=lambda c: (_omega(c), c))


def _omega(n: int) -> int:
    k, p = 0, 2
    while p * p <= n:
        if n % p == 0:
            k += 1
            while n % p == 0:
                n //= p
        p += 1
    return k + (n > 1)


def _multiplicities(K: QuadraticField, f: int) -> dict[int, MultiplicityRecord]:
    divs = admissible_divisors(f, K.d)
    gens = virtual_units(K, math.prod(conductor(f, K.d).primes) or 1)
    out: dict[int, MultiplicityRecord] = {}
    for c in sorted(divs):
        rc = ring_class_rank(K, conductor(c, K.d), gens)
        m = (3**rc - 1) // 2 - sum(out[c2].m for c2 in out if c % c2 == 0)
        if m < 0:
            raise AssertionError(f"negative multiplicity at d={K.d}, f={c}")
        out[c] = MultiplicityRecord(K.d, c, rc, m)
    return out


def multiplicity(K: QuadraticField, f: Conductor | int) -> MultiplicityRecord:
    fi = int(f)
    return _multiplicities(K, fi)[fi]


def hetero_signature(K: QuadraticField, f: Conductor | int) -> list[tuple[int, int]]:
    fi = int(f)
    recs = _multiplicities(K, fi)
    return [(c, recs[c].m) for c in admissible_divisors(fi, K.d)]


def predicted_counts(d: int, bound: int) -> dict[int, MultiplicityRecord]:
    """Multiplicities m(f^2 d) for every admissible f with f^2 d <= bound."""
    K = quadratic_field(d)
    conds = admissible_conductors(d, bound)
    if not conds:
        return {}
    modulus = math.prod({p for c in conds for p in c.primes}) or 1
    gens = virtual_units(K, modulus)
    out: dict[int, MultiplicityRecord] = {}
    for c in conds:
        rc = ring_class_rank(K, c, gens)
        m = (3**rc - 1) // 2 - sum(out[c2].m for c2 in out if c.f % c2 == 0)
        if m < 0:
            raise AssertionError(f"negative multiplicity at d={d}, f={c.f}")
        out[c.f] = MultiplicityRecord(d, c.f, rc, m)
    return out
