"""3-admissible conductors, formal cubic discriminants, and d_L = f^2 * d."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .arith import factor, is_fundamental_discriminant, kronecker, primes_upto, squarefree_decomposition


class MalformedDiscriminant(ValueError):
    pass


def allowed_exponents(d: int) -> tuple[int, ...]:
    """Admissible exponents of 3 in a conductor for the discriminant d."""
    if d % 3:
        return (0, 2)
    return (0, 1) if d % 9 == 3 else (0, 1, 2)


def prime_ok(q: int, d: int) -> bool:
    """Kronecker congruence (d/q) = q (mod 3) for a prime q != 3."""
    return (kronecker(d, q) - q) % 3 == 0


def w_invariant(e: int, d: int) -> int:
    if e == 0:
        return 0
    if e == 2 and d % 9 == 6:
        return 2
    return 1


@dataclass(frozen=True)
class Conductor:
    f: int
    d: int
    e: int
    noncritical: tuple[int, ...]
    s: int
    n: int
    w: int

    @property
    def t(self) -> int:
        """Number of prime divisors of f other than 3."""
        return len(self.noncritical)

    @property
    def primes(self) -> tuple[int, ...]:
        return ((3,) if self.e else ()) + self.noncritical

    @property
    def num_primes(self) -> int:
        """Number of primes totally ramified in the cubic field (s + n)."""
        return self.s + self.n

    def parts(self) -> list[tuple[int, int, str]]:
        """(p, p^k, kind) for every prime-power part; kind is split, inert or ramified."""
        out = []
        if self.e:
            kind = "ramified" if self.d % 3 == 0 else ("split" if self.d % 3 == 1 else "inert")
            out.append((3, 3**self.e, kind))
        for q in self.noncritical:
            out.append((q, q, "split" if kronecker(self.d, q) == 1 else "inert"))
        return out

    @property
    def split_primes(self) -> tuple[int, ...]:
        return tuple(p for p, _, k in self.parts() if k == "split")

    def shape(self) -> str:
        """Label like '9ql' (q: inert prime, l: split prime, 3-part first)."""
        nq = sum(1 for q in self.noncritical if kronecker(self.d, q) == -1)
        nl = self.t - nq
        head = "" if self.e == 0 else str(3**self.e)
        body = _symbols("q", nq) + _symbols("l", nl)
        return (head + body) or "1"

    def __int__(self) -> int:
        return self.f


def _symbols(sym: str, k: int) -> str:
    if k <= 1:
        return sym * k
    return "".join(f"{sym}{i}" for i in range(1, k + 1))


def three_condition(e: int, d: int) -> str:
    """Residue condition on d used to group conductors with a 3-part."""
    if e == 0:
        return ""
    if e == 1 or d % 3 == 0:
        return f"d=={d % 9}(9)"
    return f"d=={d % 3}(3)"


def conductor(f: int, d: int) -> Conductor:
    if not is_admissible(f, d):
        raise ValueError(f"{f} is not 3-admissible for d={d}")
    return _make(f, d)


def _make(f: int, d: int) -> Conductor:
    e = 0
    g = f
    while g % 3 == 0:
        g //= 3
        e += 1
    qs = tuple(factor(g).primes) if g > 1 else ()
    s = sum(1 for q in qs if kronecker(d, q) == 1)
    n = len(qs) - s
    if e:
        if d % 3 == 1:
            s += 1
        else:
            n += 1
    return Conductor(f, d, e, qs, s, n, w_invariant(e, d))


def is_admissible(f: int, d: int) -> bool:
    if f < 1:
        return False
    e = 0
    g = f
    while g % 3 == 0:
        g //= 3
        e += 1
    if e not in allowed_exponents(d):
        return False
    if g == 1:
        return True
    fac = factor(g)
    return all(k == 1 for _, k in fac.factors) and all(prime_ok(q, d) for q in fac.primes)


def admissible_conductors(d: int, bound: int) -> list[Conductor]:
    """All admissible f with f^2 * d <= bound, sorted by f."""
    fmax = math.isqrt(bound // d) if bound >= d else 0
    if fmax < 1:
        return []
    qs = [q for q in primes_upto(fmax) if q != 3 and prime_ok(q, d)]
    out = []
    for e in allowed_exponents(d):
        base = 3**e
        if base > fmax:
            continue
        stack = [(base, 0)]
        while stack:
            f, i = stack.pop()
            out.append(f)
            for j in range(i, len(qs)):
                if f * qs[j] > fmax:
                    break
                stack.append((f * qs[j], j + 1))
    return [_make(f, d) for f in sorted(out)]


@dataclass(frozen=True)
class CyclicMarker:
    """A cubic discriminant that is a perfect square f^2 (cyclic cubic fields)."""
    f: int


@dataclass(frozen=True)
class FormalDiscriminant:
    D: int
    d: int
    f: Conductor


def split_cubic_discriminant(dL: int):
    """Decompose d_L = f^2 d; returns (d, Conductor) or a CyclicMarker."""
    if dL <= 0:
        raise MalformedDiscriminant(f"{dL} is not positive")
    r = math.isqrt(dL)
    if r * r == dL:
        return CyclicMarker(r)
    s, c = squarefree_decomposition(dL)
    if s % 4 == 1:
        d, f = s, c
    elif c % 2 == 0:
        d, f = 4 * s, c // 2
    else:
        raise MalformedDiscriminant(f"{dL} is not of the form f^2 * d")
    assert is_fundamental_discriminant(d)
    if not is_admissible(f, d):
        raise MalformedDiscriminant(f"{dL} = {f}^2 * {d} with {f} not admissible")
    return d, _make(f, d)


def formal_discriminants(bound: int, d_values) -> list[FormalDiscriminant]:
    out = []
    for d in d_values:
        for f in admissible_conductors(d, bound):
            out.append(FormalDiscriminant(f.f**2 * d, d, f))
    return out
