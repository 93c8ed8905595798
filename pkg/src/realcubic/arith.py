"""Exact integer primitives: factorization, Kronecker symbols, discriminant tests."""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

MAX_BITS = 127
# Miller-Rabin with the first 13 primes as bases is correct below this bound.
MR_PROVEN_BOUND = 3317044064679887385961981
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_SMALL_PRIMES = None
_SMALL_PRIME_SET = None
_SPF = None
SPF_LIMIT = 1 << 21


class RangeError(ValueError):
    """Raised when an integer exceeds the supported magnitude."""


def _check_range(n: int) -> None:
    if abs(n).bit_length() > MAX_BITS:
        raise RangeError(f"|{n}| exceeds {MAX_BITS} bits")


def small_primes(limit: int = 1000) -> list[int]:
    global _SMALL_PRIMES
    if _SMALL_PRIMES is None or _SMALL_PRIMES[-1] < limit:
        _SMALL_PRIMES = primes_upto(max(limit, 1000))
    return _SMALL_PRIMES


def _spf_table() -> list[int]:
    # smallest prime factor of every m < SPF_LIMIT
    global _SPF
    if _SPF is None:
        spf = np.zeros(SPF_LIMIT, dtype=np.int64)
        for p in primes_upto(math.isqrt(SPF_LIMIT)):
            view = spf[p::p]
            view[view == 0] = p
        rest = np.nonzero(spf == 0)[0]
        spf[rest] = rest
        _SPF = spf.tolist()
    return _SPF


def _small_prime_set() -> frozenset:
    global _SMALL_PRIME_SET
    if _SMALL_PRIME_SET is None:
        _SMALL_PRIME_SET = frozenset(small_primes())
    return _SMALL_PRIME_SET


def primes_upto(n: int) -> list[int]:
    """Sieve of Eratosthenes."""
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p::p] = bytearray(len(range(p * p, n + 1, p)))
    return [i for i, v in enumerate(sieve) if v]


def _strong_probable_prime(n: int, a: int) -> bool:
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def _strong_lucas(n: int) -> bool:
    # Selfridge parameters: first D in 5, -7, 9, -11, ... with (D/n) = -1.
    D = 5
    while True:
        k = jacobi(D, n)
        if k == -1:
            break
        if k == 0 and abs(D) != n:
            return False
        D = -D - 2 if D > 0 else -D + 2
        if D == 13 and math.isqrt(n) ** 2 == n:
            return False
    P, Q = 1, (1 - D) // 4
    d, s = n + 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    U, V, Qk = 1, P, Q % n
    inv2 = (n + 1) // 2
    for bit in bin(d)[3:]:
        U, V = U * V % n, (V * V - 2 * Qk) % n
        Qk = Qk * Qk % n
        if bit == "1":
            U, V = (P * U + V) * inv2 % n, (D * U + P * V) * inv2 % n
            Qk = Qk * Q % n
    if U == 0 or V == 0:
        return True
    for _ in range(s - 1):
        V = (V * V - 2 * Qk) % n
        Qk = Qk * Qk % n
        if V == 0:
            return True
    return False


def is_prime(n: int) -> bool:
    """Deterministic primality test for |n| < 2**127."""
    _check_range(n)
    if n < 2:
        return False
    if n < 1000:
        return n in _small_prime_set()
    for p in small_primes():
        if n % p == 0:
            return False
    if n < 1000 * 1000:
        return True
    if not all(_strong_probable_prime(n, a) for a in _MR_BASES):
        return False
    if n < MR_PROVEN_BOUND:
        return True
    return _strong_lucas(n)


def _pollard_brent(n: int, seed: int) -> int:
    rng = random.Random(seed)
    y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
    g = r = q = 1
    while g == 1:
        x = y
        for _ in range(r):
            y = (y * y + c) % n
        k = 0
        while k < r and g == 1:
            ys = y
            for _ in range(min(m, r - k)):
                y = (y * y + c) % n
                q = q * abs(x - y) % n
            g = math.gcd(q, n)
            k += m
        r *= 2
    if g == n:
        while True:
            ys = (ys * ys + c) % n
            g = math.gcd(abs(x - ys), n)
            if g > 1:
                break
    return g


def _split(n: int, out: dict[int, int]) -> None:
    if n == 1:
        return
    if is_prime(n):
        out[n] = out.get(n, 0) + 1
        return
    r = math.isqrt(n)
    if r * r == n:
        _split(r, out)
        _split(r, out)
        return
    seed = 1
    while True:
        g = _pollard_brent(n, seed)
        if 1 < g < n:
            break
        seed += 1
    _split(g, out)
    _split(n // g, out)


@dataclass(frozen=True)
class FactoredInt:
    value: int
    factors: tuple[tuple[int, int], ...] = field(default=())

    @property
    def primes(self) -> list[int]:
        return [p for p, _ in self.factors]

    def exponent(self, p: int) -> int:
        return dict(self.factors).get(p, 0)

    def __int__(self) -> int:
        return self.value

    def __str__(self) -> str:
        parts = ["-1"] if self.value < 0 else []
        parts += [f"{p}^{e}" if e > 1 else str(p) for p, e in self.factors]
        return " * ".join(parts) or "1"


def factor(n: int) -> FactoredInt:
    """Factor a nonzero integer; the sign is kept in ``value``."""
    if n == 0:
        raise ValueError("cannot factor 0")
    _check_range(n)
    m = abs(n)
    out: dict[int, int] = {}
    if m < SPF_LIMIT:
        spf = _spf_table()
        while m > 1:
            p = spf[m]
            out[p] = out.get(p, 0) + 1
            m //= p
        return FactoredInt(n, tuple(sorted(out.items())))
    for p in small_primes():
        if p * p > m:
            break
        while m % p == 0:
            out[p] = out.get(p, 0) + 1
            m //= p
    _split(m, out)
    return FactoredInt(n, tuple(sorted(out.items())))


def divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in factor(n).factors:
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def squarefree_decomposition(n: int) -> tuple[int, int]:
    """Return (s, c) with n = s * c**2 and s squarefree (sign kept in s)."""
    f = factor(n)
    s = -1 if n < 0 else 1
    c = 1
    for p, e in f.factors:
        if e % 2:
            s *= p
        c *= p ** (e // 2)
    return s, c


def is_squarefree(n: int) -> bool:
    return all(e == 1 for _, e in factor(n).factors)


def jacobi(a: int, n: int) -> int:
    """Jacobi symbol (a/n) for odd positive n."""
    if n <= 0 or n % 2 == 0:
        raise ValueError("n must be odd and positive")
    a %= n
    t = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                t = -t
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            t = -t
        a %= n
    return t if n == 1 else 0


def kronecker(d: int, n: int) -> int:
    """Kronecker symbol (d/n)."""
    if n == 0:
        return 1 if abs(d) == 1 else 0
    t = 1
    if n < 0:
        n = -n
        if d < 0:
            t = -t
    v = (n & -n).bit_length() - 1
    if v:
        if d % 2 == 0:
            return 0
        if v % 2 and d % 8 in (3, 5):
            t = -t
        n >>= v
    return t * jacobi(d, n) if n > 1 else t


def is_fundamental_discriminant(d: int) -> bool:
    if d in (0, 1):
        return False
    if d % 4 == 1:
        return is_squarefree(d)
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and is_squarefree(m)
    return False


def v_p(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of 0")
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


def crt(residues, moduli) -> int:
    """Chinese remaindering for pairwise coprime moduli."""
    M = reduce(lambda a, b: a * b, moduli, 1)
    x = 0
    for r, m in zip(residues, moduli):
        Mi = M // m
        x += r * Mi * pow(Mi, -1, m)
    return x % M
