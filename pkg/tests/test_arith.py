import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from realcubic.arith import (
    RangeError, crt, divisors, factor, is_fundamental_discriminant, is_prime, jacobi, kronecker,
    squarefree_decomposition, v_p,
)

from oracles import kronecker_bruteforce, naive_fundamental


@pytest.mark.parametrize("n, factors", [
    (756, ((2, 2), (3, 3), (7, 1))),
    (-20, ((2, 2), (5, 1))),
    (146853, ((3, 4), (7, 2), (37, 1))),
    (1, ()),
])
def test_factor_examples(n, factors):
    F = factor(n)
    assert F.factors == factors
    assert int(F) == n


def test_factor_rejects_zero_and_huge():
    with pytest.raises(ValueError):
        factor(0)
    with pytest.raises(RangeError):
        factor(2**130 + 1)


@settings(max_examples=300, deadline=None)
@given(st.integers(min_value=-(2**80), max_value=2**80).filter(lambda n: n != 0))
def test_factor_recomposes(n):
    F = factor(n)
    ps = F.primes
    assert ps == sorted(set(ps))
    assert math.prod(p**k for p, k in F.factors) == abs(n)
    assert all(sympy.isprime(p) for p in ps)


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=2, max_value=2**100))
def test_is_prime_agrees_with_sympy(n):
    assert is_prime(n) == sympy.isprime(n)


def test_is_prime_strong_pseudoprimes():
    # strong pseudoprimes to many small bases
    for n in (3215031751, 3825123056546413051, 318665857834031151167461):
        assert not is_prime(n)
    assert is_prime(2**89 - 1)
    assert is_prime(2**107 - 1)


def test_kronecker_examples():
    assert kronecker(37, 2) == -1
    assert kronecker(5, 5) == 0
    # 229 = 5 mod 7 and 5 is not a square mod 7
    assert kronecker(229, 7) == -1 == kronecker_bruteforce(229, 7)


def test_kronecker_matches_legendre_small():
    odd_primes = [p for p in range(3, 200) if sympy.isprime(p)]
    for d in range(-200, 200):
        for p in odd_primes:
            assert kronecker(d, p) == kronecker_bruteforce(d, p), (d, p)


def test_kronecker_two_supplement():
    for d in range(-100, 100):
        want = 0 if d % 2 == 0 else (1 if d % 8 in (1, 7) else -1)
        assert kronecker(d, 2) == want


@settings(max_examples=300, deadline=None)
@given(st.integers(-10**6, 10**6), st.integers(1, 5000), st.integers(1, 5000))
def test_kronecker_multiplicative(d, m, n):
    assert kronecker(d, m * n) == kronecker(d, m) * kronecker(d, n)


@settings(max_examples=200, deadline=None)
@given(st.integers(-10**6, 10**6), st.integers(1, 10**6).map(lambda k: 2 * k + 1))
def test_jacobi_matches_sympy(a, n):
    assert jacobi(a, n) == sympy.jacobi_symbol(a, n)


def test_fundamental_examples():
    assert is_fundamental_discriminant(229)
    assert not is_fundamental_discriminant(20)
    assert is_fundamental_discriminant(8)
    assert not is_fundamental_discriminant(1)


def test_fundamental_small_naive():
    for d in range(-500, 3000):
        assert is_fundamental_discriminant(d) == naive_fundamental(d), d


def test_fundamental_up_to_million():
    N = 10**6
    sqfree = np.ones(N + 1, dtype=bool)
    for k in range(2, math.isqrt(N) + 1):
        sqfree[k * k::k * k] = False
    n = np.arange(N + 1)
    ref = (n % 4 == 1) & sqfree
    q = n // 4
    ref |= (n % 4 == 0) & np.isin(q % 4, (2, 3)) & sqfree[q]
    ref[:2] = False
    got = np.array([is_fundamental_discriminant(int(d)) for d in range(N + 1)])
    assert np.array_equal(got[2:], ref[2:])


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 10**9))
def test_squarefree_decomposition(n):
    s, c = squarefree_decomposition(n)
    assert s * c * c == n
    assert all(k == 1 for k in sympy.factorint(s).values())


def test_small_helpers():
    assert divisors(70) == [1, 2, 5, 7, 10, 14, 35, 70]
    assert v_p(756, 3) == 3
    x = crt([2, 3], [5, 7])
    assert x % 5 == 2 and x % 7 == 3
