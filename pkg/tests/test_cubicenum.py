import random
from collections import Counter
from itertools import product

import cypari2
import pytest
from hypothesis import given, settings, strategies as st

from realcubic.cubicenum import (
    canonical, disc, enumerate_fields, fields_with_discriminant, group_multiplets, hessian,
    is_irreducible, is_maximal, is_reduced, splitting_signature, transform,
)

pari = cypari2.Pari()


def monic(F):
    a, b, c, d = F
    return pari(f"x^3 + ({b})*x^2 + ({a * c})*x + ({a * a * d})")


@pytest.fixture(scope="module")
def fields_1e5():
    return enumerate_fields(10**5)


def test_small_bounds():
    F = enumerate_fields(50)
    assert len(F) == 1 and F[0].galois == "cyclic" and F[0].f == 7 and F[0].d_L == 49
    F = enumerate_fields(1500)
    assert sum(f.galois == "s3" for f in F) == 38
    assert sum(f.galois == "cyclic" for f in F) == 6
    assert enumerate_fields(49) == []


def test_counts_1e5(fields_1e5):
    assert sum(f.galois == "s3" for f in fields_1e5) == 4753
    assert sum(f.galois == "cyclic" for f in fields_1e5) == 51
    hist = Counter(m.m for m in group_multiplets([f for f in fields_1e5 if f.galois == "s3"]))
    assert dict(hist) == {1: 4652, 2: 9, 3: 21, 4: 5}


def test_named_multiplets(fields_1e5):
    by = Counter(f.d_L for f in fields_1e5)
    assert by[37300] == 2
    assert by[62501] == 4
    assert by[148] == 1 and by[229] == 1


def test_deterministic_order(fields_1e5):
    assert fields_1e5 == sorted(fields_1e5)
    assert enumerate_fields(20000) == [f for f in fields_1e5 if f.d_L < 20000]


def test_forms_define_fields_of_that_discriminant(fields_1e5):
    rng = random.Random(20240229)
    for F in rng.sample(fields_1e5, 200):
        assert disc(F.form) == F.d_L
        assert is_reduced(F.form)
        assert int(pari.nfdisc(monic(F.form))) == F.d_L


def test_members_not_isomorphic(fields_1e5):
    for m in group_multiplets(fields_1e5):
        if m.m < 2:
            continue
        polys = [pari.polredabs(monic(F.form)) for F in m.members]
        assert len(set(map(str, polys))) == m.m
        for i, F in enumerate(m.members):
            for G in m.members[i + 1:]:
                assert not pari.nfisisom(monic(F.form), monic(G.form))


def test_splitting_signature_is_invariant():
    primes = [p for p in range(5, 60) if pari.isprime(p)]
    F = (1, 0, -3, 1)
    for M in (((1, 1), (0, 1)), ((0, 1), (-1, 0)), ((2, 1), (1, 1))):
        G = transform(F, M)
        assert splitting_signature(G, primes) == splitting_signature(F, primes)


def test_against_naive_box_search():
    # every field with d_L < 2000 has a defining form with small coefficients
    B, R = 2000, 8
    seen = set()
    for F in product(range(1, R + 1), range(-R, R + 1), range(-R, R + 1), range(-R, R + 1)):
        D = disc(F)
        if not 0 < D < B or not is_irreducible(F):
            continue
        P = monic(F)
        if int(pari.nfdisc(P)) < B:
            seen.add(str(pari.polredabs(P)))
    got = {str(pari.polredabs(monic(F.form))) for F in enumerate_fields(B)}
    assert got == seen


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 12), st.integers(-20, 20), st.integers(-20, 20), st.integers(-20, 20))
def test_maximality_matches_pari(a, b, c, d):
    F = (a, b, c, d)
    D = disc(F)
    if D <= 0 or not is_irreducible(F):
        return
    assert is_maximal(F) == (int(pari.nfdisc(monic(F))) == D)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 12), st.integers(-20, 20), st.integers(-20, 20), st.integers(-20, 20),
       st.sampled_from([((1, 1), (0, 1)), ((0, 1), (-1, 0)), ((2, 1), (1, 1)), ((1, 0), (3, 1))]))
def test_transform_invariants(a, b, c, d, M):
    F = (a, b, c, d)
    G = transform(F, M)
    assert disc(G) == disc(F)
    P, Q, R = hessian(F)
    if disc(F) != 0:
        assert 4 * P * R - Q * Q == 3 * disc(F)


def test_canonical_is_fixed_point():
    for F in enumerate_fields(5000):
        assert canonical(F.form) == F.form


def test_fields_with_discriminant():
    assert [F.form for F in fields_with_discriminant(62501)] == [
        F.form for F in enumerate_fields(62502) if F.d_L == 62501]
    assert fields_with_discriminant(20) == []
    assert len(fields_with_discriminant(148)) == 1
