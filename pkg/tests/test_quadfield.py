import math

import pytest
from hypothesis import given, settings, strategies as st

from realcubic.arith import is_fundamental_discriminant
from realcubic.quadfield import (
    Ideal, _hnf2, class_group, class_group_generators, compose, fundamental_unit, is_cube_in_K,
    narrow_group, qmul, qnorm, qpow, quadratic_field, reduce_form, to_omega, virtual_units,
)

from oracles import minimal_unit_y, quadratic_class_number

FUNDAMENTAL = [d for d in range(5, 10**4) if is_fundamental_discriminant(d)]


def eta_log(K):
    x, y = K.eta
    return math.log((x + y * math.sqrt(K.d)) / 2)


@pytest.mark.parametrize("d, eta, norm", [(5, (1, 1), -1), (229, (15, 1), -1), (8, (2, 1), -1)])
def test_fundamental_unit_examples(d, eta, norm):
    x, y, n = fundamental_unit(d)
    assert (x, y) == eta and n == norm
    assert (x * x - d * y * y) // 4 == n


def test_fundamental_unit_invariants():
    for d in FUNDAMENTAL[:400]:
        x, y, n = fundamental_unit(d)
        assert (x - y * d) % 2 == 0
        assert x * x - d * y * y == 4 * n
        assert x > 0 and y > 0


def test_fundamental_unit_is_minimal():
    # brute-force search of the Pell-type equation x^2 - d y^2 = +-4
    checked = 0
    for d in FUNDAMENTAL[:300]:
        _, y, _ = fundamental_unit(d)
        if y > 2 * 10**5:
            continue
        assert minimal_unit_y(d, y) == y, d
        checked += 1
    assert checked > 200


@pytest.mark.parametrize("d, rho3", [(229, 1), (32009, 2), (37, 0), (5, 0)])
def test_three_rank_examples(d, rho3):
    assert quadratic_field(d).rho3 == rho3


def test_class_number_1129():
    assert quadratic_field(1129).h == 9


def test_class_number_matches_analytic_formula():
    for d in FUNDAMENTAL:
        K = quadratic_field(d)
        h, approx = quadratic_class_number(d, eta_log(K))
        assert abs(approx - h) < 1e-6, d
        assert K.h == h, d


def test_narrow_versus_wide():
    for d in FUNDAMENTAL[:600]:
        K = quadratic_field(d)
        if K.eta_norm == -1:
            assert K.h_narrow == K.h
        else:
            assert K.h_narrow == 2 * K.h
        assert math.prod(K.class_group) == K.h
        three = lambda cyc: sum(1 for c in cyc if c % 3 == 0)  # noqa: E731
        assert three(K.class_group) == three(K.narrow_class_group) == K.rho3
        assert len(K.torsion3) == K.rho3


def test_class_group_tuple():
    h, hn, cyc, tors = class_group(32009)
    assert (h, hn, cyc) == (9, 9, [3, 3])
    assert len(tors) == 2


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(FUNDAMENTAL[200:]))
def test_narrow_group_axioms(d):
    G = narrow_group(d)
    n = G.order
    for i in range(min(n, 6)):
        assert G.mul(i, G.inverse(i)) == G.identity
        assert G.pow(i, n) == G.identity
    for f in G.reps[: min(n, 4)]:
        for g in G.reps[: min(n, 4)]:
            h = compose(f, g, d)
            assert h[1] ** 2 - 4 * h[0] * h[2] == d


def test_class_group_generators_generate():
    for d in (229, 1129, 32009, 2677, 3973):
        G = narrow_group(d)
        span = {G.identity}
        for f in class_group_generators(d):
            assert f[0] > 0
            i = G.class_of(f)
            frontier = list(span)
            while frontier:
                new = []
                for x in frontier:
                    y = G.mul(x, i)
                    if y not in span:
                        span.add(y)
                        new.append(y)
                frontier = new
        assert len(span) == G.order


def _principal(alpha, d):
    rows = [to_omega(qmul(alpha, w, d), d) for w in ((2, 0), (d % 2, 1))]
    return Ideal(d, *_hnf2(rows))


@pytest.mark.parametrize("d", [37, 5, 229, 1129, 32009, 2677, 7053, 3973])
def test_virtual_units(d):
    K = quadratic_field(d)
    V = virtual_units(K)
    assert len(V) == 1 + K.rho3
    assert V[0].kind == "unit" and V[0].element == K.eta
    for v in V[1:]:
        j = v.cube_root_ideal
        assert _principal(v.element, d) == j * j * j
        assert abs(qnorm(v.element, d)) == j.norm**3
        assert not is_cube_in_K(v.element, d)
    assert not is_cube_in_K(K.eta, d)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(FUNDAMENTAL[:200]), st.integers(-50, 50), st.integers(-50, 50))
def test_cube_detection(d, a, b):
    x = (2 * a + b * (d % 2), b)
    if x == (0, 0):
        return
    assert is_cube_in_K(qpow(x, 3, d), d)
    y = qmul(qpow(x, 3, d), K_eta(d), d)
    assert not is_cube_in_K(y, d)


def K_eta(d):
    return quadratic_field(d).eta


def test_reduce_form_keeps_discriminant():
    d = 229
    f = (5, 27, -(229 - 27 * 27) // 20)
    g = reduce_form(f, d)
    assert g[1] ** 2 - 4 * g[0] * g[2] == d


def test_rejects_non_fundamental():
    for d in (3299, 20, -3):
        with pytest.raises(ValueError):
            quadratic_field(d)
