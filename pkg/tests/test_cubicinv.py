import math
import random
from fractions import Fraction

import cypari2
import mpmath
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from realcubic.admissibility import split_cubic_discriminant
from realcubic.cubicenum import disc, enumerate_fields, fields_with_discriminant
from realcubic.cubicinv import (
    PrecisionError, absolute_dpf, analytic_check, basis_discriminant, maximal_order,
    multiplication_table, real_roots, saturation_certificate, unit_status,
)

pari = cypari2.Pari()
y = sympy.Symbol("y")


def field(dl):
    (F,) = fields_with_discriminant(dl)
    return maximal_order(F.form, dl)


@pytest.fixture(scope="module")
def sample():
    fields = [F for F in enumerate_fields(30000) if F.galois == "s3"]
    rng = random.Random(7)
    return [maximal_order(F.form, F.d_L) for F in rng.sample(fields, 25)]


@pytest.mark.parametrize("dl", [148, 229, 49, 756, 2597])
def test_order_discriminant(dl):
    L = field(dl)
    assert L.d_L == dl == basis_discriminant(L.form)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 30), st.integers(-30, 30), st.integers(-30, 30), st.integers(-30, 30))
def test_basis_discriminant_is_form_discriminant(a, b, c, d):
    assert basis_discriminant((a, b, c, d)) == disc((a, b, c, d))


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 9), st.integers(-9, 9), st.integers(-9, 9), st.integers(-9, 9))
def test_multiplication_table_is_associative(a, b, c, d):
    T = multiplication_table((a, b, c, d))

    def mul(u, v):
        out = [0, 0, 0]
        for i in range(3):
            for j in range(3):
                if u[i] and v[j]:
                    for k in range(3):
                        out[k] += u[i] * v[j] * T[i][j][k]
        return out

    e = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    for i in range(3):
        for j in range(3):
            for k in range(3):
                assert mul(mul(e[i], e[j]), e[k]) == mul(e[i], mul(e[j], e[k]))


def test_ramified_prime_count():
    for dl in (148, 756, 5684, 146853, 966397):
        d, f = split_cubic_discriminant(dl)
        L = field(dl) if dl != 966397 else maximal_order(fields_with_discriminant(dl)[0].form, dl)
        lams = L.ramified_primes(f)
        assert len(lams) == len(f.primes) == f.s + f.n


def test_regulator_49_cyclotomic_units():
    L = field(49)
    # cyclotomic units sin(a pi/7)/sin(pi/7), a = 2, 3, generate the units of Q(zeta_7)^+ (h = 1)
    with mpmath.workprec(200):
        def xi(a, b):
            return mpmath.sin(a * b * mpmath.pi / 7) / mpmath.sin(b * mpmath.pi / 7)
        M = [[mpmath.log(abs(xi(a, b))) for b in (1, 2)] for a in (2, 3)]
        R = abs(M[0][0] * M[1][1] - M[0][1] * M[1][0])
        assert abs(L.regulator - R) < mpmath.mpf(10) ** -30
    assert L.h == 1


@pytest.mark.parametrize("dl", [148, 229])
def test_units_have_norm_one(dl):
    L = field(dl)
    a, b, c, d = L.form
    minpoly = y**3 + b * y**2 + a * c * y + a * a * d
    assert len(L.units) == 2
    for u in L.units:
        poly = sum(sympy.Rational(cf.numerator, cf.denominator) * y**k for k, cf in enumerate(u))
        assert abs(sympy.resultant(minpoly, poly, y)) == 1


@pytest.mark.parametrize("dl, h", [(229, 1), (148, 1), (49, 1), (2597, 3), (146853, 9)])
def test_class_numbers(dl, h):
    assert field(dl).h == h


def test_units_and_class_group_certified(sample):
    for L in sample:
        assert unit_status(L), L.form
        assert L.status == set()
        with mpmath.workprec(L.precision):
            M = [[mpmath.log(abs(sum(mpmath.mpf(cf.numerator) / cf.denominator * r**k
                                     for k, cf in enumerate(u)))) for r in L.y_embeddings]
                 for u in L.units]
        for i, j in ((0, 1), (0, 2), (1, 2)):
            assert abs(M[0][i] * M[1][j] - M[0][j] * M[1][i]) > 1e-6


def test_hr_against_zeta_residue(sample):
    for L in sample[:12]:
        a, b, c, d = L.form
        pol = f"x^3 + ({b})*x^2 + ({a * c})*x + ({a * a * d})"
        res = float(pari(f"polcoef(lfun(lfuncreate({pol}), 1 + x + O(x^2), 0), -1)"))
        hr = res * math.sqrt(L.d_L) / 4
        assert abs(hr - L.h * float(L.regulator)) / hr < 1e-8
        ok, rel = analytic_check(L)
        assert ok, (L.form, rel)


@pytest.mark.parametrize("dl, A", [(148, 1), (229, 0), (756, 2), (5684, 1), (2597, 0)])
def test_absolute_dimension(dl, A):
    d, f = split_cubic_discriminant(dl)
    res = absolute_dpf(field(dl), f)
    assert res.A == A == len(res.principal_combinations)
    assert res.A <= min(f.s + f.n, 2)


def test_absolute_dimension_bounds(sample):
    for L in sample:
        d, f = split_cubic_discriminant(L.d_L)
        res = absolute_dpf(L, f)
        assert 0 <= res.A <= min(f.num_primes, 2)
        if f.f == 1:
            assert res.A == 0


def test_saturation_detects_cubes():
    L = field(148)
    poly = [int(pari.polcoef(pari(L.polynomial), k)) for k in range(4)]
    u = L.units[0]
    assert saturation_certificate(poly, L.units, 3)
    # u^3 together with the second unit is not 3-saturated
    cube = pari(f"lift(Mod({_as_pol(u)}, {L.polynomial})^3)")
    u3 = [Fraction(str(pari.polcoef(cube, k))) for k in range(3)]
    assert not saturation_certificate(poly, [u3, L.units[1]], 3, max_primes=60)


def _as_pol(u):
    return " + ".join(f"({c})*y^{k}" for k, c in enumerate(u))


def test_real_roots_isolated():
    rs = real_roots((1, 0, -3, 1))
    assert len(rs) == 3
    for r in rs:
        assert abs(r**3 - 3 * r + 1) < mpmath.mpf(2) ** -100
    with pytest.raises(PrecisionError):
        real_roots((1, 0, 1, 1))
