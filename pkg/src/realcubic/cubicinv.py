"""Invariants of a totally real cubic field given by a reduced binary cubic form.

The ring of F = (a, b, c, d) has the basis 1, w, t with w = a*x and
t = a*x^2 + b*x, where F(x, 1) = 0.  Its multiplication table is

    w^2 = -b w + a t,   w t = -a d - c w,   t^2 = -b d - d w - c t,

and its discriminant equals disc(F), so when disc(F) is a field discriminant
it is the maximal order.  PARI (via cypari2) supplies relation-based class
groups and unit systems; everything it returns that the classification
depends on is checked here: the class group and units by an unconditional
certificate, saturation at 2, 3 and 5 by residue characters, and principal
generators by exact comparison of ideals.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import cypari2
import mpmath

from . import linalg3
from .admissibility import Conductor
from .arith import primes_upto

DEFAULT_PRECISION = int(os.environ.get("REALCUBIC_PRECISION", "128"))
PRECISION_CEILING = int(os.environ.get("REALCUBIC_PRECISION_CEILING", "4096"))

_PARI = None


def pari() -> cypari2.Pari:
    global _PARI
    if _PARI is None:
        _PARI = cypari2.Pari()
        _PARI.default("parisizemax", int(os.environ.get("REALCUBIC_PARI_STACK", str(2**31))))
    return _PARI


class PrecisionError(ArithmeticError):
    pass


class CertificationError(RuntimeError):
    """A PARI answer failed an exact check."""


# --- the Delone-Faddeev ring ----------------------------------------------

def multiplication_table(form) -> list[list[list[int]]]:
    """T[i][j] = coordinates of e_i * e_j in the basis (1, w, t)."""
    a, b, c, d = form
    e1 = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    ww = [0, -b, a]
    wt = [-a * d, -c, 0]
    tt = [-b * d, -d, -c]
    return [
        e1,
        [e1[1], ww, wt],
        [e1[2], wt, tt],
    ]


def _mult_matrix(T, i):
    # column k of the matrix of multiplication by e_i is e_i * e_k
    return [[T[i][k][r] for k in range(3)] for r in range(3)]


def trace_form(form) -> list[list[int]]:
    T = multiplication_table(form)
    tr = [sum(_mult_matrix(T, i)[r][r] for r in range(3)) for i in range(3)]
    # Tr(e_i e_j) = sum_k T[i][j][k] Tr(e_k)
    return [[sum(T[i][j][k] * tr[k] for k in range(3)) for j in range(3)] for i in range(3)]


def _det3(M) -> int:
    return (M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1])
            - M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0])
            + M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]))


def basis_discriminant(form) -> int:
    return _det3(trace_form(form))


def real_roots(form, prec: int = DEFAULT_PRECISION) -> list[mpmath.mpf]:
    """The three real roots of F(x, 1), each certified by a sign change within 2^(8-prec)."""
    a, b, c, d = form
    while prec <= PRECISION_CEILING:
        with mpmath.workprec(prec):
            roots = mpmath.polyroots([a, b, c, d], maxsteps=200, extraprec=prec)
            if any(abs(mpmath.im(r)) > mpmath.mpf(2) ** (16 - prec) for r in roots):
                raise PrecisionError("form has non-real roots")
            rs = sorted(mpmath.re(r) for r in roots)
            eps = mpmath.mpf(2) ** (8 - prec) * (1 + max(abs(r) for r in rs))

            def F(x):
                return ((a * x + b) * x + c) * x + d

            ok = all(F(r - eps) * F(r + eps) < 0 for r in rs)
            ok = ok and all(rs[i] + eps < rs[i + 1] - eps for i in range(2))
            if ok:
                return rs
        prec *= 2
    raise PrecisionError(f"roots of {form} not isolated below {PRECISION_CEILING} bits")


# --- fields ---------------------------------------------------------------

@dataclass
class CubicField:
    form: tuple[int, int, int, int]
    d_L: int
    precision: int = DEFAULT_PRECISION
    status: set = field(default_factory=set)

    @property
    def polynomial(self) -> str:
        """Minimal polynomial of w = a*x in the variable y."""
        a, b, c, d = self.form
        return f"y^3 + ({b})*y^2 + ({a * c})*y + ({a * a * d})"

    @property
    def integral_basis(self) -> list[list[Fraction]]:
        """Basis 1, w, t as coefficient vectors in 1, y, y^2 (y = w)."""
        a, b, _, _ = self.form
        return [[Fraction(1), Fraction(0), Fraction(0)],
                [Fraction(0), Fraction(1), Fraction(0)],
                [Fraction(0), Fraction(b, a), Fraction(1, a)]]

    @cached_property
    def nf(self):
        P = pari()
        a, b, _, _ = self.form
        nf = P.nfinit([P(self.polynomial), [P(1), P("y"), P(f"(y^2 + ({b})*y)/{a}")]])
        if int(P("(n) -> n.disc")(nf)) != self.d_L:
            raise CertificationError(f"basis of {self.form} does not have discriminant {self.d_L}")
        return nf

    @cached_property
    def bnf(self):
        return pari().bnfinit(self.nf, 1)

    @cached_property
    def embeddings(self) -> list[mpmath.mpf]:
        """The three real images of x (a root of F(x, 1))."""
        return real_roots(self.form, self.precision)

    @cached_property
    def certified(self) -> bool:
        """Unconditional certificate for the class group and fundamental units."""
        ok = int(pari().bnfcertify(self.bnf)) == 1
        if not ok:
            self.status.add("class-group-unverified")
        return ok

    @cached_property
    def units(self) -> list[list[Fraction]]:
        """Two fundamental units as coefficient vectors in 1, y, y^2."""
        fu = pari()("(b) -> b.fu")(self.bnf)
        return [pari_to_coeffs(u, 3) for u in fu]

    @cached_property
    def regulator(self) -> mpmath.mpf:
        with mpmath.workprec(self.precision):
            M = log_embedding_matrix(self.units, self.y_embeddings)
            return abs(M[0][0] * M[1][1] - M[0][1] * M[1][0])

    @cached_property
    def y_embeddings(self) -> list[mpmath.mpf]:
        a = self.form[0]
        return [a * x for x in self.embeddings]

    @cached_property
    def h(self) -> int:
        return int(pari()("(b) -> b.no")(self.bnf))

    @cached_property
    def cyc(self) -> list[int]:
        return [int(c) for c in pari()("(b) -> b.cyc")(self.bnf)]

    @property
    def cl3(self) -> list[int]:
        return [3 ** _v3(c) for c in self.cyc if c % 3 == 0]

    def ramified_primes(self, f: Conductor) -> list:
        """For each prime q | f the prime ideal with q O_L = lambda^3."""
        out = []
        for q in f.primes:
            decs = [pr for pr in pari().idealprimedec(self.nf, q) if int(pr[2]) == 3]
            if len(decs) != 1:
                raise CertificationError(f"{q} is not totally ramified in {self.form}")
            out.append(decs[0])
        return out


def _v3(n: int) -> int:
    k = 0
    while n % 3 == 0:
        n //= 3
        k += 1
    return k


def maximal_order(form, d_L: int | None = None, precision: int = DEFAULT_PRECISION) -> CubicField:
    disc = basis_discriminant(form)
    if d_L is not None and d_L != disc:
        raise ValueError(f"form {form} has discriminant {disc}, not {d_L}")
    return CubicField(tuple(form), disc, precision)


def pari_to_coeffs(x, n: int) -> list[Fraction]:
    """Coefficients (constant first) of a PARI polmod or polynomial, padded to length n."""
    P = pari()
    pol = P.lift(x)
    out = [Fraction(0)] * n
    if pol.type() != "t_POL":
        out[0] = Fraction(str(pol))
        return out
    for k in range(int(P.poldegree(pol)) + 1):
        out[k] = Fraction(str(P.polcoef(pol, k)))
    return out


def _evaluate(coeffs, x):
    r = 0
    for c in reversed(coeffs):
        r = r * x + c
    return r


def log_embedding_matrix(units, embeddings):
    return [[mpmath.log(abs(_evaluate([mpmath.mpf(c.numerator) / c.denominator for c in u], r)))
             for r in embeddings[:2]] for u in units]


# --- saturation certificates ------------------------------------------------

def _roots_mod(poly: list[int], ell: int) -> list[int]:
    return [r for r in range(ell) if _evaluate(poly, r) % ell == 0]


def _char_value(coeffs: list[Fraction], r: int, ell: int, p: int, zeta: int) -> int | None:
    num = den = 0
    # common denominator evaluation
    D = math.lcm(*(c.denominator for c in coeffs))
    if D % ell == 0:
        return None
    num = _evaluate([int(c * D) for c in coeffs], r) % ell
    if num == 0:
        return None
    den = pow(D, -1, ell)
    z = pow(num * den % ell, (ell - 1) // p, ell)
    k, acc = 0, 1
    while acc != z:
        acc = acc * zeta % ell
        k += 1
        if k > p:
            raise AssertionError("character value outside mu_p")
    return k


def saturation_certificate(poly: list[int], gens: list[list[Fraction]], p: int,
                           max_primes: int = 400) -> bool:
    """True if no product of gens with exponents not all divisible by p is a p-th power.

    poly is the monic defining polynomial (constant first); gens are given as
    coefficient vectors in its root.  Uses p-th power residue symbols at
    degree-one primes; a False answer means the search bound was exhausted.
    """
    k = len(gens)
    if k == 0:
        return True
    n = len(poly) - 1
    pdisc = None
    rows: list[list[int]] = []
    used = 0
    for ell in primes_upto(200000):
        if ell % p != 1 or ell <= n:
            continue
        used += 1
        if used > max_primes:
            return False
        roots = _roots_mod(poly, ell) if ell < 20000 else []
        if not roots:
            continue
        if pdisc is None:
            pdisc = _poly_disc(poly)
        if pdisc % ell == 0:
            continue
        g = next(g for g in range(2, ell) if pow(g, (ell - 1) // p, ell) != 1 and _is_generator_p(g, ell, p))
        zeta = pow(g, (ell - 1) // p, ell)
        for r in roots:
            vals = [_char_value(u, r, ell, p, zeta) for u in gens]
            if any(v is None for v in vals):
                continue
            rows.append(vals)
        if linalg3.rank([list(col) for col in zip(*rows)], p) == k:
            return True
    return False


def _is_generator_p(g: int, ell: int, p: int) -> bool:
    # g^((ell-1)/p) is a primitive p-th root of unity
    return pow(g, (ell - 1) // p, ell) != 1


def _poly_disc(poly: list[int]) -> int:
    P = pari()
    x = P("x")
    pol = sum(P(c) * x**k for k, c in enumerate(poly))
    return int(P.poldisc(pol))


def int_poly(nf) -> list[int]:
    P = pari()
    pol = P("(n) -> n.pol")(nf)
    return [int(P.polcoef(pol, k)) for k in range(int(P.poldegree(pol)) + 1)]


def unit_status(L: CubicField) -> bool:
    """Certify the unit system: independence, full rank and saturation at 2, 3, 5."""
    ok = L.certified
    with mpmath.workprec(L.precision):
        if L.regulator < mpmath.mpf(2) ** (-L.precision // 2):
            ok = False
    poly = int_poly(L.nf)
    minus_one = [Fraction(-1), Fraction(0), Fraction(0)]
    for p in (2, 3, 5):
        gens = L.units + ([minus_one] if p == 2 else [])
        if not saturation_certificate(poly, gens, p):
            ok = False
    if not ok:
        L.status.add("units-unverified")
    return ok


# --- principality ------------------------------------------------------------

def class_vector(bnf, ideal) -> list[int]:
    return [int(x) for x in pari().bnfisprincipal(bnf, ideal, 0)]


def three_torsion_coords(cyc: list[int], vec: list[int]) -> list[int]:
    """F_3 coordinates of a class killed by 3."""
    out = []
    for c, x in zip(cyc, vec):
        if c % 3:
            if x % c:
                raise CertificationError("class is not 3-torsion")
            continue
        step = c // 3
        if x % step:
            raise CertificationError("class is not 3-torsion")
        out.append((x // step) % 3)
    return out


def verify_generator(nf, bnf, ideal) -> bool:
    """Exact check that a PARI generator of ideal generates it."""
    P = pari()
    res = P.bnfisprincipal(bnf, ideal, 1)
    if any(int(x) for x in res[0]):
        return False
    gen = res[1]
    return bool(P.idealhnf(nf, gen) == P.idealhnf(nf, ideal))


def ideal_product(nf, ideals, exps):
    P = pari()
    acc = P.idealhnf(nf, 1)
    for I, e in zip(ideals, exps):
        if e % 3:
            acc = P.idealmul(nf, acc, P.idealpow(nf, I, e % 3))
    return acc


@dataclass
class AbsoluteDpf:
    A: int
    principal_combinations: list[list[int]]
    t: int


def absolute_dpf(L: CubicField, f: Conductor) -> AbsoluteDpf:
    lams = L.ramified_primes(f)
    t = len(lams)
    if t == 0:
        return AbsoluteDpf(0, [], 0)
    rows = [three_torsion_coords(L.cyc, class_vector(L.bnf, lam)) for lam in lams]
    if not rows[0]:
        ker = [[1 if i == j else 0 for j in range(t)] for i in range(t)]
    else:
        ker = linalg3.kernel(rows)
    for v in ker:
        if not verify_generator(L.nf, L.bnf, ideal_product(L.nf, lams, v)):
            raise CertificationError(f"generator check failed for {L.form}")
    return AbsoluteDpf(len(ker), ker, t)


# --- analytic sanity band ------------------------------------------------------

def _root_count(form, p: int) -> int:
    a, b, c, d = form
    k = sum(1 for r in range(p) if (((a * r + b) * r + c) * r + d) % p == 0)
    return k + (a % p == 0)


def _x_pow_mod(form, p: int) -> list[int]:
    """x^p mod (F(x,1), p) as coefficients (const, x, x^2); assumes p does not divide a."""
    a, b, c, d = form
    ia = pow(a, -1, p)
    m = [d * ia % p, c * ia % p, b * ia % p]  # x^3 = -(m0 + m1 x + m2 x^2)

    def mul(u, v):
        w = [0] * 5
        for i in range(3):
            for j in range(3):
                w[i + j] += u[i] * v[j]
        for k in (4, 3):
            t = w[k] % p
            if t:
                w[k] = 0
                for i in range(3):
                    w[k - 3 + i] -= t * m[i]
        return [x % p for x in w[:3]]

    r, base, e = [1, 0, 0], [0, 1, 0], p
    while e:
        if e & 1:
            r = mul(r, base)
        base = mul(base, base)
        e >>= 1
    return r


def _split_type(form, p: int) -> tuple[int, ...]:
    """Residue degrees of the primes above an unramified p."""
    a = form[0]
    if a % p == 0:
        # move the root at infinity away: F(x, y + k x) has leading coefficient F(1, k)
        for k in range(1, p):
            G = _shear(form, k)
            if G[0] % p:
                return _split_type(G, p)
        return (1, 1, 1)
    if p < 50:
        k = _root_count(form, p)
    else:
        xp = _x_pow_mod(form, p)
        xp[1] = (xp[1] - 1) % p
        k = 3 - _poly_gcd_degree_drop(form, xp, p)
    return {3: (1, 1, 1), 1: (1, 2), 0: (3,)}[k]


def _shear(form, k):
    # F(x, y + k x)
    a, b, c, d = form
    return (a + b * k + c * k * k + d * k**3, b + 2 * c * k + 3 * d * k * k, c + 3 * d * k, d)


def _poly_gcd_degree_drop(form, g: list[int], p: int) -> int:
    """3 - deg gcd(F(x,1), g) over F_p, i.e. number of roots lost."""
    a, b, c, d = form
    u = [d % p, c % p, b % p, a % p]
    v = list(g)

    def trim(z):
        while z and z[-1] == 0:
            z.pop()
        return z

    u, v = trim(u), trim(v)
    while v:
        inv = pow(v[-1], -1, p)
        while len(u) >= len(v):
            t = u[-1] * inv % p
            s = len(u) - len(v)
            for i in range(len(v)):
                u[s + i] = (u[s + i] - t * v[i]) % p
            u = trim(u)
            if not u:
                break
        u, v = v, u
    return 3 - (len(u) - 1)


def analytic_hr(L: CubicField, bound: int = 200000) -> float:
    """h_L * R_L from the truncated Euler product of zeta_L / zeta."""
    logsum = 0.0
    for p in primes_upto(bound):
        if L.d_L % p == 0:
            # p = P^3 contributes nothing to zeta_L/zeta, p = P^2 Q contributes 1/(1 - 1/p)
            if not _is_fully_ramified(L.form, p):
                logsum -= math.log(1 - 1 / p)
            continue
        fs = _split_type(L.form, p)
        local = sum(math.log(1 - p ** (-fi)) for fi in fs) - math.log(1 - 1 / p)
        logsum -= local
    # residue = 2^3 h R / (2 sqrt d)
    return math.exp(logsum) * math.sqrt(L.d_L) / 4


def _is_fully_ramified(form, p: int) -> bool:
    # F is a unit times a cube of a linear form mod p
    P = pari()
    a, b, c, d = form
    fa = P.factormod(P(f"{a}*x^3+{b}*x^2+{c}*x+{d}") if a % p else P(f"{d}*x^3+{c}*x^2+{b}*x+{a}"), p)
    exps = [int(e) for e in fa[1]]
    return exps == [3]


def analytic_check(L: CubicField, tol: float = 0.01, bound: int = 200000) -> tuple[bool, float]:
    est = analytic_hr(L, bound)
    with mpmath.workprec(L.precision):
        hr = float(L.h * L.regulator)
    rel = abs(est - hr) / hr
    return rel <= tol, rel

