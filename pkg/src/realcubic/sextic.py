"""The dihedral sextic N = L K and the differential principal factorization type.

With sigma generating Gal(N/K) the invariants are

    E: (U_N : U_0) = 3^E, U_0 generated by U_K and the units of L, L', L''
    U: (U_K : N_{N/K}(U_N)) = 3^U
    C: dimension of the kernel of Cl_3(K) -> Cl_3(N)
    A: principal products of the totally ramified primes of L
    R: principal ideals built from the split ramified primes of N, modulo
       those coming from K and from L

and U + 1 = A + R + C.  Class groups and unit systems of N come from PARI.
Unit results only depend on the 3-part of the index of PARI's unit group,
which is certified by cubic residue characters.  Positive principality
answers are certified by exact generators.  Negative answers rely on the
class group of N and become unconditional when the fundamental equation
closes with certified lower bounds, which it does in every case we
have run.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product

from cysignals.alarm import AlarmInterrupt, alarm, cancel_alarm

from . import linalg3
from .admissibility import Conductor, conductor
from .cubicinv import (CertificationError, CubicField, absolute_dpf, int_poly, maximal_order, pari,
                       pari_to_coeffs, saturation_certificate, three_torsion_coords, verify_generator)
from .quadfield import QuadraticField, class_group_generators, quadratic_field

DEFAULT_BUDGET = float(os.environ.get("REALCUBIC_BUDGET", "600"))

# (U, A, R, C) -> type
TYPE_TABLE = {
    (1, 0, 0, 2): "alpha1",
    (1, 0, 1, 1): "alpha2",
    (1, 0, 2, 0): "alpha3",
    (1, 1, 0, 1): "beta1",
    (1, 1, 1, 0): "beta2",
    (1, 2, 0, 0): "gamma",
    (0, 0, 0, 1): "delta1",
    (0, 0, 1, 0): "delta2",
    (0, 1, 0, 0): "epsilon",
}
TYPES = tuple(TYPE_TABLE.values())
SYMBOLS = {"alpha1": "α₁", "alpha2": "α₂", "alpha3": "α₃", "beta1": "β₁", "beta2": "β₂",
           "gamma": "γ", "delta1": "δ₁", "delta2": "δ₂", "epsilon": "ε"}
MOSER_E = {"alpha1": 0, "alpha2": 0, "alpha3": 0, "beta1": 1, "beta2": 1,
           "delta1": 1, "delta2": 1, "gamma": 2, "epsilon": 2}


class ClassificationError(RuntimeError):
    """Computed invariants match no type or violate a proven relation."""


def _v3(n: int) -> int:
    n = abs(n)
    k = 0
    while n and n % 3 == 0:
        n //= 3
        k += 1
    return k


@dataclass
class SexticClosure:
    L: CubicField
    K: QuadraticField
    f: Conductor
    nf: object
    y: object        # image of the generator of L
    sqrt_d: object
    sigma: object    # polynomial giving sigma(x)

    @cached_property
    def bnf(self):
        return pari().bnfinit(self.nf, 1)

    @cached_property
    def cyc(self) -> list[int]:
        return [int(c) for c in pari()("(b) -> b.cyc")(self.bnf)]

    @cached_property
    def h(self) -> int:
        return int(pari()("(b) -> b.no")(self.bnf))

    @property
    def disc(self) -> int:
        return int(pari()("(n) -> n.disc")(self.nf))

    def apply_sigma(self, z, k: int = 1):
        P = pari()
        for _ in range(k % 3):
            z = P.nfgaloisapply(self.nf, self.sigma, z)
        return z

    def from_L(self, coeffs):
        """Image in N of an element of L given in powers of y."""
        P = pari()
        acc = self.nf_pol_mod(P(0))
        for k, c in enumerate(coeffs):
            acc += P(str(c)) * self.y**k
        return acc

    def nf_pol_mod(self, z):
        P = pari()
        return P.Mod(z, P("(n) -> n.pol")(self.nf))

    def from_K(self, alpha):
        """Image of (u + v sqrt d)/2."""
        u, v = alpha
        return self.nf_pol_mod((u + v * self.sqrt_d) / 2)

    @cached_property
    def fundamental_units(self):
        return list(pari()("(b) -> b.fu")(self.bnf))

    @cached_property
    def units_saturated(self) -> bool:
        """PARI's units of N have index prime to 3 in U_N."""
        P = pari()
        gens = [pari_to_coeffs(u, 6) for u in self.fundamental_units]
        poly = int_poly(self.nf)
        if len(gens) != 5:
            return False
        for u in self.fundamental_units:
            if abs(int(P.norm(u))) != 1:
                return False
        return saturation_certificate(poly, gens, 3)


def build_closure(L: CubicField, K: QuadraticField, f: Conductor | int) -> SexticClosure:
    P = pari()
    if isinstance(f, int):
        f = conductor(f, K.d)
    absolute, ymod, k = P.rnfequation(L.nf, P(f"x^2 - ({K.d})"), 1)
    red, tr = P.polredbest(absolute, 1)
    nf = P.nfinit(red)
    d_N = int(P("(n) -> n.disc")(nf))
    if d_N != f.f**4 * K.d**3:
        raise CertificationError(f"d_N = {d_N} differs from f^4 d^3 for {L.form}")
    y = P.Mod(P.subst(P.lift(ymod), "x", P.lift(tr)), red)
    sqrt_d = tr - int(k) * y
    if sqrt_d**2 != K.d:
        raise CertificationError("image of sqrt d is wrong")
    g = P(L.polynomial)
    if P.subst(g, "y", y) != 0:
        raise CertificationError("image of y is not a root")
    sigma = None
    for aut in P.nfgaloisconj(nf):
        if aut == P("x"):
            continue
        img = P.subst(P.lift(sqrt_d), "x", aut)
        if P.Mod(img, red) == sqrt_d:
            sigma = aut
            break
    if sigma is None:
        raise CertificationError("no automorphism of order 3")
    N = SexticClosure(L, K, f, nf, y, sqrt_d, sigma)
    z = N.y
    if N.apply_sigma(z, 3) != z or N.apply_sigma(z) == z:
        raise CertificationError("sigma does not have order 3")
    return N


def _unit_vector(N: SexticClosure, u) -> list[int]:
    P = pari()
    v = P.bnfisunit(N.bnf, u)
    if len(v) == 0:
        raise CertificationError("element is not a unit")
    vec = [int(x) for x in v[:-1]]
    # exact reconstruction, up to the torsion part
    back = P.nffactorback(N.nf, N.fundamental_units, vec) if vec else P(1)
    q = P.nfeltdiv(N.nf, u, back)
    if P.nfbasistoalg(N.nf, q) ** 2 != 1:
        raise CertificationError("unit exponents do not reproduce the unit")
    return vec


def _index(rows: list[list[int]]) -> int:
    """Index of the lattice spanned by rows in Z^5 (0 if not full rank)."""
    P = pari()
    M = P.matrix(len(rows), 5, [x for r in rows for x in r])
    H = P.mathnf(P.mattranspose(M))
    if int(P.matsize(H)[1]) < 5:
        return 0
    return abs(int(P.matdet(H)))


def subfield_units(N: SexticClosure) -> list:
    out = [N.from_K(N.K.eta)]
    for u in N.L.units:
        z = N.from_L(u)
        out += [z, N.apply_sigma(z), N.apply_sigma(z, 2)]
    return out


def saturation_index(N: SexticClosure) -> int:
    """E with (U_N : U_0) = 3^E."""
    if not N.units_saturated:
        raise CertificationError("3-saturation of the units of N failed")
    rows = [_unit_vector(N, u) for u in subfield_units(N)]
    idx = _index(rows)
    if idx == 0:
        raise CertificationError("subfield units do not have rank 5")
    E = _v3(idx)
    if idx != 3**E or E > 2:
        raise ClassificationError(f"unit index {idx} is not 1, 3 or 9")
    return E


def norm_index(N: SexticClosure) -> int:
    """U with (U_K : N_{N/K}(U_N)) = 3^U."""
    P = pari()
    if not N.units_saturated:
        raise CertificationError("3-saturation of the units of N failed")
    eta = _unit_vector(N, N.from_K(N.K.eta))
    piv = next(i for i, x in enumerate(eta) if x)
    g = 0
    for u in N.fundamental_units:
        z = P.Mod(P.lift(u), P("(n) -> n.pol")(N.nf))
        nz = z * N.apply_sigma(z) * N.apply_sigma(z, 2)
        v = _unit_vector(N, nz)
        k, r = divmod(v[piv], eta[piv])
        if r or [k * x for x in eta] != v:
            raise CertificationError("norm of a unit is not a power of eta")
        g = math.gcd(g, k)
    U = _v3(g)
    if U > 1:
        raise ClassificationError(f"norm index exponent {U} > 1")
    return U


def _extend_form(N: SexticClosure, form):
    P = pari()
    a, b, _ = form
    return P.idealhnf(N.nf, P(a), N.nf_pol_mod((-b + N.sqrt_d) / 2))


def capitulation_dim(N: SexticClosure) -> tuple[int, list[list[int]]]:
    """C and a basis of the capitulating exponent vectors on the 3-torsion basis of Cl(K)."""
    tors = N.K.torsion3
    if not tors:
        return 0, []
    ideals = [_extend_form(N, F) for F in tors]
    rows = [three_torsion_coords(N.cyc, _class_vector(N, I)) for I in ideals]
    if rows and rows[0]:
        ker = linalg3.kernel(rows)
    else:
        ker = [[1 if i == j else 0 for j in range(len(rows))] for i in range(len(rows))]
    for v in ker:
        if not verify_generator(N.nf, N.bnf, _product(N, ideals, v)):
            raise CertificationError("capitulation generator check failed")
    return len(ker), ker


def _class_vector(N: SexticClosure, I) -> list[int]:
    return [int(x) for x in pari().bnfisprincipal(N.bnf, I, 0)]


def _product(N: SexticClosure, ideals, exps):
    P = pari()
    acc = P.idealhnf(N.nf, 1)
    for I, e in zip(ideals, exps):
        e %= 3
        if e:
            acc = P.idealmul(N.nf, acc, P.idealpow(N.nf, I, e))
    return acc


class _Quotient:
    """Cl(N) / j(Cl(K)) with F_3 coordinates on its 3-torsion."""

    def __init__(self, N: SexticClosure):
        P = pari()
        self.N = N
        cyc = N.cyc
        self.r = len(cyc)
        gens = [_class_vector(N, _extend_form(N, F)) for F in class_group_generators(N.K.d)]
        cols = [[c if i == j else 0 for i in range(self.r)] for j, c in enumerate(cyc)] + gens
        if self.r == 0:
            self.U, self.D = None, []
            return
        M = P.matrix(self.r, len(cols), [cols[j][i] for i in range(self.r) for j in range(len(cols))])
        H = P.mathnf(M)
        U, _, D = P.matsnf(H, 1)
        self.U = U
        self.D = [int(D[i, i]) for i in range(self.r)]

    def coords(self, I) -> list[int]:
        if self.r == 0:
            return []
        P = pari()
        v = P.mattranspose(P.Vec(_class_vector(self.N, I)))
        w = self.U * v
        out = []
        for i, dd in enumerate(self.D):
            x = int(w[i])
            if dd == 1:
                continue
            if dd % 3 or x % (dd // 3):
                if x % dd:
                    raise CertificationError("class is not 3-torsion in the quotient")
                continue
            out.append((x // (dd // 3)) % 3)
        return out

    def subgroup_member(self, I) -> bool:
        """Exact check: I times a product of extended K-ideals is principal."""
        P = pari()
        forms = class_group_generators(self.N.K.d)
        vec = _class_vector(self.N, I)
        gens = [_class_vector(self.N, _extend_form(self.N, F)) for F in forms]
        cyc = self.N.cyc
        if not cyc:
            return verify_generator(self.N.nf, self.N.bnf, I)
        M = P.matrix(len(cyc), len(gens), [gens[j][i] for i in range(len(cyc)) for j in range(len(gens))]) \
            if gens else None
        Y = P.mattranspose(P.Vec([-x for x in vec]))
        if M is None:
            return verify_generator(self.N.nf, self.N.bnf, I)
        X = P.matsolvemod(M, P.mattranspose(P.Vec(cyc)), Y)
        if X.type() == "t_INT":  # no solution
            return False
        J = I
        for F, e in zip(forms, X):
            e = int(e)
            if e:
                JF = _extend_form(self.N, F)
                J = P.idealmul(self.N.nf, J, P.idealpow(self.N.nf, JF, e))
        return verify_generator(self.N.nf, self.N.bnf, J)


def _split_pairs(N: SexticClosure) -> tuple[list, list]:
    """Extended ramified primes of L and the quotients P/P' for split primes."""
    P = pari()
    lams = N.L.ramified_primes(N.f)
    ext, ratios = [], []
    split = set(N.f.split_primes)
    for q, lam in zip(N.f.primes, lams):
        gen = P.nfbasistoalg(N.L.nf, lam[1])
        J = P.idealhnf(N.nf, P(q), N.from_L(pari_to_coeffs(gen, 3)))
        ext.append(J)
        if q in split:
            fa = P.idealfactor(N.nf, J)
            prs = list(fa[0])
            exps = [int(e) for e in fa[1]]
            if len(prs) != 2 or exps != [1, 1]:
                raise CertificationError(f"unexpected splitting of {q} in N")
            ratios.append(P.idealdiv(N.nf, prs[0], prs[1]))
    return ext, ratios


def relative_dim(N: SexticClosure) -> tuple[int, int]:
    """(R, A') where A' is the absolute dimension seen in Cl(N)/j(Cl(K))."""
    ext, ratios = _split_pairs(N)
    if not ext:
        return 0, 0
    Q = _Quotient(N)
    gens = ext + ratios
    rows = [Q.coords(I) for I in gens]
    t = len(ext)
    if rows and rows[0]:
        ker = linalg3.kernel(rows)
    else:
        ker = [[1 if i == j else 0 for j in range(len(gens))] for i in range(len(gens))]
    for v in ker:
        if not Q.subgroup_member(_product(N, gens, v)):
            raise CertificationError("relative principal factor check failed")
    image = len(ker)
    absolute = [v for v in _span(ker) if not any(v[t:])]
    a_dim = round(math.log(len(absolute), 3))
    return image - a_dim, a_dim


def _span(basis: list[list[int]]) -> list[list[int]]:
    if not basis:
        return [[]]
    n = len(basis[0])
    out = []
    for coeffs in product(range(3), repeat=len(basis)):
        out.append([sum(c * b[i] for c, b in zip(coeffs, basis)) % 3 for i in range(n)])
    return out


@dataclass
class DpfClassification:
    U: int | None
    A: int | None
    R: int | None
    C: int | None
    type: str | None
    status: str
    E: int | None = None
    h_N: int | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def a(self) -> int | None:
        return None if self.E is None else 3**self.E

    @property
    def b(self) -> int | None:
        return None if self.U is None else 3**self.U

    @property
    def symbol(self) -> str:
        return SYMBOLS.get(self.type, "?")


def type_of(U: int, A: int, R: int, C: int) -> str:
    try:
        return TYPE_TABLE[(U, A, R, C)]
    except KeyError:
        raise ClassificationError(f"(U, A, R, C) = {(U, A, R, C)} matches no type") from None


def forced_type(K: QuadraticField, f: Conductor) -> str | None:
    """Type implied by the conductor and 3-class rank alone."""
    if f.f == 1 and K.rho3 == 1:
        return "delta1"
    if f.num_primes == 1 and f.s == 0 and K.rho3 == 0:
        return "epsilon"
    return None


def check_invariants(c: DpfClassification, K: QuadraticField, f: Conductor) -> list[str]:
    """Violated relations (empty when consistent)."""
    bad = []
    U, A, R, C = c.U, c.A, c.R, c.C
    if None in (U, A, R, C):
        return bad
    if U + 1 != A + R + C:
        bad.append("fundamental equation")
    if not (0 <= A <= min(f.num_primes, 2) and 0 <= R <= min(f.s, 2) and 0 <= C <= min(K.rho3, 2)):
        bad.append("estimates")
    if f.f == 1 and C < 1:
        bad.append("hilbert94")
    if c.E is not None and MOSER_E[c.type] != c.E:
        bad.append("moser E")
    if (U == 1) != c.type.startswith(("alpha", "beta", "gamma")):
        bad.append("moser U")
    forced = forced_type(K, f)
    if forced is not None and forced != c.type:
        bad.append("forced type")
    return bad


def classify(L: CubicField, K: QuadraticField, f: Conductor | int, depth: str = "forced",
             budget: float | None = None) -> DpfClassification:
    """DPF type of L.  depth='forced' takes theorem shortcuts, 'full' computes everything."""
    if isinstance(f, int):
        f = conductor(f, K.d)
    budget = DEFAULT_BUDGET if budget is None else budget
    if depth not in ("forced", "full"):
        raise ValueError(depth)
    if depth == "forced":
        c = _shortcut(L, K, f)
        if c is not None:
            return c
    try:
        if budget:
            alarm(budget)
        try:
            c = _full(L, K, f)
        finally:
            cancel_alarm()
    except AlarmInterrupt:
        return DpfClassification(None, None, None, None, None, "undetermined", notes=["budget"])
    except CertificationError as exc:
        return DpfClassification(None, None, None, None, None, "undetermined", notes=[str(exc)])
    bad = check_invariants(c, K, f)
    if bad:
        raise ClassificationError(f"{L.form}: {', '.join(bad)}")
    return c


def _shortcut(L: CubicField, K: QuadraticField, f: Conductor) -> DpfClassification | None:
    forced = forced_type(K, f)
    if forced == "delta1":
        return DpfClassification(0, 0, 0, 1, forced, "forced-by-theorem")
    if forced == "epsilon":
        return DpfClassification(0, 1, 0, 0, forced, "forced-by-theorem")
    if K.rho3 == 0 and f.s == 0:
        # R = C = 0, hence U + 1 = A
        A = absolute_dpf(L, f).A
        if not L.certified:
            return None
        return DpfClassification(A - 1, A, 0, 0, type_of(A - 1, A, 0, 0), "forced-by-theorem")
    return None


def _full(L: CubicField, K: QuadraticField, f: Conductor) -> DpfClassification:
    if not L.certified:
        raise CertificationError("class group of L not certified")
    N = build_closure(L, K, f)
    A = absolute_dpf(L, f).A
    C, _ = capitulation_dim(N)
    R, A_seen = relative_dim(N)
    U = norm_index(N)
    E = saturation_index(N)
    notes = []
    if A_seen != A:
        raise ClassificationError(f"{L.form}: absolute dimension {A} in L but {A_seen} in N")
    if U + 1 != A + R + C:
        raise ClassificationError(f"{L.form}: U+1={U + 1} but A+R+C={A + R + C}")
    return DpfClassification(U, A, R, C, type_of(U, A, R, C), "verified", E=E, notes=notes)


def classify_form(form, d_L: int | None = None, depth: str = "forced", budget: float | None = None):
    from .admissibility import split_cubic_discriminant
    L = maximal_order(form, d_L)
    d, f = split_cubic_discriminant(L.d_L)
    return classify(L, quadratic_field(d), f, depth, budget)


def scholz_check(N: SexticClosure, E: int, h_N: int | None = None) -> bool:
    """h_N = (3^E / 9) h_L^2 h_K."""
    if h_N is None:
        h_N = N.h
    return 9 * h_N == 3**E * N.L.h**2 * N.K.h


def capitulation_number(members: list[DpfClassification]) -> int:
    return sum(1 for c in members if c.C == 2)
