"""Range reports: enumerate, group, classify, tabulate and compare with reference data."""
from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from importlib import resources

from .admissibility import (CyclicMarker, MalformedDiscriminant, conductor, split_cubic_discriminant,
                            three_condition)
from .arith import factor, is_fundamental_discriminant
from .cubicenum import enumerate_fields, fields_with_discriminant
from .cubicinv import maximal_order
from .quadfield import quadratic_field
from .ringspace import multiplicity, predicted_counts
from .sextic import TYPES, ClassificationError, classify

JSON_SAFE = 2**53
# below this width, formal discriminants are found by splitting each d_L
NARROW_RANGE = 5000
RAMIFIED_SINGLET_TYPES = {"alpha3", "beta2", "gamma", "delta2", "epsilon"}
_KEYS = ("dl", "d", "f", "form", "galois", "m_index", "multiplicity", "type", "status",
         "U", "A", "R", "C", "E")


@dataclass(frozen=True)
class FieldRecord:
    dl: int
    d: int | None
    f: int
    form: tuple[int, int, int, int] | None
    galois: str          # s3, cyclic or nilet
    m_index: int
    multiplicity: int
    type: str | None
    status: str
    U: int | None = None
    A: int | None = None
    R: int | None = None
    C: int | None = None
    E: int | None = None

    def to_json(self) -> str:
        obj = {}
        for k in _KEYS:
            v = getattr(self, k)
            if k == "form" and v is not None:
                v = [_safe(x) for x in v]
            obj[k] = _safe(v)
        return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "FieldRecord":
        obj = json.loads(line)
        obj = {k: _unsafe(v) for k, v in obj.items()}
        if obj["form"] is not None:
            obj["form"] = tuple(_unsafe(x) for x in obj["form"])
        return cls(**obj)


def _safe(v):
    if isinstance(v, int) and not isinstance(v, bool) and abs(v) > JSON_SAFE:
        return str(v)
    return v


def _unsafe(v):
    if isinstance(v, str) and v.lstrip("-").isdigit():
        return int(v)
    return v


# --- row keys ------------------------------------------------------------

def row_key(d: int, f: int) -> tuple[int, str, str]:
    c = conductor(f, d)
    return quadratic_field(d).rho3, c.shape(), three_condition(c.e, d)


def cyclic_shape(f: int) -> str:
    head = "9" if f % 9 == 0 else ""
    k = len([p for p in factor(f).primes if p != 3])
    body = "l" if k == 1 else "".join(f"l{i}" for i in range(1, k + 1))
    return head + body if k else head


@dataclass
class RangeReport:
    lo: int
    hi: int
    records: list[FieldRecord] = field(default_factory=list)
    alarms: list[str] = field(default_factory=list)

    # -- views --
    def fields(self) -> list[FieldRecord]:
        return [r for r in self.records if r.galois != "nilet"]

    def noncyclic(self) -> list[FieldRecord]:
        return [r for r in self.records if r.galois == "s3"]

    def cyclic(self) -> list[FieldRecord]:
        return [r for r in self.records if r.galois == "cyclic"]

    def multiplets(self) -> dict[int, list[FieldRecord]]:
        by: dict[int, list[FieldRecord]] = defaultdict(list)
        for r in self.noncyclic():
            by[r.dl].append(r)
        return dict(sorted(by.items()))

    def type_counts(self) -> Counter:
        return Counter(r.type for r in self.noncyclic() if r.type is not None)

    def undetermined(self) -> int:
        return sum(1 for r in self.noncyclic() if r.type is None)

    def histogram(self) -> dict[int, int]:
        """Number of non-Galois multiplets of each multiplicity m >= 1."""
        return dict(sorted(Counter(len(v) for v in self.multiplets().values()).items()))

    def rows(self) -> dict[tuple[int, str, str], dict]:
        out: dict = {}

        def slot(key):
            if key not in out:
                out[key] = {"multiplicity": Counter(), "types": Counter(), "undetermined": 0, "total": 0}
            return out[key]

        for r in self.records:
            if r.galois == "nilet":
                slot(row_key(r.d, r.f))["multiplicity"][0] += 1
        for dl, members in self.multiplets().items():
            s = slot(row_key(members[0].d, members[0].f))
            s["multiplicity"][len(members)] += 1
            for r in members:
                s["total"] += 1
                if r.type is None:
                    s["undetermined"] += 1
                else:
                    s["types"][r.type] += 1
        return dict(sorted(out.items()))

    def cyclic_rows(self) -> dict[str, dict]:
        out: dict = {}
        by: dict[int, list[FieldRecord]] = defaultdict(list)
        for r in self.cyclic():
            by[r.dl].append(r)
        for dl, members in sorted(by.items()):
            shape = cyclic_shape(members[0].f)
            s = out.setdefault(shape, {"singlets": 0, "doublets": 0, "fields": 0,
                                       "min_f": members[0].f, "min_dl": dl})
            s["singlets" if len(members) == 1 else "doublets"] += 1
            s["fields"] += len(members)
        return out

    def multiplet_types(self, m: int) -> list[dict]:
        """Frequency and minimal discriminant of each type tuple among multiplets of size m."""
        acc: dict[tuple, dict] = {}
        for dl, members in self.multiplets().items():
            if len(members) != m or any(r.type is None for r in members):
                continue
            types = tuple(sorted((r.type for r in members), key=TYPES.index))
            rho = quadratic_field(members[0].d).rho3
            key = (rho, types)
            if key not in acc:
                acc[key] = {"rho": rho, "types": list(types), "frequency": 0,
                            "d": members[0].d, "f": members[0].f, "dl": dl,
                            "capitulation_number": sum(1 for r in members if r.C == 2)}
            acc[key]["frequency"] += 1
        return sorted(acc.values(), key=lambda x: (x["rho"], [TYPES.index(t) for t in x["types"]]))

    # -- serialisation --
    def to_jsonl(self) -> str:
        return "".join(r.to_json() + "\n" for r in self.records)

    @classmethod
    def from_jsonl(cls, text: str, lo: int, hi: int) -> "RangeReport":
        recs = [FieldRecord.from_json(line) for line in text.splitlines() if line.strip()]
        return cls(lo, hi, recs)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(_KEYS)
        for r in self.records:
            row = []
            for k in _KEYS:
                v = getattr(r, k)
                if k == "form" and v is not None:
                    v = " ".join(map(str, v))
                row.append("" if v is None else v)
            w.writerow(row)
        return buf.getvalue()

    def to_table(self) -> str:
        lines = [f"totally real cubic fields with {self.lo} <= d_L <= {self.hi}", ""]
        cols = ["m0", "m1", "m2", "m3", "m4", "m6", "m9"] + list(TYPES) + ["undet", "total"]
        lines.append(f"{'rho':>3} {'f':>6} {'condition':>9} " + " ".join(f"{c:>7}" for c in cols))
        for (rho, shape, cond), s in self.rows().items():
            vals = [s["multiplicity"].get(m, 0) for m in (0, 1, 2, 3, 4, 6, 9)]
            vals += [s["types"].get(t, 0) for t in TYPES] + [s["undetermined"], s["total"]]
            lines.append(f"{rho:>3} {shape:>6} {cond:>9} " + " ".join(f"{v:>7}" for v in vals))
        tc = self.type_counts()
        hist = self.histogram()
        vals = [0] + [hist.get(m, 0) for m in (1, 2, 3, 4, 6, 9)] + [tc.get(t, 0) for t in TYPES]
        vals += [self.undetermined(), len(self.noncyclic())]
        lines.append(f"{'':>3} {'':>6} {'summary':>9} " + " ".join(f"{v:>7}" for v in vals))
        lines.append("")
        lines.append(f"cyclic fields: {len(self.cyclic())}")
        for shape, s in self.cyclic_rows().items():
            lines.append(f"  {shape:>6}: singlets {s['singlets']}, doublets {s['doublets']}, "
                         f"fields {s['fields']}, minimum f={s['min_f']} d_L={s['min_dl']}")
        if self.alarms:
            lines.append("")
            lines += [f"ALARM: {a}" for a in self.alarms]
        return "\n".join(lines) + "\n"


# --- pipeline ------------------------------------------------------------

def _cyclic_conductors(lo: int, hi: int) -> list[int]:
    out = []
    for f in range(math.isqrt(lo - 1) + 1 if lo > 1 else 1, math.isqrt(hi) + 1):
        if f < 7:
            continue
        fac = factor(f).factors
        if all((p == 3 and k == 2) or (p % 3 == 1 and k == 1) for p, k in fac) and f * f >= lo:
            out.append(f)
    return out


def _cyclic_count(f: int) -> int:
    return 2 ** (len(factor(f).primes) - 1)


def predicted_multiplicities(lo: int, hi: int) -> dict[int, tuple[int, int, int]]:
    """d_L -> (d, f, m) for every formal discriminant lo <= d_L <= hi."""
    out = {}
    if hi - lo < NARROW_RANGE:
        for dl in range(lo, hi + 1):
            try:
                res = split_cubic_discriminant(dl)
            except MalformedDiscriminant:
                continue
            if isinstance(res, CyclicMarker):
                continue
            d, f = res
            out[dl] = (d, f.f, multiplicity(quadratic_field(d), f).m)
        return out
    for d in range(5, hi + 1):
        if not is_fundamental_discriminant(d):
            continue
        for dl_f, rec in predicted_counts(d, hi).items():
            dl = dl_f * dl_f * d
            if dl >= lo:
                out[dl] = (d, dl_f, rec.m)
    return out


def build_report(lo: int, hi: int, depth: str = "forced", predict_only: bool = False,
                 budget: float | None = None, with_nilets: bool = True) -> RangeReport:
    if not 0 < lo <= hi:
        raise ValueError("need 0 < min <= max")
    rep = RangeReport(lo, hi)
    predicted = predicted_multiplicities(lo, hi) if (with_nilets or predict_only) else {}
    recs: list[FieldRecord] = []
    for dl, (d, f, m) in sorted(predicted.items()):
        if m == 0:
            recs.append(FieldRecord(dl, d, f, None, "nilet", 0, 0, None, "nilet"))
        elif predict_only:
            recs += [FieldRecord(dl, d, f, None, "s3", k, m, None, "predicted") for k in range(1, m + 1)]
    if predict_only:
        for f in _cyclic_conductors(lo, hi):
            m = _cyclic_count(f)
            recs += [FieldRecord(f * f, None, f, None, "cyclic", k, m, "zeta", "predicted")
                     for k in range(1, m + 1)]
        rep.records = sorted(recs, key=_order)
        return rep
    found = fields_with_discriminant(lo) if lo == hi else [F for F in enumerate_fields(hi + 1) if F.d_L >= lo]
    by: dict[int, list] = defaultdict(list)
    for F in found:
        by[F.d_L].append(F)
    for dl, members in sorted(by.items()):
        m = len(members)
        for k, F in enumerate(members, 1):
            if F.galois == "cyclic":
                recs.append(FieldRecord(dl, None, F.f, F.form, "cyclic", k, m, "zeta", "verified"))
                continue
            L = maximal_order(F.form, dl)
            try:
                c = classify(L, quadratic_field(F.d), F.f, depth=depth, budget=budget)
            except ClassificationError as exc:
                rep.alarms.append(str(exc))
                recs.append(FieldRecord(dl, F.d, F.f, F.form, "s3", k, m, None, "undetermined"))
                continue
            recs.append(FieldRecord(dl, F.d, F.f, F.form, "s3", k, m, c.type, c.status,
                                    c.U, c.A, c.R, c.C, c.E))
        if members[0].galois == "s3" and predicted:
            exp = predicted.get(dl)
            if exp is None or exp[2] != m:
                rep.alarms.append(f"d_L={dl}: {m} fields enumerated, ring spaces predict "
                                  f"{exp[2] if exp else 0}")
    if predicted:
        for dl, (d, f, m) in predicted.items():
            if m and dl not in by:
                rep.alarms.append(f"d_L={dl}: ring spaces predict {m} fields, none enumerated")
    rep.records = sorted(recs, key=_order)
    rep.alarms += consistency_alarms(rep)
    return rep


def _order(r: FieldRecord):
    return (r.dl, r.galois, r.m_index, r.form or ())


def consistency_alarms(rep: RangeReport) -> list[str]:
    out = []
    for dl, members in rep.multiplets().items():
        if len(members) != 1 or members[0].type is None:
            continue
        t = members[0].type
        if members[0].f == 1 and t != "delta1":
            out.append(f"d_L={dl}: unramified singlet of type {t}")
        if members[0].f > 1 and t not in RAMIFIED_SINGLET_TYPES:
            out.append(f"d_L={dl}: ramified singlet of type {t}")
    hist = rep.histogram()
    if sum(m * k for m, k in hist.items()) != len(rep.noncyclic()):
        out.append("weighted multiplicity sum differs from the number of fields")
    tc = rep.type_counts()
    if sum(tc.values()) + rep.undetermined() != len(rep.noncyclic()):
        out.append("type columns do not add up to the number of fields")
    return out


# --- reference data ------------------------------------------------------

def expected_dataset() -> dict:
    with resources.files("realcubic").joinpath("data/expected.json").open(encoding="utf-8") as fh:
        return json.load(fh)


def verify_tables(rep: RangeReport, data: dict | None = None) -> list[str]:
    """Cell-by-cell differences against the reference data for the range (empty when all agree)."""
    data = data or expected_dataset()
    # reference ranges are 0 < d_L < B; B itself is never a cubic field discriminant there
    bound = rep.hi if str(rep.hi) in data["ranges"] else rep.hi + 1
    ref = data["ranges"].get(str(bound))
    if ref is None or rep.lo != 1:
        return [f"no reference data for the range {rep.lo}..{rep.hi}"]
    cite = ref["cite"]
    diffs: list[str] = []

    def cmp(label, got, want):
        if got != want:
            diffs.append(f"[{cite}] {label}: computed {got}, expected {want}")

    classified = any(r.status not in ("predicted", "nilet") for r in rep.noncyclic())
    if "fields" in ref:
        cmp("fields", len(rep.fields()), ref["fields"])
        cmp("cyclic", len(rep.cyclic()), ref["cyclic"])
        tc = rep.type_counts()
        cmp("types", {t: tc[t] for t in tc}, ref["types"])
        cmp("undetermined", rep.undetermined(), 0)
        if ref.get("all_singlets"):
            cmp("multiplicities", set(rep.histogram()), {1})
        cmp("cyclic conductors", sorted(r.f for r in rep.cyclic()), ref["cyclic_conductors"])
        for t, key in (("delta1", "delta1_discriminants"), ("gamma", "gamma_discriminants"),
                       ("epsilon", "epsilon_discriminants")):
            cmp(f"{t} discriminants", sorted(r.dl for r in rep.noncyclic() if r.type == t), ref[key])
    if "summary" in ref:
        s = ref["summary"]
        if "multiplicity" in s:
            cmp("summary multiplicities", {str(k): v for k, v in rep.histogram().items()}, s["multiplicity"])
        cmp("non-Galois fields", len(rep.noncyclic()), s["noncyclic"])
        cmp("cyclic fields", len(rep.cyclic()), s["cyclic"])
        if classified and "types" in s:
            tc = rep.type_counts()
            cmp("summary types", {t: tc[t] for t in tc}, s["types"])
            cmp("undetermined", rep.undetermined(), 0)
    if "rows" in ref:
        rows = rep.rows()
        for want in ref["rows"]:
            key = (want["rho"], want["shape"], want["condition"])
            got = rows.get(key, {"multiplicity": Counter(), "types": Counter(), "undetermined": 0})
            label = f"row rho={key[0]} f={key[1]} {key[2]}".rstrip()
            mult = {str(k): v for k, v in sorted(got["multiplicity"].items())}
            if set(want["multiplicity"]) <= {"0"}:
                mult = {k: v for k, v in mult.items() if k == "0"}
            cmp(label + " multiplicities", mult, want["multiplicity"])
            if classified and "types" in want:
                cmp(label + " types", {t: got["types"][t] for t in got["types"]}, want["types"])
                cmp(label + " undetermined", got["undetermined"], 0)
        if "types" in ref["rows"][0]:
            extra = set(rows) - {(w["rho"], w["shape"], w["condition"]) for w in ref["rows"]}
            cmp("rows", sorted(extra), [])
    if "cyclic_rows" in ref:
        got = rep.cyclic_rows()
        for want in ref["cyclic_rows"]:
            g = got.get(want["shape"], {})
            cmp(f"cyclic row {want['shape']}", {k: g.get(k) for k in want if k != "shape"},
                {k: v for k, v in want.items() if k != "shape"})
    if classified:
        for name, m in (("doublets", 2), ("triplets", 3), ("quartets", 4)):
            if name not in ref:
                continue
            got = rep.multiplet_types(m)
            keys = [k for k in ref[name][0]]
            cmp(name, [{k: g[k] for k in keys} for g in got], ref[name])
        col = data["tendencies"]["columns"].get(str(bound))
        if col is not None:
            tc = rep.type_counts()
            total = len(rep.fields())
            for t, (n, pct) in col.items():
                got = len(rep.cyclic()) if t == "zeta" else tc[t]
                cmp(f"tendency {t} count", got, n)
                # published percentages are rounded, and not always consistently
                share = 100 * got / total if total else 0.0
                if abs(share - pct) > 1:
                    diffs.append(f"[{cite}] tendency {t} share: computed {share:.1f}%, expected {pct}%")
    return diffs


def frequencies(rep: RangeReport) -> dict:
    """Shares of multiplicities per conductor shape and of DPF types among all fields."""
    shapes: dict[tuple[str, str], Counter] = defaultdict(Counter)
    for (rho, shape, cond), s in rep.rows().items():
        shapes[(shape, cond)].update(s["multiplicity"])
    by_shape = {}
    for key, cnt in sorted(shapes.items()):
        n = sum(cnt.values())
        by_shape[key] = {m: (k, k / n) for m, k in sorted(cnt.items())}
    total = len(rep.fields())
    tc = rep.type_counts()
    types = {t: (tc[t], tc[t] / total) for t in TYPES} if total else {}
    if total:
        types["zeta"] = (len(rep.cyclic()), len(rep.cyclic()) / total)
    return {"shapes": by_shape, "types": types}


def format_frequencies(freq: dict) -> str:
    lines = []
    for (shape, cond), cells in freq["shapes"].items():
        lines.append(f"{shape:>6} {cond:>9}  " + "  ".join(f"m={m}: {k} ({100 * p:.1f}%)"
                                                         for m, (k, p) in cells.items()))
    for t, (k, p) in freq["types"].items():
        lines.append(f"{t:>8}: {k:>7} {100 * p:5.1f}%")
    return "\n".join(lines) + ("\n" if lines else "")


def report_dict(rep: RangeReport) -> dict:
    return {"lo": rep.lo, "hi": rep.hi, "records": [asdict(r) for r in rep.records], "alarms": rep.alarms}
