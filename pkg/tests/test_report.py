import json
import subprocess
import sys

import pytest

from realcubic import cli
from realcubic.report import (
    FieldRecord, RangeReport, build_report, consistency_alarms, expected_dataset, format_frequencies,
    frequencies, verify_tables,
)


@pytest.fixture(scope="module")
def rep3000():
    return build_report(1, 3000)


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "realcubic", *args], capture_output=True, text=True)


def test_jsonl_round_trip(rep3000):
    text = rep3000.to_jsonl()
    back = RangeReport.from_jsonl(text, 1, 3000)
    assert back.records == rep3000.records
    assert back.to_jsonl() == text


def test_jsonl_large_integers_as_strings():
    big = 2**60 + 7
    r = FieldRecord(big, 229, 1, (1, -big, 3, 5), "s3", 1, 1, "delta1", "verified", 0, 0, 0, 1, 1)
    obj = json.loads(r.to_json())
    assert obj["dl"] == str(big) and obj["form"][1] == str(-big)
    assert list(obj) == ["dl", "d", "f", "form", "galois", "m_index", "multiplicity", "type", "status",
                         "U", "A", "R", "C", "E"]
    assert FieldRecord.from_json(r.to_json()) == r


def test_deterministic_output():
    a = build_report(1, 4000).to_jsonl()
    b = build_report(1, 4000).to_jsonl()
    assert a == b


def test_weighted_sum_identity(rep3000):
    hist = rep3000.histogram()
    assert sum(m * k for m, k in hist.items()) == len(rep3000.noncyclic())
    assert sum(rep3000.type_counts().values()) + rep3000.undetermined() == len(rep3000.noncyclic())
    for s in rep3000.rows().values():
        assert sum(m * k for m, k in s["multiplicity"].items()) == s["total"]
        assert sum(s["types"].values()) + s["undetermined"] == s["total"]
    assert consistency_alarms(rep3000) == []


def test_single_discriminant():
    rep = build_report(148, 148)
    assert len(rep.fields()) == 1
    (r,) = rep.fields()
    assert (r.dl, r.d, r.f, r.type) == (148, 37, 2, "epsilon")


def test_empty_range():
    rep = build_report(2, 3)
    assert rep.records == [] and rep.rows() == {} and rep.histogram() == {}
    assert "summary" in rep.to_table()


def test_nilets_recorded():
    rep = build_report(1, 100)
    nilets = [r for r in rep.records if r.galois == "nilet"]
    assert 20 in {r.dl for r in nilets}


def test_reference_comparison_1500():
    rep = build_report(1, 1500)
    assert verify_tables(rep) == []
    rep.records = [r for r in rep.records if r.dl != 756]
    diffs = verify_tables(rep)
    assert any("gamma" in d for d in diffs)


def test_frequencies(rep3000):
    freq = frequencies(rep3000)
    shares = freq["types"]
    assert abs(sum(p for _, p in shares.values()) - 1) < 1e-12
    assert "delta1" in format_frequencies(freq)


def test_expected_dataset_has_citations():
    data = expected_dataset()
    for key, rng in data["ranges"].items():
        assert "cite" in rng, key


def test_predict_only_counts():
    rep = build_report(1, 10**5, predict_only=True)
    assert len(rep.noncyclic()) == 4753
    assert len(rep.cyclic()) == 51
    assert all(r.status == "predicted" for r in rep.fields())


def test_csv(rep3000):
    lines = rep3000.to_csv().splitlines()
    assert lines[0].split(",")[:3] == ["dl", "d", "f"]
    assert len(lines) == 1 + len(rep3000.records)


def test_cli_usage_errors():
    for args in (["classify", "5", "2"], ["classify", "1"], ["classify", "1", "10", "--emit", "xml"],
                 ["classify", "0", "10"], ["frobnicate"], ["classify", "1", "10", "--budget", "-1"]):
        assert run_cli(*args).returncode == 64, args


def test_cli_success_and_jsonl():
    p = run_cli("classify", "148", "148", "--emit", "jsonl")
    assert p.returncode == 0
    recs = [json.loads(x) for x in p.stdout.splitlines()]
    assert len(recs) == 1 and recs[0]["type"] == "epsilon" and recs[0]["dl"] == 148


def test_cli_verify_1500():
    p = run_cli("classify", "1", "1500", "--verify", "--frequencies")
    assert p.returncode == 0
    assert "0 difference(s)" in p.stderr


def test_cli_alarm_exit_code(monkeypatch, capsys):
    def fake(*a, **k):
        return RangeReport(1, 10, alarms=["synthetic"])
    monkeypatch.setattr(cli, "build_report", fake)
    assert cli.main(["classify", "1", "10"]) == 2
    assert "synthetic" in capsys.readouterr().err


def test_cli_ceiling(monkeypatch):
    monkeypatch.setattr(cli, "MAX_BOUND", 1000)
    with pytest.raises(SystemExit) as exc:
        cli.main(["classify", "1", "2000"])
    assert exc.value.code == 64
