import csv
import io
import json
import math
import subprocess
import sys

import pytest

from mkclab import cli
from mkclab.errors import InvariantError
from mkclab.mkc import RationalDirection


def run(*argv):
    out = io.StringIO()
    code = cli.main(list(argv), out=out)
    return code, out.getvalue()


def run_json(*argv):
    code, text = run(*argv)
    assert code == 0, text
    return json.loads(text)


def test_correlations_anchor():
    h = math.pi / 2
    data = run_json("correlations", "--triplet", f"{h},0;{h},0;{h},0")
    assert abs(data["matrix_value"] + 1) < 1e-10
    assert abs(data["closed_form_value"] + 1) < 1e-10
    data = run_json("correlations", "--triplet", f"{h},0;{h},{h};{h},{h}")
    assert abs(data["matrix_value"] - 1) < 1e-10


@pytest.mark.parametrize("bad", ["1,2;3,4", "a,b;c,d;e,f", "1;2;3", "1,2,3;4,5;6,7"])
def test_correlations_bad_triplet(bad, capsys):
    code, text = run("correlations", "--triplet", bad)
    assert code == 2 and text == ""
    assert "error" in capsys.readouterr().err


def test_epsilon_sweep_json_and_csv():
    rows = run_json("epsilon-sweep", "--delta-max", "0.1", "--steps", "4", "--seed", "0")
    assert [r["delta"] for r in rows] == [0.0, 0.025, 0.05, 0.07500000000000001, 0.1]
    assert abs(rows[-1]["worst_eps"] - 0.04466351087439413) < 1e-12
    code, text = run("epsilon-sweep", "--delta-max", "0.1", "--steps", "4", "--seed", "0", "--format", "csv")
    table = list(csv.reader(io.StringIO(text)))
    assert table[0] == ["delta", "worst_eps"] and len(table) == 6
    assert [float(r[1]) for r in table[1:]] == [r["worst_eps"] for r in rows]


@pytest.mark.parametrize(
    "argv",
    [
        ["epsilon-sweep", "--delta-max", "0", "--steps", "4", "--seed", "0"],
        ["epsilon-sweep", "--delta-max", "inf", "--steps", "4", "--seed", "0"],
        ["epsilon-sweep", "--delta-max", "0.1", "--steps", "x", "--seed", "0"],
        ["epsilon-sweep", "--delta-max", "0.1", "--steps", "4", "--seed", "0", "--format", "xml"],
        ["mkc", "rationals", "--bound", "0"],
        ["section2", "--delta", "0", "--bound", "100", "--seed", "0"],
        ["section3", "--eta", "0", "--seed", "0"],
        ["simulate", "--model", "classical", "--rounds", "10", "--delta", "0.1", "--seed", "0"],
        ["simulate", "--model", "quantum", "--rounds", "0", "--delta", "0.1", "--seed", "0"],
        ["simulate", "--model", "quantum", "--rounds", "10", "--delta", "2", "--seed", "0"],
        ["hvm"],
        [],
    ],
)
def test_validation_exit_code(argv, capsys):
    code, text = run(*argv)
    assert code == 2 and text == ""
    capsys.readouterr()


def test_hvm_parity():
    data = run_json("hvm", "parity")
    assert data["valuations_checked"] == 64
    assert data["product_always_minus_one"] is True
    assert data["valuations_with_all_f_plus"] == 0
    assert sum(p["valuations"] for p in data["f_patterns"]) == 64
    for p in data["f_patterns"]:
        assert math.prod(p["f"]) == -1


def test_hvm_maxmin():
    data = run_json("hvm", "maxmin")
    assert data["max_min_E"] == "1/2" and data["value"] == 0.5
    assert [w["weight"] for w in data["witness"]] == ["1/4"] * 4
    assert data["E"] == ["1/2"] * 4 and data["mu_intersection"] == "0"


def test_mkc_rationals():
    data = run_json("mkc", "rationals", "--bound", "1")
    assert data["count"] == 6 and len(data["directions"]) == 6
    code, text = run("mkc", "rationals", "--bound", "5", "--format", "csv")
    table = list(csv.DictReader(io.StringIO(text)))
    for row in table:
        p1, p2, p3, q = (int(row[k]) for k in ("p1", "p2", "p3", "q"))
        assert p1 * p1 + p2 * p2 + p3 * p3 == q * q
        assert RationalDirection.parse(row["direction"]) == RationalDirection(p1, p2, p3, q)


def test_section2_and_section3():
    data = run_json("section2", "--delta", "0.01", "--bound", "100", "--seed", "0")
    assert data["verdict"]["fires"] and data["verdict"]["slack"] >= 0.499
    data = run_json("section3", "--eta", "0.01", "--seed", "0")
    assert data["max_commutator_norm"] <= 1e-10 and data["verdict"]["fires"]


def test_simulate_with_records(tmp_path):
    path = tmp_path / "rounds.ndjson"
    data = run_json("simulate", "--model", "product-hv", "--rounds", "200", "--delta", "0.2", "--seed", "1", "--records", str(path))
    assert data["records_written"] == 200 and data["records"] == str(path)
    lines = path.read_text().splitlines()
    assert len(lines) == 200
    recs = [json.loads(l) for l in lines]
    assert [r["round"] for r in recs] == list(range(200))
    assert all(r["product"] == math.prod(r["outcomes"]) and "valuation" in r for r in recs)
    per = {c: sum(1 for r in recs if r["combo"] == c) for c in data["combos"]}
    assert per == {c: v["rounds"] for c, v in data["combos"].items()}


def test_simulate_records_unwritable(tmp_path, capsys):
    code, text = run("simulate", "--model", "quantum", "--rounds", "10", "--delta", "0.1", "--seed", "0",
                     "--records", str(tmp_path / "missing" / "x.ndjson"))
    assert code == 2 and text == ""
    capsys.readouterr()


def test_internal_failure_exit_code(monkeypatch, capsys):
    def boom(*a, **k):
        raise InvariantError("forced")

    monkeypatch.setattr(cli, "pipeline_section3", boom)
    code, text = run("section3", "--eta", "0.01", "--seed", "0")
    assert code == 1 and text == ""
    assert "forced" in capsys.readouterr().err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "mkclab", "hvm", "maxmin"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["value"] == 0.5
    proc = subprocess.run([sys.executable, "-m", "mkclab", "mkc", "rationals", "--bound", "-1"], capture_output=True, text=True)
    assert proc.returncode == 2 and proc.stdout == ""
