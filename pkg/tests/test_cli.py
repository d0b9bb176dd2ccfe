import json

import pytest

from ffdist.cli import demo_config_path, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_coverage_json(capsys):
    code, out, _ = run(capsys, "coverage", "--p", "7", "--set", "0,1", "--expr", "Δ(A^5)")
    row = json.loads(out)["rows"][0]
    assert code == 0 and row["verdict"] == "not-covered" and row["detail"]["missing"] == [6]


def test_coverage_csv(capsys):
    code, out, _ = run(capsys, "coverage", "--p", "5", "--set", "0,1,2", "--expr", "A^2+A^2", "--out", "csv")
    assert code == 0 and out.startswith("# ffdist report v1") and "covered" in out


def test_construct(capsys):
    code, out, _ = run(capsys, "construct", "thm14", "--p", "11", "--size", "11", "--lambda", "all")
    row = json.loads(out)["rows"][0]
    assert code == 0 and row["verdict"] == "all-hit" and row["detail"]["lambdas"] == 11


def test_bounds(capsys):
    code, out, _ = run(capsys, "bounds", "thm2", "--p", "101", "--size", "20")
    row = json.loads(out)["rows"][0]
    assert code == 0 and row["K"] == "39/20" and row["status"] == "ok"


def test_incidence(capsys):
    code, out, _ = run(capsys, "incidence", "hanson", "--p", "11", "--samples", "3")
    assert code == 0 and json.loads(out)["rows"][0]["verdict"] == "0 violations"


def test_exponent(capsys):
    code, out, _ = run(capsys, "exponent", "--d", "6")
    assert code == 0 and json.loads(out)["exponent"] == "4/7"


def test_scan(capsys):
    code, out, _ = run(capsys, "scan", "--p", "31", "--gen", "ap", "--expr", "A^2 x4", "--trials", "1")
    assert code == 0 and json.loads(out)["minimal_size"] is not None


@pytest.mark.parametrize("argv", [
    ["coverage", "--p", "8", "--size", "3", "--expr", "A"],
    ["coverage", "--p", "7", "--size", "3", "--expr", "B"],
    ["coverage", "--p", "7", "--expr", "A"],
    ["coverage", "--p", "7", "--set", "1,x", "--expr", "A"],
    ["coverage", "--p", "7", "--size", "9", "--expr", "A"],
    ["exponent", "--d", "5"],
    ["run"],
])
def test_config_errors_exit_3(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 3 and "configuration error" in err


def test_budget_exit_4(capsys):
    code, _, _ = run(capsys, "bounds", "variants", "--p", "101", "--gen", "random", "--size", "40")
    assert code == 4


def test_violation_exit_2(capsys, tmp_path, monkeypatch):
    import ffdist.experiments as experiments
    real = experiments._evaluate
    monkeypatch.setattr(experiments, "_evaluate",
                        lambda check, A, seed: ("violation",) + real(check, A, seed)[1:])
    code, _, _ = run(capsys, "bounds", "thm2", "--p", "11", "--size", "3")
    assert code == 2


def test_run_config_file(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"primes": [7], "generators": [{"kind": "explicit", "values": [0, 1]}],
                               "checks": [{"name": "coverage", "expr": "Δ(A^5)"}]}))
    csv_out, json_out = tmp_path / "o.csv", tmp_path / "o.json"
    code, out, _ = run(capsys, "run", str(cfg), "--csv-out", str(csv_out), "--json-out", str(json_out))
    assert code == 0 and out == csv_out.read_text()
    assert json.loads(json_out.read_text())["rows"][0]["verdict"] == "not-covered"


def test_run_rejects_unknown_key(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"primes": [7], "generators": [{"kind": "ap", "size": 2}],
                               "checks": ["thm2"], "typo": True}))
    code, _, err = run(capsys, "run", str(cfg))
    assert code == 3 and "typo" in err


def test_demo_config_is_bundled():
    data = json.loads(demo_config_path().read_text())
    assert data["primes"] and data["checks"]
