from __future__ import annotations

import json

import pytest

from sympq.cli import main, run_suite


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_round_trip(capsys):
    code, out, _ = run(capsys, "parse", "y1*dx1 - x1*dy1", "--json")
    data = json.loads(out)
    assert code == 0 and data["round_trip"] and data["degree"] == 1


def test_parse_error_exit_code(capsys):
    code, _, err = run(capsys, "parse", "x1 + (")
    assert code == 2 and "line 1, column 7" in err


def test_usage_errors(capsys):
    assert run(capsys, "cohomology", "--example", "nonsense")[0] == 2
    assert run(capsys, "no-such-command")[0] == 2
    assert run(capsys, "check-basic", "dx3", "--example", "cp1")[0] == 2  # no third plane


def test_check_basic_and_ideal(capsys):
    code, out, _ = run(capsys, "check-basic", "x1^2 + y1^2", "--example", "cone11", "--json")
    assert code == 0 and json.loads(out)["certificate"]["verdict"] == "member"
    code, out, _ = run(capsys, "check-ideal", "x1^2 + y1^2 - x2^2 - y2^2", "--example", "cone11")
    assert code == 0 and "NOT" not in out
    code, out, _ = run(capsys, "check-ideal", "x1^2 + y1^2", "--example", "cone11")
    assert code == 0 and "NOT" in out  # a negative verdict still exits 0


def test_cohomology(capsys):
    code, out, _ = run(capsys, "cohomology", "--example", "cp1", "-D", "4", "--json")
    data = json.loads(out)
    assert code == 0 and data["betti"][:3] == [1, 0, 1]


def test_json_is_deterministic(capsys, tmp_path):
    path = tmp_path / "a.json"
    a = run(capsys, "poincare", "--example", "cone11", "-D", "4", "--json", "--seed", "3", "--out", str(path))
    b = run(capsys, "poincare", "--example", "cone11", "-D", "4", "--json", "--seed", "3")
    assert a[0] == b[0] == 0
    strip = lambda s: {k: v for k, v in json.loads(s).items() if "time" not in k and "seconds" not in k}
    assert strip(a[1]) == strip(b[1])
    assert strip(path.read_text()) == strip(a[1])


def test_environment(capsys, monkeypatch):
    monkeypatch.setenv("SYMPQ_THREADS", "0")
    assert run(capsys, "parse", "x1")[0] == 2
    monkeypatch.setenv("SYMPQ_THREADS", "4")
    monkeypatch.setenv("SYMPQ_SEED", "nope")
    assert run(capsys, "poincare", "--example", "cone11", "-D", "2")[0] == 2
    monkeypatch.setenv("SYMPQ_SEED", "7")
    code, out, _ = run(capsys, "poincare", "--example", "cone11", "-D", "2", "--json")
    assert code == 0


def test_stokes_and_pairing(capsys):
    code, out, _ = run(capsys, "stokes", "--example", "teardrop", "--forms", "2", "--samples", "4096")
    assert code == 0
    code, out, _ = run(capsys, "pairing", "--example", "cp1", "--samples", "4096")
    assert code == 0


def test_volume_and_scaling(capsys, tmp_path):
    csv = tmp_path / "v.csv"
    code, _, _ = run(capsys, "volume", "--example", "teardrop", "--k", "32", "--csv", str(csv))
    assert code == 0 and csv.read_text().startswith("k,")
    assert run(capsys, "volume", "--example", "teardrop", "--k", "4")[0] == 1  # not yet converged
    assert run(capsys, "cone-scaling", "--example", "zk-cone", "--k", "6")[0] == 0


def test_induction_and_appendix(capsys):
    assert run(capsys, "induction", "--config", "point", "-D", "3")[0] == 0
    assert run(capsys, "appendix", "--samples", "8")[0] == 0


def test_suite_with_config(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"D": 4, "examples": ["cone11"]}))
    code, out, _ = run(capsys, "suite", "poincare", "--config", str(cfg))
    assert code == 0 and "poincare: PASS" in out
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2")
    assert run(capsys, "suite", "poincare", "--config", str(bad))[0] == 2


def test_run_suite_api():
    rep = run_suite("restrict", seed=1)
    assert rep["passed"] and rep["suite"] == "restrict"
    with pytest.raises(ValueError):
        run_suite("bogus")
