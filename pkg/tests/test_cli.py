import json
import os

import pytest

from orbijac import cli
from orbijac.cli import EXIT_FAILED, EXIT_INPUT, EXIT_OK, Flags
from orbijac.errors import GroebnerError, UsageError


@pytest.fixture
def fermat4(problems_dir):
    return os.path.join(problems_dir, "fermat4.json")


@pytest.fixture
def t2(problems_dir):
    return os.path.join(problems_dir, "t2.json")


def test_qseries():
    code, r = cli.run("qseries", None, Flags(name="psi", order=50))
    assert code == EXIT_OK
    assert r["order"] == 50
    assert r["coefficients"] == {"1": "-1", "25": "-5", "49": "7"}

    code, r = cli.run("qseries", None, Flags(name="gamma", order=30))
    assert code == EXIT_OK
    assert set(r["coefficients"]) == {"1", "25"}
    assert isinstance(r["coefficients"]["1"], list)


def test_qseries_needs_a_name():
    code, r = cli.run("qseries", None, Flags())
    assert code == EXIT_INPUT
    assert not r["ok"]


def test_sectors(fermat4):
    code, r = cli.run("sectors", fermat4, Flags())
    assert code == EXIT_OK
    rows = {row["sector"]: row for row in r["sectors"]}
    assert rows["0,0"]["dim"] == 9
    assert rows["0,0"]["invariant_dim"] == 3
    assert all(row["d"] == 2 and row["dim"] == 1 for key, row in rows.items() if key != "0,0")
    assert r["invariant_dim"] == 6


def test_t2_sectors_at_reduced_precision(t2):
    code, r = cli.run("sectors", t2, Flags(order=60))
    assert code == EXIT_OK
    assert r["problem"]["precision"] == 60
    dims = {row["sector"]: (row["dim"], row["invariant_dim"], row["parity"]) for row in r["sectors"]}
    assert dims == {"0,0,0": (8, 2, 0), "1,1,1": (1, 1, 1), "2,2,2": (1, 1, 1)}


def test_table(fermat4):
    code, r = cli.run("table", fermat4, Flags())
    assert code == EXIT_OK
    assert r["ok"] and r["failures"] == []
    assert len(r["basis"]) == 6
    assert len(r["table"]) == 36


def test_sigma(fermat4, t2):
    code, r = cli.run("sigma", fermat4, Flags(g="1,3", h="3,1"))
    assert code == EXIT_OK
    assert r["gh"] == "0,0"
    assert r["d"] == 2

    code, r = cli.run("sigma", t2, Flags(order=60, g="1,1,1", h="2,2,2"))
    assert code == EXIT_OK
    assert r["d"] == 3
    assert r["sigma"]

    code, r = cli.run("sigma", t2, Flags(order=60, g="1,1,1", h="1,1,1"))
    assert code == EXIT_OK
    assert r["d"] == 1.5
    assert r["sigma"] == []


def test_sigma_input_errors(fermat4):
    assert cli.run("sigma", fermat4, Flags(g="1,x", h="1,3"))[0] == EXIT_INPUT
    assert cli.run("sigma", fermat4, Flags(g="1,1", h="1,3"))[0] == EXIT_INPUT
    assert cli.run("sigma", fermat4, Flags(g="1,3"))[0] == EXIT_INPUT


def test_problem_errors(tmp_path, fermat4):
    code, r = cli.run("sectors", str(tmp_path / "nope.json"), Flags())
    assert code == EXIT_INPUT
    assert r["violations"] == []
    assert cli.run("sectors", None, Flags())[0] == EXIT_INPUT

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"variables": ["x"], "cyclotomic_order": 4, "potential": []}), encoding="utf-8")
    code, r = cli.run("table", str(bad), Flags())
    assert code == EXIT_INPUT
    assert {v["pointer"] for v in r["violations"]} == {"/", "/potential"}


def test_verify_kernel(fermat4):
    code, r = cli.run("verify-kernel", fermat4, Flags())
    assert code == EXIT_OK, r["failures"]
    assert r["kernel"]["ok"] and r["equivariance"]["ok"]
    assert r["composition_ok"] and r["composition_failures"] == []
    assert len(r["summands"]) == 4
    assert "mfabc" not in r


def test_unknown_command():
    with pytest.raises(UsageError):
        cli.dispatch("plot", None, Flags())
    assert cli.run("plot", None, Flags())[0] == EXIT_INPUT


def test_verdict_maps_to_exit_code():
    assert cli._verdict({"ok": True}) == EXIT_OK
    assert cli._verdict({"ok": False}) == EXIT_FAILED


def test_json_output_is_canonical(fermat4):
    _, r = cli.run("sectors", fermat4, Flags())
    text = cli.render(r)
    assert cli.to_json(json.loads(text)) == text


def test_pretty_output(fermat4):
    _, r = cli.run("sectors", fermat4, Flags(report="pretty"))
    text = cli.render(r, "pretty")
    assert text.splitlines()[0].startswith("invariant_dim")
    assert "sector" in text and "0,0" in text
    with pytest.raises(ValueError):
        cli.render(r, "xml")


def test_write_atomic(tmp_path):
    target = tmp_path / "out" / "result.json"
    cli.write_atomic(str(target), cli.to_json({"ok": True}))
    assert json.loads(target.read_text(encoding="utf-8")) == {"ok": True}
    assert target.read_text(encoding="utf-8").endswith("\n")
    assert not (tmp_path / "out" / "result.json.tmp").exists()


def test_zero_denominator_exits_with_input_error(tmp_path):
    data = {
        "variables": ["x", "y"],
        "cyclotomic_order": 4,
        "potential": [{"exps": [4, 0], "coeff": "1/0"}, {"exps": [0, 4], "coeff": 1}],
        "group": [[1, 3]],
    }
    bad = tmp_path / "zero.json"
    bad.write_text(json.dumps(data), encoding="utf-8")
    code, r = cli.run("sectors", str(bad), Flags())
    assert code == EXIT_INPUT
    assert not r["ok"]
    assert r["violations"][0]["pointer"] == "/potential/0/coeff"


def test_failed_check_exits_with_failures(monkeypatch, fermat4):
    verdict = {
        "ok": False,
        "unit": {"ok": True, "failures": []},
        "graded_commutativity": {"ok": False, "failures": [{"a": 0, "b": 1}]},
        "associativity": {"ok": True, "failures": []},
    }
    monkeypatch.setattr(cli, "check_algebra", lambda orb: verdict)
    code, r = cli.run("table", fermat4, Flags())
    assert code == EXIT_FAILED
    assert r["failures"] == ["graded_commutativity"]
    assert "failures: graded_commutativity" in cli.render(r, "pretty")


def test_library_error_exits_with_failure(monkeypatch, fermat4):
    def broken(*args, **kwargs):
        raise GroebnerError("no basis")

    monkeypatch.setattr(cli, "twisted_algebra", broken)
    code, r = cli.run("sectors", fermat4, Flags())
    assert code == EXIT_FAILED
    assert r["failures"] == ["GroebnerError"]


def test_internal_value_error_is_not_an_input_error(monkeypatch, fermat4):
    def broken(*args, **kwargs):
        raise ValueError("ring mismatch")

    monkeypatch.setattr(cli, "twisted_algebra", broken)
    with pytest.raises(ValueError, match="ring mismatch"):
        cli.run("sectors", fermat4, Flags())


def test_order_below_minimum():
    assert cli.run("t2", None, Flags(order=10))[0] == EXIT_INPUT
    assert cli.run("qseries", None, Flags(name="phi", order=0))[0] == EXIT_INPUT


def test_pretty_qseries_lists_coefficients():
    _, r = cli.run("qseries", None, Flags(name="psi", order=50))
    lines = cli.render(r, "pretty").splitlines()
    assert "q^1  -1" in lines
    assert "q^25  -5" in lines
    assert lines.index("q^1  -1") < lines.index("q^25  -5") < lines.index("q^49  7")
