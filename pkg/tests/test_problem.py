import json
import os

import pytest

from orbijac.errors import InvarianceError, ProblemError
from orbijac.problem import build_problem, load, parse_scalar, schema_violations
from orbijac.scalar import CycNum, QSeries
from orbijac.t2 import series


def fermat(**overrides):
    data = {
        "name": "fermat4",
        "variables": ["x", "y"],
        "cyclotomic_order": 4,
        "potential": [{"exps": [4, 0], "coeff": 1}, {"exps": [0, 4], "coeff": 1}],
        "group": [[1, 3]],
    }
    data.update(overrides)
    return data


def test_load_shipped_problems(problems_dir):
    spec = load(os.path.join(problems_dir, "t2.json"), 60)
    assert spec.precision == 60
    assert spec.variables == ("x1", "x2", "x3")
    assert len(spec.group) == 3
    assert len(spec.potential.terms) == 4
    assert spec.potential.coefficient((1, 1, 1)) == series("psi", 60) * CycNum.root(12, 3)

    spec = load(os.path.join(problems_dir, "fermat4.json"))
    assert spec.m == 4
    assert spec.summary()["group_order"] == 4
    assert spec.summary()["generators"] == ["1,3"]


def test_schema_violations_carry_pointers():
    data = fermat(cyclotomic_order=0, extra=True)
    data["potential"][0]["exps"] = [-1, 0]
    pointers = {v["pointer"] for v in schema_violations(data)}
    assert {"/", "/cyclotomic_order", "/potential/0/exps/0"} <= pointers
    with pytest.raises(ProblemError) as err:
        build_problem(data)
    assert err.value.violations


def test_missing_required_field():
    data = fermat()
    del data["group"]
    violations = schema_violations(data)
    assert violations and violations[0]["pointer"] == "/"
    assert "group" in violations[0]["message"]


def test_shape_violations():
    data = fermat()
    data["potential"][1]["exps"] = [0, 4, 0]
    with pytest.raises(ProblemError) as err:
        build_problem(data)
    assert err.value.violations == [{"pointer": "/potential/1/exps", "message": "expected 2 exponents, got 3"}]


def test_group_bound():
    data = fermat(cyclotomic_order=12, group=[[1, 0], [0, 1]])
    with pytest.raises(ProblemError):
        build_problem(data)


def test_non_invariant_potential():
    data = fermat(cyclotomic_order=12, group=[[4, 4]])
    data["potential"].append({"exps": [1, 1], "coeff": "1/2"})
    with pytest.raises(InvarianceError):
        build_problem(data)


def test_parse_scalar():
    assert parse_scalar("3/4", 12, 10) == QSeries.constant(12, CycNum.from_rational(12, "3/4"))
    assert parse_scalar({"rational": "1/2", "root": 6}, 12, 10) == QSeries.constant(12, CycNum.from_rational(12, "-1/2"))
    assert parse_scalar({"cyc": [0, 1]}, 12, 10) == QSeries.constant(12, CycNum.root(12, 1))
    assert parse_scalar({"series": "phi"}, 12, 30) == series("phi", 30)
    with pytest.raises(ProblemError):
        parse_scalar({"series": "gamma"}, 6, 30)


def test_load_errors(tmp_path):
    with pytest.raises(ProblemError):
        load(str(tmp_path / "missing.json"))
    bad = tmp_path / "bad.json"
    bad.write_text('{"variables": [', encoding="utf-8")
    with pytest.raises(ProblemError) as err:
        load(str(bad))
    assert "line 1" in str(err.value)
    good = tmp_path / "good.json"
    good.write_text(json.dumps(fermat()), encoding="utf-8")
    assert load(str(good)).name == "fermat4"


def test_zero_denominator_is_a_schema_violation():
    data = fermat()
    data["potential"][0]["coeff"] = "1/0"
    assert [v["pointer"] for v in schema_violations(data)] == ["/potential/0/coeff"]
    data["potential"][0]["coeff"] = {"cyc": ["1", "2/0"]}
    assert {v["pointer"] for v in schema_violations(data)} == {"/potential/0/coeff"}
    with pytest.raises(ProblemError) as err:
        build_problem(data)
    assert err.value.violations


def test_bad_scalar_carries_its_pointer():
    with pytest.raises(ProblemError) as err:
        parse_scalar("1/0", 4, 10, "/potential/3/coeff")
    assert err.value.violations[0]["pointer"] == "/potential/3/coeff"
    with pytest.raises(ProblemError):
        parse_scalar({"rational": "x"}, 4, 10)
    with pytest.raises(ProblemError):
        parse_scalar(True, 4, 10)
