import json

import pytest
from click.testing import CliRunner

from bvloops.cli import main, parse_range
from bvloops.numeric import hopf_framed_circle, write_curve_csv

FIXTURE = """n = 3
N = 2
A[0][1][1] = 0.1*x2
A[1][1][3] = 0.05
B[0][1][2] = 0.5 + x1
"""


@pytest.fixture
def runner():
    return CliRunner()


def run(runner, *args, env=None):
    return runner.invoke(main, list(args), env=env)


def test_parse_range():
    assert parse_range("3..6") == [3, 4, 5, 6]
    assert parse_range("4") == [4]
    assert parse_range("3,5") == [3, 5]


def test_verify_master(runner, tmp_path):
    out = tmp_path / "r.json"
    r = run(runner, "verify-master", "--n", "3..4", "--backend", "gl2", "--out", str(out),
            env={"BVLOOPS_THREADS": "2"})
    assert r.exit_code == 0, r.output
    doc = json.loads(out.read_text())
    assert doc["status"] == "pass" and doc["schema-version"] == "1" and doc["threads"] == 2
    assert len(doc["config-hash"]) == 16
    assert {x["identity"] for x in doc["reports"]} >= {"master-equation", "brst-tower"}


def test_verify_master_rejects_small_n(runner):
    assert run(runner, "verify-master", "--n", "2").exit_code == 2
    assert run(runner, "verify-master", "--n", "x..y").exit_code == 2


def test_theorem4(runner):
    r = run(runner, "theorem4", "--parity", "even", "--lambda", "1,1")
    assert r.exit_code == 0
    rep = json.loads(r.stdout)["reports"][0]
    assert rep["required-mu"] == ["0", "1", "2", "1"]
    r = run(runner, "theorem4", "--parity", "odd", "--lambda", "kappa", "--mu", "0,kappa")
    assert r.exit_code == 1


def test_expand_and_golden(runner, tmp_path):
    out = tmp_path / "e.json"
    r = run(runner, "expand", "--family", "hhat", "--n", "3", "--K", "2", "--out", str(out))
    assert r.exit_code == 0
    r = run(runner, "expand", "--family", "hhat", "--n", "3", "--K", "2", "--golden", str(out))
    assert r.exit_code == 0 and json.loads(r.stdout)["golden-match"]
    r = run(runner, "expand", "--family", "hhat", "--n", "3", "--K", "1", "--golden", str(out))
    assert r.exit_code == 1


def test_expand_vanishing_interaction(runner):
    r = run(runner, "expand", "--family", "hhat", "--n", "4")
    assert r.exit_code == 2 and "vanishing interaction" in r.stderr


def test_closedness(runner):
    assert run(runner, "closedness", "--family", "hhat", "--n", "5", "--K", "2").exit_code == 0
    r = run(runner, "closedness", "--family", "h-even-part", "--n", "4", "--K", "3")
    assert r.exit_code == 0
    assert json.loads(r.stdout)["reports"][0]["expected-failure"]


def test_holonomy_and_linking(runner, tmp_path):
    curve = tmp_path / "c.csv"
    write_curve_csv(hopf_framed_circle(128), str(curve))
    fx = tmp_path / "f.fx"
    fx.write_text(FIXTURE)
    r = run(runner, "holonomy", "--curve", str(curve), "--fixture", str(fx), "--k", "1")
    assert r.exit_code == 0, r.output
    assert "h1" in json.loads(r.stdout)["reports"][0]["iterated-integrals"]
    r = run(runner, "linking", "--curve", str(curve))
    assert r.exit_code == 0
    assert json.loads(r.stdout)["reports"][0]["integer"] == 1


def test_bad_fixture_is_usage_error(runner, tmp_path):
    curve = tmp_path / "c.csv"
    write_curve_csv(hopf_framed_circle(64), str(curve))
    fx = tmp_path / "f.fx"
    fx.write_text("A[0][1][1] = y\n")
    r = run(runner, "holonomy", "--curve", str(curve), "--fixture", str(fx))
    assert r.exit_code == 2
