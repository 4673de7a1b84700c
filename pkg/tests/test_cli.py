"""CLI: subcommands, JSON schemas, exit codes, determinism."""

import json

import numpy as np
import pytest

from gzkit import algebra as alg
from gzkit.cli import main
from conftest import so


@pytest.fixture
def x5_file(tmp_path, rng):
    ctx = so(5)
    me = alg.MatrixElement(ctx.random_element(rng), ctx)
    path = tmp_path / "x5.json"
    path.write_text(json.dumps(me.to_json()))
    return str(path), me


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_build(capsys):
    code, out, _ = run(capsys, "build", "--family", "so", "--n", "5")
    doc = json.loads(out)
    assert code == 0
    assert doc["dim"] == 10 and doc["rank"] == 2 and doc["gz_slots"] == 6
    assert doc["identities"]["subrank_sum"] == doc["identities"]["half_codim"]


def test_eval_zero(tmp_path, capsys):
    ctx = so(4)
    p = tmp_path / "zero.json"
    p.write_text(json.dumps(alg.MatrixElement(np.zeros((4, 4)), ctx).to_json()))
    code, out, _ = run(capsys, "eval", "--in", str(p))
    doc = json.loads(out)
    assert code == 0
    assert max(abs(v) for v in doc["re"] + doc["im"]) == 0.0
    assert [tuple(ij) for ij in doc["index"]] == [(2, 1), (3, 1), (4, 1), (4, 2)]


def test_eval_deterministic(x5_file, capsys):
    path, _ = x5_file
    code1, out1, _ = run(capsys, "eval", "--in", path)
    code2, out2, _ = run(capsys, "eval", "--in", path)
    assert code1 == code2 == 0
    assert out1 == out2


def test_classify(x5_file, capsys):
    path, _ = x5_file
    code, out, _ = run(capsys, "classify", "--in", path)
    doc = json.loads(out)
    assert code == 0
    assert set(doc) >= {"in_g_theta", "in_g_zero", "margins", "m", "m_levels"}


def test_sreg_verdict_record(x5_file, capsys):
    path, _ = x5_file
    code, out, _ = run(capsys, "sreg", "--in", path)
    doc = json.loads(out)
    assert code == 0
    assert set(doc) == {"x_hash", "sreg_rank", "sreg_chain", "margin"}
    assert isinstance(doc["sreg_rank"], bool) and isinstance(doc["margin"], float)


def test_solve_and_flow_and_sample(tmp_path, x5_file, capsys):
    path, _ = x5_file
    target = tmp_path / "c.json"
    target.write_text(json.dumps({"re": [0.0] * 6, "im": [0.0] * 6}))
    code, out, _ = run(capsys, "solve", "--family", "so", "--n", "5",
                       "--target", str(target), "--seed", "7")
    doc = json.loads(out)
    assert code == 0 and doc["success"]

    code, out, _ = run(capsys, "flow", "--in", path, "--index", "3,1", "--t", "0.5")
    assert code == 0
    flowed = alg.matrix_from_json(json.loads(out))
    assert flowed.context.n == 5

    code, out, _ = run(capsys, "fibre-sample", "--in", path, "--count", "5", "--seed", "1")
    doc = json.loads(out)
    assert code == 0
    assert doc["count"] == 5 and doc["max_rel_drift"] < 1e-8


def test_malformed_matrix_exits_2(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    code, _, err = run(capsys, "eval", "--in", str(p))
    assert code == 2 and "error" in err

    p2 = tmp_path / "notmember.json"
    p2.write_text(json.dumps({"n": 3, "family": "so",
                              "re": np.eye(3).tolist(), "im": np.zeros((3, 3)).tolist()}))
    code, _, err = run(capsys, "eval", "--in", str(p2))
    assert code == 2 and "residual" in err


def test_suite_smoke_and_determinism(tmp_path, capsys):
    args = ["suite", "--only", "identities", "--only", "nullcone", "--seed", "3"]
    code1, out1, _ = run(capsys, *args)
    code2, out2, _ = run(capsys, *args)
    assert code1 == code2 == 0
    assert out1 == out2
    doc = json.loads(out1)
    assert doc["passed"] and len(doc["results"]) == 2
    assert "timings" not in doc


def test_suite_single_n(capsys):
    code, out, _ = run(capsys, "suite", "--only", "strata", "--n", "5",
                       "--samples", "20", "--seed", "1")
    doc = json.loads(out)
    assert code == 0 and doc["passed"]
    assert list(doc["results"][0]["details"]) == ["5"]


def test_unknown_suite_exits_2(capsys):
    code, _, err = run(capsys, "suite", "--only", "nope")
    assert code == 2 and "unknown suite" in err
