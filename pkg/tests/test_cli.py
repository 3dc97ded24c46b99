"""End-to-end runs of the command line driver through its Python entry point."""

import csv
import json

import numpy as np
import pytest

from solenoidlab.cli import main


def write_config(tmp_path, cfg, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


FULL_SHIFT = {
    "kind": "full-shift",
    "parameters": {"alphabet_size": 2, "ratio": 0.5, "max_period": 4},
}
PADIC = {"kind": "padic-cycle", "parameters": {"prime": 2, "digits": 3}}


def read_matrix(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    labels = rows[0]
    matrix = np.array([[float(v) for v in row] for row in rows[1:]])
    return labels, matrix


def test_run_all_checks_passes(tmp_path, capsys):
    cfg = {
        "space": FULL_SHIFT,
        "seed": 7,
        "checks": [
            {"name": "metric-axioms"},
            {"name": "ultrametric"},
            {"name": "bilipschitz"},
            {"name": "chain-sandwich", "pairs": 40},
            {"name": "flow-laws", "triples": 60},
            {"name": "connectedness", "epsilon": 0.5},
            {"name": "dense-orbit", "epsilon": 0.5},
            {"name": "measures", "cylinders": 20},
            {"name": "dimension", "scales": [0.5, 0.25, 0.125]},
        ],
    }
    out = tmp_path / "report.json"
    code = main(["run", write_config(tmp_path, cfg), "--out", str(out)])
    assert code == 0
    report = json.loads(out.read_text())
    assert report["summary"]["all_passed"]
    assert report["summary"]["checks"] == 9
    by_name = {r["name"]: r for r in report["results"]}
    assert by_name["ultrametric"]["status"] == "pass"
    assert by_name["bilipschitz"]["constant"] == 2.0
    assert by_name["connectedness"]["components"] == 1
    assert by_name["dimension"]["counts"] == [4, 16, 16]
    assert by_name["measures"]["invariance_discrepancy"] == 0.0
    assert report["config"]["space"] == FULL_SHIFT


def test_run_reports_are_byte_identical(tmp_path):
    cfg = {
        "space": PADIC,
        "seed": 11,
        "checks": [
            {"name": "quotient-metric", "pairs": 80},
            {"name": "flow-laws", "triples": 50},
        ],
    }
    path = write_config(tmp_path, cfg)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["run", path, "--out", str(a)]) == 0
    assert main(["run", path, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_run_seed_changes_the_draws(tmp_path):
    cfg = {
        "space": PADIC,
        "checks": [{"name": "quotient-metric", "pairs": 60}],
    }
    path = write_config(tmp_path, cfg)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["run", path, "--seed", "1", "--out", str(a)]) == 0
    assert main(["run", path, "--seed", "2", "--out", str(b)]) == 0
    ra, rb = json.loads(a.read_text()), json.loads(b.read_text())
    assert ra["run"]["seed"] == 1 and rb["run"]["seed"] == 2
    assert ra["results"][0]["status"] == rb["results"][0]["status"] == "pass"
    assert ra["results"][0]["equality_pairs"] != rb["results"][0]["equality_pairs"]


def test_run_failing_check_exits_one(tmp_path, capsys):
    cfg = {
        "space": {
            "kind": "snowflake-interval",
            "parameters": {"grid_size": 8, "alpha": 1.0},
        },
        "checks": [{"name": "ultrametric"}],
    }
    code = main(["run", write_config(tmp_path, cfg)])
    assert code == 1
    report = json.loads(capsys.readouterr().out)
    result = report["results"][0]
    assert result["status"] == "fail"
    assert result["violations"] > 0
    assert result["witnesses"][0]["kind"] == "ultrametric"
    assert len(result["witnesses"][0]["points"]) == 3


def test_unknown_check_is_a_usage_error(tmp_path, capsys):
    cfg = {"space": FULL_SHIFT, "checks": [{"name": "foo"}]}
    code = main(["run", write_config(tmp_path, cfg)])
    assert code == 2
    err = capsys.readouterr().err
    assert "$.checks[0]" in err


def test_schema_violation_names_the_field(tmp_path, capsys):
    cfg = {"space": {"kind": "heptagon", "parameters": {}}, "checks": [{"name": "ultrametric"}]}
    assert main(["run", write_config(tmp_path, cfg)]) == 2
    assert "$.space.kind" in capsys.readouterr().err


def test_missing_seed_for_sampling_checks(tmp_path, capsys):
    cfg = {"space": PADIC, "checks": [{"name": "quotient-metric"}]}
    assert main(["run", write_config(tmp_path, cfg)]) == 2
    assert "seed" in capsys.readouterr().err


def test_unknown_parameter_rejected(tmp_path, capsys):
    cfg = {
        "space": PADIC,
        "seed": 1,
        "checks": [{"name": "quotient-metric", "pears": 9}],
    }
    assert main(["run", write_config(tmp_path, cfg)]) == 2
    assert "pears" in capsys.readouterr().err


def test_missing_required_parameter(tmp_path, capsys):
    cfg = {"space": FULL_SHIFT, "checks": [{"name": "connectedness"}]}
    assert main(["run", write_config(tmp_path, cfg)]) == 2
    assert "epsilon" in capsys.readouterr().err


def test_incoherent_model_for_check(tmp_path, capsys):
    cfg = {
        "space": {
            "kind": "snowflake-interval",
            "parameters": {"grid_size": 8, "alpha": 0.5},
        },
        "checks": [{"name": "bilipschitz"}],
    }
    assert main(["run", write_config(tmp_path, cfg)]) == 2
    assert "self-map" in capsys.readouterr().err


def test_quotient_check_needs_isometry(tmp_path, capsys):
    cfg = {"space": FULL_SHIFT, "seed": 1, "checks": [{"name": "quotient-metric"}]}
    assert main(["run", write_config(tmp_path, cfg)]) == 2
    assert "isometric" in capsys.readouterr().err


def test_malformed_json_is_a_usage_error(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert main(["run", str(path)]) == 2
    assert "JSON" in capsys.readouterr().err


def test_schema_command_prints_valid_schema(capsys):
    assert main(["schema"]) == 0
    schema = json.loads(capsys.readouterr().out)
    assert schema["properties"]["checks"]["items"]["required"] == ["name"]


def test_export_base_matrix(tmp_path):
    cfg = {
        "space": {
            "kind": "full-shift",
            "parameters": {"alphabet_size": 2, "ratio": 0.5, "max_period": 2},
        },
        "export": {"metric": "base"},
    }
    out = tmp_path / "m.csv"
    assert main(["export", write_config(tmp_path, cfg), "--out", str(out)]) == 0
    labels, matrix = read_matrix(out)
    assert labels == ["1:0", "2:01", "2:10", "1:1"]
    assert matrix.shape == (4, 4)
    assert np.array_equal(matrix, matrix.T)
    assert np.all(np.diag(matrix) == 0.0)
    assert matrix[0, 3] == 1.0


def test_export_quotient_matrix_is_a_metric(tmp_path):
    cfg = {
        "space": PADIC,
        "export": {"metric": "quotient", "times": [0.0, 0.5]},
        "output": {"path": str(tmp_path / "q.csv")},
    }
    assert main(["export", write_config(tmp_path, cfg)]) == 0
    labels, m = read_matrix(tmp_path / "q.csv")
    assert m.shape == (16, 16)
    assert labels[0] == "0@0.0"
    assert np.array_equal(m, m.T)
    for k in range(16):
        assert np.all(m <= m[:, k][:, None] + m[k, :][None, :] + 1e-9)


def test_export_adapted_matrix_of_isometry_is_base(tmp_path):
    base_cfg = {"space": PADIC, "export": {"metric": "base"}}
    tilde_cfg = {"space": PADIC, "export": {"metric": "adapted"}}
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    assert main(["export", write_config(tmp_path, base_cfg, "a.json"), "--out", str(out_a)]) == 0
    assert main(["export", write_config(tmp_path, tilde_cfg, "b.json"), "--out", str(out_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()


def test_export_chain_dominates_representative(tmp_path):
    shift_cfg = {
        "space": {
            "kind": "full-shift",
            "parameters": {"alphabet_size": 2, "ratio": 0.5, "max_period": 2},
        },
        "export": {"metric": "representative", "times": [0.0, 0.25, 0.74, 0.76]},
    }
    chain_cfg = dict(shift_cfg, export={"metric": "chain", "times": [0.0, 0.25, 0.74, 0.76]})
    out_r = tmp_path / "r.csv"
    out_c = tmp_path / "c.csv"
    assert main(["export", write_config(tmp_path, shift_cfg, "r.json"), "--out", str(out_r)]) == 0
    assert main(["export", write_config(tmp_path, chain_cfg, "c.json"), "--out", str(out_c)]) == 0
    _, rep = read_matrix(out_r)
    _, chain = read_matrix(out_c)
    assert rep.shape == chain.shape == (16, 16)
    assert np.all(chain <= rep + 1e-12)
    assert np.any(chain < rep - 1e-9)  # the repair genuinely shortens something


def test_export_torus_metric_needs_times(tmp_path, capsys):
    cfg = {"space": PADIC, "export": {"metric": "chain"}}
    assert main(["export", write_config(tmp_path, cfg)]) == 2
    assert "times" in capsys.readouterr().err


def test_export_full_precision_round_trip(tmp_path):
    cfg = {
        "space": {
            "kind": "snowflake-interval",
            "parameters": {"grid_size": 4, "alpha": 0.5},
        },
        "export": {"metric": "base"},
    }
    out = tmp_path / "s.csv"
    assert main(["export", write_config(tmp_path, cfg), "--out", str(out)]) == 0
    labels, matrix = read_matrix(out)
    assert labels == ["0.0", "0.25", "0.5", "0.75", "1.0"]
    assert matrix[0, 1] == 0.5
    assert matrix[0, 2] == 0.5 ** 0.5  # repr round-trips exactly
