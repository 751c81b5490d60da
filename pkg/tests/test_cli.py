import argparse
import csv
import json
import os

import numpy as np
import pytest

from volforms import cli
from volforms.cli import COMMANDS, OPTION_DEFAULTS, ConfigError, RunConfig, main, parse_atoms, parse_matrix, run

FAST = ["--n-samples", "4000", "--grid-n", "64"]


def _reports(path):
    return {name: json.load(open(os.path.join(path, name))) for name in sorted(os.listdir(path))}


def _strip(payload):
    return {k: v for k, v in payload.items() if k != "timestamp"}


# ---------------------------------------------------------------- parsing helpers

def test_parse_matrix_forms(tmp_path):
    np.testing.assert_array_equal(parse_matrix("2,0;0,8"), np.diag([2.0, 8.0]))
    np.testing.assert_array_equal(parse_matrix("[[2, 0], [0, 8]]"), np.diag([2.0, 8.0]))
    np.testing.assert_array_equal(parse_matrix("2"), [[2.0]])
    f = tmp_path / "q.csv"
    f.write_text("1,0.5\n;0.5,1\n")
    np.testing.assert_array_equal(parse_matrix(f"@{f}"), [[1.0, 0.5], [0.5, 1.0]])


def test_parse_atoms():
    w = parse_atoms("1@0.25, -2@1")
    assert w.atoms == ((0.25, 1.0), (1.0, -2.0))
    with pytest.raises(ConfigError):
        parse_atoms("1:0.5")


@pytest.mark.parametrize("kwargs", [{"grid_n": 0}, {"n_samples": 1}, {"seed": -1}, {"sigma_threshold": 0},
                                    {"abs_tol": -1e-3}, {"workers": 0}])
def test_run_config_validation(kwargs):
    with pytest.raises(ConfigError):
        RunConfig(**kwargs)


# ---------------------------------------------------------------- exit codes

def test_documented_examples_pass(tmp_path, capsys):
    out = str(tmp_path)
    assert main(["wiener", "cm", "--phi", "basis:1", "--functional", "exp(-w1^2)", "--output", out] + FAST) == 0
    assert main(["gauss", "fourier", "--Q", "2", "--s", "i", "--xprime", "1", "--output", out]) == 0
    rep = _reports(out)["fourier-fresnel.json"]
    assert rep["discrepancy"] <= 1e-12 and rep["equation"] == "defDx" and rep["schema"] == 1
    assert "PASS" in capsys.readouterr().out


def test_unknown_subcommand_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["wiener", "nope"])
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err
    assert run("wiener nope", RunConfig()) == 2


@pytest.mark.parametrize("argv", [
    ["wiener", "cm", "--phi", "quadratic"],
    ["wiener", "cm", "--functional", "w1 +"],
    ["wiener", "cm", "--functional", "w1*w2"],
    ["wiener", "cf", "--n-samples", "0"],
    ["wiener", "cf", "--atoms", "1:1"],
    ["gauss", "fourier", "--Q", "-1"],
    ["gauss", "fourier", "--Q", "@/nonexistent/q.csv"],
    ["sdyson", "verify", "--action", "exp(w1)"],
    ["geom", "riemann", "--config", "/nonexistent.json"],
])
def test_input_errors_exit_2(argv, tmp_path):
    assert main(argv + ["--output", str(tmp_path)]) == 2


def test_failing_identity_exits_1(tmp_path, monkeypatch):
    from volforms.report import VerificationReport

    def failing(cfg, opts):
        return [VerificationReport("broken", "a1", 1.0, 0.0, 1.0, abs_tol=1e-8)]

    monkeypatch.setitem(cli.SUITES, ("wiener", "cf"), failing)
    assert run("wiener cf", RunConfig(output=str(tmp_path))) == 1
    assert _reports(str(tmp_path))["broken.json"]["pass"] is False


# ---------------------------------------------------------------- reports

SCHEMA_KEYS = {"schema", "identity", "equation", "lhs", "rhs", "discrepancy", "sigma_units", "threshold", "abs_tol",
               "pass", "seed", "grid_n", "details", "timestamp"}


def test_report_schema_and_reproducibility(tmp_path):
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    args = ["wiener", "cf", "--seed", "7"] + FAST
    assert main(args + ["--output", a]) == 0
    assert main(args + ["--output", b]) == 0
    ra, rb = _reports(a), _reports(b)
    assert ra.keys() == rb.keys()
    for name in ra:
        assert set(ra[name]) == SCHEMA_KEYS
        assert _strip(ra[name]) == _strip(rb[name])
        assert ra[name]["equation"] == "a1" and ra[name]["seed"] == 7


def test_byte_identical_apart_from_timestamp(tmp_path):
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    for out in (a, b):
        assert main(["gauss", "covariance", "--output", out] + FAST) == 0
    for name in os.listdir(a):
        la = [l for l in open(os.path.join(a, name)) if '"timestamp"' not in l]
        lb = [l for l in open(os.path.join(b, name)) if '"timestamp"' not in l]
        assert la == lb


def test_seed_changes_results(tmp_path):
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    main(["wiener", "cf", "--seed", "1", "--output", a] + FAST)
    main(["wiener", "cf", "--seed", "2", "--output", b] + FAST)
    assert _strip(_reports(a)["characteristic-functional.json"]) != _strip(_reports(b)["characteristic-functional.json"])


# ---------------------------------------------------------------- configuration precedence

def test_config_file_env_and_flags(tmp_path, monkeypatch):
    cfg_file = tmp_path / "cfg.json"
    cfg_file.write_text(json.dumps({"seed": 11, "n-samples": 3000, "grid_n": 64, "atoms": "1@1"}))
    out = str(tmp_path / "o")
    monkeypatch.setenv("VOLFORMS_SEED", "5")
    assert main(["wiener", "cf", "--config", str(cfg_file), "--output", out]) == 0
    rep = _reports(out)["characteristic-functional.json"]
    assert rep["seed"] == 11 and rep["grid_n"] == 64
    assert main(["wiener", "cf", "--config", str(cfg_file), "--seed", "3", "--output", out]) == 0
    assert _reports(out)["characteristic-functional.json"]["seed"] == 3
    cfg_file.write_text(json.dumps({"n_samples": 3000, "grid_n": 64}))
    assert main(["wiener", "cf", "--config", str(cfg_file), "--output", out]) == 0
    assert _reports(out)["characteristic-functional.json"]["seed"] == 5


def test_bad_config_keys(tmp_path, monkeypatch):
    f = tmp_path / "cfg.json"
    f.write_text(json.dumps({"colour": "blue"}))
    assert main(["wiener", "cf", "--config", str(f)]) == 2
    f.write_text("[1, 2]")
    assert main(["wiener", "cf", "--config", str(f)]) == 2
    monkeypatch.setenv("VOLFORMS_SEED", "abc")
    assert main(["wiener", "cf"]) == 2


def test_action_table_in_config(tmp_path):
    f = tmp_path / "cfg.json"
    f.write_text(json.dumps({"action": [[[2, 0], 0.5], [[0, 2], 1.0], [[4, 0], 0.1], [[0, 4], 0.1]],
                             "max_degree": 2}))
    out = str(tmp_path / "o")
    assert main(["sdyson", "verify", "--config", str(f), "--output", out]) == 0
    inner = _reports(out)["schwinger-dyson.json"]["details"]["cases"]
    assert len(inner) == 1 and inner[0]["details"]["n_cases"] == 12
    f.write_text(json.dumps({"action": [[]]}))
    assert main(["sdyson", "verify", "--config", str(f), "--output", out]) == 2


# ---------------------------------------------------------------- CSV dumps

def test_path_dump(tmp_path):
    target = tmp_path / "path.csv"
    assert main(["wiener", "cf", "--dump-paths", str(target), "--output", str(tmp_path)] + FAST) == 0
    rows = list(csv.reader(open(target)))
    assert rows[0] == ["t", "w"] and len(rows) == 66
    assert float(rows[1][0]) == 0.0 and float(rows[1][1]) == 0.0 and float(rows[-1][0]) == 1.0


def test_quadrature_dump(tmp_path):
    target = tmp_path / "quad.csv"
    assert main(["gauss", "fourier", "--Q", "2", "--xprime", "1", "--dump-quadrature", str(target),
                 "--output", str(tmp_path)]) == 0
    rows = list(csv.reader(open(target)))
    assert rows[0] == ["point", "weight", "value"] and len(rows) > 8
    pts = np.array([float(r[0]) for r in rows[1:]])
    w = np.array([float(r[1]) for r in rows[1:]])
    vals = np.array([complex(r[2]) for r in rows[1:]])
    # the Gauss-Hermite sum over pi^{1/2} reproduces the right side exp(-pi/2)
    assert abs(np.dot(w, vals) / np.sqrt(np.pi) - np.exp(-np.pi / 2)) < 1e-6
    assert pts.shape == w.shape


# ---------------------------------------------------------------- all = union of subcommands

def test_all_is_union_of_subcommands(tmp_path):
    cfg_all = RunConfig(n_samples=2000, grid_n=64, output=str(tmp_path / "all"))
    opts = argparse.Namespace(**OPTION_DEFAULTS)
    opts.points, opts.cases, opts.triples = 4, 5, 1
    reports_all = cli.collect("all", cfg_all, opts)
    union = []
    for group, names in COMMANDS.items():
        for name in names:
            union.extend(cli.collect(f"{group} {name}", cfg_all, opts))
    assert [r.identity for r in reports_all] == [r.identity for r in union]
    assert len({r.identity for r in union}) == len(union)
    for a, b in zip(reports_all, union):
        assert a.to_json() == b.to_json()
