import json
import math
import os

import pytest

from adsat import cli, formula


def run(argv, cwd):
    old = os.getcwd()
    os.chdir(cwd)
    try:
        return cli.main(argv)
    finally:
        os.chdir(old)


def test_gen_regular_counting(tmp_path):
    rc = run(["gen", "--regular", "3", "4", "--n", "12", "--seed", "7",
              "-o", "inst.json"], tmp_path)
    assert rc == 0
    doc = json.loads((tmp_path / "inst.json").read_text())
    assert doc["n_clauses"] == 16
    assert doc["meta"]["version"].startswith("adsat ")
    assert doc["meta"]["config"]["seed"] == 7


def test_byte_identical_rerun(tmp_path):
    for sub in ("a", "b"):
        d = tmp_path / sub
        d.mkdir()
        run(["gen", "--regular", "3", "4", "--n", "12", "--seed", "7",
             "-o", "inst.json"], d)
        run(["bp", "--instance", "inst.json", "--seed", "3",
             "-o", "bp.json"], d)
    assert (tmp_path / "a/inst.json").read_bytes() == \
        (tmp_path / "b/inst.json").read_bytes()
    assert (tmp_path / "a/bp.json").read_bytes() == \
        (tmp_path / "b/bp.json").read_bytes()


def test_bp_and_count_pipeline(tmp_path):
    run(["gen", "--regular", "3", "2", "--n", "15", "--seed", "1",
         "-o", "inst.json"], tmp_path)
    assert run(["bp", "--instance", "inst.json", "-o", "bp.json"],
               tmp_path) == 0
    payload = json.loads((tmp_path / "bp.json").read_text())
    assert payload["status"] == "converged"
    assert run(["count", "--instance", "inst.json", "-o", "c.json"],
               tmp_path) == 0
    cj = json.loads((tmp_path / "c.json").read_text())
    assert int(cj["count"]) > 0
    assert cj["entropy"] == pytest.approx(
        math.log(int(cj["count"])) / 15, rel=1e-9)


def test_sp_subcommand(tmp_path):
    run(["gen", "--regular", "3", "4", "--n", "60", "--seed", "2",
         "-o", "inst.json"], tmp_path)
    assert run(["sp", "--instance", "inst.json", "-o", "sp.json"],
               tmp_path) == 0
    payload = json.loads((tmp_path / "sp.json").read_text())
    assert payload["zero_start_is_fixed_point"] is True
    assert payload["trivial"] is True


def test_ldev_three_point_curve(tmp_path):
    rc = run(["ldev", "--regular-ensemble", "4", "--base", "bp",
              "--x", "-5,0,5", "--pop-size", "200", "--burn", "80",
              "--measure", "60", "--n-samples", "150", "-o", "ld.csv"],
             tmp_path)
    assert rc == 0
    lines = (tmp_path / "ld.csv").read_text().splitlines()
    assert lines[0] == "x,phi,s,l,physical"
    assert len(lines) == 4
    meta = json.loads((tmp_path / "ld.csv.meta.json").read_text())
    assert meta["config"]["pop_size"] == 200
    x0 = [float(v) for v in lines[2].split(",")]
    assert x0[0] == 0.0
    assert x0[1] == pytest.approx(4 * math.log(2), rel=1e-9)


def test_table1_subcommand(tmp_path):
    assert run(["table1", "--L", "2..4", "-o", "t.csv"], tmp_path) == 0
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert len(lines) == 4
    row4 = lines[3].split(",")
    assert float(row4[1]) == pytest.approx(0.5796, abs=1e-3)
    assert float(row4[2]) == pytest.approx(0.4488, abs=1e-3)


def test_eldf_and_strict_degeneracy(tmp_path):
    run(["gen", "--regular", "3", "4", "--n", "15", "--seed", "3",
         "-o", "inst.json"], tmp_path)
    assert run(["eldf", "--instance", "inst.json", "--samples", "40",
                "--bin-width", "0.02", "-o", "e.csv"], tmp_path) == 0
    # a starved node budget forces skipped samples; --strict turns that into 3
    rc = run(["eldf", "--instance", "inst.json", "--samples", "10",
              "--bin-width", "0.02", "--max-nodes", "2", "--strict",
              "-o", "e2.csv"], tmp_path)
    assert rc == cli.EXIT_DEGENERATE


def test_anneal_subcommand_emits_dimacs(tmp_path):
    run(["gen", "--regular", "3", "4", "--n", "9", "--seed", "4",
         "-o", "inst.json"], tmp_path)
    assert run(["anneal", "--instance", "inst.json", "--seed", "5",
                "-o", "a.json"], tmp_path) == 0
    payload = json.loads((tmp_path / "a.json").read_text())
    g2, neg2 = formula.from_dimacs(payload["dimacs"])
    assert g2.n_vars == 9
    assert payload["mc_steps_total"] >= 1


def test_ps_subcommand(tmp_path):
    assert run(["ps", "--L", "4", "--n", "6", "--instances", "4",
                "--rate", "1.3", "-o", "ps.csv"], tmp_path) == 0
    lines = (tmp_path / "ps.csv").read_text().splitlines()
    assert lines[0] == "L,N,I,p_s,stderr"


def test_config_errors_exit_2(tmp_path):
    assert run(["gen", "--n", "12"], tmp_path) == cli.EXIT_CONFIG
    assert run(["gen", "--regular", "3", "4", "--poisson", "1.0",
                "--n", "12"], tmp_path) == cli.EXIT_CONFIG
    assert run(["bp", "--instance", "missing.json"], tmp_path) == \
        cli.EXIT_CONFIG
    assert run(["ldev", "--regular-ensemble", "4", "--poisson", "1.0"],
               tmp_path) == cli.EXIT_CONFIG


def test_outdir_env(tmp_path, monkeypatch):
    outdir = tmp_path / "artifacts"
    outdir.mkdir()
    monkeypatch.setenv(cli.OUTDIR_ENV, str(outdir))
    run(["table1", "--L", "2..2"], tmp_path)
    assert (outdir / "table1.csv").exists()


def test_sp_scan_no_crossing_exit(tmp_path):
    rc = run(["sp-scan", "--alphas", "2.8,3.0", "--n", "600",
              "--max-sweeps", "300", "-o", "scan.csv"], tmp_path)
    assert rc == 1
