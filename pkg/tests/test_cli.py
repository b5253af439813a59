"""Command-line runner: manifests, CSV artifacts, exit codes, reproducibility."""

import json
import subprocess
import sys

from fraclap.cli import main


def run_cli(args):
    return main(list(args))


def load_manifest(outdir):
    with (outdir / "manifest.json").open() as fh:
        return json.load(fh)


def test_tau0_command(tmp_path):
    out = tmp_path / "t"
    assert run_cli(["tau0", "--alpha", "0.5", "--tol", "1e-10", "--out", str(out)]) == 0
    m = load_manifest(out)
    assert abs(m["tau0"] + 0.5) < 1e-8
    assert m["residual"] < 1e-10
    assert abs(m["p_star"] - 3.0) < 1e-7
    assert "deviation_from_alpha_minus_1" in m


def test_ctau_grid(tmp_path):
    out = tmp_path / "c"
    assert run_cli(
        ["ctau", "--alpha", "0.5", "--tau-grid=-0.9:-0.1:0.1", "--out", str(out)]
    ) == 0
    lines = (out / "ctau.csv").read_text().splitlines()
    assert lines[0] == "tau,C,C1,C2"
    assert len(lines) == 10
    m = load_manifest(out)
    assert m["convex_everywhere"] is True


def test_regime_command(tmp_path):
    out = tmp_path / "r"
    assert run_cli(
        ["regime", "--alpha", "0.5", "--p", "4", "--gamma", "-1.2", "--out", str(out)]
    ) == 0
    m = load_manifest(out)
    assert m["zone"] == "weak_source"
    assert abs(m["predicted_exponent"] + 0.2) < 1e-9


def test_regime_ambiguity_exit_code(tmp_path):
    out = tmp_path / "amb"
    code = run_cli(["regime", "--alpha", "0.5", "--p", "2.0", "--out", str(out)])
    assert code == 4
    err = json.loads((out / "error.json").read_text())
    assert err["error"] == "AmbiguousRegimeError"


def test_config_error_exit_code(tmp_path):
    out = tmp_path / "bad"
    code = run_cli(["regime", "--alpha", "1.5", "--p", "2.5", "--out", str(out)])
    assert code == 2


def test_missing_required_from_config(tmp_path):
    assert run_cli(["tau0", "--out", str(tmp_path / "x")]) == 2


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("alpha = 0.5\ntol = 1e-8\n# comment\n")
    out1 = tmp_path / "o1"
    assert run_cli(["tau0", "--config", str(cfg), "--out", str(out1)]) == 0
    m1 = load_manifest(out1)
    assert m1["config"]["alpha"] == 0.5
    out2 = tmp_path / "o2"
    assert run_cli(
        ["tau0", "--config", str(cfg), "--alpha", "0.25", "--out", str(out2)]
    ) == 0
    assert abs(load_manifest(out2)["tau0"] + 0.75) < 1e-7


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("bogus = 1\n")
    assert run_cli(["tau0", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_verify_prop32_command(tmp_path):
    out = tmp_path / "vp"
    assert run_cli(["verify-prop32", "--alpha", "0.5", "--tau", "-0.8", "--out", str(out)]) == 0
    m = load_manifest(out)
    assert m["case"] == "i" and m["passed"] is True


def test_verify_barriers_command(tmp_path):
    out = tmp_path / "vb"
    assert run_cli(["verify-barriers", "--alpha", "0.5", "--p", "2.5", "--out", str(out)]) == 0
    m = load_manifest(out)
    assert m["passed"] is True
    assert m["super"]["passed"] and m["sub"]["passed"]


def test_solve_command(tmp_path):
    out = tmp_path / "s"
    code = run_cli(
        ["solve", "--alpha", "0.5", "--p", "2", "--gamma", "-0.5", "--n", "151",
         "--out", str(out)]
    )
    assert code == 0
    lines = (out / "solution.csv").read_text().splitlines()
    assert lines[0] == "x,d,value"
    m = load_manifest(out)
    assert m["trace"]["converged"] is True


def test_blowup_command_small(tmp_path):
    out = tmp_path / "b"
    code = run_cli(
        ["blowup", "--alpha", "0.5", "--p", "2.5", "--n", "501",
         "--levels", "8,16,32", "--fit-lo", "0.05", "--fit-hi", "0.3",
         "--fit-tol", "0.9", "--out", str(out)]
    )
    assert code == 0
    m = load_manifest(out)
    assert m["monotone_in_levels"] and m["sandwich_ok"]
    assert (out / "solution.csv").exists()
    assert (out / "level_8.csv").exists()


def test_sweep_command(tmp_path):
    out = tmp_path / "sw"
    code = run_cli(
        ["sweep", "--alpha", "0.5", "--p-grid", "1.5:3.5:1.0",
         "--tau-grid=-0.8:-0.2:0.3", "--out", str(out)]
    )
    assert code == 0
    lines = (out / "zone_map.csv").read_text().splitlines()
    assert lines[0] == "p,tau,zone,role,mu,passed,regime,predicted_exponent,note"
    assert len(lines) == 1 + 3 * 3
    m = load_manifest(out)
    assert m["n_points"] == 9


def test_manifest_reproducible_modulo_timestamp(tmp_path):
    out1, out2 = tmp_path / "m1", tmp_path / "m2"
    for out in (out1, out2):
        assert run_cli(["tau0", "--alpha", "0.5", "--out", str(out)]) == 0
    m1, m2 = load_manifest(out1), load_manifest(out2)
    m1.pop("timestamp"), m2.pop("timestamp")
    m1["config"].pop("out"), m2["config"].pop("out")
    assert json.dumps(m1, sort_keys=True) == json.dumps(m2, sort_keys=True)


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "fraclap.cli", "tau0", "--alpha", "0.5",
         "--out", str(tmp_path / "ep")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0


def test_convergence_failure_exit_code(tmp_path):
    out = tmp_path / "cv"
    code = run_cli(
        ["blowup", "--alpha", "0.5", "--p", "2.5", "--n", "301", "--levels", "8",
         "--max-iters", "2", "--out", str(out)]
    )
    assert code == 3
    err = json.loads((out / "error.json").read_text())
    assert err["error"] == "ConvergenceError"
