"""Command-line entry points: artifacts on disk, JSON on stdout, exit codes."""

import json
import shutil
import subprocess

import numpy as np
import pandas as pd
import pytest

from panelbreak.cli import main


def _simulate(tmp_path, name="panel.csv", n=120, p=3, seed=1, preset="T2"):
    out = tmp_path / name
    rc = main([
        "simulate", "--preset", preset, "--n", str(n), "--p", str(p),
        "--seed", str(seed), "--output", str(out),
    ])
    assert rc == 0
    return out


def test_simulate_stdout_csv_shape(capsys):
    assert main(["simulate", "--preset", "T1", "--n", "8", "--p", "2",
                 "--seed", "3"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "date,s1,s2"
    assert len(lines) == 9


def test_simulate_then_detect_recovers_central_break(tmp_path, capsys):
    path = _simulate(tmp_path, n=500, p=23, seed=1, preset="T2")
    df = pd.read_csv(path)
    assert df.shape == (500, 24)
    assert main(["detect", "--input", str(path), "--trim", "0.05"]) == 0
    fit = json.loads(capsys.readouterr().out)
    assert abs(fit["tau_hat"] - 0.5) <= 0.02


def test_detect_writes_artifact_directory(tmp_path, capsys):
    path = _simulate(tmp_path)
    out = tmp_path / "det"
    assert main(["detect", "--input", str(path), "--output", str(out)]) == 0
    capsys.readouterr()
    assert (out / "fit.json").exists()
    assert (out / "profile.png").stat().st_size > 0
    prof = pd.read_csv(out / "profile.csv")
    assert list(prof.columns) == ["date", "criterion"]
    fit = json.loads((out / "fit.json").read_text())
    assert fit["n"] == 120


def test_adapt_ci_writes_interval_artifacts(tmp_path, capsys):
    path = _simulate(tmp_path, n=80, p=3)
    out = tmp_path / "aci"
    rc = main([
        "adapt-ci", "--input", str(path), "--reps", "200", "--seed", "9",
        "--threads", "2", "--output", str(out),
    ])
    assert rc == 0
    stdout_payload = json.loads(capsys.readouterr().out)
    disk_payload = json.loads((out / "interval.json").read_text())
    assert stdout_payload == disk_payload
    for key in ("tau_hat", "level", "R", "ci_fraction", "h_histogram"):
        assert key in disk_payload
    assert disk_payload["R"] == 200
    hist = pd.read_csv(out / "h_histogram.csv")
    assert {"h", "count"} <= set(hist.columns)
    assert hist["count"].sum() == 200
    assert (out / "h_histogram.png").stat().st_size > 0


def test_theory_ci_regime_b_brownian(capsys):
    rc = main([
        "theory-ci", "--regime", "b", "--sigma-sq", "1.0", "--grid-step", "0.5",
        "--half-width", "8", "--reps", "400", "--seed", "2",
    ])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["regime"] == "b"
    q = payload["offset_quantiles"]
    assert q["lo"] <= q["median"] <= q["hi"]
    assert abs(q["median"]) <= 1.5


def test_theory_ci_regime_b_model_tau_units(capsys):
    rc = main([
        "theory-ci", "--regime", "b", "--model", "1", "--preset", "T2",
        "--n", "200", "--p", "4", "--grid-step", "0.5", "--half-width", "10",
        "--reps", "300", "--seed", "5",
    ])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    lo, hi = payload["tau_interval"]
    assert 0.0 <= lo <= 0.5 <= hi <= 1.0
    assert payload["gamma_p"] > 0


def test_theory_ci_regime_c_strong_drift(capsys):
    rc = main([
        "theory-ci", "--regime", "c", "--c1", "1000", "--sigma-w-sq", "0.01",
        "--horizon", "4", "--reps", "200", "--seed", "3",
    ])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["zero_mass"] == 1.0
    assert payload["offset_quantiles"]["median"] == 0


def test_exit_codes(tmp_path, capsys):
    # missing input file: data error
    assert main(["detect", "--input", str(tmp_path / "nope.csv")]) == 2
    # bad configuration: trim out of range
    path = _simulate(tmp_path, n=40, p=2)
    assert main(["detect", "--input", str(path), "--trim", "0.6"]) == 1
    # unknown preset name
    assert main(["simulate", "--preset", "T4", "--n", "20", "--p", "2"]) == 1
    # argparse rejection is normalized to a config failure
    assert main(["detect", "--bogus"]) == 1
    capsys.readouterr()


def test_pipeline_command_writes_report(tmp_path, capsys):
    rng = np.random.default_rng(6)
    n, p = 130, 3
    rets = 0.01 * rng.standard_normal((n - 1, p))
    rets[64:] += 0.08
    logp = np.vstack([np.zeros(p), np.cumsum(rets, axis=0)])
    df = pd.DataFrame(np.exp(logp), columns=[f"s{i}" for i in range(p)])
    df.insert(0, "date", [f"d{t:03d}" for t in range(n)])
    src = tmp_path / "prices.csv"
    df.to_csv(src, index=False)

    out = tmp_path / "pipe"
    rc = main([
        "pipeline", "--input", str(src), "--window-len", "50", "--step", "10",
        "--trim", "0.1", "--reps", "100", "--seed", "8", "--output", str(out),
    ])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert set(payload) == {"candidates", "partitions", "intervals", "segment_means"}
    assert (out / "report.json").exists()
    assert (out / "candidates.csv").exists()
    assert (out / "intervals.csv").exists()
    assert (out / "pipeline.png").stat().st_size > 0


def test_report_aggregates_json_directory(tmp_path, capsys):
    path = _simulate(tmp_path, n=60, p=2, preset="T1")
    rep_dir = tmp_path / "reps"
    for seed in (1, 2):
        assert main([
            "adapt-ci", "--input", str(path), "--reps", "150",
            "--seed", str(seed), "--output", str(rep_dir / f"r{seed}"),
        ]) == 0
        shutil.move(
            str(rep_dir / f"r{seed}" / "interval.json"),
            str(rep_dir / f"interval{seed}.json"),
        )
    capsys.readouterr()
    out = tmp_path / "summary"
    assert main(["report", "--input", str(rep_dir), "--output", str(out)]) == 0
    stdout = capsys.readouterr().out
    assert "mean_tau" in stdout
    table = pd.read_csv(out / "table.csv")
    assert table["replicates"].sum() == 2
    reps = pd.read_csv(out / "replicates.csv")
    assert len(reps) == 2
    assert (out / "report.png").stat().st_size > 0


def test_report_rejects_empty_directory(tmp_path, capsys):
    (tmp_path / "empty").mkdir()
    assert main(["report", "--input", str(tmp_path / "empty")]) == 2
    capsys.readouterr()


def test_console_script_help_runs():
    exe = shutil.which("panelbreak")
    assert exe, "console script should be installed"
    proc = subprocess.run([exe, "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "simulate" in proc.stdout
