"""Command line interface.

Subcommands: simulate, detect, adapt-ci, theory-ci, pipeline, report.
Exit codes: 0 success, 1 usage/configuration error, 2 data error,
3 numeric error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from .adaptive import AdaptiveConfig, adaptive_ci
from .errors import ConfigError, DataError, NumericError
from .limits import (
    RegimeBSpec,
    RegimeCSpec,
    brownian_cov,
    make_regime_b_cov,
    model_diagnostics,
    model_gamma_p,
    sample_regime_b,
    sample_regime_c,
    to_tau_units,
)
from .models import arma11_model, generate, ma_poly_model, mean_config_presets
from .panel import PanelData, detect_change_point
from .pipeline import PipelineReport, RollingConfig, load_prices, log_returns, partition_and_ci, rolling_detect


def _read_panel(path):
    if path in (None, "-"):
        return PanelData.from_csv(sys.stdin)
    if not Path(path).exists():
        raise DataError(f"input file not found: {path}")
    return PanelData.from_csv(path)


def _out_dir(args):
    if getattr(args, "output", None) in (None, "-"):
        return None
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args):
    mean = mean_config_presets(args.preset, args.n, args.p, model=args.model)
    if args.tau is not None:
        mean.tau = args.tau
    panel = generate(args.model, args.n, args.p, mean, args.innovation, args.seed)
    if args.output in (None, "-"):
        panel.to_csv(sys.stdout)
    else:
        panel.to_csv(args.output)
    return 0


def cmd_detect(args):
    panel = _read_panel(args.input)
    fit = detect_change_point(panel, args.trim)
    print(fit.to_json(indent=2))
    out = _out_dir(args)
    if out is not None:
        from .plots import plot_profile

        (out / "fit.json").write_text(fit.to_json(indent=2) + "\n")
        fit.profile_frame(panel.time_labels).to_csv(out / "profile.csv", index=False, lineterminator="\n")
        plot_profile(fit, out / "profile.png", panel.time_labels)
    return 0


def cmd_adapt_ci(args):
    panel = _read_panel(args.input)
    fit = detect_change_point(panel, args.trim)
    config = AdaptiveConfig(
        trim=args.trim,
        alpha=args.alpha,
        bandwidth=args.bandwidth,
        max_lag=args.max_lag,
        threads=args.threads,
        base_seed=args.seed,
        method=args.method,
    )
    result = adaptive_ci(panel, fit, args.level, args.reps, config)
    print(result.to_json(indent=2))
    out = _out_dir(args)
    if out is not None:
        from .plots import plot_h_histogram

        (out / "interval.json").write_text(result.to_json(indent=2) + "\n")
        pd.DataFrame(result.h_histogram(), columns=["h", "count"]).to_csv(
            out / "h_histogram.csv", index=False, lineterminator="\n"
        )
        plot_h_histogram(result, out / "h_histogram.png")
    return 0


def _theory_b(args):
    if args.sigma_sq is not None:
        cov_fn = brownian_cov(args.sigma_sq)
        gamma_p = None
        delta_sq = None
    else:
        if args.model in ("1",):
            model = arma11_model(args.p)
        else:
            model = ma_poly_model(args.p, args.model[-1])
        mean = mean_config_presets(args.preset, args.n, args.p, model=args.model)
        d = mean.mu1 - mean.mu2
        cov_fn = make_regime_b_cov(model, d)
        gamma_p = model_gamma_p(model)
        delta_sq = float((d ** 2).sum())
    spec = RegimeBSpec(cov_fn, delta=args.grid_step, half_width=args.half_width)
    draws = sample_regime_b(spec, args.reps, np.random.default_rng(args.seed))
    lo_q, hi_q = (1 - args.level) / 2, (1 + args.level) / 2
    qs = np.quantile(draws, [lo_q, 0.5, hi_q])
    payload = {
        "regime": "b",
        "reps": args.reps,
        "level": args.level,
        "offset_quantiles": {"lo": qs[0], "median": qs[1], "hi": qs[2]},
    }
    if gamma_p is not None:
        tau_draws = args.tau + to_tau_units(draws, args.n, gamma_p, delta_sq)
        t_lo, t_hi = np.quantile(tau_draws, [lo_q, hi_q])
        payload["gamma_p"] = gamma_p
        payload["shift_norm_sq"] = delta_sq
        payload["tau_interval"] = [max(t_lo, 0.0), min(t_hi, 1.0)]
    print(json.dumps(payload, indent=2))
    return 0


def _theory_c(args):
    spec = RegimeCSpec(
        c1=args.c1,
        w_cov=lambda t1, t2: np.where(np.asarray(t1) == np.asarray(t2), args.sigma_w_sq, 0.0),
        horizon=args.horizon,
    )
    draws = sample_regime_c(spec, args.reps, np.random.default_rng(args.seed))
    lo_q, hi_q = (1 - args.level) / 2, (1 + args.level) / 2
    qs = np.quantile(draws, [lo_q, 0.5, hi_q])
    payload = {
        "regime": "c",
        "reps": args.reps,
        "level": args.level,
        "offset_quantiles": {"lo": int(qs[0]), "median": int(qs[1]), "hi": int(qs[2])},
        "zero_mass": float(np.mean(draws == 0)),
    }
    if args.n:
        payload["tau_interval"] = [
            max(args.tau + qs[0] / args.n, 0.0),
            min(args.tau + qs[2] / args.n, 1.0),
        ]
    print(json.dumps(payload, indent=2))
    return 0


def cmd_theory_ci(args):
    if args.regime == "b":
        return _theory_b(args)
    return _theory_c(args)


def cmd_pipeline(args):
    prices = load_prices(args.input, args.min_coverage)
    config = RollingConfig(
        window_len=args.window_len,
        step=args.step,
        min_repeats=args.min_repeats,
        trim=args.trim,
        level=args.level,
        ci_reps=args.reps,
        fuzz=args.fuzz,
        threads=args.threads,
        seed=args.seed,
        adaptive=AdaptiveConfig(trim=args.trim, alpha=args.alpha),
    )
    returns = log_returns(prices)
    candidates = rolling_detect(returns, config)
    report = partition_and_ci(returns, candidates, config)
    print(report.to_json(indent=2))
    out = _out_dir(args)
    if out is not None:
        from .plots import plot_pipeline

        (out / "report.json").write_text(report.to_json(indent=2) + "\n")
        pd.DataFrame(report.candidates).to_csv(out / "candidates.csv", index=False, lineterminator="\n")
        pd.DataFrame(report.intervals).to_csv(out / "intervals.csv", index=False, lineterminator="\n")
        plot_pipeline(returns, report, out / "pipeline.png")
    return 0


def cmd_report(args):
    src = Path(args.input)
    if not src.exists():
        raise DataError(f"input directory not found: {args.input}")
    files = sorted(src.glob("*.json")) if src.is_dir() else [src]
    rows = []
    for f in files:
        try:
            d = json.loads(f.read_text())
        except (OSError, json.JSONDecodeError):
            continue
        if "tau_hat" not in d:
            continue
        row = {
            "file": f.name,
            "kind": "interval" if "q_lo" in d else "fit",
            "n": d.get("n"),
            "tau_hat": d.get("tau_hat"),
            "level": d.get("level"),
            "q_lo": d.get("q_lo"),
            "q_hi": d.get("q_hi"),
        }
        if "ci_fraction" in d:
            row["ci_lo"] = d["ci_fraction"][0]
            row["ci_hi"] = d["ci_fraction"][1]
        rows.append(row)
    if not rows:
        raise DataError("no usable replicate JSON files found")
    df = pd.DataFrame(rows)
    df["group"] = df["kind"] + "/n=" + df["n"].astype(str)
    summary = (
        df.groupby("group")
        .agg(
            replicates=("tau_hat", "size"),
            mean_tau=("tau_hat", "mean"),
            sd_tau=("tau_hat", "std"),
            mean_ci_lo=("ci_lo", "mean") if "ci_lo" in df else ("tau_hat", "size"),
            mean_ci_hi=("ci_hi", "mean") if "ci_hi" in df else ("tau_hat", "size"),
        )
        .reset_index()
    )
    out = _out_dir(args) or Path(".")
    summary.to_csv(out / "table.csv", index=False, lineterminator="\n")
    df.to_csv(out / "replicates.csv", index=False, lineterminator="\n")
    from .plots import plot_report

    plot_report(df, out / "report.png")
    print(summary.to_csv(index=False, lineterminator="\n"))
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="panelbreak",
                                 description="Break-point estimation for high-dimensional panels")
    sub = ap.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate a synthetic panel CSV")
    sim.add_argument("--preset", default="T2", help="mean preset (T1, T2, T6, T7, T8, T9)")
    sim.add_argument("--model", default="1", choices=["1", "2a", "2b"])
    sim.add_argument("--n", type=int, default=500)
    sim.add_argument("--p", type=int, default=23)
    sim.add_argument("--tau", type=float, default=None)
    sim.add_argument("--innovation", default="gaussian",
                     choices=["gaussian", "centered_inv_beta", "zero"])
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--output", default="-")
    sim.set_defaults(func=cmd_simulate)

    det = sub.add_parser("detect", help="single-window break estimate with profile dump")
    det.add_argument("--input", default="-")
    det.add_argument("--trim", type=float, default=0.05)
    det.add_argument("--output", default=None, help="directory for fit.json/profile.csv/profile.png")
    det.set_defaults(func=cmd_detect)

    aci = sub.add_parser("adapt-ci", help="adaptive confidence interval for the break")
    aci.add_argument("--input", default="-")
    aci.add_argument("--trim", type=float, default=0.05)
    aci.add_argument("--alpha", type=float, default=1.0)
    aci.add_argument("--bandwidth", type=int, default=None)
    aci.add_argument("--max-lag", type=int, default=None)
    aci.add_argument("--level", type=float, default=0.95)
    aci.add_argument("--reps", type=int, default=1000)
    aci.add_argument("--threads", type=int, default=1)
    aci.add_argument("--seed", type=int, default=None)
    aci.add_argument("--method", default="auto",
                     choices=["auto", "exact-cholesky", "circulant-embedding"])
    aci.add_argument("--output", default=None, help="directory for interval.json/h_histogram.*")
    aci.set_defaults(func=cmd_adapt_ci)

    tci = sub.add_parser("theory-ci", help="sample the limiting offset distributions")
    tci.add_argument("--regime", choices=["b", "c"], required=True)
    tci.add_argument("--model", default="1", choices=["1", "2a", "2b"])
    tci.add_argument("--preset", default="T6")
    tci.add_argument("--n", type=int, default=1000)
    tci.add_argument("--p", type=int, default=32)
    tci.add_argument("--tau", type=float, default=0.5)
    tci.add_argument("--level", type=float, default=0.95)
    tci.add_argument("--reps", type=int, default=5000)
    tci.add_argument("--seed", type=int, default=None)
    tci.add_argument("--grid-step", type=float, default=0.01)
    tci.add_argument("--half-width", type=float, default=50.0)
    tci.add_argument("--sigma-sq", type=float, default=None,
                     help="regime b: use a plain Brownian covariance with this variance rate")
    tci.add_argument("--c1", type=float, default=1.0, help="regime c drift constant")
    tci.add_argument("--sigma-w-sq", type=float, default=1.0,
                     help="regime c: variance of the i.i.d. walk component")
    tci.add_argument("--horizon", type=int, default=200)
    tci.set_defaults(func=cmd_theory_ci)

    pip = sub.add_parser("pipeline", help="rolling screen + per-partition intervals on a price CSV")
    pip.add_argument("--input", required=True)
    pip.add_argument("--min-coverage", type=float, default=0.9)
    pip.add_argument("--window-len", type=int, default=104)
    pip.add_argument("--step", type=int, default=13)
    pip.add_argument("--min-repeats", type=int, default=2)
    pip.add_argument("--trim", type=float, default=0.05)
    pip.add_argument("--level", type=float, default=0.95)
    pip.add_argument("--reps", type=int, default=1000)
    pip.add_argument("--alpha", type=float, default=1.0)
    pip.add_argument("--fuzz", type=int, default=0)
    pip.add_argument("--threads", type=int, default=1)
    pip.add_argument("--seed", type=int, default=None)
    pip.add_argument("--output", default=None, help="directory for report.json/csv/png")
    pip.set_defaults(func=cmd_pipeline)

    rep = sub.add_parser("report", help="aggregate replicate JSON outputs into a summary table")
    rep.add_argument("--input", required=True, help="directory of detect/adapt-ci JSON outputs")
    rep.add_argument("--output", default=None)
    rep.set_defaults(func=cmd_report)

    return ap


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DataError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except (NumericError, np.linalg.LinAlgError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
