"""Command-line interface: ``gbsvr <subcommand> ...``.

Exit codes: 0 success, 2 bad arguments, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import evaluation as ev
from .data import DataError, fit_standardize, load_csv, load_series, train_test_split, write_csv
from .datagen import NOISE_TYPES, NoiseSpec, SyntheticSpec, gen_synthetic
from .granulation import GranulationConfig, generate_balls
from .kernel import KernelSpec
from .model import GbsvrModel, GbsvrParams, fit
from .solver import STEP_RULES, NumericalError, SolverConfig
from .timeseries import WindowSpec, chrono_split, windowize

EXIT_OK, EXIT_ARGS, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


class UsageError(Exception):
    """Invalid argument combination detected after parsing."""


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


# -- shared flag groups -----------------------------------------------------

def _common(p):
    p.add_argument("--seed", type=int, default=0)


def _data_source(p, required=False):
    g = p.add_argument_group("data source (CSV, last column is the target, or synthetic)")
    g.add_argument("--data", type=Path, required=required, help="input CSV")
    g.add_argument("--header", action="store_true", help="CSV has a header row")
    if not required:
        g.add_argument("--family", choices=("A", "B"), default="A", help="synthetic family when --data is absent")
        g.add_argument("--m", type=int, default=1000, help="synthetic sample count")
        g.add_argument("--noise-type", type=int, choices=sorted(NOISE_TYPES), default=1)


def _granulation_flags(p):
    p.add_argument("--purity", type=float, default=0.95)
    p.add_argument("--min-points", type=int, default=2)
    p.add_argument("--labels", type=int, default=10, help="quantile label count k")
    p.add_argument("--radius", choices=("mean", "max"), default="mean")


def _model_flags(p):
    _granulation_flags(p)
    p.add_argument("--kernel", choices=("linear", "rbf"), default="rbf")
    p.add_argument("--sigma", type=float, default=0.3)
    p.add_argument("--unsquared", action="store_true", help="rbf with the unsquared distance in the exponent")
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--C", type=float, default=10.0)
    p.add_argument("--max-iter", type=int, default=10000)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--step-rule", choices=STEP_RULES, default="accel")


def _scale_flag(p):
    p.add_argument("--metrics-scale", choices=("standardized", "original"), default="standardized")


def _eval_flags(p):
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--grid", choices=sorted(ev.GRIDS), default="desk")
    p.add_argument("--no-tune", action="store_true", help="use the model flags instead of a grid search")
    p.add_argument("--inner-folds", type=int, default=None,
                   help="select hyperparameters by mean R2 over this many inner folds (default: one 25%% holdout)")


# -- argument -> object helpers ---------------------------------------------

def _kernel(a) -> KernelSpec:
    return KernelSpec(a.kernel, a.sigma, squared_norm=not a.unsquared)


def _params(a) -> GbsvrParams:
    return GbsvrParams(
        purity=a.purity, min_points=a.min_points, label_count=a.labels, epsilon=a.epsilon, C=a.C,
        kernel=_kernel(a), seed=a.seed, radius=a.radius,
        solver=SolverConfig(max_iter=a.max_iter, tol=a.tol, step_rule=a.step_rule),
    )


def _dataset(a):
    if a.data is not None:
        return load_csv(a.data, has_header=a.header)
    return gen_synthetic(SyntheticSpec(a.family, a.m, NoiseSpec(a.noise_type, a.seed)))


def _dataset_meta(a) -> dict:
    if a.data is not None:
        return {"data": str(a.data)}
    return {"family": a.family, "m": a.m, "noise_type": a.noise_type}


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- subcommands ------------------------------------------------------------

def cmd_synth(a) -> int:
    d = gen_synthetic(SyntheticSpec(a.family, a.m, NoiseSpec(a.noise_type, a.seed), a.noise_scale))
    write_csv(a.out, d, header=True)
    print(f"wrote {d.m} rows to {a.out}")
    return EXIT_OK


def cmd_granulate(a) -> int:
    d = _dataset(a)
    z, _ = fit_standardize(d) if d.m >= 2 else (d, None)
    cfg = GranulationConfig(a.purity, a.min_points, a.labels, a.seed, a.radius)
    balls = generate_balls(z, cfg)
    if a.out:
        balls.to_csv(a.out)
    print(f"m={d.m} balls={len(balls)} ratio={len(balls) / d.m:.4f} "
          f"objective={balls.objective():.6g} flagged={balls.flagged}")
    return EXIT_OK


def cmd_train(a) -> int:
    d = _dataset(a)
    params = _params(a)
    if a.trace_out:
        params = replace(params, solver=replace(params.solver, trace=True))
    test = None
    if a.test_fraction > 0:
        d, test = train_test_split(d, 1.0 - a.test_fraction, shuffle=True, seed=a.seed)
    model = fit(d, params)
    du = model.duals
    print(f"balls={model.n_balls} iterations={du.iterations} converged={du.converged} "
          f"objective={du.objective:.10g} pg_norm={du.kkt_residual:.3g} "
          f"norm_w={model.weights.norm_w:.6g} bias={model.weights.bias:.6g} "
          f"clamped={model.weights.clamped} train_seconds={model.train_seconds:.4f}")
    if test is not None:
        rep = ev.evaluate(model, test, a.metrics_scale)
        print(f"test r2={rep.r2:.6f} mae={rep.mae:.6g} mse={rep.mse:.6g} rmse={rep.rmse:.6g}")
    if a.model_out:
        model.save(a.model_out)
        print(f"model written to {a.model_out}")
    if a.trace_out:
        with open(a.trace_out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iteration", "objective", "pg_norm"])
            for i, (f, pg) in enumerate(du.trace):
                w.writerow([i, f"{f:.17g}", f"{pg:.17g}"])
    return EXIT_OK


def cmd_predict(a) -> int:
    model = GbsvrModel.load(a.model)
    l = model.ball_set.centers.shape[1]
    if a.features_only:
        try:
            rows = np.loadtxt(a.data, delimiter=",", ndmin=2, skiprows=1 if a.header else 0)
        except ValueError as exc:
            raise DataError(f"{a.data}: {exc}") from None
        if rows.size == 0 or rows.shape[1] != l:
            raise DataError(f"expected {l} feature columns")
        X, y = rows, None
    else:
        d = load_csv(a.data, has_header=a.header)
        X, y = d.features, d.targets
    pred = model.predict(X)
    if a.out:
        np.savetxt(a.out, pred, fmt="%.12g", header="prediction", comments="")
    else:
        for v in pred:
            print(f"{v:.12g}")
    if y is not None and y.size > 1 and np.ptp(y) > 0:
        if a.metrics_scale == "standardized":
            st = model.standardization
            rep = ev.metrics(st.transform_targets(y), st.transform_targets(pred))
        else:
            rep = ev.metrics(y, pred)
        print(f"r2={rep.r2:.6f} mae={rep.mae:.6g} mse={rep.mse:.6g} rmse={rep.rmse:.6g}", file=sys.stderr)
    return EXIT_OK


def cmd_bench(a) -> int:
    d = _dataset(a)
    methods = tuple(a.methods.split(","))
    for mth in methods:
        if mth not in ev.METHODS:
            raise UsageError(f"unknown method {mth!r}")
    fixed = None
    if a.no_tune:
        fixed = {"gbsvr": _params(a), "svr": ev.SvrParams(a.epsilon, a.C, _kernel(a))}
    results = ev.crossval_bench(d, methods, ev.GRIDS[a.grid], a.folds, tuple(a.noise_fractions), a.seed,
                                scale=a.metrics_scale, fixed=fixed, inner_folds=a.inner_folds)
    print(ev.format_table(results))
    out = _out_dir(a.out)
    ev.write_summary_csv(results, out / "summary.csv")
    config = {"command": "bench", **_dataset_meta(a), "methods": list(methods), "folds": a.folds,
              "noise_fractions": list(a.noise_fractions), "seed": a.seed, "metrics_scale": a.metrics_scale,
              "inner_folds": a.inner_folds,
              "grid": None if a.no_tune else ev.GRIDS[a.grid].to_dict(),
              "fixed": None if fixed is None else {k: v.to_dict() for k, v in fixed.items()}}
    ev.write_run_json(ev.run_document(config, results), out / "run.json")
    return EXIT_OK


def cmd_ablate(a) -> int:
    d = _dataset(a)
    params = _params(a)
    rows = ev.ablation_sweep(d, a.axis, a.values, params, a.folds, a.seed, a.metrics_scale)
    print(f"{a.axis:>10}  {'R2':>8}  {'MAE':>8}  {'balls':>8}  {'train_s':>8}")
    for r in rows:
        print(f"{r.value:>10.4g}  {r.r2:8.4f}  {r.mae:8.4f}  {r.ball_count:8.1f}  {r.train_seconds:8.3f}")
    out = _out_dir(a.out)
    ev.write_ablation_csv(rows, a.axis, out / "summary.csv")
    config = {"command": "ablate", **_dataset_meta(a), "axis": a.axis, "values": list(a.values),
              "folds": a.folds, "seed": a.seed, "params": params.to_dict(), "metrics_scale": a.metrics_scale}
    doc = ev.run_document(config)
    doc["rows"] = [r.__dict__ for r in rows]
    ev.write_run_json(doc, out / "run.json")
    return EXIT_OK


def cmd_tswindow(a) -> int:
    series = load_series(a.series, has_header=a.header)
    d = windowize(series, WindowSpec(a.window, a.horizon))
    train, test = chrono_split(d, a.train_fraction)
    out = _out_dir(a.out)
    write_csv(out / "train.csv", train, header=True)
    write_csv(out / "test.csv", test, header=True)
    print(f"rows={d.m} train={train.m} test={test.m} window={a.window} horizon={a.horizon}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gbsvr", description="Granular-ball support vector regression toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic Type A/B dataset")
    _common(p)
    p.add_argument("--family", choices=("A", "B"), default="A")
    p.add_argument("--m", type=int, default=1000)
    p.add_argument("--noise-type", type=int, choices=sorted(NOISE_TYPES), default=1)
    p.add_argument("--noise-scale", type=float, default=1.0)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("granulate", help="granulate a dataset and export the balls")
    _common(p)
    _data_source(p)
    _granulation_flags(p)
    p.add_argument("--out", type=Path, help="ball CSV")
    p.set_defaults(func=cmd_granulate)

    p = sub.add_parser("train", help="fit a GBSVR model")
    _common(p)
    _data_source(p)
    _model_flags(p)
    _scale_flag(p)
    p.add_argument("--test-fraction", type=float, default=0.0, help="hold out this share and report metrics")
    p.add_argument("--model-out", type=Path)
    p.add_argument("--trace-out", type=Path, help="CSV of iteration, objective, pg_norm")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict with a saved model")
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--header", action="store_true")
    p.add_argument("--features-only", action="store_true", help="CSV has no target column")
    _scale_flag(p)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("bench", help="cross-validated GBSVR vs SVR with training-noise injection")
    _common(p)
    _data_source(p)
    _model_flags(p)
    _eval_flags(p)
    _scale_flag(p)
    p.add_argument("--methods", default="gbsvr,svr")
    p.add_argument("--noise-fractions", type=_floats, default=[0.0, 0.05, 0.1, 0.15, 0.2])
    p.add_argument("--out", type=Path, default=Path("bench_out"))
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("ablate", help="sweep purity or min_points with the rest fixed")
    _common(p)
    _data_source(p)
    _model_flags(p)
    _scale_flag(p)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--axis", choices=("purity", "min_points"), required=True)
    p.add_argument("--values", type=_floats, required=True)
    p.add_argument("--out", type=Path, default=Path("ablate_out"))
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("tswindow", help="sliding-window train/test CSVs from a series")
    p.add_argument("--series", type=Path, required=True, help="single-column CSV")
    p.add_argument("--header", action="store_true")
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--horizon", type=int, default=1)
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--out", type=Path, default=Path("tswindow_out"))
    p.set_defaults(func=cmd_tswindow)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:  # argparse reports bad arguments with status 2
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except (DataError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:  # configuration validation
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS


if __name__ == "__main__":
    sys.exit(main())
