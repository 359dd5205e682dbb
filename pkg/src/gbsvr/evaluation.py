"""Metrics, hyperparameter search, cross-validated benchmarks and ablations."""

from __future__ import annotations

import csv
import itertools
import json
import math
import platform
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .baseline import SvrModel, svr_fit
from .data import Dataset, DataError, fit_standardize, kfold, train_test_split
from .datagen import inject_target_noise
from .granulation import generate_balls
from .kernel import SIGMA_GRID, KernelSpec, gram
from .model import GbsvrModel, GbsvrParams, fit, fit_balls
from .solver import SolverConfig

METHODS = ("gbsvr", "svr")
METRIC_NAMES = ("r2", "mae", "mse", "rmse", "train_seconds", "ball_count")
INNER_HOLDOUT = 0.25


@dataclass(frozen=True)
class MetricsReport:
    r2: float
    mae: float
    mse: float
    rmse: float
    train_seconds: float = 0.0
    ball_count: int | None = None  # GBSVR only

    def to_dict(self) -> dict:
        return asdict(self)


def metrics(y_true, y_pred, train_seconds: float = 0.0, ball_count: int | None = None) -> MetricsReport:
    """R^2, MAE, MSE and RMSE of ``y_pred`` against ``y_true``."""
    y = np.asarray(y_true, dtype=float).ravel()
    p = np.asarray(y_pred, dtype=float).ravel()
    if y.size != p.size:
        raise ValueError(f"length mismatch: {y.size} targets vs {p.size} predictions")
    if y.size == 0:
        raise ValueError("metrics need at least one value")
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot == 0.0:
        raise ValueError("R^2 is undefined for constant targets")
    err = y - p
    mse = float((err ** 2).mean())
    return MetricsReport(
        r2=1.0 - float((err ** 2).sum()) / ss_tot,
        mae=float(np.abs(err).mean()),
        mse=mse,
        rmse=math.sqrt(mse),
        train_seconds=float(train_seconds),
        ball_count=ball_count,
    )


@dataclass(frozen=True)
class BenchResult:
    method: str
    noise_fraction: float
    folds: tuple[MetricsReport, ...]
    chosen: tuple[dict, ...] = field(default=(), compare=False)  # tuned hyperparameters per fold

    def values(self, name: str) -> np.ndarray:
        return np.array([getattr(f, name) for f in self.folds], dtype=float)

    def mean(self, name: str) -> float:
        return float(self.values(name).mean())

    def std(self, name: str) -> float:
        """Population standard deviation over folds."""
        return float(self.values(name).std())

    def summary_row(self) -> dict:
        row = {"method": self.method, "noise_fraction": self.noise_fraction, "folds": len(self.folds)}
        for name in METRIC_NAMES:
            if name == "ball_count" and self.folds[0].ball_count is None:
                row[f"{name}_mean"] = row[f"{name}_std"] = ""
                continue
            row[f"{name}_mean"] = self.mean(name)
            row[f"{name}_std"] = self.std(name)
        return row


# -- hyperparameter grids ---------------------------------------------------

@dataclass(frozen=True)
class Grid:
    purity: tuple = (0.95, 0.99)
    min_points: tuple = (2, 4)
    epsilon: tuple = (0.01, 0.1)
    C: tuple = (1.0, 10.0)
    sigma: tuple = (0.1, 0.3, 0.5)
    kernel: str = "rbf"
    label_count: int = 10

    def __post_init__(self):
        for name in ("purity", "min_points", "epsilon", "C", "sigma"):
            if len(getattr(self, name)) == 0:
                raise ValueError(f"grid axis {name} is empty")

    def kernels(self) -> list[KernelSpec]:
        if self.kernel == "linear":
            return [KernelSpec("linear")]
        return [KernelSpec(self.kernel, float(s)) for s in self.sigma]

    def size(self, method: str) -> int:
        base = len(self.epsilon) * len(self.C) * len(self.kernels())
        return base * len(self.purity) * len(self.min_points) if method == "gbsvr" else base

    def to_dict(self) -> dict:
        return asdict(self)


DESK_GRID = Grid()
# exhaustive grid; thousands of fits per fold
FULL_GRID = Grid(
    purity=(0.9, 0.95, 0.97, 0.99, 0.995, 0.997),
    min_points=(2, 3, 4),
    epsilon=tuple(10.0 ** -e for e in range(1, 10)),
    C=(0.1, 1.0, 10.0, 100.0),
    sigma=tuple(SIGMA_GRID),
)
GRIDS = {"desk": DESK_GRID, "full": FULL_GRID}


# -- fitting helpers --------------------------------------------------------

def _r2_std(model, val: Dataset) -> float:
    """R^2 on the model's standardized target scale."""
    st = model.standardization
    return metrics(st.transform_targets(val.targets), model.predict(val.features, standardized=True)).r2


def _inner_splits(train: Dataset, seed: int, folds: int | None) -> list[tuple[Dataset, Dataset]]:
    if folds is None:
        return [train_test_split(train, 1.0 - INNER_HOLDOUT, shuffle=True, seed=seed)]
    plan = kfold(train, folds, seed)
    return [(train.subset(plan.train_indices(f)), train.subset(plan.test_indices(f))) for f in range(folds)]


def _select(scores: dict):
    """First key (in insertion order) with the highest mean score."""
    best, best_r2 = None, -math.inf
    for key, vals in scores.items():
        r2 = float(np.mean(vals))
        if r2 > best_r2:
            best, best_r2 = key, r2
    return best


def tune_gbsvr(train: Dataset, grid: Grid = DESK_GRID, seed: int = 0,
               solver: SolverConfig = SolverConfig(), folds: int | None = None) -> GbsvrParams:
    """Pick GBSVR hyperparameters by validation R^2.

    ``folds=None`` scores every grid point on one 25% inner holdout (the
    benchmark default); an integer selects by mean R^2 over that many inner
    folds. Granulations are cached per (split, purity, min_points) and Gram
    matrices per kernel; ties keep the first grid point in iteration order.
    """
    scores: dict = {}
    for inner, val in _inner_splits(train, seed, folds):
        z, st = fit_standardize(inner)
        for T, p in itertools.product(grid.purity, grid.min_points):
            base = GbsvrParams(purity=T, min_points=p, label_count=grid.label_count, seed=seed, solver=solver)
            balls = generate_balls(z, base.granulation())
            for k in grid.kernels():
                G = gram(k, balls.centers)
                for eps, C in itertools.product(grid.epsilon, grid.C):
                    params = replace(base, epsilon=float(eps), C=float(C), kernel=k)
                    r2 = _r2_std(fit_balls(balls, st, params, gram_matrix=G), val)
                    scores.setdefault(params, []).append(r2)
    best = _select(scores)
    if best is None:  # every fit produced a non-finite score
        raise DataError("hyperparameter search found no usable GBSVR fit")
    return best


@dataclass(frozen=True)
class SvrParams:
    epsilon: float = 0.01
    C: float = 10.0
    kernel: KernelSpec = field(default_factory=KernelSpec)

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon, "C": self.C, "kernel": self.kernel.to_dict()}


def tune_svr(train: Dataset, grid: Grid = DESK_GRID, seed: int = 0, folds: int | None = None) -> SvrParams:
    """Same inner splits and selection rule as ``tune_gbsvr``."""
    scores: dict = {}
    for inner, val in _inner_splits(train, seed, folds):
        z, _ = fit_standardize(inner)
        for k in grid.kernels():
            K = gram(k, z.features)
            for eps, C in itertools.product(grid.epsilon, grid.C):
                params = SvrParams(float(eps), float(C), k)
                model = svr_fit(inner, params.epsilon, params.C, k, gram_matrix=K)
                scores.setdefault(params, []).append(_r2_std(model, val))
    best = _select(scores)
    if best is None:
        raise DataError("hyperparameter search found no usable SVR fit")
    return best


def fit_method(method: str, train: Dataset, params) -> GbsvrModel | SvrModel:
    if method == "gbsvr":
        return fit(train, params)
    if method == "svr":
        return svr_fit(train, params.epsilon, params.C, params.kernel)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def evaluate(model, test: Dataset, scale: str = "standardized") -> MetricsReport:
    """Test metrics on the standardized (default) or original target scale."""
    if scale == "standardized":
        y = model.standardization.transform_targets(test.targets)
        pred = model.predict(test.features, standardized=True)
    elif scale == "original":
        y, pred = test.targets, model.predict(test.features)
    else:
        raise ValueError(f"unknown metrics scale {scale!r}")
    balls = model.n_balls if isinstance(model, GbsvrModel) else None
    return metrics(y, pred, train_seconds=model.train_seconds, ball_count=balls)


def _noise_seed(seed: int, fold: int, fraction: float):
    # identical noisy rows for every method at a given (fold, fraction)
    return (int(seed), int(fold), int(round(fraction * 1_000_000)))


def crossval_bench(d: Dataset, methods=METHODS, grid: Grid | None = DESK_GRID, folds: int = 5,
                   noise_fractions=(0.0,), seed: int = 0, noise_sigma: float = 0.2,
                   scale: str = "standardized", fixed: dict | None = None,
                   solver: SolverConfig = SolverConfig(), inner_folds: int | None = None) -> list[BenchResult]:
    """k-fold benchmark with target noise injected into training folds only.

    Each training fold is (optionally) tuned on an inner holdout, or on
    ``inner_folds`` inner folds, refit, and scored on its untouched test fold. ``fixed`` maps a method name to
    hyperparameters that skip tuning. Results are ordered by noise fraction,
    then method.
    """
    for mth in methods:
        if mth not in METHODS:
            raise ValueError(f"unknown method {mth!r}; expected one of {METHODS}")
    fixed = fixed or {}
    plan = kfold(d, folds, seed)
    results = []
    for frac in noise_fractions:
        per_method = {mth: ([], []) for mth in methods}
        for f in range(folds):
            train = d.subset(plan.train_indices(f))
            test = d.subset(plan.test_indices(f))
            train = inject_target_noise(train, frac, noise_sigma, seed=_noise_seed(seed, f, frac))
            for mth in methods:
                if mth in fixed:
                    params = fixed[mth]
                elif grid is None:
                    params = GbsvrParams(seed=seed, solver=solver) if mth == "gbsvr" else SvrParams()
                elif mth == "gbsvr":
                    params = tune_gbsvr(train, grid, seed, solver, inner_folds)
                else:
                    params = tune_svr(train, grid, seed, inner_folds)
                model = fit_method(mth, train, params)
                per_method[mth][0].append(evaluate(model, test, scale))
                per_method[mth][1].append(params.to_dict())
        for mth in methods:
            reports, chosen = per_method[mth]
            results.append(BenchResult(mth, float(frac), tuple(reports), tuple(chosen)))
    return results


@dataclass(frozen=True)
class AblationRow:
    value: float
    r2: float
    mae: float
    ball_count: float
    train_seconds: float


def ablation_sweep(d: Dataset, axis: str, values, params: GbsvrParams = GbsvrParams(), folds: int = 5,
                   seed: int = 0, scale: str = "standardized") -> list[AblationRow]:
    """Cross-validated GBSVR with one granulation knob varied, the rest fixed."""
    if axis not in ("purity", "min_points"):
        raise ValueError(f"ablation axis must be 'purity' or 'min_points', got {axis!r}")
    rows = []
    for v in values:
        p = replace(params, **{axis: int(v) if axis == "min_points" else float(v)})
        p.granulation()  # validate before running folds
        (res,) = crossval_bench(d, ("gbsvr",), None, folds, (0.0,), seed, scale=scale, fixed={"gbsvr": p})
        rows.append(AblationRow(float(v), res.mean("r2"), res.mean("mae"), res.mean("ball_count"),
                                res.mean("train_seconds")))
    return rows


# -- output -----------------------------------------------------------------

def format_table(results: list[BenchResult]) -> str:
    """Aligned text table, one line per result, mean ± std."""
    head = ["method", "noise", "R2", "MAE", "MSE", "RMSE", "train_s", "balls"]
    lines = [head]
    for r in results:
        balls = "-" if r.folds[0].ball_count is None else f"{r.mean('ball_count'):.1f}"
        lines.append([r.method, f"{r.noise_fraction:.2f}"]
                     + [f"{r.mean(n):.4f}±{r.std(n):.4f}" for n in ("r2", "mae", "mse", "rmse")]
                     + [f"{r.mean('train_seconds'):.3f}", balls])
    widths = [max(len(row[i]) for row in lines) for i in range(len(head))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in lines)


def write_summary_csv(results: list[BenchResult], path) -> None:
    rows = [r.summary_row() for r in results]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        for row in rows:
            w.writerow({k: (f"{v:.12g}" if isinstance(v, float) else v) for k, v in row.items()})


def write_ablation_csv(rows: list[AblationRow], axis: str, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([axis, "r2_mean", "mae_mean", "ball_count_mean", "train_seconds_mean"])
        for r in rows:
            w.writerow([f"{r.value:.12g}", f"{r.r2:.12g}", f"{r.mae:.12g}", f"{r.ball_count:.12g}",
                        f"{r.train_seconds:.12g}"])


def run_document(config: dict, results: list[BenchResult] | None = None) -> dict:
    """Config echo, library versions and per-fold metrics for run.json."""
    doc = {
        "config": config,
        "versions": {"python": platform.python_version(), "numpy": np.__version__,
                     "gbsvr": _version()},
        "created": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    if results is not None:
        doc["results"] = [
            {"method": r.method, "noise_fraction": r.noise_fraction,
             "folds": [f.to_dict() for f in r.folds], "chosen": list(r.chosen)}
            for r in results
        ]
    return doc


def write_run_json(doc: dict, path) -> None:
    Path(path).write_text(json.dumps(doc, indent=1, default=str))


def _version() -> str:
    try:
        from importlib.metadata import version
        return version("artifact")
    except Exception:  # not installed as a distribution
        return "unknown"
