"""Dataset container, CSV I/O, z-score standardization and split utilities."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np


class DataError(ValueError):
    """Raised for malformed or degenerate input data."""


class NumericalError(ArithmeticError):
    """Raised when a computation leaves the range of finite doubles."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    targets: np.ndarray
    feature_names: tuple[str, ...] | None = None

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        y = np.asarray(self.targets, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise DataError(f"features must be a non-empty 2-D matrix, got shape {X.shape}")
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise DataError(f"targets length {y.shape} does not match {X.shape[0]} feature rows")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise DataError("features and targets must be finite")
        object.__setattr__(self, "features", _frozen(X))
        object.__setattr__(self, "targets", _frozen(y))
        if self.feature_names is not None:
            names = tuple(str(n) for n in self.feature_names)
            if len(names) != X.shape[1]:
                raise DataError("feature_names length does not match column count")
            object.__setattr__(self, "feature_names", names)

    @property
    def m(self) -> int:
        return self.features.shape[0]

    @property
    def l(self) -> int:  # noqa: E743
        return self.features.shape[1]

    def __len__(self) -> int:
        return self.m

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows, dtype=int)
        return Dataset(self.features[rows], self.targets[rows], self.feature_names)

    def with_targets(self, targets) -> "Dataset":
        return Dataset(self.features, targets, self.feature_names)


@dataclass(frozen=True)
class Standardization:
    feature_means: np.ndarray
    feature_stds: np.ndarray
    target_mean: float
    target_std: float

    def __post_init__(self):
        object.__setattr__(self, "feature_means", _frozen(self.feature_means))
        object.__setattr__(self, "feature_stds", _frozen(self.feature_stds))
        object.__setattr__(self, "target_mean", float(self.target_mean))
        object.__setattr__(self, "target_std", float(self.target_std))
        if np.any(self.feature_stds <= 0) or self.target_std <= 0:
            raise DataError("standard deviations must be strictly positive")

    @classmethod
    def identity(cls, l: int) -> "Standardization":  # noqa: E741
        return cls(np.zeros(l), np.ones(l), 0.0, 1.0)

    def transform_features(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return (X - self.feature_means) / self.feature_stds

    def transform_targets(self, y) -> np.ndarray:
        return (np.asarray(y, dtype=float) - self.target_mean) / self.target_std

    def inverse_features(self, Z) -> np.ndarray:
        return np.asarray(Z, dtype=float) * self.feature_stds + self.feature_means

    def inverse_targets(self, z) -> np.ndarray:
        return np.asarray(z, dtype=float) * self.target_std + self.target_mean

    def transform(self, d: Dataset) -> Dataset:
        return Dataset(self.transform_features(d.features), self.transform_targets(d.targets),
                       d.feature_names)

    def inverse_transform(self, d: Dataset) -> Dataset:
        return Dataset(self.inverse_features(d.features), self.inverse_targets(d.targets),
                       d.feature_names)


def _safe_std(values: np.ndarray, axis=None):
    std = np.std(values, axis=axis)
    # zero-variance columns keep std 1 so the transform only centers them
    return np.where(std == 0, 1.0, std)


def fit_standardize(d: Dataset) -> tuple[Dataset, Standardization]:
    if d.m < 2:
        raise DataError("standardization needs at least 2 rows")
    with np.errstate(over="ignore", invalid="ignore"):
        std = Standardization(
            feature_means=d.features.mean(axis=0),
            feature_stds=_safe_std(d.features, axis=0),
            target_mean=float(d.targets.mean()),
            target_std=float(_safe_std(d.targets)),
        )
    moments = np.concatenate([std.feature_means, std.feature_stds, [std.target_mean, std.target_std]])
    if not np.isfinite(moments).all():
        raise NumericalError("column mean or standard deviation overflows; rescale the input")
    return std.transform(d), std


def load_csv(path, has_header: bool = False) -> Dataset:
    """Read a numeric CSV whose last column is the target."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    names = None
    if has_header and rows:
        names = [c.strip() for c in rows[0]]
        rows = rows[1:]
    if not rows:
        raise DataError(f"{path}: no data rows")
    width = len(rows[0])
    if width < 2:
        raise DataError(f"{path}: need at least 2 columns (features + target), got {width}")
    values = np.empty((len(rows), width))
    for i, row in enumerate(rows, start=1):
        if len(row) != width:
            raise DataError(f"{path}: row {i} has {len(row)} columns, expected {width}")
        for j, cell in enumerate(row, start=1):
            try:
                values[i - 1, j - 1] = float(cell)
            except ValueError:
                raise DataError(f"{path}: non-numeric value {cell.strip()!r} at row {i}, column {j}") from None
    feature_names = tuple(names[:-1]) if names and len(names) == width else None
    return Dataset(values[:, :-1], values[:, -1], feature_names)


def write_csv(path, d: Dataset, header: bool = False, target_name: str = "target") -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        if header:
            names = list(d.feature_names or [f"x{j}" for j in range(d.l)])
            w.writerow(names + [target_name])
        for x, y in zip(d.features, d.targets):
            w.writerow([f"{v:.12g}" for v in x] + [f"{y:.12g}"])


def load_series(path, has_header: bool = False) -> np.ndarray:
    """Read a single-column numeric CSV (extra columns: the last one is used)."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if has_header:
        rows = rows[1:]
    if not rows:
        raise DataError(f"{path}: no data rows")
    out = np.empty(len(rows))
    for i, row in enumerate(rows, start=1):
        try:
            out[i - 1] = float(row[-1])
        except ValueError:
            raise DataError(f"{path}: non-numeric value {row[-1].strip()!r} at row {i}, column {len(row)}") from None
    return out


@dataclass(frozen=True)
class FoldPlan:
    fold_count: int
    assignments: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "assignments", np.asarray(self.assignments, dtype=int))

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)

    def sizes(self) -> list[int]:
        return np.bincount(self.assignments, minlength=self.fold_count).tolist()


def kfold(d: Dataset | int, k: int, seed: int = 0) -> FoldPlan:
    m = d if isinstance(d, int) else d.m
    if not 2 <= k <= m:
        raise DataError(f"fold count k={k} must satisfy 2 <= k <= m={m}")
    perm = np.random.default_rng(seed).permutation(m)
    assignments = np.empty(m, dtype=int)
    for fold, chunk in enumerate(np.array_split(perm, k)):
        assignments[chunk] = fold
    return FoldPlan(k, assignments)


def split_sizes(m: int, train_fraction: float) -> tuple[int, int]:
    if not 0.0 < train_fraction <= 1.0:
        raise DataError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    n_train = int(math.floor(train_fraction * m + 1e-9))
    if n_train < 1 or n_train >= m:
        raise DataError(f"train_fraction {train_fraction} on {m} rows leaves an empty side")
    return n_train, m - n_train


def train_test_split(d: Dataset, train_fraction: float, shuffle: bool = True,
                     seed: int = 0) -> tuple[Dataset, Dataset]:
    n_train, _ = split_sizes(d.m, train_fraction)
    order = np.random.default_rng(seed).permutation(d.m) if shuffle else np.arange(d.m)
    return d.subset(order[:n_train]), d.subset(order[n_train:])


def concat(parts: Sequence[Dataset]) -> Dataset:
    return Dataset(np.vstack([p.features for p in parts]),
                   np.concatenate([p.targets for p in parts]),
                   parts[0].feature_names)
