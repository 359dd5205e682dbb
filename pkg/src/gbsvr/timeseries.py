"""Sliding-window supervised datasets for one-dimensional series."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset, DataError, train_test_split


@dataclass(frozen=True)
class WindowSpec:
    window: int = 5
    horizon: int = 1

    def __post_init__(self):
        if self.window < 1 or self.horizon < 1:
            raise ValueError("window and horizon must be >= 1")


def windowize(series, spec: WindowSpec = WindowSpec()) -> Dataset:
    """Row t: features series[t : t+window], target series[t + window + horizon - 1]."""
    x = np.asarray(series, dtype=float).ravel()
    w, h = spec.window, spec.horizon
    rows = x.size - w - h + 1
    if rows < 1:
        raise DataError(f"series too short: {x.size} values for window {w} and horizon {h}")
    features = np.lib.stride_tricks.sliding_window_view(x, w)[:rows]
    targets = x[w + h - 1:w + h - 1 + rows]
    return Dataset(features, targets, tuple(f"lag{w - j}" for j in range(w)))


def chrono_split(d: Dataset, train_fraction: float) -> tuple[Dataset, Dataset]:
    """Chronological prefix split; no shuffling, so no look-ahead leakage."""
    return train_test_split(d, train_fraction, shuffle=False)
