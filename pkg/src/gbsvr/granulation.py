"""Granular regression balls: quantile labelling plus recursive 2-means splitting."""

from __future__ import annotations

import csv
import dataclasses
import heapq
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _backend
from .data import Dataset

INIT_SAMPLE = 64
LLOYD_MAX_ITER = 100
LLOYD_TOL = 1e-8


class UnsplittableBall(ValueError):
    pass


@dataclass(frozen=True)
class GranulationConfig:
    purity: float = 0.95
    min_points: int = 2
    label_count: int = 10
    seed: int = 0
    radius: str = "mean"

    def __post_init__(self):
        if not 0.0 <= self.purity <= 1.0:
            raise ValueError(f"purity threshold must lie in [0, 1], got {self.purity}")
        if self.min_points < 1:
            raise ValueError(f"min_points must be >= 1, got {self.min_points}")
        if self.label_count < 2:
            raise ValueError(f"label_count must be >= 2, got {self.label_count}")
        if self.radius not in ("mean", "max"):
            raise ValueError(f"radius must be 'mean' or 'max', got {self.radius!r}")


@dataclass(frozen=True)
class GranularRegressionBall:
    center: np.ndarray
    radius: float
    y_hat: float
    cardinality: int
    majority_label: int
    quality: float
    member_indices: np.ndarray = field(repr=False)
    # impure but every member shares one feature row, so no split exists
    unsplittable: bool = False


@dataclass(frozen=True)
class BallSet:
    balls: tuple[GranularRegressionBall, ...]
    source_m: int
    config: GranulationConfig

    def __len__(self) -> int:
        return len(self.balls)

    @property
    def centers(self) -> np.ndarray:
        return np.vstack([b.center for b in self.balls])

    @property
    def radii(self) -> np.ndarray:
        return np.array([b.radius for b in self.balls])

    @property
    def y_hat(self) -> np.ndarray:
        return np.array([b.y_hat for b in self.balls])

    @property
    def cardinalities(self) -> np.ndarray:
        return np.array([b.cardinality for b in self.balls], dtype=int)

    @property
    def flagged(self) -> int:
        return sum(b.unsplittable for b in self.balls)

    def objective(self) -> float:
        """Compactness objective sum(m / |ball|) + n, reported as a diagnostic."""
        return float(sum(self.source_m / b.cardinality for b in self.balls) + len(self.balls))

    def to_csv(self, path) -> None:
        l = self.balls[0].center.size  # noqa: E741
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"c{j}" for j in range(l)] + ["radius", "y_hat", "cardinality", "quality"])
            for b in self.balls:
                w.writerow([f"{v:.12g}" for v in b.center]
                           + [f"{b.radius:.12g}", f"{b.y_hat:.12g}", b.cardinality, f"{b.quality:.12g}"])


def quantile_labels(targets, k: int) -> np.ndarray:
    """Rank-based k-bin discretization; labels run 1..k, ties broken by index."""
    y = np.asarray(targets, dtype=float)
    m = y.size
    if k < 2:
        raise ValueError("k must be >= 2")
    if k > m:
        raise ValueError(f"cannot form {k} quantile bins from {m} samples")
    order = np.argsort(y, kind="stable")
    ranks = np.empty(m, dtype=np.int64)
    ranks[order] = np.arange(m)
    return (ranks * k) // m + 1


def _init_pair(points: np.ndarray, seed) -> tuple[int, int]:
    u = points.shape[0]
    if u <= INIT_SAMPLE:
        sample = np.arange(u)
    else:
        sample = np.sort(np.random.default_rng(seed).choice(u, INIT_SAMPLE, replace=False))
    S = points[sample]
    diff = S[:, None, :] - S[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    a, b = np.unravel_index(int(np.argmax(d2)), d2.shape)
    if d2[a, b] > 0:
        return int(sample[a]), int(sample[b])
    # sampled points coincide; pair the first with the farthest point overall
    a = int(sample[0])
    far = int(np.argmax(((points - points[a]) ** 2).sum(axis=1)))
    return a, far


def two_means_split(points, seed=0) -> tuple[np.ndarray, np.ndarray]:
    """Split rows into two non-empty groups by Lloyd's 2-means.

    Returns two arrays of row positions into ``points``.
    """
    X = np.ascontiguousarray(np.atleast_2d(np.asarray(points, dtype=float)))
    if X.shape[0] < 2 or np.all(X == X[0]):
        raise UnsplittableBall("unsplittable ball")
    ia, ib = _init_pair(X, seed)
    labels = _backend.two_means(X, ia, ib, LLOYD_MAX_ITER, LLOYD_TOL)
    labels = np.asarray(labels, dtype=bool)
    return np.flatnonzero(~labels), np.flatnonzero(labels)


def ball_stats(dataset: Dataset, members, labels, radius: str = "mean") -> GranularRegressionBall:
    """Center, radius, ball target and purity of ``members``.

    Majority ties go to the smaller label.
    """
    members = np.ascontiguousarray(members, dtype=np.int64)
    if members.size == 0:
        raise ValueError("ball needs at least one member")
    labels = np.ascontiguousarray(labels, dtype=np.int64)
    return _summarize(dataset.features, dataset.targets, labels, members, radius)


def _summarize(X, y, labels, members, radius) -> GranularRegressionBall:
    center, r, y_hat, majority, top = _backend.ball_summary(X, y, labels, members, radius == "max")
    return GranularRegressionBall(
        center=center,
        radius=r,
        y_hat=y_hat,
        cardinality=int(members.size),
        majority_label=majority,
        quality=top / members.size,
        member_indices=members,
    )


def generate_balls(dataset: Dataset, config: GranulationConfig = GranulationConfig()) -> BallSet:
    """Recursive splitting: a ball splits while quality < purity and size > min_points.

    The largest pending ball is split first.
    """
    m = dataset.m
    k = min(config.label_count, m)
    labels = quantile_labels(dataset.targets, k) if k >= 2 else np.ones(m, dtype=np.int64)
    X = np.ascontiguousarray(dataset.features)
    y = np.ascontiguousarray(dataset.targets)
    labels = np.ascontiguousarray(labels, dtype=np.int64)

    done: list[GranularRegressionBall] = []
    counter = 0
    splits = 0
    root = _summarize(X, y, labels, np.arange(m, dtype=np.int64), config.radius)
    heap = [(-root.cardinality, counter, root)]
    while heap:
        _, _, ball = heapq.heappop(heap)
        if ball.quality >= config.purity or ball.cardinality <= config.min_points:
            done.append(ball)
            continue
        try:
            left, right = two_means_split(X[ball.member_indices], seed=(config.seed, splits))
        except UnsplittableBall:
            done.append(dataclasses.replace(ball, unsplittable=True))
            continue
        splits += 1
        for part in (left, right):
            child = _summarize(X, y, labels, ball.member_indices[part], config.radius)
            counter += 1
            heapq.heappush(heap, (-child.cardinality, counter, child))
    return BallSet(tuple(done), m, config)
