import itertools

import numpy as np
import pytest

from gbsvr.data import Dataset
from gbsvr.granulation import (GranulationConfig, UnsplittableBall, ball_stats, generate_balls,
                               quantile_labels, two_means_split)


def _sse(points, groups):
    return sum(((points[g] - points[g].mean(axis=0)) ** 2).sum() for g in groups if len(g))


def _brute_force_best(points):
    """Minimum within-cluster SSE over every 2-partition with both sides non-empty."""
    u = len(points)
    best, best_split = np.inf, None
    for mask in itertools.product([0, 1], repeat=u - 1):
        side = np.array((0,) + mask)
        if side.all() or not side.any():
            continue
        groups = (np.flatnonzero(side == 0), np.flatnonzero(side == 1))
        cost = _sse(points, groups)
        if cost < best:
            best, best_split = cost, groups
    return best, best_split


class TestQuantileLabels:
    def test_median_split(self):
        assert quantile_labels([1, 2, 3, 4], 2).tolist() == [1, 1, 2, 2]

    def test_rank_based(self):
        assert quantile_labels([3, 1, 4, 2], 2).tolist() == [2, 1, 2, 1]

    def test_ties_by_index(self):
        assert quantile_labels([5, 5, 5, 5], 2).tolist() == [1, 1, 2, 2]

    def test_balanced_bins(self):
        labels = quantile_labels(np.random.default_rng(0).normal(size=103), 10)
        counts = np.bincount(labels)[1:]
        assert counts.max() - counts.min() <= 1 and labels.min() == 1 and labels.max() == 10

    def test_k_too_large(self):
        with pytest.raises(ValueError):
            quantile_labels([1, 2], 3)


class TestTwoMeans:
    def test_four_points_matches_brute_force(self, backend):
        pts = np.array([[0.0], [1.0], [10.0], [11.0]])
        best, (g0, g1) = _brute_force_best(pts)
        left, right = two_means_split(pts, seed=0)
        assert {tuple(left), tuple(right)} == {(0, 1), (2, 3)} == {tuple(g0), tuple(g1)}
        assert abs(_sse(pts, (left, right)) - best) < 1e-12

    def test_two_points(self, backend):
        left, right = two_means_split([[0.0, 1.0], [2.0, 3.0]])
        assert sorted([left.tolist(), right.tolist()]) == [[0], [1]]

    def test_identical_points(self):
        with pytest.raises(UnsplittableBall, match="unsplittable ball"):
            two_means_split([[0.0], [0.0], [0.0]])

    def test_single_point(self):
        with pytest.raises(UnsplittableBall):
            two_means_split([[1.0]])

    @pytest.mark.parametrize("seed", range(5))
    def test_local_optimum_small_sets(self, backend, seed):
        # Lloyd fixed point: every point is closest to its own cluster mean
        rng = np.random.default_rng(seed)
        pts = rng.normal(size=(9, 2))
        left, right = two_means_split(pts, seed=seed)
        assert len(left) and len(right)
        c0, c1 = pts[left].mean(axis=0), pts[right].mean(axis=0)
        d0 = ((pts - c0) ** 2).sum(axis=1)
        d1 = ((pts - c1) ** 2).sum(axis=1)
        assert np.all(d0[left] <= d1[left] + 1e-12) and np.all(d1[right] <= d0[right] + 1e-12)
        best, _ = _brute_force_best(pts)
        assert _sse(pts, (left, right)) >= best - 1e-12

    def test_deterministic(self):
        pts = np.random.default_rng(1).normal(size=(300, 3))
        a = two_means_split(pts, seed=4)
        b = two_means_split(pts, seed=4)
        assert np.array_equal(a[0], b[0])


class TestBallStats:
    def test_singleton(self, backend):
        d = Dataset([[1.5, -2.0]], [3.0])
        b = ball_stats(d, [0], np.array([1]))
        assert b.center.tolist() == [1.5, -2.0]
        assert (b.radius, b.y_hat, b.quality, b.cardinality) == (0.0, 3.0, 1.0, 1)

    def test_symmetric_pair(self, backend):
        d = Dataset([[0.0, 0.0], [2.0, 0.0]], [1.0, 3.0])
        b = ball_stats(d, [0, 1], np.array([1, 1]))
        assert b.center.tolist() == [1.0, 0.0]
        assert b.radius == 1.0 and b.y_hat == 2.0 and b.quality == 1.0

    def test_quality_and_tie(self, backend):
        d = Dataset(np.zeros((4, 1)), np.arange(4.0))
        b = ball_stats(d, [0, 1, 2], np.array([1, 1, 2, 2]))
        assert b.majority_label == 1 and abs(b.quality - 2 / 3) < 1e-15
        tie = ball_stats(d, [0, 1, 2, 3], np.array([2, 1, 2, 1]))
        assert tie.majority_label == 1 and tie.quality == 0.5

    def test_max_radius(self, backend):
        d = Dataset([[0.0], [1.0], [5.0]], [0, 0, 0])
        b = ball_stats(d, [0, 1, 2], np.array([1, 1, 1]), radius="max")
        assert b.radius == 3.0

    def test_empty(self):
        with pytest.raises(ValueError):
            ball_stats(Dataset([[0.0]], [0.0]), [], np.array([1]))


def _check_invariants(d, bs, cfg, labels):
    members = np.concatenate([b.member_indices for b in bs.balls])
    assert sorted(members.tolist()) == list(range(d.m))
    assert 1 <= len(bs) <= d.m
    for b in bs.balls:
        X = d.features[b.member_indices]
        c = X.mean(axis=0)
        assert np.abs(b.center - c).max() <= 1e-9
        assert abs(b.radius - np.sqrt(((X - c) ** 2).sum(axis=1)).mean()) <= 1e-9
        assert abs(b.y_hat - d.targets[b.member_indices].mean()) <= 1e-9
        counts = np.bincount(labels[b.member_indices])
        assert abs(b.quality - counts.max() / b.cardinality) <= 1e-12
        assert b.quality >= cfg.purity or b.cardinality <= cfg.min_points or b.unsplittable


class TestGenerateBalls:
    def test_two_clusters(self, backend):
        d = Dataset([[0.0], [0.1], [10.0], [10.1]], [1.0, 1.1, 5.0, 5.1])
        bs = generate_balls(d, GranulationConfig(purity=1.0, min_points=1, label_count=2))
        assert len(bs) == 2
        assert all(b.quality == 1.0 for b in bs.balls)
        assert sorted(b.cardinality for b in bs.balls) == [2, 2]

    def test_single_row(self):
        bs = generate_balls(Dataset([[3.0]], [1.0]), GranulationConfig())
        assert len(bs) == 1 and bs.balls[0].radius == 0.0 and bs.balls[0].quality == 1.0

    def test_zero_threshold_keeps_root(self):
        d = Dataset(np.random.default_rng(0).normal(size=(40, 2)), np.arange(40.0))
        bs = generate_balls(d, GranulationConfig(purity=0.0))
        assert len(bs) == 1 and bs.balls[0].cardinality == 40

    def test_unsplittable_flagged(self):
        d = Dataset(np.zeros((6, 1)), np.arange(6.0))
        bs = generate_balls(d, GranulationConfig(purity=0.95, min_points=1, label_count=2))
        assert len(bs) == 1 and bs.flagged == 1

    @pytest.mark.parametrize("seed,p,T", [(0, 1, 1.0), (1, 2, 0.95), (2, 4, 0.9), (3, 3, 0.7)])
    def test_invariants(self, backend, seed, p, T):
        rng = np.random.default_rng(seed)
        d = Dataset(rng.normal(size=(200, 3)), rng.normal(size=200))
        cfg = GranulationConfig(purity=T, min_points=p, label_count=5, seed=seed)
        bs = generate_balls(d, cfg)
        _check_invariants(d, bs, cfg, quantile_labels(d.targets, 5))

    def test_deterministic(self):
        d = Dataset(np.random.default_rng(2).normal(size=(300, 2)), np.random.default_rng(3).normal(size=300))
        a = generate_balls(d, GranulationConfig(seed=5))
        b = generate_balls(d, GranulationConfig(seed=5))
        assert np.array_equal(a.centers, b.centers)

    def test_label_count_clamped_to_m(self):
        bs = generate_balls(Dataset([[0.0], [1.0], [2.0]], [0.0, 1.0, 2.0]), GranulationConfig(label_count=10))
        assert sum(b.cardinality for b in bs.balls) == 3

    def test_objective_and_csv(self, tmp_path):
        d = Dataset(np.arange(8.0).reshape(-1, 1), np.arange(8.0))
        bs = generate_balls(d, GranulationConfig(purity=1.0, min_points=1, label_count=2))
        assert bs.objective() == sum(8 / b.cardinality for b in bs.balls) + len(bs)
        bs.to_csv(tmp_path / "b.csv")
        lines = (tmp_path / "b.csv").read_text().splitlines()
        assert lines[0] == "c0,radius,y_hat,cardinality,quality" and len(lines) == len(bs) + 1

    @pytest.mark.parametrize("kw", [dict(purity=1.5), dict(min_points=0), dict(label_count=1), dict(radius="x")])
    def test_config_validation(self, kw):
        with pytest.raises(ValueError):
            GranulationConfig(**kw)


class TestMajorityRobustness:
    @pytest.mark.parametrize("seed", range(20))
    def test_flips_below_margin_keep_majority(self, seed):
        # with quality q > 0.5 + margin, fewer than u * margin flipped labels cannot
        # overturn the majority, even if every flip lands on one rival label
        rng = np.random.default_rng(seed)
        u = int(rng.integers(10, 60))
        margin = float(rng.uniform(0.05, 0.4))
        top = int(np.floor((0.5 + margin) * u)) + 1
        if top > u:
            pytest.skip("margin too large for this cardinality")
        labels = np.concatenate([np.ones(top, int), rng.integers(2, 5, u - top)])
        d = Dataset(rng.normal(size=(u, 1)), rng.normal(size=u))
        before = ball_stats(d, np.arange(u), labels)
        flips = int(np.ceil(u * margin)) - 1
        flipped = labels.copy()
        flipped[:flips] = 2
        after = ball_stats(d, np.arange(u), flipped)
        assert before.majority_label == after.majority_label == 1
