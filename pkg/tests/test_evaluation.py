import csv
import json
import math

import numpy as np
import pytest

from gbsvr import evaluation as ev
from gbsvr.data import Dataset, kfold
from gbsvr.datagen import SyntheticSpec, gen_synthetic
from gbsvr.kernel import KernelSpec
from gbsvr.model import GbsvrParams

TINY = ev.Grid(purity=(0.95,), min_points=(2,), epsilon=(0.01, 0.1), C=(1.0,), sigma=(0.3,))


@pytest.fixture(scope="module")
def data():
    return gen_synthetic(SyntheticSpec("A", 150))


class TestMetrics:
    def test_perfect(self):
        r = ev.metrics([1, 2, 3], [1, 2, 3])
        assert (r.r2, r.mae, r.mse, r.rmse) == (1.0, 0.0, 0.0, 0.0)

    def test_mean_predictor(self):
        assert ev.metrics([1, 2, 3], [2, 2, 2]).r2 == 0.0

    def test_hand_values(self):
        r = ev.metrics([0.0, 1.0, 2.0, 3.0], [0.5, 1.0, 2.0, 2.0])
        assert r.mae == 0.375 and r.mse == 0.3125
        assert math.isclose(r.rmse ** 2, r.mse, rel_tol=1e-15)
        assert math.isclose(r.r2, 1 - 1.25 / 5.0, rel_tol=1e-15)

    def test_bounds(self):
        rng = np.random.default_rng(0)
        y, p = rng.normal(size=40), rng.normal(size=40)
        r = ev.metrics(y, p)
        assert r.r2 <= 1 and r.mae >= 0 and r.mae <= r.rmse + 1e-15

    @pytest.mark.parametrize("y,p", [([1, 2], [1]), ([], []), ([1, 1], [0, 2])])
    def test_errors(self, y, p):
        with pytest.raises(ValueError):
            ev.metrics(y, p)


class TestBenchResult:
    def test_summary_recomputes_from_folds(self):
        folds = tuple(ev.MetricsReport(r2, 0.1 * i, 0.01 * i, 0.1 * i, 1.0, 10 + i)
                      for i, r2 in enumerate([0.9, 0.8, 0.7], start=1))
        res = ev.BenchResult("gbsvr", 0.1, folds)
        row = res.summary_row()
        assert row["r2_mean"] == pytest.approx(0.8, abs=1e-15)
        assert row["r2_std"] == pytest.approx(np.std([0.9, 0.8, 0.7]), abs=1e-15)
        assert row["ball_count_mean"] == 12.0 and row["folds"] == 3

    def test_svr_has_no_ball_count(self):
        res = ev.BenchResult("svr", 0.0, (ev.MetricsReport(1, 0, 0, 0),))
        assert res.summary_row()["ball_count_mean"] == ""


class TestGrids:
    def test_sizes(self):
        assert ev.DESK_GRID.size("gbsvr") == 2 * 2 * 2 * 2 * 3
        assert ev.DESK_GRID.size("svr") == 2 * 2 * 3
        assert ev.Grid(kernel="linear").size("svr") == 4

    def test_full_grid(self):
        g = ev.FULL_GRID
        assert g.epsilon[0] == 0.1 and math.isclose(g.epsilon[-1], 1e-9)
        assert len(g.sigma) == 100 and g.sigma[0] == 0.001 and g.sigma[-1] == 0.991

    def test_empty_axis(self):
        with pytest.raises(ValueError):
            ev.Grid(C=())

    def test_tuning_picks_grid_point(self, data):
        p = ev.tune_gbsvr(data, TINY)
        assert p.epsilon in TINY.epsilon and p.kernel == KernelSpec("rbf", 0.3)
        s = ev.tune_svr(data, TINY)
        assert s.epsilon in TINY.epsilon

    def test_kfold_selection_is_mean_of_folds(self, data, monkeypatch):
        # two grid points; the winner must have the higher mean over the 3 inner folds
        seen = []
        real = ev._r2_std

        def spy(model, val):
            r2 = real(model, val)
            seen.append((model.params.epsilon, r2))
            return r2

        monkeypatch.setattr(ev, "_r2_std", spy)
        p = ev.tune_gbsvr(data, TINY, folds=3)
        means = {e: np.mean([r for ee, r in seen if ee == e]) for e in TINY.epsilon}
        assert len(seen) == 6 and p.epsilon == max(means, key=means.get)


class TestCrossval:
    def test_noise_only_touches_training_folds(self, data, monkeypatch):
        seen = []
        real = ev.evaluate

        def spy(model, test, scale="standardized"):
            seen.append(test)
            return real(model, test, scale)

        monkeypatch.setattr(ev, "evaluate", spy)
        ev.crossval_bench(data, ("gbsvr",), None, 3, (0.0, 0.2), fixed={"gbsvr": GbsvrParams()})
        plan = kfold(data, 3, 0)
        for i, test in enumerate(seen):
            expected = data.subset(plan.test_indices(i % 3))
            assert np.array_equal(test.targets, expected.targets)

    def test_methods_share_noisy_rows(self, data, monkeypatch):
        trains = {}
        real = ev.fit_method

        def spy(method, train, params):
            trains.setdefault(method, []).append(train.targets.copy())
            return real(method, train, params)

        monkeypatch.setattr(ev, "fit_method", spy)
        ev.crossval_bench(data, ("gbsvr", "svr"), None, 2, (0.2,))
        for a, b in zip(trains["gbsvr"], trains["svr"]):
            assert np.array_equal(a, b)

    def test_deterministic(self, data):
        a = ev.crossval_bench(data, ("gbsvr",), TINY, 2, (0.1,), seed=3)
        b = ev.crossval_bench(data, ("gbsvr",), TINY, 2, (0.1,), seed=3)
        assert a[0].values("r2").tolist() == b[0].values("r2").tolist()
        assert a[0].chosen == b[0].chosen

    def test_layout(self, data):
        res = ev.crossval_bench(data, ("gbsvr", "svr"), None, 3, (0.0, 0.1))
        assert [(r.noise_fraction, r.method) for r in res] == [(0.0, "gbsvr"), (0.0, "svr"),
                                                                (0.1, "gbsvr"), (0.1, "svr")]
        assert all(len(r.folds) == 3 for r in res)
        assert res[0].folds[0].ball_count > 0 and res[1].folds[0].ball_count is None

    def test_unknown_method(self, data):
        with pytest.raises(ValueError):
            ev.crossval_bench(data, ("lasso",), None, 2)

    def test_original_scale(self, data):
        # R^2 is invariant to the affine target map; absolute errors are not
        (orig,) = ev.crossval_bench(data, ("gbsvr",), None, 2, scale="original")
        (std,) = ev.crossval_bench(data, ("gbsvr",), None, 2)
        assert np.allclose(orig.values("r2"), std.values("r2"), rtol=0, atol=1e-12)
        assert not np.allclose(orig.values("mae"), std.values("mae"))


class TestAblationAndOutput:
    def test_ablation_rows(self, data, tmp_path):
        rows = ev.ablation_sweep(data, "min_points", [1, 4], GbsvrParams(), folds=2)
        assert [r.value for r in rows] == [1.0, 4.0]
        assert rows[0].ball_count >= rows[1].ball_count
        ev.write_ablation_csv(rows, "min_points", tmp_path / "a.csv")
        assert next(csv.reader(open(tmp_path / "a.csv")))[0] == "min_points"

    def test_bad_axis(self, data):
        with pytest.raises(ValueError):
            ev.ablation_sweep(data, "sigma", [0.1])

    def test_bad_value(self, data):
        with pytest.raises(ValueError):
            ev.ablation_sweep(data, "purity", [1.5])

    def test_files(self, data, tmp_path):
        res = ev.crossval_bench(data, ("gbsvr", "svr"), None, 2)
        ev.write_summary_csv(res, tmp_path / "s.csv")
        rows = list(csv.DictReader(open(tmp_path / "s.csv")))
        assert [r["method"] for r in rows] == ["gbsvr", "svr"]
        assert float(rows[0]["r2_mean"]) == pytest.approx(res[0].mean("r2"), rel=1e-11)
        ev.write_run_json(ev.run_document({"x": 1}, res), tmp_path / "r.json")
        doc = json.loads((tmp_path / "r.json").read_text())
        assert doc["config"] == {"x": 1} and len(doc["results"][0]["folds"]) == 2
        assert "numpy" in doc["versions"]
        table = ev.format_table(res)
        assert table.splitlines()[0].split()[:3] == ["method", "noise", "R2"]
