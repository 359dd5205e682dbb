import numpy as np
import pytest

from gbsvr.data import Dataset, DataError
from gbsvr.timeseries import WindowSpec, chrono_split, windowize


class TestWindowize:
    def test_small_series(self):
        d = windowize([1, 2, 3, 4, 5, 6], WindowSpec(4, 1))
        assert d.features.tolist() == [[1, 2, 3, 4], [2, 3, 4, 5]]
        assert d.targets.tolist() == [5, 6]

    def test_minimal(self):
        d = windowize([1, 2, 3, 4, 5], WindowSpec(4, 1))
        assert d.m == 1 and d.targets.tolist() == [5]

    def test_horizon(self):
        d = windowize(np.arange(10.0), WindowSpec(3, 2))
        assert d.m == 10 - 3 - 2 + 1
        assert np.all(d.targets == d.features[:, -1] + 2)

    def test_too_short(self):
        with pytest.raises(DataError, match="too short"):
            windowize([1, 2, 3, 4], WindowSpec(4, 1))

    def test_reconstruction(self):
        x = np.random.default_rng(0).normal(size=50)
        d = windowize(x, WindowSpec(5, 1))
        rebuilt = np.concatenate([d.features[0], d.targets])
        assert np.array_equal(rebuilt, x)

    def test_rows_are_copies(self):
        x = np.arange(20.0)
        d = windowize(x, WindowSpec(4, 1))
        x[0] = 99
        assert d.features[0, 0] == 0.0

    @pytest.mark.parametrize("w,h", [(0, 1), (3, 0)])
    def test_bad_spec(self, w, h):
        with pytest.raises(ValueError):
            WindowSpec(w, h)


class TestChronoSplit:
    def test_prefix(self):
        d = windowize(np.arange(30.0), WindowSpec(4, 1))
        train, test = chrono_split(d, 0.8)
        assert train.m == int(0.8 * d.m) and train.m + test.m == d.m
        assert np.array_equal(train.targets, d.targets[:train.m])

    def test_no_leakage(self):
        d = windowize(np.arange(40.0), WindowSpec(5, 1))
        train, test = chrono_split(d, 0.5)
        assert train.targets.max() < test.features.min() + 5
        assert train.targets.max() < test.targets.min()

    def test_small_fraction(self):
        train, test = chrono_split(Dataset(np.arange(10.0).reshape(-1, 1), np.arange(10.0)), 0.3)
        assert (train.m, test.m) == (3, 7)

    def test_full_fraction_rejected(self):
        with pytest.raises(DataError):
            chrono_split(Dataset(np.arange(10.0).reshape(-1, 1), np.arange(10.0)), 1.0)
