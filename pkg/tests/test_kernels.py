"""Numpy/numba kernel twins must agree bit-for-bit on integer outputs and
to rounding error on float ones."""

import numpy as np
import pytest

from favlab import _kernels

pytestmark = pytest.mark.skipif(
    not _kernels.NUMBA_ENABLED,
    reason="numba disabled; only the numpy path is active")


@pytest.fixture(scope="module")
def rng():
    return np.random.default_rng(123)


def random_squares(rng, m=300):
    x0 = rng.uniform(-1, 1, m)
    y0 = rng.uniform(-1, 1, m)
    return x0, y0, 0.05


class TestProjectionMeasures:
    def test_matches_numpy(self, rng):
        x0, y0, side = random_squares(rng)
        thetas = rng.uniform(0, np.pi, 64)
        a = _kernels.projection_measures_np(x0, y0, side, thetas, 1e-12)
        b = _kernels.projection_measures_nb(x0, y0, side, thetas, 1e-12)
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)

    def test_single_square(self):
        thetas = np.array([0.0, 0.5, 1.3])
        a = _kernels.projection_measures_np(np.zeros(1), np.zeros(1), 1.0,
                                            thetas, 1e-12)
        b = _kernels.projection_measures_nb(np.zeros(1), np.zeros(1), 1.0,
                                            thetas, 1e-12)
        np.testing.assert_allclose(a, b, atol=1e-15)


class TestRieszEnergy:
    def test_matches_numpy(self, rng):
        m = 500
        px = rng.uniform(0, 1, m)
        py = rng.uniform(0, 1, m)
        w = rng.uniform(0, 1, m)
        w /= w.sum()
        a = _kernels.riesz_energy_np(px, py, w, 0.8, 1e-4)
        b = _kernels.riesz_energy_nb(px, py, w, 0.8, 1e-4)
        assert b == pytest.approx(a, rel=1e-11)

    def test_floor_active(self, rng):
        px = np.array([0.0, 1e-9, 1.0])
        py = np.zeros(3)
        w = np.full(3, 1 / 3)
        a = _kernels.riesz_energy_np(px, py, w, 1.0, 0.01)
        b = _kernels.riesz_energy_nb(px, py, w, 1.0, 0.01)
        assert b == pytest.approx(a, rel=1e-12)


class TestLineKernels:
    def test_counts_table_identical(self, rng):
        m = 400
        px = rng.uniform(-1, 1, m)
        py = rng.uniform(-1, 1, m)
        delta = 0.02
        n_dir = int(np.floor(np.pi / delta)) + 1
        k2max = int(np.floor(2.0 / delta))
        a = _kernels.line_counts_table_np(px, py, delta, 4.0, n_dir,
                                          -k2max, k2max)
        b = _kernels.line_counts_table_nb(px, py, delta, 4.0, n_dir,
                                          -k2max, k2max)
        assert a.shape == b.shape
        assert np.array_equal(a, b)

    def test_f_delta_stats_identical(self, rng):
        m = 350
        px = rng.uniform(-1, 1, m)
        py = rng.uniform(-1, 1, m)
        delta = 0.03
        n_dir = int(np.floor(np.pi / delta)) + 1
        k2max = int(np.floor(1.5 / delta))
        mask = rng.random(n_dir) < 0.7
        sa, ha = _kernels.f_delta_stats_np(px, py, delta, 4.0, mask,
                                           -k2max, k2max)
        sb, hb = _kernels.f_delta_stats_nb(px, py, delta, 4.0, mask,
                                           -k2max, k2max)
        assert sb == pytest.approx(sa, rel=1e-12)
        assert np.array_equal(ha, hb)

    def test_stats_consistent_with_table(self, rng):
        m = 200
        px = rng.uniform(-0.5, 0.5, m)
        py = rng.uniform(-0.5, 0.5, m)
        delta = 0.05
        n_dir = int(np.floor(np.pi / delta)) + 1
        k2max = int(np.floor(1.0 / delta))
        mask = np.ones(n_dir, dtype=bool)
        table = _kernels.line_counts_table(px, py, delta, 4.0, n_dir,
                                           -k2max, k2max)
        sum_sq, hist = _kernels.f_delta_stats(px, py, delta, 4.0, mask,
                                              -k2max, k2max)
        assert sum_sq == pytest.approx(
            float(np.sum(table.astype(np.float64) ** 2)), rel=1e-12)
        assert int(hist.sum()) == int(np.count_nonzero(table))


def test_union_measure_basic():
    lo = np.array([0.0, 0.5, 3.0])
    hi = np.array([1.0, 2.0, 4.0])
    assert _kernels.union_measure(lo, hi, 1e-12) == pytest.approx(3.0)


def test_dispatch_bindings():
    if _kernels.NUMBA_ENABLED:
        assert _kernels.line_counts_table is _kernels.line_counts_table_nb
    else:
        assert _kernels.line_counts_table is _kernels.line_counts_table_np
