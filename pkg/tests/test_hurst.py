import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fbmbound.errors import DomainError, EstimationError
from fbmbound.fbm import sample_fgn
from fbmbound.hurst import (
    SeriesMatrix,
    default_min_window,
    estimate_hurst_from_vectors,
    estimate_hurst_rs,
    rescaled_range,
    window_schedule,
)


def rs_oracle(series, window):
    """Loop-based R/S: mean over non-degenerate blocks."""
    vals = []
    for b in range(len(series) // window):
        block = [float(v) for v in series[b * window : (b + 1) * window]]
        mean = sum(block) / window
        acc, cum = 0.0, []
        for v in block:
            acc += v - mean
            cum.append(acc)
        s = math.sqrt(sum((v - mean) ** 2 for v in block) / window)
        if s > 0:
            vals.append((max(cum) - min(cum)) / s)
    return sum(vals) / len(vals)


class TestRescaledRange:
    def test_alternating(self):
        assert rescaled_range([1, -1] * 4, 8) == pytest.approx(1.0)

    def test_constant_rejected(self):
        with pytest.raises(EstimationError):
            rescaled_range(np.ones(64), 16)

    def test_window_longer_than_series(self):
        with pytest.raises(DomainError):
            rescaled_range(np.arange(10.0), 16)

    def test_window_below_minimum(self):
        with pytest.raises(DomainError):
            rescaled_range(np.arange(100.0), 4)

    def test_degenerate_blocks_skipped(self):
        x = np.concatenate([np.ones(8), [1, -1] * 4])
        assert rescaled_range(x, 8) == pytest.approx(1.0)

    @given(
        # values on a dyadic grid so block means are exact and S=0 is unambiguous
        x=arrays(np.int64, st.integers(16, 200), elements=st.integers(-8000, 8000)).map(lambda a: a / 8.0),
        window=st.sampled_from([8, 11, 16]),
    )
    @settings(max_examples=60)
    def test_matches_oracle(self, x, window):
        try:
            expected = rs_oracle(x, window)
        except ZeroDivisionError:
            with pytest.raises(EstimationError):
                rescaled_range(x, window)
            return
        assert rescaled_range(x, window) == pytest.approx(expected, rel=1e-9, abs=1e-9)

    @given(c=st.floats(-100, 100))
    @settings(max_examples=25)
    def test_shift_invariance(self, c):
        x = sample_fgn(256, 0.6, seed=1)
        assert rescaled_range(x + c, 32) == pytest.approx(rescaled_range(x, 32), rel=1e-7)


class TestWindowSchedule:
    def test_doubling(self):
        np.testing.assert_array_equal(window_schedule(4096, 8), [8, 16, 32, 64, 128, 256, 512, 1024, 2048])

    def test_default_min(self):
        assert default_min_window(4096) == 32
        assert default_min_window(500) == 8
        assert window_schedule(4096)[0] == 32

    def test_at_least_five_windows_when_possible(self):
        for n in (256, 1000, 4096, 100_000):
            assert len(window_schedule(n)) >= 5


class TestEstimateHurstRs:
    def test_white_noise_band(self):
        est = [estimate_hurst_rs(np.random.default_rng(s).standard_normal(4096)).h_hat for s in range(20)]
        assert 0.45 <= np.mean(est) <= 0.62

    def test_persistent_recovery(self):
        est = [estimate_hurst_rs(sample_fgn(4096, 0.7, seed=s)).h_hat for s in range(20)]
        assert abs(np.mean(est) - 0.7) <= 0.07

    def test_trend_saturates(self):
        assert estimate_hurst_rs(np.arange(1, 4097, dtype=float)).h_hat >= 0.9

    def test_too_short(self):
        with pytest.raises(DomainError):
            estimate_hurst_rs(np.arange(20.0))

    def test_too_few_windows(self):
        with pytest.raises(EstimationError):
            estimate_hurst_rs(np.random.default_rng(0).standard_normal(40), min_window=8)

    def test_constant_series(self):
        with pytest.raises(EstimationError):
            estimate_hurst_rs(np.zeros(512))

    def test_fields(self):
        est = estimate_hurst_rs(sample_fgn(1024, 0.5, seed=3))
        assert est.stderr >= 0
        assert est.n_windows >= 3
        assert len(est.windows) == len(est.rs_values) == est.n_windows

    @given(c=st.floats(1e-3, 1e3))
    @settings(max_examples=25)
    def test_scale_invariance(self, c):
        x = sample_fgn(512, 0.6, seed=2)
        assert estimate_hurst_rs(c * x).h_hat == pytest.approx(estimate_hurst_rs(x).h_hat, abs=1e-9)

    def test_deterministic(self):
        x = sample_fgn(1024, 0.4, seed=6)
        assert estimate_hurst_rs(x).h_hat == estimate_hurst_rs(x.copy()).h_hat

    def test_slope_matches_polyfit(self):
        est = estimate_hurst_rs(sample_fgn(2048, 0.6, seed=9), min_window=8)
        slope = np.polyfit(np.log(est.windows), np.log(est.rs_values), 1)[0]
        assert est.h_hat == pytest.approx(slope, rel=1e-10)


class TestHurstFromVectors:
    def test_identical_columns(self):
        s = sample_fgn(512, 0.6, seed=1)
        m = SeriesMatrix(np.column_stack([s] * 5), "sgn")
        assert estimate_hurst_from_vectors(m).h_hat == estimate_hurst_rs(s).h_hat

    def test_full_subsample_equals_mean(self):
        data = np.column_stack([sample_fgn(256, 0.5, seed=s) for s in range(6)])
        m = SeriesMatrix(data, "sgn")
        a = estimate_hurst_from_vectors(m)
        b = estimate_hurst_from_vectors(m, "subsample", count=6, seed=3)
        assert a.h_hat == pytest.approx(b.h_hat, abs=1e-12)

    def test_subsample_insensitive_to_seed(self):
        data = np.random.default_rng(0).standard_normal((512, 10_000))
        m = SeriesMatrix(data, "sgn")
        a = estimate_hurst_from_vectors(m, "subsample", count=100, seed=1).h_hat
        b = estimate_hurst_from_vectors(m, "subsample", count=100, seed=2).h_hat
        assert abs(a - b) <= 0.05

    def test_subsample_deterministic(self):
        m = SeriesMatrix(np.random.default_rng(1).standard_normal((128, 50)))
        a = estimate_hurst_from_vectors(m, "subsample", count=10, seed=5)
        b = estimate_hurst_from_vectors(m, "subsample", count=10, seed=5)
        assert a.h_hat == b.h_hat

    def test_count_exceeds_dimension(self):
        m = SeriesMatrix(np.random.default_rng(1).standard_normal((64, 4)))
        with pytest.raises(DomainError):
            estimate_hurst_from_vectors(m, "subsample", count=5)

    def test_majority_failure(self):
        data = np.zeros((256, 5))
        data[:, 0] = np.random.default_rng(0).standard_normal(256)
        data[:, 1] = np.random.default_rng(1).standard_normal(256)
        with pytest.raises(EstimationError):
            estimate_hurst_from_vectors(SeriesMatrix(data))

    def test_minority_failure_tolerated(self):
        rng = np.random.default_rng(0)
        data = rng.standard_normal((256, 5))
        data[:, 4] = 0.0
        est = estimate_hurst_from_vectors(SeriesMatrix(data))
        assert np.isnan(est.per_coordinate[4])
        assert est.h_hat == pytest.approx(np.nanmean(est.per_coordinate))

    def test_loss_vectors_rejected(self):
        m = SeriesMatrix(np.random.default_rng(1).standard_normal((64, 4)), "loss_vectors")
        with pytest.raises(DomainError):
            estimate_hurst_from_vectors(m)

    def test_short_log_rejected(self):
        with pytest.raises(DomainError):
            estimate_hurst_from_vectors(SeriesMatrix(np.ones((20, 3))))


class TestSeriesMatrix:
    @pytest.mark.parametrize(
        "data",
        [np.ones((1, 3)), np.array([[1.0, np.nan], [1.0, 2.0]]), np.empty((5, 0))],
    )
    def test_invalid(self, data):
        with pytest.raises(DomainError):
            SeriesMatrix(data)

    def test_vector_becomes_column(self):
        m = SeriesMatrix(np.arange(5.0))
        assert (m.rows, m.cols) == (5, 1)

    def test_unknown_kind(self):
        with pytest.raises(DomainError):
            SeriesMatrix(np.ones((4, 2)), "weights")


@pytest.mark.parametrize("h", [0.3, 0.5, 0.7])
def test_recovery(h):
    est = [estimate_hurst_rs(sample_fgn(4096, h, seed=100 + s)).h_hat for s in range(20)]
    assert abs(np.mean(est) - h) <= 0.07
