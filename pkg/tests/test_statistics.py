import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skewfold import (
    ConfigurationError,
    GridMismatchError,
    RngStream,
    SamplePath,
    identity_residual,
    make_grid,
    mc_estimate,
    run_batches,
    sample_brownian,
    sign_occupation,
    skew_brownian,
)


def path(vals):
    vals = np.asarray(vals, float)
    return SamplePath(make_grid(1.0, vals.shape[-1] - 1), vals)


class TestMcEstimate:
    def test_constant(self):
        m = mc_estimate([1, 1, 1, 1])
        assert m.mean == 1 and m.std_error == 0

    def test_two_points(self):
        m = mc_estimate([0, 2])
        assert m.mean == 1 and m.std_error == pytest.approx(1.0)

    def test_normal_draws(self):
        x = np.random.default_rng(0).standard_normal(10_000)
        m = mc_estimate(x)
        assert abs(m.mean) <= 3 * 0.01
        assert m.ci_halfwidth == pytest.approx(1.959964 * m.std_error, rel=1e-6)
        assert m.contains(0.0)

    def test_rejects(self):
        with pytest.raises(ConfigurationError):
            mc_estimate([1.0])
        with pytest.raises(ConfigurationError):
            mc_estimate([1.0, 2.0], confidence=1.0)

    def test_as_dict(self):
        d = mc_estimate([0, 2]).as_dict()
        assert d["extremes"] == [0.0, 2.0] and d["n_samples"] == 2


class TestResidual:
    def test_self(self):
        p = path([0, 1, 2])
        assert identity_residual(p, p) == 0

    def test_unit(self):
        assert identity_residual(path([0, 1]), path([0, 0])) == 1

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(-1e6, 1e6), min_size=3, max_size=3), st.lists(st.floats(-1e6, 1e6), min_size=3, max_size=3))
    def test_symmetric(self, a, b):
        assert identity_residual(path(a), path(b)) == identity_residual(path(b), path(a))

    def test_grid_mismatch(self):
        with pytest.raises(GridMismatchError):
            identity_residual(path([0, 1]), path([0, 1, 2]))


class TestSignOccupation:
    def test_all_positive(self):
        assert sign_occupation(path(np.ones((4, 3))), 1.0).mean == 1.0

    def test_brownian_half(self):
        N = 20_000
        B = sample_brownian(make_grid(1, 16), RngStream(1), n_paths=N)
        m = sign_occupation(B, 1.0)
        assert abs(m.mean - 0.5) <= 3 * math.sqrt(0.25 / N)

    @pytest.mark.slow
    def test_skew_bm(self):
        # with the atom of the grid walk at its running minimum removed from
        # the target (Sparre Andersen), the 3-sigma binomial gate applies
        N, n, a = 100_000, 2**12, 0.7
        g = make_grid(1, n)
        x = run_batches(lambda s, m: {"x": skew_brownian(a, 0.0, g, s, n_paths=m).final}, N, 500, 42)["x"]
        m = sign_occupation(SamplePath(make_grid(1, 1), np.stack([np.zeros_like(x), x], -1)), 1.0)
        target = a * (1 - math.comb(2 * n, n) / 4**n)
        assert abs(m.mean - target) <= 3 * math.sqrt(a * (1 - a) / N)


class TestRunBatches:
    @staticmethod
    def task(stream, n):
        return {"x": stream.generator().standard_normal(n), "n": np.full(n, n)}

    def test_worker_count_irrelevant(self):
        a = run_batches(self.task, 1003, 100, 9, workers=1)
        b = run_batches(self.task, 1003, 100, 9, workers=3)
        np.testing.assert_array_equal(a["x"], b["x"])
        assert a["x"].size == 1003 and a["n"][-1] == 3

    def test_substreams_independent(self):
        a = run_batches(self.task, 50, 10, 9, substream=0)["x"]
        b = run_batches(self.task, 50, 10, 9, substream=100)["x"]
        assert not np.array_equal(a, b)

    def test_rejects(self):
        with pytest.raises(ConfigurationError):
            run_batches(self.task, 0, 10, 1)
        with pytest.raises(ConfigurationError):
            run_batches(self.task, 10, 10, 1, workers=0)
