import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skewfold import (
    ConfigurationError,
    DomainError,
    RngStream,
    SamplePath,
    decompose_excursions,
    draw_signs,
    ito_integral,
    make_grid,
    sample_brownian,
    skew_brownian,
    unfold_conventional,
    unfold_skorokhod,
    unfold_with_signs,
)
from skewfold.local_time import estimate_local_time
from skewfold.reflection import sign

S7 = [0, 1, 2, 0, 0, 3, 0]


def path(vals):
    vals = np.asarray(vals, float)
    return SamplePath(make_grid(1.0, vals.shape[-1] - 1), vals)


class TestDecompose:
    def test_hand_example(self):
        d = decompose_excursions(path(S7))
        assert d.n_excursions == 2
        assert [list(r) for r in d.intervals] == [[1, 2], [5]]
        np.testing.assert_array_equal(np.flatnonzero(d.zero_mask), [0, 3, 4, 6])
        np.testing.assert_array_equal(d.lengths(), [2, 1])

    def test_all_zero(self):
        d = decompose_excursions(path(np.zeros(5)))
        assert d.n_excursions == 0 and d.zero_mask.all()

    def test_threshold(self):
        d = decompose_excursions(path([0, 0.05, 0, 0.5, 0]), tol=0.1)
        assert d.n_excursions == 1
        assert [list(r) for r in d.intervals] == [[3]]

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            decompose_excursions(path([0, -1, 0]))
        with pytest.raises(ConfigurationError):
            decompose_excursions(path([0, 1, 0]), tol=-1)

    def test_batch_ids_are_global(self):
        S = np.array([S7, [0, 1, 0, 1, 0, 1, 0]], float)
        d = decompose_excursions(path(S))
        np.testing.assert_array_equal(d.counts, [2, 3])
        assert d.excursion_id.max() == 4

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.sampled_from([0.0, 0.5, 2.0]), min_size=2, max_size=30))
    def test_partition(self, vals):
        d = decompose_excursions(path(vals))
        s = np.asarray(vals)
        covered = np.zeros(s.size, bool)
        for r in d.intervals:
            assert np.all(s[list(r)] > 0) and not np.any(covered[list(r)])
            covered[list(r)] = True
        np.testing.assert_array_equal(covered, s > 0)


class TestSigns:
    def test_sign_frequency(self):
        # binomial CI at 1e5 draws
        n, a = 100_000, 0.7
        s = draw_signs(n, a, RngStream(21))
        assert abs(np.mean(s > 0) - a) <= 3 * np.sqrt(a * (1 - a) / n)

    def test_with_signs_validation(self):
        d = decompose_excursions(path(S7))
        with pytest.raises(ConfigurationError):
            d.with_signs([1])
        with pytest.raises(ConfigurationError):
            d.with_signs([1, 0])
        with pytest.raises(DomainError):
            d.sign_path


class TestUnfoldWithSigns:
    def test_forced_signs(self):
        S = path(S7)
        r = unfold_with_signs(S, decompose_excursions(S), 0.5, signs=[-1, 1])
        np.testing.assert_array_equal(r.X.values, [0, -1, -2, 0, 0, 3, 0])
        np.testing.assert_array_equal(np.abs(r.X.values), S.values)

    def test_all_heads(self):
        S = path(S7)
        r = unfold_with_signs(S, decompose_excursions(S), 0.999, signs=[1, 1])
        np.testing.assert_array_equal(r.X.values, S.values)

    def test_needs_stream_or_signs(self):
        S = path(S7)
        with pytest.raises(ConfigurationError):
            unfold_with_signs(S, decompose_excursions(S), 0.5)

    @pytest.mark.parametrize("alpha", [0.0, 1.0, 1.5])
    def test_alpha_range(self, alpha):
        S = path(S7)
        with pytest.raises(ConfigurationError):
            unfold_with_signs(S, decompose_excursions(S), alpha, RngStream(1))


class TestUnfoldSkorokhod:
    def test_hand_example(self):
        r = unfold_skorokhod(path([0, -1, 1, -3]), 0.5, signs=[1], stream=None)
        np.testing.assert_array_equal(r.folded.values, [0, 0, 2, 0])
        np.testing.assert_array_equal(r.X.values, [0, 0, 2, 0])
        assert r.diagnostics["abs_identity"] == 0

    def test_exact_identities_on_brownian(self):
        B = sample_brownian(make_grid(1, 2**12), RngStream(4), n_paths=20)
        r = unfold_skorokhod(B, 0.7, RngStream(5))
        assert np.all(r.diagnostics["abs_identity"] == 0)
        assert np.all(r.diagnostics["pushing_flat"] == 0)
        np.testing.assert_array_equal(np.abs(r.X.values), r.folded.values)
        np.testing.assert_array_equal(r.folded.values, B.total.values + r.pushing.values)

    def test_half_is_classical_tanaka_under_refinement(self):
        # at alpha = 1/2 the local-time term drops out: X = int sgn(X) dU
        meds = []
        for n in (2**10, 2**12, 2**14):
            B = sample_brownian(make_grid(1, n), RngStream(6), n_paths=60)
            r = unfold_skorokhod(B, 0.5, RngStream(7))
            x = r.X.values
            res = x - ito_integral(r.X.like(sign(x, "symmetric")), B.total).values
            meds.append(np.median(np.max(np.abs(res), axis=-1)))
        assert meds[0] > meds[1] > meds[2]

    def test_local_time_ratio(self):
        B = sample_brownian(make_grid(1, 2**14), RngStream(9), n_paths=100)
        r = unfold_skorokhod(B, 0.7, RngStream(10), diagnostics=False)
        lx = estimate_local_time(r.X, "upcrossing").final
        ls = estimate_local_time(r.folded, "upcrossing").final
        assert np.median(lx / ls) == pytest.approx(0.7, abs=0.07)

    def test_product_residual_shrinks(self):
        meds = []
        for n in (2**10, 2**12, 2**14):
            B = sample_brownian(make_grid(1, n), RngStream(11), n_paths=60)
            meds.append(np.median(unfold_skorokhod(B, 0.3, RngStream(12)).diagnostics["product"]))
        assert meds[0] > meds[1] > meds[2]


class TestUnfoldConventional:
    def test_forced_sign(self):
        r = unfold_conventional(path([0, 1, 1]), 0.5, None, signs=[1])
        np.testing.assert_array_equal(r.X.values, [0, 1, 1])

    def test_zero_path(self):
        r = unfold_conventional(path(np.zeros(6)), 0.7, RngStream(1))
        np.testing.assert_array_equal(r.X.values, 0)
        assert r.decomposition.n_excursions == 0

    @pytest.mark.parametrize("gamma", [0.2, 0.8])
    def test_sign_law_independent_of_gamma(self, gamma):
        g = make_grid(1, 2**10)
        N, a = 10_000, 0.7
        U = skew_brownian(gamma, 0.0, g, RngStream(13), n_paths=N)
        X = unfold_conventional(U, a, RngStream(14)).X
        # discretization allowance: paths that end inside the zero band
        assert abs(np.mean(X.final > 0) - a) <= 3 * np.sqrt(a * (1 - a) / N) + 0.01

    def test_abs_identity_within_band(self):
        g = make_grid(1, 2**10)
        B = sample_brownian(g, RngStream(2), n_paths=5)
        r = unfold_conventional(B, 0.4, RngStream(3))
        assert np.all(r.diagnostics["abs_identity"] <= 0.25 * np.sqrt(g.dt) + 1e-15)
