import math

import numpy as np
import pytest

from skewfold import (
    ConfigurationError,
    ParticleParams,
    RngStream,
    SamplePath,
    auxiliary_brownians,
    build_skew_system,
    derive_skew_params,
    make_grid,
    simulate_base,
)
from skewfold.paths import _qv_array
from skewfold.reflection import skorokhod_reflect

R = 1 / math.sqrt(2)


def realized_cov(a, b):
    da, db = np.diff(a.values, axis=-1), np.diff(b.values, axis=-1)
    return np.sum(da * db, axis=-1)


@pytest.fixture(scope="module")
def fine_system():
    prm = ParticleParams(R, R, zeta1=3, zeta2=1, eta1=1, eta2=1)
    base = simulate_base(prm, make_grid(1, 2**16), RngStream(41), n_paths=20)
    return base, build_skew_system(base, stream=RngStream(42))


class TestDerive:
    def test_symmetric(self):
        assert derive_skew_params(1, 1, 1, 1) == (0.5, 1.0, 1.0, 1.0)

    def test_skewed(self):
        a, b, z, e = derive_skew_params(3, 1, 1, 1)
        assert (z, e) == (2.0, 1.0)
        assert a == pytest.approx(1 / 3) and b == pytest.approx(4 / 3)

    def test_degenerate(self):
        with pytest.raises(ConfigurationError):
            derive_skew_params(0, 2, 2, 0)

    def test_params_validation(self):
        with pytest.raises(ConfigurationError):
            ParticleParams(0.6, 0.6)
        assert ParticleParams(0.6, 0.8).driftless


class TestBase:
    def test_gap_variation(self, fine_system):
        base, _ = fine_system
        q = _qv_array(base.Y.values)[..., -1]
        assert np.all(np.abs(q - 1) <= 0.05)

    def test_drift_runs(self):
        prm = ParticleParams.symmetric(g=1.0)
        base = simulate_base(prm, make_grid(1, 256), RngStream(3), n_paths=5)
        assert np.all(base.Y.values[:, 0] == 0)
        assert np.all(np.isfinite(base.Y.values))

    def test_zero_noise(self):
        g = make_grid(1, 16)
        z = SamplePath(g, np.zeros(17))
        base = simulate_base(ParticleParams.symmetric(), g, None, drivers=(z, z))
        np.testing.assert_array_equal(base.X1.values, 0)
        np.testing.assert_array_equal(base.X2.values, 0)


class TestAuxiliary:
    def test_splice_identity(self, fine_system):
        base, _ = fine_system
        aux = auxiliary_brownians(base)
        assert np.max(np.abs(base.Y.values - aux.W.values)) <= 1e-12

    def test_variations(self, fine_system):
        base, _ = fine_system
        W, V, W1, W2, V1, V2 = auxiliary_brownians(base)
        assert np.all(np.abs(realized_cov(W, V)) <= 0.05)
        assert np.all(np.abs(realized_cov(W1, W1) - 1) <= 0.05)
        assert np.all(np.abs(realized_cov(V2, V2) - 1) <= 0.05)


class TestSkewSystem:
    def test_symmetric_collisions_drop_local_time(self):
        prm = ParticleParams.symmetric()
        base = simulate_base(prm, make_grid(1, 1024), RngStream(5), n_paths=5)
        r = build_skew_system(base, stream=RngStream(6))
        assert r.alpha == 0.5 and r.beta == 1.0
        np.testing.assert_array_equal(r.Xi_t.values, r.V_t.values)

    def test_exact_identities(self, fine_system):
        base, r = fine_system
        d = r.diagnostics
        for k in ("gap_identity", "difference", "sum", "splice", "intertwine"):
            assert np.all(d[k] <= 1e-12), k
        lhs = np.abs(r.X1_t.values - r.X2_t.values)
        np.testing.assert_allclose(lhs, skorokhod_reflect(base.Y).S.values, rtol=0, atol=1e-12)

    def test_local_time_balance(self, fine_system):
        _, r = fine_system
        ratio = r.zeta * r.diagnostics["lt_pos"] / (r.eta * r.diagnostics["lt_neg"])
        assert np.median(ratio) == pytest.approx(1.0, abs=0.15)

    def test_rewired_pair(self, fine_system):
        _, r = fine_system
        d = r.diagnostics
        assert np.all(np.abs(d["qv_B1"] - 1) <= 0.05)
        assert np.all(np.abs(d["qv_B2"] - 1) <= 0.05)
        assert np.all(np.abs(d["cross_B12"]) <= 0.05)

    def test_rejects_drift_and_degenerate_alpha(self):
        g = make_grid(1, 64)
        base = simulate_base(ParticleParams.symmetric(g=1.0), g, RngStream(1))
        with pytest.raises(ConfigurationError):
            build_skew_system(base, stream=RngStream(2))
        base = simulate_base(ParticleParams.symmetric(zeta1=1, zeta2=3), g, RngStream(1))
        assert base.params.alpha == 1.0
        with pytest.raises(ConfigurationError):
            build_skew_system(base, stream=RngStream(2))
