"""Generator-level checks: seeding, marginal laws, scaling, memory."""

import numpy as np
import pytest
import scipy.stats as sps

from hermite_markets import (
    HermiteSpec,
    HouSpec,
    MixedHermiteSpec,
    estimate_hurst,
    gen_bm,
    gen_fbm,
    gen_hermite,
    gen_hou,
    gen_mixed,
)
from hermite_markets.processes import gen_fgn, hermite_poly
from hermite_markets.stats import autocov_slope


# ---------------------------------------------------------------------------
# seeding and determinism

def test_same_seed_same_paths():
    a = gen_fbm(HermiteSpec(0.7), 1.0, 128, paths=4, seed=12)
    b = gen_fbm(HermiteSpec(0.7), 1.0, 128, paths=4, seed=12)
    assert np.array_equal(a.values, b.values)


def test_different_seeds_differ():
    a = gen_fbm(HermiteSpec(0.7), 1.0, 128, seed=12)
    b = gen_fbm(HermiteSpec(0.7), 1.0, 128, seed=13)
    assert not np.array_equal(a.values, b.values)


def test_path_offset_matches_block_slice():
    # Generating paths 2..5 directly must reproduce rows 2..5 of a larger
    # block, so chunked generation cannot depend on how work is split.
    whole = gen_hermite(HermiteSpec(0.72, 2), 1.0, 64, paths=6, seed=9)
    part = gen_hermite(HermiteSpec(0.72, 2), 1.0, 64, paths=4, seed=9, path_offset=2)
    assert np.array_equal(whole.values[2:6], part.values)


def test_components_are_independent_streams():
    a = gen_fbm(HermiteSpec(0.7), 1.0, 64, seed=5, component=0)
    b = gen_fbm(HermiteSpec(0.7), 1.0, 64, seed=5, component=1)
    assert not np.array_equal(a.values, b.values)


def test_paths_start_at_zero():
    for path in (
        gen_bm(1.0, 32, paths=3, seed=1),
        gen_fbm(HermiteSpec(0.8), 1.0, 32, paths=3, seed=1),
        gen_hermite(HermiteSpec(0.7, 2), 1.0, 32, paths=3, seed=1),
    ):
        assert np.all(path.values[:, 0] == 0.0)


# ---------------------------------------------------------------------------
# parameter validation

def test_hurst_range_enforced():
    with pytest.raises(ValueError):
        HermiteSpec(0.4)
    with pytest.raises(ValueError):
        HermiteSpec(1.0)


def test_analytic_normalization_needs_low_rank():
    with pytest.raises(ValueError):
        HermiteSpec(0.7, 3, normalization="analytic")


def test_mixed_weights_must_be_unit_norm():
    with pytest.raises(ValueError):
        MixedHermiteSpec(0.7, ((0.6, 1), (0.6, 2)))


def test_grid_validation():
    with pytest.raises(ValueError):
        gen_bm(0.0, 32)
    with pytest.raises(ValueError):
        gen_bm(1.0, 0)


# ---------------------------------------------------------------------------
# Hermite polynomials

def test_hermite_poly_low_orders():
    x = np.array([-1.0, 0.0, 0.5, 2.0])
    assert np.array_equal(hermite_poly(0, x), np.ones(4))
    assert np.array_equal(hermite_poly(1, x), x)
    assert np.allclose(hermite_poly(2, x), x**2 - 1.0)
    assert np.allclose(hermite_poly(3, x), x**3 - 3.0 * x)


# ---------------------------------------------------------------------------
# fractional Gaussian noise

def test_fgn_unit_variance():
    x = gen_fgn(0.85, 2**13, seed=2)
    assert abs(float(np.mean(x**2)) - 1.0) < 0.1


def test_fgn_deterministic():
    assert np.array_equal(gen_fgn(0.8, 512, seed=4), gen_fgn(0.8, 512, seed=4))


def test_fgn_long_memory_slope():
    # Sample autocovariance of a persistent sequence decays like
    # lag^(2H' - 2); the fitted log-log slope should sit near -0.2.
    x = np.cumsum(gen_fgn(0.9, 2**14, seed=7))
    slope = autocov_slope(x, np.arange(2, 33))
    assert abs(slope - (2 * 0.9 - 2.0)) < 0.15


# ---------------------------------------------------------------------------
# marginal law of the rank-1 process

def test_fbm_unit_time_variance():
    path = gen_fbm(HermiteSpec(0.7), 1.0, 64, paths=2000, seed=31)
    var = float(np.var(path.values[:, -1]))
    assert abs(var - 1.0) < 0.07


def test_fbm_covariance_interior_point():
    path = gen_fbm(HermiteSpec(0.7), 1.0, 64, paths=2000, seed=31)
    cov = float(np.mean(path.values[:, 32] * path.values[:, -1]))
    h = 0.7
    target = 0.5 * (1.0 + 0.5 ** (2 * h) - 0.5 ** (2 * h))
    assert abs(cov - target) < 0.05


def test_single_step_is_scaled_normal():
    # With one step the increment is exactly N(0, T^(2H)).
    h, horizon = 0.8, 2.0
    path = gen_fbm(HermiteSpec(h), horizon, 1, paths=4000, seed=17)
    z = path.values[:, 1] / horizon**h
    assert abs(float(np.var(z)) - 1.0) < 0.07
    assert sps.normaltest(z).pvalue > 0.01


def test_rank1_hermite_matches_fbm_in_law():
    # The partial-sum scheme at rank 1 is FBM on the inner lattice, so its
    # terminal law must agree with the direct Davies-Harte generator.
    a = gen_hermite(HermiteSpec(0.75, 1), 1.0, 64, paths=1500, seed=8)
    b = gen_fbm(HermiteSpec(0.75, 1), 1.0, 64, paths=1500, seed=9)
    assert sps.ks_2samp(a.values[:, -1], b.values[:, -1]).pvalue > 0.01


# ---------------------------------------------------------------------------
# rank-2 marginal law

def test_rosenblatt_terminal_moments():
    path = gen_hermite(HermiteSpec(0.7, 2), 1.0, 64, paths=4000, seed=23)
    x = path.values[:, -1]
    assert abs(float(np.mean(x))) < 0.05
    assert abs(float(np.var(x)) - 1.0) < 0.08
    assert float(sps.skew(x)) > 0.5
    assert sps.normaltest(x).pvalue < 0.01


def test_gaussian_boundary_between_ranks():
    g = gen_hermite(HermiteSpec(0.65, 1), 1.0, 64, paths=1500, seed=29)
    ng = gen_hermite(HermiteSpec(0.65, 2), 1.0, 64, paths=1500, seed=29)
    assert sps.normaltest(g.values[:, -1]).pvalue > 0.01
    assert sps.normaltest(ng.values[:, -1]).pvalue < 0.01


# ---------------------------------------------------------------------------
# self-similarity

@pytest.mark.parametrize("rank", [1, 2])
def test_self_similarity_interior_scaling(rank):
    # H(ct) must equal c^H H(t) in law.  Compare an interior grid value,
    # rescaled, against the terminal value from an independent run; the
    # stretch factors 0.5 and 2 exercise both directions.
    spec = HermiteSpec(0.75, rank)
    a = gen_hermite(spec, 1.0, 64, paths=1500, seed=41)
    b = gen_hermite(spec, 1.0, 64, paths=1500, seed=42)
    p_half = sps.ks_2samp(a.values[:, 32] * 2.0**0.75, b.values[:, 64]).pvalue
    assert p_half > 0.01
    c = gen_hermite(spec, 2.0, 64, paths=1500, seed=43)
    p_double = sps.ks_2samp(c.values[:, 16] * 4.0**0.75, c.values[:, 64]).pvalue
    assert p_double > 0.01


# ---------------------------------------------------------------------------
# long-range dependence and path roughness

def test_increment_autocov_slope():
    path = gen_fbm(HermiteSpec(0.8), 1.0, 2**16, seed=4)
    slope = autocov_slope(path.values, np.arange(2, 33))
    assert abs(slope - (2 * 0.8 - 2.0)) < 0.2


def test_holder_roughness_slope():
    # The largest increment over a dyadic subgrid scales like dt^H up to
    # a slowly varying factor, so the fitted exponent stays above H - 0.1.
    path = gen_fbm(HermiteSpec(0.7), 1.0, 2**14, seed=14)
    v = path.values[0]
    log_max, log_dt = [], []
    for n in (2**8, 2**10, 2**12, 2**14):
        sub = v[:: 2**14 // n]
        log_max.append(np.log(np.max(np.abs(np.diff(sub)))))
        log_dt.append(np.log(1.0 / n))
    slope = float(np.polyfit(log_dt, log_max, 1)[0])
    assert slope >= 0.7 - 0.1


def test_hurst_estimate_recovers_input():
    path = gen_fbm(HermiteSpec(0.7), 1.0, 2**14, seed=3)
    est = estimate_hurst(path)
    assert abs(est.value - 0.7) < 0.05


def test_hurst_estimate_brownian_motion():
    est = estimate_hurst(gen_bm(1.0, 2**14, seed=3))
    assert abs(est.value - 0.5) < 0.05


# ---------------------------------------------------------------------------
# mixtures

def test_single_component_mixture_collapses():
    spec = MixedHermiteSpec(0.72, ((1.0, 2),))
    mixed = gen_mixed(spec, 1.0, 64, paths=3, seed=6)
    plain = gen_hermite(HermiteSpec(0.72, 2), 1.0, 64, paths=3, seed=6)
    assert np.array_equal(mixed.values, plain.values)


def test_mixed_unit_variance():
    w = 1.0 / np.sqrt(2.0)
    spec = MixedHermiteSpec(0.75, ((w, 1), (w, 2)))
    path = gen_mixed(spec, 1.0, 64, paths=5000, seed=44)
    assert abs(float(np.var(path.values[:, -1])) - 1.0) < 0.05


def test_mixed_records_ranks_in_meta():
    spec = MixedHermiteSpec(0.75, ((1.0, 1),))
    path = gen_mixed(spec, 1.0, 16, seed=1)
    assert path.meta.get("ranks") == [1]


# ---------------------------------------------------------------------------
# normalization modes

def test_analytic_matches_empirical_rank1():
    # Rank-1 partial sums have variance exactly N^(2H), so the two
    # normalization modes coincide to machine precision.
    a = gen_fbm(HermiteSpec(0.8, 1, normalization="empirical"), 1.0, 128, seed=5)
    b = gen_fbm(HermiteSpec(0.8, 1, normalization="analytic"), 1.0, 128, seed=5)
    assert np.allclose(a.values, b.values, rtol=1e-12, atol=1e-14)


def test_analytic_close_to_empirical_rank2():
    a = gen_hermite(HermiteSpec(0.7, 2, normalization="empirical"), 1.0, 64, seed=5)
    b = gen_hermite(HermiteSpec(0.7, 2, normalization="analytic"), 1.0, 64, seed=5)
    ratio = np.max(np.abs(b.values[:, 1:] / a.values[:, 1:] - 1.0))
    assert ratio < 0.02


# ---------------------------------------------------------------------------
# fractional Ornstein-Uhlenbeck

def test_hou_zero_sigma_is_flat():
    path = gen_hou(HouSpec(1.0, 0.0), HermiteSpec(0.75), 4.0, 64, seed=2)
    assert np.all(path.values == 0.0)


def test_hou_starts_off_zero():
    path = gen_hou(HouSpec(1.0, 1.0), HermiteSpec(0.75), 4.0, 64, seed=2)
    assert path.values[0, 0] != 0.0


def test_hou_stationary_variance():
    # The warmed-up process is stationary with variance
    # Gamma(2H + 1) / (2 lam^(2H)) when sigma = 1.
    import math

    h, lam = 0.75, 1.0
    target = math.gamma(2 * h + 1.0) / (2.0 * lam ** (2 * h))
    path = gen_hou(HouSpec(lam, 1.0), HermiteSpec(h), 4.0, 64, paths=3000, seed=15)
    worst = 0.0
    for k in (0, 16, 48, 64):
        var = float(np.var(path.values[:, k]))
        worst = max(worst, abs(var / target - 1.0))
    assert worst < 0.10


def test_hou_value_autocov_decay():
    # Value autocovariance at widely separated times decays like the
    # driver's increment covariance, exponent 2H - 2.
    h, lam = 0.8, 1.0
    path = gen_hou(HouSpec(lam, 1.0), HermiteSpec(h), 40.0, 640, paths=3000, seed=16)
    dt = 40.0 / 640
    lags_t = np.array([5.0, 10.0])
    idx = (lags_t / dt).astype(int)
    vals = path.values - path.values.mean(axis=0, keepdims=True)
    acov = [float(np.mean(vals[:, 320] * vals[:, 320 + i])) for i in idx]
    assert min(acov) > 0
    slope = float(np.diff(np.log(acov))[0] / np.diff(np.log(lags_t))[0])
    assert abs(slope - (2 * h - 2.0)) < 0.3
