"""Left-point integrals, change of variables, and trading gains."""

import numpy as np
import pytest

from hermite_markets import (
    GridFunction,
    HermiteSpec,
    SamplePath,
    chain_rule_residual,
    gain_process,
    gen_fbm,
    pathwise_integral,
)


def _driver(steps=1024, seed=6, hurst=0.7):
    return gen_fbm(HermiteSpec(hurst), 1.0, steps, seed=seed)


def test_unit_integrand_telescopes():
    d = _driver()
    x = d.single()
    assert pathwise_integral(np.ones(len(x)), d) == pytest.approx(x[-1] - x[0], abs=1e-15)


def test_constant_driver_gives_zero():
    flat = SamplePath(horizon=1.0, steps=8, values=np.full((1, 9), 2.5))
    assert pathwise_integral(np.ones(9), flat) == 0.0


def test_integral_of_driver_against_itself():
    # int H dH converges to H(T)^2 / 2; at 2^14 steps the left-point sum
    # is within one percent.
    d = _driver(2**14)
    x = d.single()
    got = pathwise_integral(GridFunction(x), d)
    target = 0.5 * (x[-1] ** 2 - x[0] ** 2)
    assert abs(got - target) / abs(target) < 0.01


def test_integral_linearity_is_exact():
    d = _driver(256)
    x = d.single()
    f = np.cos(np.linspace(0, 3, len(x)))
    g = np.linspace(-1, 1, len(x)) ** 2
    combined = pathwise_integral(2.0 * f - 3.0 * g, d)
    split = 2.0 * pathwise_integral(f, d) - 3.0 * pathwise_integral(g, d)
    assert combined == pytest.approx(split, abs=1e-14)


def test_integrand_grid_mismatch():
    d = _driver(64)
    with pytest.raises(ValueError):
        pathwise_integral(np.ones(64), d)


def test_integral_requires_single_path():
    multi = gen_fbm(HermiteSpec(0.7), 1.0, 32, paths=2, seed=1)
    with pytest.raises(ValueError):
        pathwise_integral(np.ones(33), multi)


def test_grid_function_validation():
    with pytest.raises(ValueError):
        GridFunction(np.ones((2, 3)))
    with pytest.raises(ValueError):
        GridFunction(np.array([1.0, np.nan]))


# ---------------------------------------------------------------------------
# change of variables

def test_chain_rule_identity_function_exact():
    r = chain_rule_residual(lambda x, t: x,
                            lambda x, t: np.ones_like(x),
                            lambda x, t: np.zeros_like(x), _driver())
    assert r == 0.0


def test_chain_rule_pure_time_exact():
    r = chain_rule_residual(lambda x, t: t,
                            lambda x, t: np.zeros_like(x),
                            lambda x, t: np.ones_like(t), _driver())
    assert abs(r) < 1e-10


def test_chain_rule_square_shrinks_under_refinement():
    # For G = x^2 the defect is exactly the realized squared variation,
    # which dies out as the grid refines because H > 1/2.
    resids = []
    for n in (2**10, 2**12, 2**14):
        d = _driver(n)
        r = chain_rule_residual(lambda x, t: x**2,
                                lambda x, t: 2.0 * x,
                                lambda x, t: np.zeros_like(x), d)
        resids.append(abs(r))
    assert resids[0] > resids[1] > resids[2]
    scale = max(float(np.max(np.abs(_driver(2**14).single()))) ** 2, 1.0)
    assert resids[-1] / scale < 0.01


# ---------------------------------------------------------------------------
# gains

def test_buy_and_hold_gain_exact():
    d = _driver(512)
    s = d.single()
    gain = gain_process([np.full(len(s), 3.0)], d)
    assert np.allclose(gain.values, 3.0 * (s - s[0]), atol=1e-14)


def test_zero_weights_zero_gain():
    d = _driver(128)
    gain = gain_process([np.zeros(129)], d)
    assert np.all(gain.values == 0.0)


def test_gain_starts_at_zero():
    d = _driver(128)
    gain = gain_process([np.ones(129)], d)
    assert gain.values[0] == 0.0


def test_quadratic_payoff_gain_identity():
    # Trading 2(S - S0) in the asset replicates (S - S0)^2 up to the
    # realized squared variation, exactly, grid by grid.
    d = _driver(256)
    s = d.single()
    gain = gain_process([2.0 * (s - s[0])], d).values[-1]
    payoff = (s[-1] - s[0]) ** 2
    qv = float(np.sum(np.diff(s) ** 2))
    assert payoff - gain == pytest.approx(qv, rel=1e-12)


def test_gain_weight_count_mismatch():
    d = _driver(64)
    with pytest.raises(ValueError):
        gain_process([np.ones(65), np.ones(65)], d)


def test_gain_weight_grid_mismatch():
    d = _driver(64)
    with pytest.raises(ValueError):
        gain_process([np.ones(64)], d)
