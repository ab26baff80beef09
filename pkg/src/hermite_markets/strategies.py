"""Self-financing portfolios, the strategy-specific arbitrage tax, and demos.

A portfolio is a scalar field of asset prices (optionally of time too).
The frictionless self-financing property for Markov strategies is the
Euler-type identity sum_j dP/dx_j x_j = P; a quadratic transaction tax with
per-asset intensities c_j adds the curvature term
sum_j c_j^2/2 d2P/dx_j^2 x_j^2.  The running tax charged along a price
path is the left-point integral of those curvature terms against the
assets, which is what the Monte Carlo demos accumulate.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .calculus import GridFunction
from .markets import price_mixed_market
from .processes import SamplePath, gen_bm, gen_fbm, gen_hermite, derive_seeds, HermiteSpec

__all__ = [
    "TaxSchedule",
    "PortfolioFunction",
    "TaxReport",
    "sqrt_spread_portfolio",
    "sqrt_spread_portfolio_fn",
    "power_portfolio",
    "mixed_arbitrage_portfolio",
    "self_financing_residual",
    "taxed_self_financing_residual",
    "mixed_market_residual",
    "taxed_bsm_residual",
    "pair_value_residual",
    "pair_curvature_residual",
    "power_pair_exponents",
    "power_pair_frictionless",
    "running_cost",
    "wilson_ci",
    "shiryaev_demo",
    "f_strategy_demo",
    "diffusion_arb_demo",
    "mixed_arb_demo",
]

_FD_SCALE = 1e-5
_Z95 = 1.959963984540054


@dataclass(frozen=True)
class TaxSchedule:
    """Per-asset quadratic transaction-tax intensities, all nonnegative."""

    intensities: np.ndarray

    def __post_init__(self):
        arr = np.atleast_1d(np.asarray(self.intensities, dtype=float))
        if (arr < 0).any():
            raise ValueError("tax intensities must be nonnegative")
        object.__setattr__(self, "intensities", arr)

    @classmethod
    def zero(cls, n_assets):
        return cls(np.zeros(n_assets))

    @classmethod
    def uniform(cls, c, n_assets):
        return cls(np.full(n_assets, float(c)))

    @property
    def is_zero(self):
        return not self.intensities.any()


def _intensities(tax, n_assets):
    arr = np.atleast_1d(np.asarray(getattr(tax, "intensities", tax), dtype=float))
    if len(arr) == 1 and n_assets > 1:
        arr = np.full(n_assets, arr[0])
    if len(arr) != n_assets:
        raise ValueError(f"{len(arr)} tax intensities for {n_assets} assets")
    if (arr < 0).any():
        raise ValueError("tax intensities must be nonnegative")
    return arr


@dataclass
class PortfolioFunction:
    """Scalar field of asset prices with first and second partials.

    ``fn`` takes a sequence of per-asset values (scalars or broadcastable
    arrays); time-dependent fields take ``(t, x)`` instead.  Analytic
    partials are used when supplied (``grad`` is one callable per asset,
    ``hess`` a single callable of (i, j, ...)); anything missing falls
    back to central finite differences with step 1e-5 * max(1, |x_j|).
    """

    fn: object
    arity: int
    grad: list = None
    hess: object = None
    time_partial_fn: object = None
    time_dependent: bool = False
    label: str = ""

    def __post_init__(self):
        if self.arity < 1:
            raise ValueError("arity must be >= 1")
        if self.grad is not None and len(self.grad) != self.arity:
            raise ValueError("grad must provide one callable per asset")

    def _call(self, f, x, t):
        return f(t, x) if self.time_dependent else f(x)

    def _check(self, x):
        if len(x) != self.arity:
            raise ValueError(f"expected {self.arity} price coordinates, got {len(x)}")
        return [np.asarray(xi, dtype=float) for xi in x]

    def value(self, x, t=None):
        return self._call(self.fn, self._check(x), t)

    def partial(self, j, x, t=None):
        x = self._check(x)
        if self.grad is not None:
            return self._call(self.grad[j], x, t)
        h = _FD_SCALE * np.maximum(1.0, np.abs(x[j]))
        up = self._call(self.fn, _shift(x, j, h), t)
        down = self._call(self.fn, _shift(x, j, -h), t)
        return (up - down) / (2.0 * h)

    def second(self, i, j, x, t=None):
        x = self._check(x)
        if self.hess is not None:
            if self.time_dependent:
                return self.hess(i, j, t, x)
            return self.hess(i, j, x)
        hi = _FD_SCALE * np.maximum(1.0, np.abs(x[i]))
        if i == j:
            mid = self._call(self.fn, x, t)
            up = self._call(self.fn, _shift(x, i, hi), t)
            down = self._call(self.fn, _shift(x, i, -hi), t)
            return (up - 2.0 * mid + down) / hi ** 2
        hj = _FD_SCALE * np.maximum(1.0, np.abs(x[j]))
        pp = self._call(self.fn, _shift(_shift(x, i, hi), j, hj), t)
        pm = self._call(self.fn, _shift(_shift(x, i, hi), j, -hj), t)
        mp = self._call(self.fn, _shift(_shift(x, i, -hi), j, hj), t)
        mm = self._call(self.fn, _shift(_shift(x, i, -hi), j, -hj), t)
        return (pp - pm - mp + mm) / (4.0 * hi * hj)

    def time_partial(self, x, t):
        if not self.time_dependent:
            raise ValueError("field is not time-dependent")
        x = self._check(x)
        if self.time_partial_fn is not None:
            return self.time_partial_fn(t, x)
        h = _FD_SCALE * np.maximum(1.0, np.abs(np.asarray(t, dtype=float)))
        return (self.fn(t + h, x) - self.fn(t - h, x)) / (2.0 * h)


def _shift(x, j, delta):
    out = list(x)
    out[j] = x[j] + delta
    return out


# ---------------------------------------------------------------------------
# concrete portfolio families

def sqrt_spread_portfolio(coeffs, x):
    """Value of sum_ij c_ij (sqrt(x_i) - sqrt(x_j))^2 at prices ``x``.

    Zero exactly when all prices coincide, strictly positive otherwise
    whenever some off-diagonal coefficient is positive.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    roots = [np.sqrt(np.asarray(xi, dtype=float)) for xi in x]
    if coeffs.shape != (len(roots), len(roots)):
        raise ValueError("coefficient matrix must be n_assets x n_assets")
    if (coeffs < 0).any():
        raise ValueError("coefficients must be nonnegative")
    total = 0.0
    for i in range(len(roots)):
        for j in range(len(roots)):
            if coeffs[i, j]:
                total = total + coeffs[i, j] * (roots[i] - roots[j]) ** 2
    return total


def sqrt_spread_portfolio_fn(coeffs):
    """The same pairwise square-root spread as a PortfolioFunction."""
    coeffs = np.asarray(coeffs, dtype=float)
    n = coeffs.shape[0]
    sym = coeffs + coeffs.T

    def grad_j(j):
        def g(x):
            acc = 0.0
            for i in range(n):
                if sym[j, i]:
                    acc = acc + sym[j, i] * (1.0 - np.sqrt(np.asarray(x[i], float)
                                                           / np.asarray(x[j], float)))
            return acc
        return g

    def hess(i, j, x):
        xi = np.asarray(x[i], dtype=float)
        xj = np.asarray(x[j], dtype=float)
        if i == j:
            acc = 0.0
            for k in range(n):
                if sym[i, k]:
                    acc = acc + sym[i, k] * np.sqrt(np.asarray(x[k], float)) / (2.0 * xi ** 1.5)
            return acc
        return -sym[i, j] / (2.0 * np.sqrt(xi * xj))

    return PortfolioFunction(fn=lambda x: sqrt_spread_portfolio(coeffs, x), arity=n,
                             grad=[grad_j(j) for j in range(n)], hess=hess,
                             label="sqrt-spread")


def power_portfolio(exponents):
    """Product power portfolio prod_j x_j^{a_j} with analytic partials."""
    a = np.atleast_1d(np.asarray(exponents, dtype=float))
    n = len(a)

    def value(x):
        out = 1.0
        for j in range(n):
            out = out * np.asarray(x[j], dtype=float) ** a[j]
        return out

    def grad_j(j):
        return lambda x: a[j] * value(x) / np.asarray(x[j], dtype=float)

    def hess(i, j, x):
        xi = np.asarray(x[i], dtype=float)
        if i == j:
            return a[i] * (a[i] - 1.0) * value(x) / xi ** 2
        return a[i] * a[j] * value(x) / (xi * np.asarray(x[j], dtype=float))

    return PortfolioFunction(fn=value, arity=n, grad=[grad_j(j) for j in range(n)],
                             hess=hess, label="power")


def mixed_arbitrage_portfolio(r):
    """(sqrt(x) + sqrt(y) - 2 exp(rt/2))^2, the mixed-market arbitrage field."""

    def u(t, x):
        return np.sqrt(x[0]) + np.sqrt(x[1]) - 2.0 * np.exp(0.5 * r * np.asarray(t, float))

    def fn(t, x):
        return u(t, x) ** 2

    def grad_j(j):
        return lambda t, x: u(t, x) / np.sqrt(np.asarray(x[j], float))

    def hess(i, j, t, x):
        xi = np.asarray(x[i], dtype=float)
        if i == j:
            return 1.0 / (2.0 * xi) - u(t, x) / (2.0 * xi ** 1.5)
        return 1.0 / (2.0 * np.sqrt(xi * np.asarray(x[j], float)))

    def d_t(t, x):
        return -2.0 * r * u(t, x) * np.exp(0.5 * r * np.asarray(t, float))

    return PortfolioFunction(fn=fn, arity=2, grad=[grad_j(0), grad_j(1)], hess=hess,
                             time_partial_fn=d_t, time_dependent=True,
                             label="mixed-arbitrage")


# ---------------------------------------------------------------------------
# residual identities

def self_financing_residual(P, x, t=None):
    """sum_j dP/dx_j x_j - P; zero for frictionless self-financing fields."""
    total = -P.value(x, t)
    for j in range(P.arity):
        total = total + P.partial(j, x, t) * np.asarray(x[j], dtype=float)
    return total


def taxed_self_financing_residual(P, x, tax, t=None):
    """Self-financing residual plus the quadratic-tax curvature terms."""
    intensities = _intensities(tax, P.arity)
    total = self_financing_residual(P, x, t)
    for j in range(P.arity):
        xj = np.asarray(x[j], dtype=float)
        total = total + 0.5 * intensities[j] ** 2 * P.second(j, j, x, t) * xj ** 2
    return total


def mixed_market_residual(P, t, x, y, r):
    """dP/dt + r x dP/dx + r y dP/dy - r P for a time-dependent field."""
    point = [np.asarray(x, float), np.asarray(y, float)]
    return (P.time_partial(point, t)
            + r * point[0] * P.partial(0, point, t)
            + r * point[1] * P.partial(1, point, t)
            - r * P.value(point, t))


def taxed_bsm_residual(g, x, r, sigmas, tax):
    """Two-asset taxed pricing identity residual.

    r x1 g_1 + r x2 g_2 - r g + (sigma_j^2 + r c_j^2)/2 x_j^2 g_jj summed
    over the two assets.
    """
    if g.arity != 2:
        raise ValueError("taxed_bsm_residual expects a two-asset field")
    sigmas = np.asarray(sigmas, dtype=float)
    intensities = _intensities(tax, 2)
    x0 = np.asarray(x[0], float)
    x1 = np.asarray(x[1], float)
    out = (r * x0 * g.partial(0, x) + r * x1 * g.partial(1, x) - r * g.value(x)
           + 0.5 * (sigmas[0] ** 2 + r * intensities[0] ** 2) * x0 ** 2 * g.second(0, 0, x)
           + 0.5 * (sigmas[1] ** 2 + r * intensities[1] ** 2) * x1 ** 2 * g.second(1, 1, x))
    return out


def pair_value_residual(P, x, y):
    """P - x P_x - y P_y for two assets on one Brownian driver."""
    point = [np.asarray(x, float), np.asarray(y, float)]
    return P.value(point) - point[0] * P.partial(0, point) - point[1] * P.partial(1, point)


def pair_curvature_residual(P, x, y):
    """x^2 P_xx / 2 + xy P_xy + y^2 P_yy / 2 for the shared-driver pair."""
    point = [np.asarray(x, float), np.asarray(y, float)]
    return (0.5 * point[0] ** 2 * P.second(0, 0, point)
            + point[0] * point[1] * P.second(0, 1, point)
            + 0.5 * point[1] ** 2 * P.second(1, 1, point))


def power_pair_exponents(a, r, sigmas, tax):
    """Second exponents b making x^a y^b satisfy the taxed pricing identity.

    The identity reduces to a quadratic in b; both roots are returned in
    ascending order.  A negative discriminant raises.
    """
    sigmas = np.asarray(sigmas, dtype=float)
    intensities = _intensities(tax, 2)
    k1 = sigmas[0] ** 2 + r * intensities[0] ** 2
    k2 = sigmas[1] ** 2 + r * intensities[1] ** 2
    lead = 0.5 * k2
    linear = r - 0.5 * k2
    const = r * a - r + 0.5 * a * (a - 1.0) * k1
    if lead == 0.0:
        if linear == 0.0:
            raise ValueError("degenerate identity: no dependence on the second exponent")
        return (-const / linear,)
    disc = linear ** 2 - 4.0 * lead * const
    if disc < 0:
        raise ValueError(f"no real exponent pair: discriminant {disc:.6e} < 0")
    root = math.sqrt(disc)
    pair = sorted(((-linear - root) / (2.0 * lead), (-linear + root) / (2.0 * lead)))
    return tuple(pair)


def power_pair_frictionless(a):
    """Frictionless shared-driver pair: the partner exponent is 1 - a."""
    return 1.0 - a


# ---------------------------------------------------------------------------
# running tax along price paths

def running_cost(P, prices, tax, times=None):
    """Cumulative tax sum_j c_j^2/2 int d2P/dx_j^2 S_j dS_j, left-point.

    ``prices`` may be a SamplePath whose rows are assets, an (assets,
    n + 1) array, or an (assets, paths, n + 1) array for ensembles.  The
    first two return a GridFunction; the ensemble form returns an array of
    cumulative costs per path.
    """
    if isinstance(prices, SamplePath):
        if times is None:
            times = prices.times
        prices = prices.values
    arr = np.asarray(prices, dtype=float)
    if arr.ndim == 2:
        squeeze = True
        arr = arr[:, None, :]
    elif arr.ndim == 3:
        squeeze = False
    else:
        raise ValueError("prices must be (assets, n+1) or (assets, paths, n+1)")
    if arr.shape[0] != P.arity:
        raise ValueError(f"{arr.shape[0]} asset rows for a field of arity {P.arity}")
    intensities = _intensities(tax, P.arity)
    left = [arr[j, :, :-1] for j in range(P.arity)]
    t_left = None
    if P.time_dependent:
        if times is None:
            raise ValueError("time-dependent field needs the time grid")
        t_left = np.asarray(times, dtype=float)[:-1]
    increments = np.zeros_like(left[0])
    for j in range(P.arity):
        if not intensities[j]:
            continue
        curvature = P.second(j, j, left, t_left)
        increments = increments + (0.5 * intensities[j] ** 2 * curvature
                                   * left[j] * np.diff(arr[j], axis=-1))
    out = np.zeros((arr.shape[1], arr.shape[2]))
    out[:, 1:] = np.cumsum(increments, axis=-1)
    if squeeze:
        return GridFunction(out[0])
    return out


def wilson_ci(successes, trials, z=_Z95):
    """Wilson 95% score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in [0, trials]")
    p = successes / trials
    denom = 1.0 + z ** 2 / trials
    center = (p + z ** 2 / (2.0 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z ** 2 / (4.0 * trials ** 2)) / denom
    return center - half, center + half


# ---------------------------------------------------------------------------
# Monte Carlo demos

@dataclass
class TaxReport:
    """Outcome of one arbitrage / tax demonstration."""

    demo: str
    parameters: dict
    paths: int
    seed: int
    statistics: dict
    ci_low: float
    ci_high: float
    passed: bool
    cost_path: np.ndarray = None
    net_path: np.ndarray = None

    def to_json_dict(self):
        return {
            "demo": self.demo,
            "parameters": self.parameters,
            "paths": self.paths,
            "seed": self.seed,
            "statistics": {k: (float(v) if np.isscalar(v) or isinstance(v, np.generic) else v)
                           for k, v in self.statistics.items()},
            "ci_low": float(self.ci_low),
            "ci_high": float(self.ci_high),
            "pass": bool(self.passed),
        }


def shiryaev_demo(driver):
    """Classic fractional arbitrage on S = exp(H) against a flat bond.

    Holding 2S - 2 shares of stock and 1 - S^2 bonds is self-financing
    with zero initial value, and its value (S - 1)^2 is positive for
    t > 0.  On any finite grid the left-point gain undershoots the value
    by exactly the accumulated squared increments of S, so the demo
    verifies that identity to rounding error; refining the grid sends the
    gap itself to zero.
    """
    s = np.exp(driver.values)
    value = (s - 1.0) ** 2
    increments = np.diff(s, axis=1)
    gains = np.zeros_like(s)
    gains[:, 1:] = np.cumsum((2.0 * s[:, :-1] - 2.0) * increments, axis=1)
    terminal = value[:, -1]
    quad_var = (increments ** 2).sum(axis=1)
    gap = terminal - gains[:, -1]
    identity_err = np.abs(gap - quad_var) / np.maximum(1.0, terminal)
    positive = int((terminal > 0).sum())
    low, high = wilson_ci(positive, driver.n_paths)
    stats = {
        "initial_value_max_abs": float(np.abs(value[:, 0]).max()),
        "identity_max_rel_error": float(identity_err.max()),
        "median_terminal_rel_gap": float(np.median(gap / np.maximum(terminal, 1e-12))),
        "fraction_positive": positive / driver.n_paths,
    }
    passed = bool(value[:, 0].max() == 0.0 and positive == driver.n_paths
                  and stats["identity_max_rel_error"] < 1e-8)
    return TaxReport("shiryaev", {"hurst": driver.meta.get("hurst"),
                                  "steps": driver.steps, "horizon": driver.horizon},
                     driver.n_paths, driver.seed, stats, low, high, passed,
                     cost_path=np.zeros(driver.steps + 1),
                     net_path=value.mean(axis=0))


def f_strategy_demo(f, df, d2f, driver, intensity, t=None, threshold_check=False):
    """Tax a smooth single-asset strategy f(S) on S = exp(H).

    The running tax admits the closed form
    c^2/2 (f'(S_t) S_t - f(S_t) - f'(S_0) S_0); the demo reports the
    probability that the strategy still wins after tax, with a Wilson 95%
    interval.  Intensities at or above sqrt(2) are rejected.  With
    ``threshold_check`` the quadratic-payoff threshold decomposition is
    evaluated on the same terminal values.
    """
    c = float(intensity)
    if not 0.0 <= c < math.sqrt(2.0):
        raise ValueError(f"intensity must lie in [0, sqrt(2)), got {c}")
    if abs(f(1.0)) > 1e-12:
        raise ValueError("strategy must start worthless: f(1) != 0")
    s = np.exp(driver.values)
    horizon = driver.horizon
    if t is None:
        t = horizon
    if not 0.0 < t <= horizon:
        raise ValueError(f"evaluation time {t} outside (0, {horizon}]")
    index = int(round(t / horizon * driver.steps))
    anchor = df(1.0)
    cost = 0.5 * c ** 2 * (df(s) * s - f(s) - anchor)
    net = f(s) - cost
    net_t = net[:, index]
    wins = int((net_t > 0).sum())
    low, high = wilson_ci(wins, driver.n_paths)
    stats = {
        "probability": wins / driver.n_paths,
        "mean_value": float(f(s[:, index]).mean()),
        "mean_cost": float(cost[:, index].mean()),
    }
    if threshold_check:
        if c >= math.sqrt(2.0) or c ** 2 >= 2.0:
            raise ValueError("threshold decomposition needs c^2 < 2")
        s_t = s[:, index]
        if c > 0:
            threshold = (1.0 + 0.5 * c ** 2) / (1.0 - 0.5 * c ** 2)
            alt = float(((s_t > threshold).mean() + (s_t < 1.0).mean()))
            stats["threshold"] = threshold
        else:
            alt = float((s_t != 1.0).mean())
        stats["threshold_probability"] = alt
    if c == 0.0:
        passed = stats["probability"] == 1.0
    else:
        passed = bool(high < 1.0 and stats["probability"] < 1.0)
    return TaxReport("f_strategy", {"intensity": c, "t": t,
                                    "hurst": driver.meta.get("hurst"),
                                    "steps": driver.steps, "horizon": driver.horizon},
                     driver.n_paths, driver.seed, stats, low, high, passed,
                     cost_path=cost.mean(axis=0), net_path=net.mean(axis=0))


def diffusion_arb_demo(market, paths=10_000, steps=512, horizon=1.0, seed=42, tax=None):
    """Square-root spread arbitrage on two shared-driver diffusions.

    Frictionless, (sqrt(S) - sqrt(V))^2 starts at zero and is positive for
    t > 0 on every path; under a positive tax the running cost drives the
    net value negative on a nonzero fraction of paths.
    """
    if market.variant != "shared_vol":
        raise ValueError("demo needs the shared-volatility two-asset market")
    w = gen_bm(horizon, steps, paths, seed=seed)
    s_vals, v_vals = market.price_paths(w)
    g_values = (np.sqrt(s_vals) - np.sqrt(v_vals)) ** 2
    portfolio = sqrt_spread_portfolio_fn(np.array([[0.0, 1.0], [0.0, 0.0]]))
    rng = np.random.default_rng(seed)
    spots = 0.5 + 1.5 * rng.random((20, 2))
    res_value = max(abs(float(pair_value_residual(portfolio, x, y))) for x, y in spots)
    res_curv = max(abs(float(pair_curvature_residual(portfolio, x, y))) for x, y in spots)
    for a in (-0.5, 0.3, 2.0):
        powers = power_portfolio([a, power_pair_frictionless(a)])
        res_value = max(res_value, max(abs(float(pair_value_residual(powers, x, y)))
                                       for x, y in spots))
        res_curv = max(res_curv, max(abs(float(pair_curvature_residual(powers, x, y)))
                                     for x, y in spots))
    stats = {
        "initial_value_max_abs": float(np.abs(g_values[:, 0]).max()),
        "min_terminal_value": float(g_values[:, -1].min()),
        "pair_residual_max": max(res_value, res_curv),
    }
    intensities = _intensities(tax, 2) if tax is not None else np.zeros(2)
    if intensities.any():
        cost = running_cost(portfolio, np.stack([s_vals, v_vals]), intensities)
        net = g_values - cost
        losses = int((net[:, -1] < 0).sum())
        low, high = wilson_ci(losses, paths)
        stats["fraction_negative_net"] = losses / paths
        stats["mean_cost"] = float(cost[:, -1].mean())
        passed = bool(low > 0.0 and stats["min_terminal_value"] > 0.0
                      and stats["pair_residual_max"] < 1e-8)
        cost_mean, net_mean = cost.mean(axis=0), net.mean(axis=0)
    else:
        positives = int((g_values[:, -1] > 0).sum())
        low, high = wilson_ci(positives, paths)
        passed = bool(positives == paths and stats["initial_value_max_abs"] == 0.0
                      and stats["pair_residual_max"] < 1e-8)
        cost_mean, net_mean = np.zeros(steps + 1), g_values.mean(axis=0)
    return TaxReport("diffusion_arbitrage",
                     {"mu1": market.mu1, "mu2": market.mu2, "sigma": market.sigma1,
                      "tax": intensities.tolist(), "steps": steps, "horizon": horizon},
                     paths, seed, stats, low, high, passed,
                     cost_path=cost_mean, net_path=net_mean)


def mixed_arb_demo(market, paths=10_000, steps=512, horizon=1.0, seed=42,
                   tax=None, hermite=None):
    """Arbitrage field on the mixed market's tilted and unit-exposure assets.

    The field (sqrt(x) + sqrt(y) - 2 exp(rt/2))^2 starts at zero from unit
    prices, never goes negative, and solves the time-dependent pricing
    identity; a positive tax on both legs produces losing paths.
    """
    if hermite is None:
        hermite = HermiteSpec(market.hurst, 1)
    w_seed, h_seed = derive_seeds(seed, 2)
    w = gen_bm(horizon, steps, paths, seed=w_seed)
    if hermite.rank == 1:
        h = gen_fbm(hermite, horizon, steps, paths, seed=h_seed)
    else:
        h = gen_hermite(hermite, horizon, steps, paths, seed=h_seed)
    assets = price_mixed_market(market, w, h)
    x_vals = assets.tilted.values
    y_vals = assets.unit_exposure.values
    portfolio = mixed_arbitrage_portfolio(market.r)
    t = w.times
    values = portfolio.value([x_vals, y_vals], t)
    rng = np.random.default_rng(seed)
    spots = 0.5 + 1.5 * rng.random((20, 2))
    ts = 0.1 + 0.8 * rng.random(20)
    residual = max(abs(float(mixed_market_residual(portfolio, tc, x, y, market.r)))
                   for tc, (x, y) in zip(ts, spots))
    stats = {
        "initial_value_max_abs": float(np.abs(values[:, 0]).max()),
        "min_value": float(values.min()),
        "pricing_residual_max": residual,
    }
    intensities = _intensities(tax, 2) if tax is not None else np.zeros(2)
    if intensities.any():
        cost = running_cost(portfolio, np.stack([x_vals, y_vals]), intensities, times=t)
        net = values - cost
        losses = int((net[:, -1] < 0).sum())
        low, high = wilson_ci(losses, paths)
        stats["fraction_negative_net"] = losses / paths
        stats["mean_cost"] = float(cost[:, -1].mean())
        passed = bool(low > 0.0 and stats["min_value"] >= 0.0 and residual < 1e-8)
        cost_mean, net_mean = cost.mean(axis=0), net.mean(axis=0)
    else:
        positives = int((values[:, -1] > 0).sum())
        low, high = wilson_ci(positives, paths)
        passed = bool(stats["initial_value_max_abs"] == 0.0
                      and stats["min_value"] >= 0.0 and residual < 1e-8)
        cost_mean, net_mean = np.zeros(steps + 1), values.mean(axis=0)
    return TaxReport("mixed_arbitrage",
                     {"r": market.r, "b": market.b, "rho": market.rho,
                      "hurst": market.hurst, "tax": intensities.tolist(),
                      "steps": steps, "horizon": horizon},
                     paths, seed, stats, low, high, passed,
                     cost_path=cost_mean, net_path=net_mean)
