"""Market models driven by Hermite processes and synthetic riskless assets.

Three market families:

* pure Hermite markets, S_i(t) = S_i(0) exp(mu_i t + sigma_i H(t)), one
  shared driver, where a portfolio with unit exponent-weighted exposure
  can replicate a riskless bond exactly;
* a two-asset diffusion market (either distinct volatilities, or the
  shared-driver variant with equal volatility and different drifts);
* the mixed market combining an independent Brownian motion and a Hermite
  process, with the explicit bond / tilted-diffusion / unit-exposure /
  stock price system.

Riskless synthesis solves the exposure constraints directly; the taxed
variant solves the balance equation that includes the quadratic
transaction-tax term.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .processes import SamplePath

__all__ = [
    "PureHermiteMarket",
    "TwoAssetDiffusion",
    "MixedMarket",
    "MixedMarketPaths",
    "RisklessSynthesis",
    "InfeasibleMarketError",
    "price_pure_hermite",
    "pure_hermite_price_matrix",
    "price_mixed_market",
    "sde_residual",
    "synth_riskless",
    "synth_riskless_taxed",
    "bsm_synthetic_rate",
    "load_market",
]


class InfeasibleMarketError(ValueError):
    """No portfolio satisfies the requested replication constraints."""


def _as_float_array(x, name):
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    return arr


@dataclass
class PureHermiteMarket:
    """Assets S_i(t) = s0_i exp(mu_i(t) + sigma_i(t) H(t)) on one driver.

    ``mu`` and ``sigma`` are per-asset constants; when the optional
    time-dependent callables ``mu_fn``/``sigma_fn`` are given they supply
    the full coefficient value at time t (not a rate) and take precedence.
    """

    mu: np.ndarray
    sigma: np.ndarray
    s0: np.ndarray = None
    mu_fn: list = None
    sigma_fn: list = None
    mu_fn_deriv: list = None
    sigma_fn_deriv: list = None

    def __post_init__(self):
        self.mu = _as_float_array(self.mu, "mu")
        self.sigma = _as_float_array(self.sigma, "sigma")
        if len(self.mu) != len(self.sigma):
            raise ValueError("mu and sigma must have the same length")
        if self.s0 is None:
            self.s0 = np.ones_like(self.mu)
        self.s0 = _as_float_array(self.s0, "s0")
        if len(self.s0) != len(self.mu):
            raise ValueError("s0 must match the number of assets")
        if (self.s0 <= 0).any():
            raise ValueError("initial prices must be positive")
        for fn_list, name in ((self.mu_fn, "mu_fn"), (self.sigma_fn, "sigma_fn")):
            if fn_list is not None and len(fn_list) != len(self.mu):
                raise ValueError(f"{name} must provide one callable per asset")

    @property
    def n_assets(self):
        return len(self.mu)

    def drift_at(self, asset, t):
        if self.mu_fn is not None:
            return self.mu_fn[asset](t)
        return self.mu[asset] * np.asarray(t, dtype=float)

    def exposure_at(self, asset, t):
        if self.sigma_fn is not None:
            return self.sigma_fn[asset](t)
        return self.sigma[asset] * np.ones_like(np.asarray(t, dtype=float))


@dataclass
class TwoAssetDiffusion:
    """Two geometric diffusions on one Brownian driver.

    ``variant`` is 'ordered' (sigma1 > sigma2 > 0, the configuration whose
    synthetic rate is (mu2 sigma1 - mu1 sigma2)/(sigma1 - sigma2)) or
    'shared_vol' (equal sigmas, different drifts, the pair admitting the
    square-root spread arbitrage).
    """

    mu1: float
    sigma1: float
    mu2: float
    sigma2: float
    variant: str = "ordered"

    def __post_init__(self):
        if self.variant == "ordered":
            if not (self.sigma1 > self.sigma2 > 0):
                raise ValueError(
                    f"ordered variant needs sigma1 > sigma2 > 0, got {self.sigma1}, {self.sigma2}")
        elif self.variant == "shared_vol":
            if not (self.sigma1 == self.sigma2 > 0):
                raise ValueError("shared_vol variant needs equal positive sigmas")
            if self.mu1 == self.mu2:
                raise ValueError("shared_vol variant needs distinct drifts")
        else:
            raise ValueError(f"unknown variant {self.variant!r}")

    @classmethod
    def ordered(cls, mu1, sigma1, mu2, sigma2):
        return cls(mu1, sigma1, mu2, sigma2, "ordered")

    @classmethod
    def shared_vol(cls, mu_first, mu_second, sigma):
        return cls(mu_first, sigma, mu_second, sigma, "shared_vol")

    def price_paths(self, w):
        """Price rows for each asset along a Brownian ensemble ``w``."""
        t = w.times
        out = []
        for mu, sigma in ((self.mu1, self.sigma1), (self.mu2, self.sigma2)):
            out.append(np.exp((mu - 0.5 * sigma ** 2) * t + sigma * w.values))
        return out


@dataclass
class MixedMarket:
    """Bond, tilted diffusion, unit-exposure asset and stock.

    beta(t) = exp(rt); Z(t) = exp(-b^2 t/2 + b W); Y(t) = exp(W +
    (t^{1-2H} H(t)^2 - t) + rho H); the stock is s0 exp(mu t + sigma W +
    sigma^2 (t^{1-2H} H^2 - t) + sigma_h H).  At t = 0 the singular factor
    t^{1-2H} H(t)^2 is defined to be zero.
    """

    r: float
    b: float
    rho: float
    mu: float
    sigma: float
    sigma_h: float
    hurst: float
    s0: float = 1.0

    def __post_init__(self):
        if not 0.5 < self.hurst < 1.0:
            raise ValueError(f"hurst must lie in (1/2, 1), got {self.hurst}")
        if self.s0 <= 0:
            raise ValueError("initial stock price must be positive")


@dataclass
class MixedMarketPaths:
    bond: SamplePath
    tilted: SamplePath
    unit_exposure: SamplePath
    stock: SamplePath


@dataclass
class RisklessSynthesis:
    """Portfolio exponents replicating a riskless bond, and its rate."""

    exponents: np.ndarray
    rate: float
    kind: str = "plain"

    def __post_init__(self):
        self.exponents = _as_float_array(self.exponents, "exponents")
        if self.kind not in ("plain", "taxed"):
            raise ValueError(f"kind must be 'plain' or 'taxed', got {self.kind!r}")


# ---------------------------------------------------------------------------
# pricing

def price_pure_hermite(market, driver):
    """Exponential prices along the driver.

    With several assets the driver must hold a single path and the result
    rows are assets; with one asset the result rows follow the driver's
    paths.
    """
    if market.n_assets > 1 and driver.n_paths > 1:
        raise ValueError("multi-asset pricing needs a single driver path; "
                         "use pure_hermite_price_matrix for ensembles")
    t = driver.times
    if market.n_assets == 1:
        values = market.s0[0] * np.exp(market.drift_at(0, t)[None, :]
                                       + market.exposure_at(0, t)[None, :] * driver.values)
    else:
        h = driver.single()
        rows = [market.s0[i] * np.exp(market.drift_at(i, t) + market.exposure_at(i, t) * h)
                for i in range(market.n_assets)]
        values = np.vstack(rows)
    return SamplePath(driver.horizon, driver.steps, values, driver.seed, "price",
                      meta={"market": "pure_hermite", "mu": market.mu.tolist(),
                            "sigma": market.sigma.tolist(), "s0": market.s0.tolist()})


def pure_hermite_price_matrix(market, driver):
    """(assets, paths, steps + 1) price array over a driver ensemble."""
    t = driver.times
    out = np.empty((market.n_assets, driver.n_paths, driver.steps + 1))
    for i in range(market.n_assets):
        out[i] = market.s0[i] * np.exp(market.drift_at(i, t)[None, :]
                                       + market.exposure_at(i, t)[None, :] * driver.values)
    return out


def singular_square_term(t, h_values, hurst):
    """t^{1-2H} H(t)^2 with the t = 0 value set to zero.

    The exponent 1 - 2H is negative, but H(t)^2 shrinks like t^{2H}, so
    the product tends to zero almost surely; its mean is exactly t.
    """
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(h_values)
    positive = t > 0
    out[..., positive] = t[positive] ** (1.0 - 2.0 * hurst) * h_values[..., positive] ** 2
    return out


def price_mixed_market(market, w, h):
    """Bond, tilted diffusion, unit-exposure asset and stock paths.

    ``w`` and ``h`` must live on the same grid and come from independent
    streams (distinct seeds); rows are aligned pathwise.
    """
    if (w.steps, w.horizon) != (h.steps, h.horizon):
        raise ValueError("Brownian and Hermite paths must share one grid")
    if w.n_paths != h.n_paths:
        raise ValueError("Brownian and Hermite ensembles must have equal path counts")
    t = w.times
    square = singular_square_term(t, h.values, market.hurst)
    bond = np.exp(market.r * t)[None, :]
    tilted = np.exp(-0.5 * market.b ** 2 * t + market.b * w.values)
    unit = np.exp(w.values + (square - t) + market.rho * h.values)
    stock = market.s0 * np.exp(market.mu * t + market.sigma * w.values
                               + market.sigma ** 2 * (square - t)
                               + market.sigma_h * h.values)
    common = dict(horizon=w.horizon, steps=w.steps, seed=w.seed, kind="price")
    return MixedMarketPaths(
        bond=SamplePath(values=bond, meta={"asset": "bond", "r": market.r}, **common),
        tilted=SamplePath(values=tilted, meta={"asset": "tilted", "b": market.b}, **common),
        unit_exposure=SamplePath(values=unit, meta={"asset": "unit_exposure",
                                                    "rho": market.rho}, **common),
        stock=SamplePath(values=stock, meta={"asset": "stock"}, **common),
    )


def sde_residual(market, stock, w, h):
    """Cumulative defect of the stock's differential form along paths.

    Per step the left-point form is
    dS/S = (mu - sigma^2/2 + sigma^2 (1-2H) t^{-2H} H^2) dt + sigma dW
           + (2 sigma^2 t^{1-2H} H + sigma_h) dH,
    with both singular t-powers defined as zero at t = 0.  Returns the
    cumulative residual, one row per path; it shrinks under refinement of
    the same realization.
    """
    t = w.times
    dt = w.horizon / w.steps
    hv, wv, sv = h.values, w.values, stock.values
    tl, hl = t[:-1], hv[:, :-1]
    drift_sing = np.zeros_like(hl)
    exposure_sing = np.zeros_like(hl)
    positive = tl > 0
    hurst = market.hurst
    drift_sing[:, positive] = tl[positive] ** (-2.0 * hurst) * hl[:, positive] ** 2
    exposure_sing[:, positive] = tl[positive] ** (1.0 - 2.0 * hurst) * hl[:, positive]
    drift = (market.mu - 0.5 * market.sigma ** 2
             + market.sigma ** 2 * (1.0 - 2.0 * hurst) * drift_sing) * dt
    model = (drift + market.sigma * np.diff(wv, axis=1)
             + (2.0 * market.sigma ** 2 * exposure_sing + market.sigma_h) * np.diff(hv, axis=1))
    realized = np.diff(sv, axis=1) / sv[:, :-1]
    out = np.zeros_like(sv)
    out[:, 1:] = np.cumsum(realized - model, axis=1)
    return out


# ---------------------------------------------------------------------------
# riskless synthesis

def synth_riskless(sigma, mu):
    """Exponents rho with sum(rho) = 1 and sum(rho sigma) = 0.

    For two assets the solution is unique; for more the minimum-norm
    solution is returned.  The replicated bond grows at rate sum(rho mu).
    A constant exposure vector makes the constraints contradictory.
    """
    sigma = _as_float_array(sigma, "sigma")
    mu = _as_float_array(mu, "mu")
    if len(sigma) != len(mu):
        raise ValueError("sigma and mu must have the same length")
    if len(sigma) < 2:
        raise ValueError("need at least two assets")
    design = np.vstack([np.ones_like(sigma), sigma])
    target = np.array([1.0, 0.0])
    exponents, *_ = np.linalg.lstsq(design, target, rcond=None)
    defect = np.abs(design @ exponents - target).max()
    if defect > 1e-9:
        raise InfeasibleMarketError(
            f"no exponents satisfy the constraints (defect {defect:.3e}); "
            "exposures are collinear with the budget constraint")
    return RisklessSynthesis(exponents=exponents, rate=float(exponents @ mu), kind="plain")


def _taxed_balance(phi, intensities):
    return float(np.sum(phi) - 1.0 + 0.5 * np.sum(intensities ** 2 * phi * (phi - 1.0)))


def synth_riskless_taxed(sigma, mu, tax):
    """Exponents phi with zero driver exposure and taxed budget balance.

    Solves sum(sigma phi) = 0 together with
    sum(phi) - 1 + sum(c_j^2 phi_j (phi_j - 1))/2 = 0.  Two assets reduce
    to one parameter after elimination, found by bracketing on
    (0, 1e3/min(c)]; more assets use a damped Gauss-Newton iteration.
    """
    sigma = _as_float_array(sigma, "sigma")
    mu = _as_float_array(mu, "mu")
    intensities = np.asarray(getattr(tax, "intensities", tax), dtype=float)
    if intensities.shape != sigma.shape:
        raise ValueError("tax intensities must match the number of assets")
    if (intensities < 0).any():
        raise ValueError("tax intensities must be nonnegative")
    if len(sigma) != len(mu):
        raise ValueError("sigma and mu must have the same length")
    if len(sigma) < 2:
        raise ValueError("need at least two assets")
    if not intensities.any():
        plain = synth_riskless(sigma, mu)
        return RisklessSynthesis(plain.exponents, plain.rate, kind="taxed")

    if len(sigma) == 2:
        if sigma[1] == 0:
            raise InfeasibleMarketError("second exposure must be nonzero for elimination")
        ratio = -sigma[0] / sigma[1]

        def balance(phi1):
            phi = np.array([phi1, ratio * phi1])
            return _taxed_balance(phi, intensities)

        bound = 1e3 / intensities[intensities > 0].min()
        if balance(bound) <= 0:
            raise InfeasibleMarketError("no root inside the bracketing interval")
        phi1 = brentq(balance, 0.0, bound, xtol=1e-15, rtol=8.9e-16)
        phi = np.array([phi1, ratio * phi1])
    else:
        phi = _taxed_newton(sigma, intensities)

    residual = abs(_taxed_balance(phi, intensities)) + abs(float(sigma @ phi))
    if residual > 1e-10:
        raise InfeasibleMarketError(f"taxed synthesis did not converge (residual {residual:.3e})")
    return RisklessSynthesis(exponents=phi, rate=float(phi @ mu), kind="taxed")


def _taxed_newton(sigma, intensities, max_iter=200):
    n = len(sigma)
    design = np.vstack([sigma, np.ones(n)])
    start, *_ = np.linalg.lstsq(design, np.array([0.0, 1.0]), rcond=None)
    phi = start - sigma * (sigma @ start) / (sigma @ sigma)

    def system(p):
        return np.array([float(sigma @ p), _taxed_balance(p, intensities)])

    for _ in range(max_iter):
        f = system(phi)
        if np.abs(f).max() < 1e-14:
            break
        jac = np.vstack([sigma, np.ones(n) + 0.5 * intensities ** 2 * (2.0 * phi - 1.0)])
        step = np.linalg.pinv(jac) @ f
        damping = 1.0
        base = np.abs(f).max()
        while damping > 1e-8:
            trial = phi - damping * step
            if np.abs(system(trial)).max() < base:
                phi = trial
                break
            damping /= 2.0
        else:
            raise InfeasibleMarketError("damped iteration stalled")
    return phi


def bsm_synthetic_rate(mu1, sigma1, mu2, sigma2):
    """Rate (mu2 sigma1 - mu1 sigma2)/(sigma1 - sigma2) of the two-asset pair."""
    if sigma1 == sigma2:
        raise ValueError("equal volatilities leave the synthetic rate undefined")
    return (mu2 * sigma1 - mu1 * sigma2) / (sigma1 - sigma2)


# ---------------------------------------------------------------------------
# configuration files

def _parse_floats(text):
    return [float(part) for part in text.split(",") if part.strip() != ""]


def load_market(path):
    """Market object from a flat key=value file.

    Common key ``type`` selects the family: ``pure_hermite`` (keys mu,
    sigma, optional s0, comma-separated per asset), ``two_asset`` (mu,
    sigma with two entries each, optional variant), ``mixed`` (r, b, rho,
    mu, sigma, sigma_h, hurst, optional s0).  Lines starting with '#' and
    blank lines are ignored.
    """
    entries = {}
    with open(path, "r", encoding="utf-8") as handle:
        for number, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{number}: expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            entries[key.strip()] = value.strip()
    kind = entries.pop("type", None)
    if kind is None:
        raise ValueError(f"{path}: missing required key 'type'")
    try:
        if kind == "pure_hermite":
            s0 = _parse_floats(entries["s0"]) if "s0" in entries else None
            return PureHermiteMarket(mu=_parse_floats(entries["mu"]),
                                     sigma=_parse_floats(entries["sigma"]), s0=s0)
        if kind == "two_asset":
            mu = _parse_floats(entries["mu"])
            sigma = _parse_floats(entries["sigma"])
            if len(mu) != 2 or len(sigma) != 2:
                raise ValueError("two_asset markets need exactly two mu and sigma entries")
            variant = entries.get("variant", "ordered")
            return TwoAssetDiffusion(mu[0], sigma[0], mu[1], sigma[1], variant)
        if kind == "mixed":
            return MixedMarket(r=float(entries["r"]), b=float(entries["b"]),
                               rho=float(entries["rho"]), mu=float(entries["mu"]),
                               sigma=float(entries["sigma"]),
                               sigma_h=float(entries["sigma_h"]),
                               hurst=float(entries["hurst"]),
                               s0=float(entries.get("s0", 1.0)))
    except KeyError as missing:
        raise ValueError(f"{path}: missing key {missing} for market type {kind!r}") from None
    raise ValueError(f"{path}: unknown market type {kind!r}")
