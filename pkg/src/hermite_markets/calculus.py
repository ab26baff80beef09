"""Pathwise integration against rough drivers.

Integrals are left-point Riemann sums, the limit that buy-and-hold
portfolio gains converge to, so no probabilistic correction term appears:
for smooth G, the change-of-variables formula holds with plain first-order
terms and the discrete residual vanishes under grid refinement.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "GridFunction",
    "pathwise_integral",
    "chain_rule_residual",
    "gain_process",
]


@dataclass
class GridFunction:
    """Scalar function sampled on the same uniform grid as a SamplePath."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1:
            raise ValueError("GridFunction values must be one-dimensional")
        if not np.isfinite(self.values).all():
            raise ValueError("GridFunction values contain non-finite entries")

    def __len__(self):
        return len(self.values)


def _as_values(obj):
    return obj.values if isinstance(obj, GridFunction) else np.asarray(obj, dtype=float)


def pathwise_integral(integrand, driver):
    """Left-point Riemann sum of ``integrand`` against a single driver path."""
    f = _as_values(integrand)
    x = driver.single()
    if len(f) != len(x):
        raise ValueError(f"integrand length {len(f)} does not match grid length {len(x)}")
    return float(np.dot(f[:-1], np.diff(x)))


def chain_rule_residual(g, g_x, g_t, driver):
    """Defect of G(X(T), T) - G(X(0), 0) = int g_x dX + int g_t dt.

    The space integral is the left-point sum, the time integral the
    trapezoid rule along the path.  For smooth G the residual shrinks to 0
    as the grid refines because the driver has vanishing quadratic
    variation.
    """
    x = driver.single()
    t = driver.times
    space = float(np.dot(g_x(x[:-1], t[:-1]), np.diff(x)))
    time = float(np.trapezoid(g_t(x, t), t))
    return float(g(x[-1], t[-1]) - g(x[0], t[0]) - space - time)


def gain_process(weights, prices):
    """Cumulative trading gain sum_j int a_j dS_j for grid weight functions.

    ``weights`` is one GridFunction (or array) per asset row of ``prices``;
    gains accumulate left-point, starting at zero.
    """
    series = prices.values
    if len(weights) != series.shape[0]:
        raise ValueError(f"{len(weights)} weight functions for {series.shape[0]} assets")
    total = np.zeros(series.shape[1])
    for a, s in zip(weights, series):
        a = _as_values(a)
        if len(a) != series.shape[1]:
            raise ValueError("weight grid does not match price grid")
        total[1:] += np.cumsum(a[:-1] * np.diff(s))
    return GridFunction(total)
