"""Sample-path generators for Hermite fractional processes.

Drivers supported: Brownian motion, fractional Gaussian noise (FGN),
fractional Brownian motion (FBM), higher-rank Hermite processes (rank 2 is
the Rosenblatt process), mixtures of independent Hermite components sharing
one Hurst index, and a Hermite-driven Ornstein-Uhlenbeck process.

Construction notes
------------------
FGN is sampled exactly by circulant embedding of its autocovariance (FFT).
A rank-``kappa`` Hermite process with Hurst index ``H`` is approximated by
partial sums of the rank-``kappa`` Hermite polynomial applied to an inner
FGN whose Hurst index is ``(H - 1)/kappa + 1``; the sums run on a lattice
``approx_factor`` times finer than the output grid and are renormalized so
the variance at t = 1 is one.  For rank 1 the construction is exact in law.

Every path derives its own random stream from ``(seed, path index,
component index)``, so ensembles can be generated in any order, split
across workers, and reassembled by index with bit-identical results.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

__all__ = [
    "CirculantEmbeddingError",
    "HermiteSpec",
    "MixedHermiteSpec",
    "HouSpec",
    "SamplePath",
    "path_rng",
    "derive_seeds",
    "hermite_poly",
    "gen_fgn",
    "gen_bm",
    "gen_fbm",
    "gen_hermite",
    "gen_mixed",
    "gen_hou",
]

# Bound on the complex workspace used per batched FFT (number of entries).
_CHUNK_ENTRIES = 1 << 23
_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_EIG_TOL = -1e-10


class CirculantEmbeddingError(RuntimeError):
    """The circulant embedding of the FGN autocovariance failed.

    Raised when an embedding eigenvalue is negative beyond roundoff; the
    offending eigenvalue is kept on the exception.
    """

    def __init__(self, eigenvalue):
        self.eigenvalue = float(eigenvalue)
        super().__init__(
            f"circulant embedding not nonnegative definite: "
            f"min eigenvalue {self.eigenvalue:.6e}"
        )


def _require(condition, message):
    if not condition:
        raise ValueError(message)


@dataclass(frozen=True)
class HermiteSpec:
    """Parameters of one Hermite process.

    Attributes
    ----------
    hurst : float
        Self-similarity index H, strictly inside (1/2, 1).
    rank : int
        Hermite rank kappa >= 1.  Rank 1 is FBM, rank 2 Rosenblatt.
    approx_factor : int
        Inner lattice points per output step in the partial-sum scheme.
    normalization : str
        'empirical' divides by the exact finite-lattice standard deviation
        of the raw partial sum; 'analytic' uses the closed-form limit
        constant and is available for rank 1 and 2 only.
    """

    hurst: float
    rank: int = 1
    approx_factor: int = 32
    normalization: str = "empirical"

    def __post_init__(self):
        _require(0.5 < self.hurst < 1.0, f"hurst must lie in (1/2, 1), got {self.hurst}")
        _require(isinstance(self.rank, int) and self.rank >= 1, f"rank must be an integer >= 1, got {self.rank}")
        _require(isinstance(self.approx_factor, int) and self.approx_factor >= 1,
                 f"approx_factor must be an integer >= 1, got {self.approx_factor}")
        _require(self.normalization in ("empirical", "analytic"),
                 f"normalization must be 'empirical' or 'analytic', got {self.normalization!r}")
        if self.normalization == "analytic":
            _require(self.rank <= 2, "analytic normalization is closed-form for rank 1 and 2 only")

    @property
    def inner_hurst(self):
        """Hurst index of the inner Gaussian sequence, (H - 1)/rank + 1."""
        return (self.hurst - 1.0) / self.rank + 1.0


@dataclass(frozen=True)
class MixedHermiteSpec:
    """Finite mixture sum_i w_i * H^(H, rank_i) of independent components.

    ``components`` is a tuple of (weight, rank) pairs; the squared weights
    must sum to one so the mixture keeps unit variance at t = 1.
    """

    hurst: float
    components: tuple
    approx_factor: int = 32
    normalization: str = "empirical"

    def __post_init__(self):
        _require(0.5 < self.hurst < 1.0, f"hurst must lie in (1/2, 1), got {self.hurst}")
        _require(len(self.components) >= 1, "at least one component is required")
        sq = 0.0
        for weight, rank in self.components:
            _require(weight > 0, f"component weights must be positive, got {weight}")
            _require(isinstance(rank, int) and rank >= 1, f"component ranks must be integers >= 1, got {rank}")
            sq += float(weight) ** 2
        _require(abs(sq - 1.0) <= 1e-12, f"squared weights must sum to 1 within 1e-12, got {sq!r}")
        _require(isinstance(self.approx_factor, int) and self.approx_factor >= 1,
                 "approx_factor must be an integer >= 1")
        _require(self.normalization in ("empirical", "analytic"), "unknown normalization mode")

    def component_spec(self, index):
        _, rank = self.components[index]
        return HermiteSpec(self.hurst, rank, self.approx_factor, self.normalization)


@dataclass(frozen=True)
class HouSpec:
    """Hermite-driven Ornstein-Uhlenbeck parameters.

    The process is sigma * integral of exp(-lam (t - u)) against the driver
    over (-T0, t]; ``history_truncation`` is T0 and defaults to 20/lam.
    """

    lam: float
    sigma: float
    history_truncation: float = None

    def __post_init__(self):
        _require(self.lam > 0, f"lam must be positive, got {self.lam}")
        _require(self.sigma >= 0, f"sigma must be nonnegative, got {self.sigma}")
        if self.history_truncation is None:
            object.__setattr__(self, "history_truncation", 20.0 / self.lam)
        _require(self.history_truncation > 0,
                 f"history_truncation must be positive, got {self.history_truncation}")


@dataclass
class SamplePath:
    """Realizations of a process on a uniform grid over [0, horizon].

    ``values`` has shape (series, steps + 1); a row is one path, or one
    asset when the object carries a multi-asset price system.  ``meta``
    holds the generating parameters and is what the JSON sidecar stores.
    """

    horizon: float
    steps: int
    values: np.ndarray
    seed: int = 0
    kind: str = "driver"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        _require(self.horizon > 0, f"horizon must be positive, got {self.horizon}")
        _require(self.steps >= 1, f"steps must be >= 1, got {self.steps}")
        _require(self.values.ndim == 2, "values must be a 2-D array (series, steps + 1)")
        _require(self.values.shape[1] == self.steps + 1,
                 f"values must have steps + 1 = {self.steps + 1} columns, got {self.values.shape[1]}")
        _require(self.kind in ("driver", "price"), f"kind must be 'driver' or 'price', got {self.kind!r}")
        if not np.isfinite(self.values).all():
            raise ValueError("values contain non-finite entries")

    @property
    def times(self):
        return np.linspace(0.0, self.horizon, self.steps + 1)

    @property
    def n_paths(self):
        return self.values.shape[0]

    def path(self, index):
        return self.values[index]

    def single(self):
        _require(self.n_paths == 1, f"expected a single path, object holds {self.n_paths}")
        return self.values[0]


# ---------------------------------------------------------------------------
# seeding

def path_rng(seed, path_index, component=0):
    """Independent generator for one path of one driver component."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(path_index), int(component)))
    return np.random.default_rng(ss)


def derive_seeds(seed, count):
    """Split one base seed into ``count`` independent integer sub-seeds."""
    children = np.random.SeedSequence(int(seed)).spawn(count)
    return [int(child.generate_state(1)[0]) for child in children]


# ---------------------------------------------------------------------------
# fractional Gaussian noise by circulant embedding

def _fgn_autocov(hurst, lags):
    k = np.asarray(lags, dtype=float)
    two_h = 2.0 * hurst
    return 0.5 * ((k + 1.0) ** two_h - 2.0 * k ** two_h + np.abs(k - 1.0) ** two_h)


@lru_cache(maxsize=64)
def _circulant_eigenvalues(hurst, count):
    acov = _fgn_autocov(hurst, np.arange(count))
    row = np.empty(2 * count)
    row[:count] = acov
    row[count] = 0.0
    row[count + 1:] = acov[1:][::-1]
    eigs = np.fft.fft(row).real
    worst = eigs.min()
    if worst < _EIG_TOL:
        raise CirculantEmbeddingError(worst)
    eigs = np.clip(eigs, 0.0, None)
    eigs.setflags(write=False)
    return eigs


def _chunk_slices(paths, count):
    size = max(1, _CHUNK_ENTRIES // max(2 * count, 1))
    for start in range(0, paths, size):
        yield start, min(start + size, paths)


def _fgn_block(hurst, count, seed, path_indices, component):
    """Exact FGN rows for the given absolute path indices."""
    eigs = _circulant_eigenvalues(hurst, count)
    root = np.sqrt(eigs)
    m = 2 * count
    z = np.empty((len(path_indices), m), dtype=np.complex128)
    for row, p in enumerate(path_indices):
        draws = path_rng(seed, p, component).standard_normal(m)
        z[row, 0] = draws[0]
        z[row, count] = draws[1]
        if count > 1:
            z[row, 1:count] = (draws[2:count + 1] + 1j * draws[count + 1:]) * _INV_SQRT2
            z[row, count + 1:] = np.conj(z[row, count - 1:0:-1])
    z *= root
    return np.fft.ifft(z, axis=1).real[:, :count] * math.sqrt(m)


def gen_fgn(inner_hurst, count, seed=0):
    """One exact zero-mean, unit-variance FGN sequence of length ``count``.

    The autocovariance at lag k is (|k+1|^2H' + |k-1|^2H' - 2|k|^2H')/2 for
    Hurst index H' = ``inner_hurst``.  Fails loudly if the circulant
    embedding has an eigenvalue below -1e-10.
    """
    _require(0.5 < inner_hurst < 1.0, f"inner_hurst must lie in (1/2, 1), got {inner_hurst}")
    _require(count >= 1, f"count must be >= 1, got {count}")
    return _fgn_block(inner_hurst, int(count), seed, [0], 0)[0]


# ---------------------------------------------------------------------------
# Hermite polynomials and partial-sum normalizers

def hermite_poly(order, x):
    """Probabilists' Hermite polynomial He_order(x), three-term recurrence."""
    _require(isinstance(order, int) and order >= 0, f"order must be an integer >= 0, got {order}")
    arr = np.asarray(x, dtype=float)
    prev = np.ones_like(arr)
    if order == 0:
        return prev if arr.ndim else 1.0
    cur = arr.copy()
    for m in range(1, order):
        prev, cur = cur, arr * cur - m * prev
    return cur if arr.ndim else float(cur)


@lru_cache(maxsize=128)
def _raw_sum_std(inner_hurst, rank, count):
    """Exact std of sum_{j<=count} He_rank(xi_j) for FGN xi.

    Uses E[He_k(X) He_k(Y)] = k! corr(X, Y)^k, so the variance is the exact
    double sum of the lagged autocovariance raised to the rank.
    """
    lags = np.arange(count, dtype=float)
    rho = _fgn_autocov(inner_hurst, lags)
    weights = np.empty(count)
    weights[0] = count
    weights[1:] = 2.0 * (count - lags[1:])
    variance = math.factorial(rank) * float(np.dot(weights, rho ** rank))
    return math.sqrt(variance)


def _limit_std(hurst, rank):
    """Closed-form limit of _raw_sum_std(...) / count**hurst as count grows."""
    hp = (hurst - 1.0) / rank + 1.0
    top = math.factorial(rank) * (hp * (2.0 * hp - 1.0)) ** rank
    return math.sqrt(top / (hurst * (2.0 * hurst - 1.0)))


def _partial_sum_scale(spec, n_inner):
    """Factor applied to raw partial sums so Var at t = 1 is one."""
    if spec.normalization == "empirical":
        return 1.0 / _raw_sum_std(spec.inner_hurst, spec.rank, n_inner)
    return 1.0 / (n_inner ** spec.hurst * _limit_std(spec.hurst, spec.rank))


# ---------------------------------------------------------------------------
# generators

def _check_grid(horizon, steps, paths):
    _require(horizon > 0, f"horizon must be positive, got {horizon}")
    _require(isinstance(steps, int) and steps >= 1, f"steps must be an integer >= 1, got {steps}")
    _require(isinstance(paths, int) and paths >= 1, f"paths must be an integer >= 1, got {paths}")


def gen_bm(horizon, steps, paths=1, seed=0, component=0, path_offset=0):
    """Standard Brownian motion, W(0) = 0, exact Gaussian increments."""
    _check_grid(horizon, steps, paths)
    dt_root = math.sqrt(horizon / steps)
    values = np.zeros((paths, steps + 1))
    for i in range(paths):
        incr = path_rng(seed, path_offset + i, component).standard_normal(steps)
        values[i, 1:] = np.cumsum(incr)
    values[:, 1:] *= dt_root
    return SamplePath(horizon, steps, values, seed, "driver",
                      meta={"process": "bm", "paths": paths, "path_offset": path_offset,
                            "component": component})


def gen_fbm(spec, horizon, steps, paths=1, seed=0, component=0, path_offset=0):
    """FBM by cumulative sums of scaled FGN; exact Gaussian law on the grid."""
    _require(isinstance(spec, HermiteSpec), "spec must be a HermiteSpec")
    _require(spec.rank == 1, f"gen_fbm requires rank 1, got rank {spec.rank}")
    _check_grid(horizon, steps, paths)
    scale = (horizon / steps) ** spec.hurst
    values = np.zeros((paths, steps + 1))
    for start, stop in _chunk_slices(paths, steps):
        idx = [path_offset + i for i in range(start, stop)]
        fgn = _fgn_block(spec.hurst, steps, seed, idx, component)
        values[start:stop, 1:] = np.cumsum(fgn, axis=1)
    values[:, 1:] *= scale
    return SamplePath(horizon, steps, values, seed, "driver",
                      meta={"process": "fbm", "hurst": spec.hurst, "rank": 1,
                            "paths": paths, "path_offset": path_offset, "component": component})


def _hermite_values(spec, horizon, steps, paths, seed, component, path_offset=0):
    n_inner = spec.approx_factor * steps
    scale = horizon ** spec.hurst * _partial_sum_scale(spec, n_inner)
    values = np.zeros((paths, steps + 1))
    take = slice(spec.approx_factor - 1, None, spec.approx_factor)
    for start, stop in _chunk_slices(paths, n_inner):
        idx = [path_offset + i for i in range(start, stop)]
        fgn = _fgn_block(spec.inner_hurst, n_inner, seed, idx, component)
        sums = np.cumsum(hermite_poly(spec.rank, fgn), axis=1)
        values[start:stop, 1:] = sums[:, take]
    values[:, 1:] *= scale
    return values


def gen_hermite(spec, horizon, steps, paths=1, seed=0, path_offset=0):
    """Rank-``spec.rank`` Hermite process by the partial-sum construction.

    The value at grid time t is the normalized sum of He_rank over the
    first floor(n t / horizon) inner lattice points, n = approx_factor *
    steps, rescaled by horizon**hurst through self-similarity.  Paths start
    at exactly 0.
    """
    _require(isinstance(spec, HermiteSpec), "spec must be a HermiteSpec")
    _check_grid(horizon, steps, paths)
    values = _hermite_values(spec, horizon, steps, paths, seed, component=0,
                             path_offset=path_offset)
    return SamplePath(horizon, steps, values, seed, "driver",
                      meta={"process": "hermite", "hurst": spec.hurst, "rank": spec.rank,
                            "approx_factor": spec.approx_factor,
                            "normalization": spec.normalization,
                            "paths": paths, "path_offset": path_offset})


def gen_mixed(spec, horizon, steps, paths=1, seed=0, path_offset=0):
    """Weighted sum of independent Hermite components, one Hurst index.

    Component i draws from the stream (seed, path index, i), so a
    single-component mixture with weight 1 reproduces gen_hermite exactly.
    """
    _require(isinstance(spec, MixedHermiteSpec), "spec must be a MixedHermiteSpec")
    _check_grid(horizon, steps, paths)
    values = np.zeros((paths, steps + 1))
    for i, (weight, _) in enumerate(spec.components):
        values += weight * _hermite_values(spec.component_spec(i), horizon, steps,
                                           paths, seed, component=i,
                                           path_offset=path_offset)
    return SamplePath(horizon, steps, values, seed, "driver",
                      meta={"process": "mixed", "hurst": spec.hurst,
                            "weights": [w for w, _ in spec.components],
                            "ranks": [r for _, r in spec.components],
                            "approx_factor": spec.approx_factor,
                            "normalization": spec.normalization,
                            "paths": paths, "path_offset": path_offset})


def gen_hou(spec, hermite, horizon, steps, paths=1, seed=0, path_offset=0):
    """Hermite-driven Ornstein-Uhlenbeck process on [0, horizon].

    The moving-average integral is taken left-point over a driver simulated
    from time -T0 (T0 = spec.history_truncation, grid-aligned upward), so
    the time-0 value already carries the truncated stationary history and
    is generally nonzero.
    """
    _require(isinstance(spec, HouSpec), "spec must be a HouSpec")
    _require(isinstance(hermite, HermiteSpec), "hermite must be a HermiteSpec")
    _check_grid(horizon, steps, paths)
    dt = horizon / steps
    burn = int(math.ceil(spec.history_truncation / dt))
    total = burn + steps
    driver = _hermite_values(hermite, total * dt, total, paths, seed, component=0,
                             path_offset=path_offset)
    deltas = np.diff(driver, axis=1)
    decay = math.exp(-spec.lam * dt)
    ou = np.zeros((paths, total + 1))
    for k in range(total):
        ou[:, k + 1] = decay * (ou[:, k] + spec.sigma * deltas[:, k])
    return SamplePath(horizon, steps, ou[:, burn:].copy(), seed, "driver",
                      meta={"process": "hou", "hurst": hermite.hurst, "rank": hermite.rank,
                            "lam": spec.lam, "sigma": spec.sigma,
                            "history_truncation": spec.history_truncation,
                            "approx_factor": hermite.approx_factor,
                            "normalization": hermite.normalization,
                            "paths": paths, "path_offset": path_offset})
