"""Command line front end.

Four subcommands: ``simulate`` writes path ensembles as CSV plus a JSON
sidecar, ``stats`` runs diagnostic checks against a previously written
file, ``arb-demo`` runs one of the Monte Carlo arbitrage demonstrations,
and ``price`` solves the tax-adjusted pricing equation for a terminal
claim.

Exit codes: 0 when the command succeeded (for checks and demos: the
expected property held), 1 when a check, demo claim, or pricing problem
failed on valid inputs, 2 for usage and parameter errors, malformed
files included.  Seeds resolve as --seed, then the HERMITE_SEED
environment variable, then 42.
"""

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy import stats as sps

from .markets import MixedMarket, TwoAssetDiffusion
from .pathio import PathFormatError, read_path_csv, write_path_csv, write_sidecar, \
    write_surface_csv
from .pde import IllPosedProblemError, TerminalClaim, grid_for_spot, solve_tax_bsm
from .processes import HermiteSpec, HouSpec, MixedHermiteSpec, SamplePath, \
    gen_fbm, gen_hermite, gen_hou, gen_mixed
from .stats import autocov_slope, centered_qv, estimate_hurst, theoretical_cov
from .strategies import TaxSchedule, diffusion_arb_demo, f_strategy_demo, \
    mixed_arb_demo, shiryaev_demo

__all__ = ["main"]

_DEFAULT_SEED = 42


def _resolve_seed(value):
    if value is not None:
        return value
    env = os.environ.get("HERMITE_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"HERMITE_SEED must be an integer, got {env!r}") from None
    return _DEFAULT_SEED


def _float_list(text):
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}")


def _int_list(text):
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated int list: {text!r}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hermite-markets",
        description="Hermite-driven market simulation, arbitrage demos and pricing")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate a path ensemble into a CSV file")
    sim.add_argument("--process", required=True,
                     choices=["fbm", "hermite", "mixed", "hou"])
    sim.add_argument("--hurst", type=float, required=True)
    sim.add_argument("--rank", type=int, default=1)
    sim.add_argument("--steps", type=int, default=256)
    sim.add_argument("--horizon", type=float, default=1.0)
    sim.add_argument("--paths", type=int, default=1)
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--approx-factor", type=int, default=32)
    sim.add_argument("--normalization", choices=["empirical", "analytic"],
                     default="empirical")
    sim.add_argument("--weights", type=_float_list, default=None,
                     help="mixed process component weights, e.g. 0.8,0.6")
    sim.add_argument("--ranks", type=_int_list, default=None,
                     help="mixed process component ranks, e.g. 1,2")
    sim.add_argument("--ou-lambda", type=float, default=1.0)
    sim.add_argument("--ou-sigma", type=float, default=1.0)
    sim.add_argument("--workers", type=int, default=1)
    sim.add_argument("--out", required=True)
    sim.set_defaults(func=_cmd_simulate)

    stc = sub.add_parser("stats", help="diagnostic checks on a simulated ensemble")
    stc.add_argument("--in", dest="infile", required=True)
    stc.add_argument("--check", required=True,
                     choices=["cov", "selfsim", "lrd", "qv", "hurst"])
    stc.set_defaults(func=_cmd_stats)

    arb = sub.add_parser("arb-demo", help="run one arbitrage / tax demonstration")
    arb.add_argument("--case", required=True,
                     choices=["shiryaev", "fsquare", "diffusion", "mixed"])
    arb.add_argument("--tax", type=float, default=0.0)
    arb.add_argument("--paths", type=int, default=2000)
    arb.add_argument("--steps", type=int, default=2048)
    arb.add_argument("--horizon", type=float, default=1.0)
    arb.add_argument("--hurst", type=float, default=0.7)
    arb.add_argument("--seed", type=int, default=None)
    arb.set_defaults(func=_cmd_arb_demo)

    prc = sub.add_parser("price", help="price a terminal claim with a tax adjustment")
    prc.add_argument("--payoff", required=True, choices=["call", "put", "power"])
    prc.add_argument("--strike", type=float, default=100.0)
    prc.add_argument("--power-exp", type=float, default=2.0)
    prc.add_argument("--spot", type=float, required=True)
    prc.add_argument("--rate", type=float, default=0.0)
    prc.add_argument("--sigma", type=float, required=True)
    prc.add_argument("--tax", type=float, default=0.0)
    prc.add_argument("--maturity", type=float, default=1.0)
    prc.add_argument("--grid", type=int, default=513)
    prc.add_argument("--time-steps", type=int, default=512)
    prc.add_argument("--out", default=None)
    prc.set_defaults(func=_cmd_price)

    return parser


# ---------------------------------------------------------------------------
# simulate

def _make_generator(args, seed):
    """Return (callable(paths, path_offset) -> SamplePath, sidecar payload)."""
    payload = {
        "process": args.process,
        "hurst": args.hurst,
        "horizon": args.horizon,
        "steps": args.steps,
        "paths": args.paths,
        "seed": seed,
    }
    if args.process == "fbm":
        spec = HermiteSpec(args.hurst, 1, args.approx_factor, args.normalization)
        payload.update(rank=1, approx_factor=args.approx_factor,
                       normalization=args.normalization)
        return (lambda paths, offset: gen_fbm(spec, args.horizon, args.steps,
                                              paths, seed, path_offset=offset),
                payload)
    if args.process == "hermite":
        spec = HermiteSpec(args.hurst, args.rank, args.approx_factor,
                           args.normalization)
        payload.update(rank=args.rank, approx_factor=args.approx_factor,
                       normalization=args.normalization)
        return (lambda paths, offset: gen_hermite(spec, args.horizon, args.steps,
                                                  paths, seed, path_offset=offset),
                payload)
    if args.process == "mixed":
        if not args.weights or not args.ranks or len(args.weights) != len(args.ranks):
            raise ValueError("mixed process needs matching --weights and --ranks")
        spec = MixedHermiteSpec(args.hurst,
                                tuple(zip(args.weights, args.ranks)),
                                args.approx_factor, args.normalization)
        payload.update(weights=args.weights, ranks=args.ranks,
                       approx_factor=args.approx_factor,
                       normalization=args.normalization)
        return (lambda paths, offset: gen_mixed(spec, args.horizon, args.steps,
                                                paths, seed, path_offset=offset),
                payload)
    # hou
    hou = HouSpec(args.ou_lambda, args.ou_sigma)
    driver = HermiteSpec(args.hurst, args.rank, args.approx_factor,
                         args.normalization)
    payload.update(rank=args.rank, approx_factor=args.approx_factor,
                   normalization=args.normalization,
                   ou_lambda=args.ou_lambda, ou_sigma=args.ou_sigma)
    return (lambda paths, offset: gen_hou(hou, driver, args.horizon, args.steps,
                                          paths, seed, path_offset=offset),
            payload)


def _chunk_sizes(total, workers):
    base, rem = divmod(total, workers)
    sizes = [(base + (1 if i < rem else 0)) for i in range(workers)]
    return [s for s in sizes if s]


def _cmd_simulate(args):
    seed = _resolve_seed(args.seed)
    if args.paths < 1:
        raise ValueError("--paths must be >= 1")
    if args.workers < 1:
        raise ValueError("--workers must be >= 1")
    generate, payload = _make_generator(args, seed)
    workers = min(args.workers, args.paths)
    if workers == 1:
        ensemble = generate(args.paths, 0)
    else:
        sizes = _chunk_sizes(args.paths, workers)
        offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]])
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda pair: generate(pair[0], int(pair[1])),
                                  zip(sizes, offsets)))
        ensemble = SamplePath(horizon=args.horizon, steps=args.steps,
                              values=np.vstack([p.values for p in parts]),
                              seed=seed, kind=parts[0].kind, meta=parts[0].meta)
    write_path_csv(ensemble, args.out)
    write_sidecar(args.out, payload)
    print(f"wrote {args.paths} path(s) x {args.steps} steps to {args.out} "
          f"(seed {seed})")
    return 0


# ---------------------------------------------------------------------------
# stats

def _sidecar_hurst(path):
    hurst = path.meta.get("hurst")
    if hurst is None:
        raise ValueError("no hurst in the sidecar; cannot run this check")
    return float(hurst)


def _check_cov(path, hurst):
    if path.n_paths < 50:
        raise ValueError("cov check needs at least 50 paths")
    picks = np.unique(np.linspace(path.steps // 4, path.steps, 4, dtype=int))
    times = path.times[picks]
    sample = path.values[:, picks]
    sample = sample - sample.mean(axis=0)
    worst = 0.0
    for i in range(len(picks)):
        for j in range(i, len(picks)):
            emp = float((sample[:, i] * sample[:, j]).mean())
            theo = theoretical_cov(hurst, times[i], times[j])
            var_i = theoretical_cov(hurst, times[i], times[i])
            var_j = theoretical_cov(hurst, times[j], times[j])
            stderr = math.sqrt((var_i * var_j + theo ** 2) / path.n_paths)
            worst = max(worst, abs(emp - theo) / stderr)
    return {"statistic": worst, "target": 0.0, "tolerance": 4.0,
            "pass": worst < 4.0,
            "detail": "worst z-score of sample covariance against the "
                      "stationary-increment form, over a 4x4 time grid"}


def _check_selfsim(path, hurst):
    if path.n_paths < 100:
        raise ValueError("selfsim check needs at least 100 paths")
    early = path.steps // 4
    ratio = path.times[-1] / path.times[early]
    rescaled = path.values[:, early] * ratio ** hurst
    pvalue = float(sps.ks_2samp(rescaled, path.values[:, -1]).pvalue)
    return {"statistic": pvalue, "target": "p > 0.01", "tolerance": 0.01,
            "pass": pvalue > 0.01,
            "detail": f"KS test of c^{hurst} scaling between interior and "
                      f"terminal marginals, c = {ratio:.4g}"}


def _check_lrd(path, hurst):
    increments = np.diff(path.values, axis=1)
    flat = increments - increments.mean()
    lags = np.arange(2, 11)
    acov = np.array([
        float((flat[:, :-lag] * flat[:, lag:]).mean()) for lag in lags])
    if (acov <= 0).any():
        raise ValueError("autocovariance not positive at the probed lags")
    slope = float(np.polyfit(np.log(lags), np.log(acov), 1)[0])
    target = 2.0 * hurst - 2.0
    return {"statistic": slope, "target": target, "tolerance": 0.3,
            "pass": abs(slope - target) < 0.3,
            "detail": "log-log slope of the increment autocovariance, lags 2..10"}


def _check_qv(path, hurst):
    if path.n_paths < 20:
        raise ValueError("qv check needs at least 20 paths")
    per_path, delta = centered_qv(path, hurst=hurst)
    spread = float(np.std(per_path))
    if spread == 0.0:
        raise ValueError("centered quadratic variation has no scatter")
    pvalue = float(sps.normaltest(per_path / spread).pvalue)
    ranks = path.meta.get("ranks") or [path.meta.get("rank", 1)]
    gaussian_regime = all(int(r) == 1 for r in ranks) and hurst < 0.75
    ok = (pvalue > 0.01) if gaussian_regime else (pvalue < 0.01)
    return {"statistic": pvalue,
            "target": "gaussian_limit" if gaussian_regime else "non_gaussian_limit",
            "tolerance": 0.01, "pass": ok,
            "detail": f"normality p-value of per-path centered quadratic "
                      f"variation; ensemble mean {float(np.mean(per_path)):.3e}, "
                      f"delta {delta:.3e}"}


def _check_hurst(path, hurst):
    estimate = estimate_hurst(path)
    tol = max(4.0 * estimate.stderr, 0.05)
    return {"statistic": estimate.value, "target": hurst, "tolerance": tol,
            "pass": abs(estimate.value - hurst) < tol,
            "detail": f"dyadic block-variance regression, stderr {estimate.stderr:.4f}"}


_CHECKS = {
    "cov": _check_cov,
    "selfsim": _check_selfsim,
    "lrd": _check_lrd,
    "qv": _check_qv,
    "hurst": _check_hurst,
}


def _cmd_stats(args):
    path = read_path_csv(args.infile)
    hurst = _sidecar_hurst(path)
    report = {"check": args.check, "file": args.infile}
    try:
        report.update(_CHECKS[args.check](path, hurst))
    except ValueError as exc:
        report.update({"pass": False, "detail": str(exc)})
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0 if report["pass"] else 1


# ---------------------------------------------------------------------------
# arbitrage demos

def _cmd_arb_demo(args):
    seed = _resolve_seed(args.seed)
    if args.tax < 0:
        raise ValueError("--tax must be nonnegative")
    if args.case == "shiryaev":
        driver = gen_fbm(HermiteSpec(args.hurst, 1), args.horizon, args.steps,
                         args.paths, seed)
        report = shiryaev_demo(driver)
    elif args.case == "fsquare":
        driver = gen_fbm(HermiteSpec(args.hurst, 1), args.horizon, args.steps,
                         args.paths, seed)
        report = f_strategy_demo(lambda x: (x - 1.0) ** 2,
                                 lambda x: 2.0 * (x - 1.0),
                                 lambda x: 2.0 * np.ones_like(np.asarray(x, float)),
                                 driver, args.tax, threshold_check=True)
    elif args.case == "diffusion":
        market = TwoAssetDiffusion.shared_vol(0.05, 0.02, 0.2)
        tax = TaxSchedule.uniform(args.tax, 2) if args.tax else None
        report = diffusion_arb_demo(market, args.paths, args.steps, args.horizon,
                                    seed, tax)
    else:
        market = MixedMarket(r=0.01, b=0.2, rho=0.2, mu=0.05, sigma=0.2,
                             sigma_h=0.3, hurst=args.hurst)
        tax = TaxSchedule.uniform(args.tax, 2) if args.tax else None
        report = mixed_arb_demo(market, args.paths, args.steps, args.horizon,
                                seed, tax)
    print(json.dumps(report.to_json_dict(), indent=2, sort_keys=True))
    return 0 if report.passed else 1


# ---------------------------------------------------------------------------
# pricing

def _cmd_price(args):
    if args.maturity <= 0:
        raise ValueError("--maturity must be positive")
    if args.payoff == "call":
        claim = TerminalClaim.call(args.strike, args.maturity)
    elif args.payoff == "put":
        claim = TerminalClaim.put(args.strike, args.maturity)
    else:
        claim = TerminalClaim.power_claim(args.power_exp, args.maturity)
    sig_eff_sq = args.sigma ** 2 + args.rate * args.tax ** 2
    try:
        if sig_eff_sq <= 0:
            raise IllPosedProblemError(
                f"effective variance sigma^2 + r c^2 = {sig_eff_sq:.6g} is not positive")
        grid = grid_for_spot(args.spot, math.sqrt(sig_eff_sq), args.maturity,
                             args.rate, args.grid, args.time_steps)
        surface = solve_tax_bsm(claim, args.rate, args.sigma, args.tax, grid)
    except IllPosedProblemError as exc:
        print(f"pricing failed: {exc}", file=sys.stderr)
        return 1
    value = surface.value_at(args.spot)
    print(f"{args.payoff} value at spot {args.spot:g}: {value:.10g} "
          f"(effective vol {math.sqrt(sig_eff_sq):.6g})")
    if args.out:
        write_surface_csv(surface, args.out)
        payload = dict(surface.meta)
        payload["prices"] = [float(p) for p in surface.prices]
        payload["payoff"] = args.payoff
        payload["strike"] = args.strike
        payload["power_exp"] = args.power_exp
        payload["spot"] = args.spot
        write_sidecar(args.out, payload)
        print(f"wrote surface to {args.out}")
    return 0


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except PathFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
