"""
Command-line front end.

    pathbayes simulate CONFIG [--out DIR]
    pathbayes filter CONFIG --method {chain,pde,analytic,fock} [--obs FILE] [--snapshot-every K]
    pathbayes compare CONFIG [--backends chain,pde,...] [--no-timings]
    pathbayes verify

Exit codes: 0 success, 1 verification or numerical failure, 2 configuration
or I/O error, 3 method incompatible with the configured potential.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .analytic import analytic_run
from .config import ConfigError, RunConfig, fmt, load_config, read_observations, write_csv
from .errors import PathBayesError
from .fock import fock_run
from .hermite import HermiteBasis, project_prior
from .kernel import chain_run
from .scenario import BACKENDS, run_comparison
from .schrodinger import pde_run
from .verify import run_suites

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_METHOD = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def cmd_simulate(cfg: RunConfig, out: str) -> None:
    scn = cfg.scenario()
    path = scn.latent_path()
    obs = scn.evidence()
    t_latent = cfg.params.eps * np.arange(cfg.n_steps + 1)
    write_csv(os.path.join(out, "latent.csv"), ("t", "q"), [t_latent, path], cfg.metadata())
    write_csv(os.path.join(out, "observations.csv"), ("t", "x"), [obs.times, obs.values], cfg.metadata())


def _filter(cfg: RunConfig, method: str, obs, snapshot_every: int):
    """Run one backend; returns ``(final_density, snapshots or None)``."""
    scn = cfg.scenario(observations=obs)
    prior = scn.prior.density(scn.grid)
    params, v = cfg.params, cfg.potential
    k = snapshot_every
    if method in ("analytic", "fock") and not v.is_gaussian:
        raise CliError(f"method {method!r} requires the gaussian potential", EXIT_METHOD)
    if method == "chain":
        out = chain_run(prior, obs, params, v, snapshot_every=k)
        return out if k else (out, None)
    if method == "pde":
        out = pde_run(prior, obs, params, v, snapshot_every=k)
        return (out[0], out[2]) if k else (out[0], None)
    state, _ = project_prior(prior, HermiteBasis.for_params(params, cfg.n_max))
    if method == "fock":
        out = fock_run(state, obs, params, cfg.grid, snapshot_every=k)
        return out if k else (out, None)
    final = analytic_run(state, obs, params, cfg.grid).density
    if not k:
        return final, None
    steps = list(range(0, len(obs) + 1, k))
    if steps[-1] != len(obs):
        steps.append(len(obs))
    snaps = [(s * params.eps, analytic_run(state, obs, params, cfg.grid, s * params.eps).density) for s in steps]
    return final, snaps


def cmd_filter(cfg: RunConfig, method: str, obs_path, out: str, snapshot_every: int = 0) -> None:
    if obs_path is None:
        obs = cfg.scenario().evidence()
    else:
        try:
            obs = read_observations(obs_path, cfg.params.eps)
        except (OSError, ValueError) as exc:
            raise CliError(f"cannot use observations {obs_path!r}: {exc}", EXIT_CONFIG) from None
        if len(obs) != cfg.n_steps:
            raise CliError(
                f"{obs_path}: {len(obs)} observations but t_final/eps = {cfg.n_steps}", EXIT_CONFIG
            )
    final, snaps = _filter(cfg, method, obs, snapshot_every)
    meta = cfg.metadata() + [f"method = {method}"]
    write_csv(os.path.join(out, "posterior.csv"), ("q", "p"), [final.grid.points, final.values], meta)
    if snaps is not None:
        t_col, q_col, p_col = [], [], []
        for t, d in snaps:
            t_col.extend([t] * d.grid.n_points)
            q_col.extend(d.grid.points)
            p_col.extend(d.values)
        write_csv(os.path.join(out, "snapshots.csv"), ("t", "q", "p"), [t_col, q_col, p_col], meta)


def cmd_compare(cfg: RunConfig, backends, out: str, timings: bool = True, workers: int = 1):
    report = run_comparison(cfg.scenario(), backends, max_workers=workers)
    cols = [[] for _ in range(9)]
    names = report.backends
    for a in names:
        for b in names:
            row = [
                a, b, report.pair(a, b),
                report.means[a], report.variances[a], report.means[b], report.variances[b],
                report.seconds[a] if timings else 0.0, report.seconds[b] if timings else 0.0,
            ]
            for col, value in zip(cols, row):
                col.append(value)
    header = ("backend_a", "backend_b", "l1", "mean_a", "var_a", "mean_b", "var_b", "seconds_a", "seconds_b")
    write_csv(os.path.join(out, "comparison.csv"), header, cols, cfg.metadata())
    for name, exc in report.errors.items():
        print(f"backend {name} failed: {exc}", file=sys.stderr)
    print(f"max pairwise L1 = {fmt(report.max_l1())} over {', '.join(names)}")
    return report


def cmd_verify(kernel=None) -> int:
    results = run_suites() if kernel is None else run_suites(kernel)
    for r in results:
        print(r.line())
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"FAILED: {', '.join(failed)}")
        return EXIT_FAIL
    print(f"all {len(results)} suites passed")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pathbayes", description=__doc__.split("\n\n")[0].strip())
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write latent.csv and observations.csv")
    p.add_argument("config")
    p.add_argument("--out", default=".")

    p = sub.add_parser("filter", help="write posterior.csv (and snapshots.csv)")
    p.add_argument("config")
    p.add_argument("--method", required=True, choices=BACKENDS)
    p.add_argument("--obs", default=None, help="observations CSV (default: synthesize from config)")
    p.add_argument("--out", default=".")
    p.add_argument("--snapshot-every", type=int, default=0, metavar="K")

    p = sub.add_parser("compare", help="write comparison.csv for several backends")
    p.add_argument("config")
    p.add_argument("--backends", default=",".join(BACKENDS))
    p.add_argument("--out", default=".")
    p.add_argument("--no-timings", action="store_true", help="write zero timings (byte-stable output)")
    p.add_argument("--workers", type=int, default=1)

    sub.add_parser("verify", help="run the numerical property suites")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        return cmd_verify()
    try:
        cfg = load_config(args.config)
        if args.command == "simulate":
            cmd_simulate(cfg, args.out)
        elif args.command == "filter":
            if args.snapshot_every < 0:
                raise CliError("--snapshot-every must be nonnegative", EXIT_CONFIG)
            cmd_filter(cfg, args.method, args.obs, args.out, args.snapshot_every)
        else:
            backends = [b.strip() for b in args.backends.split(",") if b.strip()]
            unknown = sorted(set(backends) - set(BACKENDS))
            if unknown or not backends:
                raise CliError(f"unknown backends {unknown}", EXIT_CONFIG)
            report = cmd_compare(cfg, backends, args.out, not args.no_timings, args.workers)
            if report.errors:
                return EXIT_FAIL
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PathBayesError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
