"""Command-line surface.

Subcommands: gen, lasso, lsa, ogp, localmin, rip, certify, noise-fit,
phase.  Human-readable summaries go to stdout; machine output (JSON or CSV,
deterministic bytes for fixed seeds) goes to --out and nowhere else.  Exit
codes: 0 success, 2 usage error, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import experiments, landscape, lasso, lsa, model, rip
from .rng import derive_key, make_generator

SCHEMA_VERSION = 1


class UsageError(Exception):
    """Flag or precondition problem detected before any work starts."""


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("SPARSEREG_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise UsageError(f"SPARSEREG_THREADS={env!r} is not an integer") from exc
    return 1


def _write_json(args, payload: dict) -> None:
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _require_dims(args) -> model.Dimensions:
    if args.p < 2:
        raise UsageError(f"--p must be at least 2, got {args.p}")
    if args.k < 1:
        raise UsageError(f"--k must be at least 1, got {args.k}")
    if args.k >= args.n:
        raise UsageError(f"--k must be smaller than --n, got k={args.k}, n={args.n}")
    if args.sigma2 < 0:
        raise UsageError(f"--sigma2 must be nonnegative, got {args.sigma2}")
    return model.Dimensions(n=args.n, p=args.p, k=args.k, sigma2=args.sigma2)


def _make_instance(args, kind: str = "binary", min_magnitude: float = 1.0) -> model.Instance:
    dims = _require_dims(args)
    beta = model.sample_beta_star(
        args.p, args.k, kind, min_magnitude, seed=derive_key(args.seed, "beta")
    )
    return model.gen_instance(dims, beta, seed=derive_key(args.seed, "instance"))


def _recovery_payload(report: model.RecoveryReport) -> dict:
    return {
        "l2_error": report.l2_error,
        "support_exact": report.support_exact,
        "overlap": report.overlap,
        "hamming": report.hamming,
        "stable": report.stable,
    }


def cmd_gen(args) -> int:
    if not args.out:
        raise UsageError("gen requires --out for the instance container")
    instance = _make_instance(args, kind=args.kind, min_magnitude=args.min_magnitude)
    sidecar = model.save_instance(instance, args.out)
    print(
        f"instance n={args.n} p={args.p} k={args.k} sigma2={args.sigma2} "
        f"seed={args.seed} -> {args.out} (+ {sidecar.name})"
    )
    return 0


def cmd_lasso(args) -> int:
    instance = _make_instance(args)
    dims = instance.dims
    if args.lam is not None:
        lam = args.lam
        if lam < 0:
            raise UsageError("--lam must be nonnegative")
    elif args.lambda_rule == "threshold":
        lam = lasso.lambda_threshold(dims)
    else:
        lam = model.thresholds(dims).lambda_star(args.A, dims.sigma)
    config = lasso.LassoConfig(lam=lam, box=args.box, tol=args.tol, max_sweeps=args.max_sweeps)
    res = lasso.solve_lasso(instance.X, instance.Y, config)
    report = model.recovery_report(res.beta_hat, instance.beta_star, dims.sigma, args.stability_C)
    payload = {
        "params": {"n": args.n, "p": args.p, "k": args.k, "sigma2": args.sigma2, "seed": args.seed},
        "lambda": lam,
        "box": args.box,
        "converged": res.converged,
        "sweeps": res.sweeps,
        "kkt_residual": res.kkt_residual,
        "objective": float(res.objective_trace[-1]),
        "recovery": _recovery_payload(report),
    }
    _write_json(args, payload)
    print(
        f"lasso lam={lam:.5g} box={args.box} converged={res.converged} "
        f"sweeps={res.sweeps} kkt={res.kkt_residual:.3g} l2={report.l2_error:.4g}"
    )
    return 0


def cmd_lsa(args) -> int:
    instance = _make_instance(args)
    dims = instance.dims
    beta0 = lsa.default_init(
        instance.X, instance.Y, args.k, mode=args.init, seed=derive_key(args.seed, "init")
    )
    res = lsa.run_lsa(
        instance.X, instance.Y, beta0, sigma2=dims.sigma2, k=args.k, max_iters=args.max_iters
    )
    report = model.recovery_report(res.beta_hat, instance.beta_star, dims.sigma, args.stability_C)
    payload = {
        "params": {"n": args.n, "p": args.p, "k": args.k, "sigma2": args.sigma2, "seed": args.seed},
        "init": args.init,
        "iterations": res.iterations,
        "bound": res.bound if math.isfinite(res.bound) else None,
        "within_bound": bool(res.iterations <= res.bound),
        "note": res.note,
        "recovery": _recovery_payload(report),
        "trace": [
            {"iter": t, "i": m.i, "j": m.j, "q": m.q, "residual_sq": m.new_sq}
            for t, m in enumerate(res.trace)
        ],
    }
    _write_json(args, payload)
    print(
        f"lsa iterations={res.iterations} support_exact={report.support_exact} "
        f"l2={report.l2_error:.4g} bound={res.bound:.4g}"
    )
    return 0


def cmd_ogp(args) -> int:
    instance = _make_instance(args)
    mode = "sampled" if args.sampled else "exact"
    profile = landscape.overlap_profile(instance, mode=mode, budget=args.budget, seed=args.seed)
    w_norm = float(np.linalg.norm(instance.W))
    grid = landscape.default_r_grid(w_norm, args.r_grid)
    reports = [landscape.ogp_check(profile, w_norm, float(r)) for r in grid]
    if args.format == "csv":
        if not args.out:
            raise UsageError("--format csv requires --out")
        profile.to_csv(args.out)
    else:
        payload = {
            "params": {"n": args.n, "p": args.p, "k": args.k, "sigma2": args.sigma2, "seed": args.seed},
            "mode": mode,
            "noise_norm": w_norm,
            "profile": json.loads(profile.to_json()),
            "reports": [r.to_payload() for r in reports],
        }
        _write_json(args, payload)
    n_holds = sum(r.holds for r in reports)
    print(
        f"ogp mode={mode} levels=0..{profile.k} r-grid={args.r_grid} "
        f"holds at {n_holds}/{len(reports)} radii"
    )
    return 0


def cmd_localmin(args) -> int:
    instance = _make_instance(args)
    minima = landscape.find_nontrivial_local_minima(instance, budget=args.budget)
    payload = {
        "params": {"n": args.n, "p": args.p, "k": args.k, "sigma2": args.sigma2, "seed": args.seed},
        "truth_support": list(instance.beta_star.support),
        "count": len(minima),
        "supports": [list(s) for s in minima],
    }
    _write_json(args, payload)
    print(f"localmin found {len(minima)} non-trivial swap-stable supports")
    return 0


def cmd_rip(args) -> int:
    if args.k < 1 or args.k > args.p:
        raise UsageError(f"--k must lie in [1, p], got k={args.k}, p={args.p}")
    X = make_generator(args.seed, "design").standard_normal((args.n, args.p))
    est = rip.rip_constant(X, args.k, mode=args.mode, budget=args.budget, seed=args.seed)
    payload = {
        "params": {"n": args.n, "p": args.p, "k": args.k, "seed": args.seed},
        "mode": args.mode,
        "delta": est.delta,
        "exact": est.exact,
        "supports_checked": est.supports_checked,
    }
    _write_json(args, payload)
    print(f"rip k={args.k} delta={est.delta:.5g} exact={est.exact}")
    return 0


def cmd_certify(args) -> int:
    if args.k % 2 != 0:
        raise UsageError("certify requires even --k")
    instance = _make_instance(args)
    report = landscape.build_certificate(
        instance, search_mode=args.search, budget=args.budget, seed=args.seed
    )
    payload = {
        "params": {"n": args.n, "p": args.p, "k": args.k, "sigma2": args.sigma2, "seed": args.seed},
        **report.to_payload(),
    }
    _write_json(args, payload)
    if report.valid:
        print(
            f"certificate valid: |alpha|_1={report.l1_norm:.6g} "
            f"(target {report.target_l1:.6g}), scaled residual "
            f"{report.scaled_residual:.4g} <= sigma={instance.dims.sigma:.4g}"
        )
    else:
        print(f"certificate invalid: {report.reason or 'scaled residual above sigma'}")
    return 0


def cmd_noise_fit(args) -> int:
    if args.kprime < 1 or args.kprime > args.p:
        raise UsageError(f"--kprime must lie in [1, p], got {args.kprime}")
    if args.variance <= 0:
        raise UsageError("--variance must be positive")
    X = make_generator(args.seed, "design").standard_normal((args.n, args.p))
    Yp = math.sqrt(args.variance) * make_generator(args.seed, "noise").standard_normal(args.n)
    fit = landscape.pure_noise_best_fit(
        Yp, X, args.kprime, mode=args.mode, budget=args.budget, seed=args.seed,
        c=args.c, var_y=args.variance,
    )
    payload = {
        "params": {
            "n": args.n, "p": args.p, "kprime": args.kprime,
            "variance": args.variance, "seed": args.seed, "c": args.c,
        },
        "mode": args.mode,
        "support": list(fit.beta.support),
        "scaled_residual": fit.scaled_residual,
        "reference_bound": fit.paper_bound,
        "exact": fit.exact,
    }
    _write_json(args, payload)
    print(
        f"noise-fit k'={args.kprime} scaled residual {fit.scaled_residual:.5g} "
        f"(reference envelope {fit.paper_bound:.5g})"
    )
    return 0


_GRID_OVERRIDES = (
    ("p", "p"),
    ("k", "k"),
    ("sigma2", "sigma2"),
    ("n_values", "n_values"),
    ("methods", "methods"),
    ("lambda_rule", "lambda_rule"),
    ("lambda_value", "lambda_value"),
    ("lambda_A", "lambda_A"),
    ("seeds", "seeds"),
    ("master_seed", "master_seed"),
    ("stability_C", "stability_C"),
    ("lasso_tol", "lasso_tol"),
    ("lasso_max_sweeps", "lasso_max_sweeps"),
    ("lsa_init", "lsa_init"),
    ("lsa_max_iters", "lsa_max_iters"),
)


def cmd_phase(args) -> int:
    text = Path(args.config).read_text() if args.config else ""
    overrides = {}
    for attr, key in _GRID_OVERRIDES:
        value = getattr(args, attr)
        if value is not None:
            overrides[key] = value if isinstance(value, str) else experiments._dump_value(key, value)
    try:
        grid = experiments.parse_config(text, overrides)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.dump_config:
        if not args.out:
            raise UsageError("--dump-config requires --out")
        Path(args.out).write_text(experiments.dump_config(grid))
        print(f"config written to {args.out}")
        return 0
    records = experiments.run_phase_grid(grid, threads=_threads(args))
    if args.out:
        experiments.records_to_csv(records, args.out, include_runtime=args.real_runtime)
        print(f"{len(records)} rows -> {args.out}")
    print(experiments.render_summary(experiments.summarize(records)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--threads", type=int, default=None,
                        help="worker pool size (overrides SPARSEREG_THREADS)")
    common.add_argument("--out", type=str, default=None, help="machine-output path")
    common.add_argument("--format", choices=("json", "csv"), default="json",
                        help="machine-output format where applicable")

    dims = argparse.ArgumentParser(add_help=False)
    dims.add_argument("--p", type=int, required=True, help="feature count")
    dims.add_argument("--k", type=int, required=True, help="sparsity")
    dims.add_argument("--n", type=int, required=True, help="sample count")
    dims.add_argument("--sigma2", type=float, default=1.0, help="noise variance")
    dims.add_argument("--stability-C", dest="stability_C", type=float, default=1.0,
                      help="stability constant for the l2 <= C sigma check")

    parser = argparse.ArgumentParser(
        prog="sparsereg",
        description="Sparse regression solvers, landscape probes, and experiment grids.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    q = sub.add_parser("gen", parents=[common, dims], help="generate and store an instance")
    q.add_argument("--kind", choices=("binary", "unit_min"), default="binary")
    q.add_argument("--min-magnitude", dest="min_magnitude", type=float, default=1.0)
    q.set_defaults(func=cmd_gen)

    q = sub.add_parser("lasso", parents=[common, dims], help="solve one lasso instance")
    q.add_argument("--lam", type=float, default=None, help="fixed penalty value")
    q.add_argument("--lambda-rule", dest="lambda_rule", choices=("star", "threshold"),
                   default="star", help="penalty rule when --lam is not given")
    q.add_argument("--A", type=float, default=3.0, help="constant for the star rule")
    q.add_argument("--box", action="store_true", help="constrain coefficients to [0,1]")
    q.add_argument("--tol", type=float, default=1e-8)
    q.add_argument("--max-sweeps", dest="max_sweeps", type=int, default=100_000)
    q.set_defaults(func=cmd_lasso)

    q = sub.add_parser("lsa", parents=[common, dims], help="run the swap local search")
    q.add_argument("--init", choices=("random_support", "top_correlation", "zero_padded_random"),
                   default="random_support")
    q.add_argument("--max-iters", dest="max_iters", type=int, default=1_000_000)
    q.set_defaults(func=cmd_lsa)

    q = sub.add_parser("ogp", parents=[common, dims], help="overlap profile and gap verdicts")
    mode = q.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", default=True)
    mode.add_argument("--sampled", action="store_true", default=False)
    q.add_argument("--budget", type=int, default=2_000_000)
    q.add_argument("--r-grid", dest="r_grid", type=int, default=40,
                   help="number of radii scanned")
    q.set_defaults(func=cmd_ogp)

    q = sub.add_parser("localmin", parents=[common, dims],
                       help="enumerate non-trivial swap-stable supports")
    q.add_argument("--budget", type=int, default=2_000_000)
    q.set_defaults(func=cmd_localmin)

    q = sub.add_parser("rip", parents=[common], help="restricted isometry constant of a fresh design")
    q.add_argument("--p", type=int, required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--k", type=int, required=True, help="isometry order")
    q.add_argument("--mode", choices=("exact", "sampled"), default="exact")
    q.add_argument("--budget", type=int, default=2_000_000)
    q.set_defaults(func=cmd_rip)

    q = sub.add_parser("certify", parents=[common, dims],
                       help="build the small-l1 feasible-mix certificate")
    q.add_argument("--search", choices=("exact", "greedy"), default="exact")
    q.add_argument("--budget", type=int, default=2_000_000)
    q.set_defaults(func=cmd_certify)

    q = sub.add_parser("noise-fit", parents=[common],
                       help="best binary sparse fit to a pure noise target")
    q.add_argument("--p", type=int, required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--kprime", type=int, required=True)
    q.add_argument("--variance", type=float, default=1.0)
    q.add_argument("--c", type=float, default=1.0, help="constant for the reference envelope")
    q.add_argument("--mode", choices=("exact", "greedy"), default="exact")
    q.add_argument("--budget", type=int, default=2_000_000)
    q.set_defaults(func=cmd_noise_fit)

    q = sub.add_parser("phase", parents=[common], help="run a phase-diagram grid")
    q.add_argument("--config", type=str, default=None, help="key=value grid config file")
    q.add_argument("--p", type=int, default=None)
    q.add_argument("--k", type=int, default=None)
    q.add_argument("--sigma2", type=float, default=None)
    q.add_argument("--n-values", dest="n_values", type=str, default=None,
                   help="comma-separated sample counts")
    q.add_argument("--methods", type=str, default=None, help="comma-separated methods")
    q.add_argument("--lambda-rule", dest="lambda_rule",
                   choices=("fixed", "lambda_star", "lambda_threshold"), default=None)
    q.add_argument("--lambda-value", dest="lambda_value", type=float, default=None)
    q.add_argument("--lambda-A", dest="lambda_A", type=float, default=None)
    q.add_argument("--seeds", type=int, default=None)
    q.add_argument("--master-seed", dest="master_seed", type=int, default=None)
    q.add_argument("--stability-C", dest="stability_C", type=float, default=None)
    q.add_argument("--lasso-tol", dest="lasso_tol", type=float, default=None)
    q.add_argument("--lasso-max-sweeps", dest="lasso_max_sweeps", type=int, default=None)
    q.add_argument("--lsa-init", dest="lsa_init",
                   choices=("random_support", "top_correlation", "zero_padded_random"),
                   default=None)
    q.add_argument("--lsa-max-iters", dest="lsa_max_iters", type=int, default=None)
    q.add_argument("--dump-config", dest="dump_config", action="store_true",
                   help="write the resolved config to --out and exit")
    q.add_argument("--real-runtime", dest="real_runtime", action="store_true",
                   help="record wall-clock runtimes (breaks byte-stable reruns)")
    q.set_defaults(func=cmd_phase)

    return parser


def dispatch(argv=None) -> int:
    """Parse argv and run the selected subcommand, mapping errors to exit codes."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    return dispatch(argv)


if __name__ == "__main__":
    raise SystemExit(main())
