"""Command line interface: ``biclust {generate,estimate,adapt,graphon,sweep}``.

Every command takes its randomness from an explicit seed, so repeating an
invocation reproduces its output files byte for byte. Outputs are staged and
renamed into place only when the whole command has succeeded.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import io
from .adapt import KGrid, adaptive_fit, estimate_p
from .core import ModelSpec, ObservedMatrix, materialize_theta
from .estimator import FitConfig, fit_observed
from .graphon import ZOO, GraphonSpec, estimate_graphon, graphon_bandwidth, graphon_mse, sample_graphon_network
from .harness import RECORD_COLUMNS, SweepConfig, rate_report, run_sweep
from .simulate import derive_seed, gen_bernoulli, gen_gaussian, gen_mask, gen_random_model


def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def _nonneg_int(s):
    v = int(s)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {s}")
    return v


def _positive(s):
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {s}")
    return v


def _nonneg(s):
    v = float(s)
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative number, got {s}")
    return v


def _probability(s):
    v = float(s)
    if not 0 < v <= 1:
        raise argparse.ArgumentTypeError(f"expected a number in (0, 1], got {s}")
    return v


def _unit_interval(s):
    v = float(s)
    if not 0 <= v <= 1:
        raise argparse.ArgumentTypeError(f"expected a number in [0, 1], got {s}")
    return v


def _add_seed(p):
    p.add_argument("--seed", type=_nonneg_int, required=True, help="random seed (required)")


def _add_threads(p):
    p.add_argument("--threads", type=_positive_int, default=os.cpu_count() or 1)


def _add_fit_flags(p, restarts=32):
    p.add_argument("--restarts", type=_positive_int, default=restarts)
    p.add_argument("--max-iters", type=_positive_int, default=100)
    p.add_argument("--tol", type=_positive, default=1e-9)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="biclust", description="Constrained least-squares estimation and completion of biclustered matrices."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="simulate a partially observed block-structured matrix")
    g.add_argument("--scenario", choices=("gaussian-asym", "gaussian-sym", "sbm"), required=True)
    g.add_argument("--n", type=_positive_int, help="matrix size (square)")
    g.add_argument("--n1", type=_positive_int)
    g.add_argument("--n2", type=_positive_int)
    g.add_argument("--k", type=_positive_int, help="cluster number (both sides)")
    g.add_argument("--k1", type=_positive_int)
    g.add_argument("--k2", type=_positive_int)
    g.add_argument("--p", type=_probability, default=1.0)
    g.add_argument("--sigma", type=_nonneg, default=1.0)
    g.add_argument("--rho", type=_unit_interval, default=0.5)
    g.add_argument("--M", type=_positive, default=1.0)
    g.add_argument("--out", type=Path, default=Path("."))
    _add_seed(g)

    e = sub.add_parser("estimate", help="constrained least-squares fit with known p")
    e.add_argument("--values", type=Path, required=True)
    e.add_argument("--mask", type=Path, required=True)
    e.add_argument("--p", type=_probability, required=True)
    e.add_argument("--k", type=_positive_int)
    e.add_argument("--k1", type=_positive_int)
    e.add_argument("--k2", type=_positive_int)
    e.add_argument("--symmetric", action="store_true")
    e.add_argument("--M", type=_positive, required=True)
    e.add_argument("--exact", action="store_true", help="exhaustive search (tiny inputs only)")
    e.add_argument("--out", type=Path, default=Path("."))
    _add_fit_flags(e)
    _add_seed(e)
    _add_threads(e)

    a = sub.add_parser("adapt", help="fit with cluster numbers chosen by sample splitting")
    a.add_argument("--values", type=Path, required=True)
    a.add_argument("--mask", type=Path, required=True)
    a.add_argument("--p", type=_probability, help="observation rate; estimated from the mask if absent")
    a.add_argument("--M", type=_positive, required=True)
    a.add_argument("--kmax", type=_positive_int, help="largest cluster number tried (default ceil(2 sqrt n))")
    a.add_argument("--symmetric", action="store_true")
    a.add_argument("--out", type=Path, default=Path("."))
    _add_fit_flags(a)
    _add_seed(a)
    _add_threads(a)

    gr = sub.add_parser("graphon", help="sample networks from a graphon and score the block estimate")
    gr.add_argument("--f", choices=sorted(ZOO), required=True, help="graphon from the built-in zoo")
    gr.add_argument("--rho", type=_probability, default=1.0)
    gr.add_argument("--alpha", type=_positive, default=1.0)
    gr.add_argument("--n", type=_positive_int, required=True)
    gr.add_argument("--trials", type=_positive_int, default=10)
    gr.add_argument("--out", type=Path, default=Path("graphon_results.csv"))
    gr.add_argument("--timing", action="store_true", help="record wall-clock seconds (breaks byte reproducibility)")
    _add_fit_flags(gr, restarts=16)
    _add_seed(gr)
    _add_threads(gr)

    s = sub.add_parser("sweep", help="run a Monte Carlo sweep from a JSON config")
    s.add_argument("--config", type=Path, required=True)
    s.add_argument("--out", type=Path, default=Path("results.csv"))
    s.add_argument("--report", type=Path, default=Path("report.json"))
    s.add_argument("--timing", action="store_true", help="record wall-clock seconds (breaks byte reproducibility)")
    _add_threads(s)
    return parser


def _pick(parser, args, single, pair):
    """Resolve ``--k`` / ``--k1 --k2`` style flags."""
    one = getattr(args, single)
    a, b = (getattr(args, name) for name in pair)
    if one is not None and (a is not None or b is not None):
        parser.error(f"use either --{single} or --{pair[0]}/--{pair[1]}, not both")
    if one is not None:
        return one, one
    if a is None:
        parser.error(f"one of --{single} or --{pair[0]} is required")
    return a, b if b is not None else a


def _fit_config(args):
    return FitConfig(restarts=args.restarts, max_iters=args.max_iters, tol=args.tol, seed=args.seed,
                     workers=getattr(args, "threads", 1))  # fmt: skip


def _load_observed(args):
    values = io.read_matrix(args.values)
    mask = io.read_mask(args.mask)
    return ObservedMatrix.build(values, mask, args.symmetric)


def cmd_generate(parser, args):
    n1, n2 = _pick(parser, args, "n", ("n1", "n2"))
    k1, k2 = _pick(parser, args, "k", ("k1", "k2"))
    symmetric = args.scenario != "gaussian-asym"
    if args.scenario == "sbm":
        spec = ModelSpec.sbm(n1, k1, args.rho)
    elif symmetric:
        spec = ModelSpec.symmetric_model(n1, k1, args.M)
    else:
        spec = ModelSpec.asymmetric(n1, n2, k1, k2, args.M)
    assignment, q = gen_random_model(spec, derive_seed(args.seed, 0))
    theta = materialize_theta(assignment, q, spec)
    mask = gen_mask(spec.n1, spec.n2, args.p, symmetric, seed=derive_seed(args.seed, 1))
    if args.scenario == "sbm":
        x = gen_bernoulli(theta, mask, True, seed=derive_seed(args.seed, 2))
    else:
        x = gen_gaussian(theta, args.sigma, mask, seed=derive_seed(args.seed, 2), symmetric=symmetric)
    truth = io.model_to_dict(spec, assignment, q)
    truth.update(theta=theta.tolist(), p=args.p, scenario=args.scenario, seed=args.seed)
    if args.scenario != "sbm":
        truth["sigma"] = args.sigma
    io.write_atomic({
        args.out / "values.csv": io.matrix_to_csv(x.values),
        args.out / "mask.csv": io.mask_to_csv(x.mask),
        args.out / "truth.json": io.dumps_json(truth),
    })  # fmt: skip


def cmd_estimate(parser, args):
    k1, k2 = _pick(parser, args, "k", ("k1", "k2"))
    x = _load_observed(args)
    n1, n2 = x.shape
    if args.symmetric:
        if k1 != k2:
            parser.error("symmetric fits use a single --k")
        spec = ModelSpec.symmetric_model(n1, k1, args.M)
    else:
        spec = ModelSpec.asymmetric(n1, n2, k1, k2, args.M)
    result = fit_observed(x, args.p, spec, _fit_config(args), exact=args.exact)
    a = result.assignment
    report = {
        "objective": result.objective,
        "iterations": result.iterations,
        "restarts": result.restarts_used,
        "k1": spec.k1,
        "k2": spec.k2,
        "M": spec.M,
        "p": args.p,
        "exact": args.exact,
        "symmetric": args.symmetric,
        "labels": {"z1": (a.z1 + 1).tolist(), "z2": (a.z2 + 1).tolist()},
        "q": result.q_hat.q.tolist(),
    }
    io.write_atomic({
        args.out / "theta_hat.csv": io.matrix_to_csv(result.theta_hat),
        args.out / "fit.json": io.dumps_json(report),
    })  # fmt: skip


def _loss_grid(losses):
    return {f"{k1},{k2}": v for (k1, k2), v in sorted(losses.items())}


def cmd_adapt(parser, args):
    x = _load_observed(args)
    p_hat = estimate_p(x.mask, args.symmetric)
    grid = KGrid.up_to(args.kmax) if args.kmax else KGrid.default(*x.shape)
    result = adaptive_fit(x, args.p, args.M, grid, _fit_config(args), args.symmetric)
    report = {
        "k1_hat_delta": result.k_hat_delta[0],
        "k2_hat_delta": result.k_hat_delta[1],
        "k_hat_delta": list(result.k_hat_delta),
        "k_hat_deltac": list(result.k_hat_delta_c),
        "p_hat": p_hat,
        "p_used": result.p_hat,
        "validation_losses": {
            "delta": _loss_grid(result.losses_delta),
            "deltac": _loss_grid(result.losses_delta_c),
        },
    }
    io.write_atomic({
        args.out / "theta_hat.csv": io.matrix_to_csv(result.theta_hat),
        args.out / "adapt.json": io.dumps_json(report),
    })  # fmt: skip


def _graphon_trial(task):
    g, n, seed, config, trial, timing = task
    start = time.perf_counter()
    xi, _, x = sample_graphon_network(g, n, seed=seed)
    f_hat, _ = estimate_graphon(x, g.alpha, g.rho, config)
    return [
        trial,
        n,
        graphon_bandwidth(n, g.alpha),
        graphon_mse(f_hat, g, xi),
        time.perf_counter() - start if timing else None,
        graphon_mse(f_hat, g, xi, offdiag=True),
    ]


def cmd_graphon(parser, args):
    g = GraphonSpec(args.f, args.rho, args.alpha)
    tasks = []
    for t in range(args.trials):
        seed = derive_seed(args.seed, t)
        config = FitConfig(args.restarts, args.max_iters, args.tol, seed=derive_seed(seed, 3))
        tasks.append((g, args.n, seed, config, t, args.timing))
    if args.threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(args.threads) as pool:
            rows = list(pool.map(_graphon_trial, tasks))
    else:
        rows = [_graphon_trial(t) for t in tasks]
    columns = ("trial", "n", "k", "mse", "seconds", "mse_offdiag")
    io.write_atomic({args.out: io.records_to_csv(columns, rows)})


def cmd_sweep(parser, args):
    try:
        config = SweepConfig.from_dict(json.loads(args.config.read_text()))
    except (TypeError, json.JSONDecodeError) as err:
        raise ValueError(f"{args.config}: invalid sweep config: {err}") from None
    records = run_sweep(config, workers=args.threads, timing=args.timing)
    io.write_atomic({
        args.out: io.records_to_csv(RECORD_COLUMNS, (r.row() for r in records)),
        args.report: io.dumps_json(rate_report(records)),
    })  # fmt: skip


COMMANDS = {
    "generate": cmd_generate,
    "estimate": cmd_estimate,
    "adapt": cmd_adapt,
    "graphon": cmd_graphon,
    "sweep": cmd_sweep,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        COMMANDS[args.command](parser, args)
    except (ValueError, RuntimeError, OSError, KeyError) as err:
        msg = str(err).splitlines()[0] if str(err) else type(err).__name__
        print(f"biclust {args.command}: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
