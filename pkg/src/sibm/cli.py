"""Command-line entry point: ``sibm <command> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from . import experiments, stats, theory
from .ising import ENUMERATION_CUTOFF, McmcSchedule, enumerate_gibbs, exact_sample, sample_independent
from .model import (
    RegimeError,
    SibmParams,
    ValidationError,
    format_spins,
    read_graph,
    read_samples,
    write_graph,
    write_samples,
)
from .recover import exact_posterior, learn_sibm
from .ssbm import generate_ssbm
from .utils import as_generator

EXIT_USAGE = 2


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def cmd_generate(args) -> int:
    # alpha and beta play no part in drawing the graph
    params = SibmParams(n=args.n, a=args.a, b=args.b, alpha=1.0, beta=1.0, m=1)
    graph = generate_ssbm(params, as_generator(args.seed))
    write_graph(graph, args.out)
    return 0


def cmd_sample(args) -> int:
    graph = read_graph(args.graph)
    rng = as_generator(args.seed)
    if args.exact:
        table = enumerate_gibbs(graph, args.alpha, args.beta)
        samples = exact_sample(table, rng, size=args.m)
    else:
        default = McmcSchedule.default(graph.n)
        schedule = McmcSchedule(
            burn_in=default.burn_in if args.burn_in is None else args.burn_in,
            anneal=default.anneal if args.anneal is None else args.anneal,
        )
        samples = sample_independent(graph, args.alpha, args.beta, args.m, schedule, rng)
    write_samples(samples, args.out)
    return 0


def cmd_threshold(args) -> int:
    # n only enters validation (p, q <= 1); pick one large enough
    params = SibmParams(n=10**9, a=args.a, b=args.b, alpha=args.alpha, beta=args.beta, m=args.m)
    _emit(theory.threshold_report(params).to_dict())
    return 0


def cmd_stats(args) -> int:
    graph = read_graph(args.graph)
    counts = stats.neighbor_counts(graph)
    _emit({
        "n": graph.n,
        "n_edges": graph.n_edges,
        "a_counts": counts.a_counts.tolist(),
        "b_counts": counts.b_counts.tolist(),
        "exp_sum": stats.exp_sum(graph, args.beta),
        "histogram": {str(k): v for k, v in stats.d_histogram(graph).items()},
    })
    return 0


def cmd_recover(args) -> int:
    samples = read_samples(args.samples)
    x_hat = learn_sibm(samples, as_generator(args.seed))
    text = format_spins(x_hat) + "\n"
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(text.encode("ascii"))
    else:
        sys.stdout.write(text)
    return 0


def cmd_posterior(args) -> int:
    samples = read_samples(args.samples)
    params = SibmParams(args.n, args.a, args.b, args.alpha, args.beta, samples.shape[0])
    post = exact_posterior(
        samples, params,
        p=min(1.0, params.p) if args.p is None else args.p,
        q=min(1.0, params.q) if args.q is None else args.q,
    )
    _emit({
        "partitions": [format_spins(x) for x in post.partitions],
        "probs": post.probs.tolist(),
        "map": format_spins(post.map_estimate()),
    })
    return 0


def cmd_experiment(args) -> int:
    config = experiments.load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.workers is not None:
        overrides["workers"] = args.workers
    if overrides:
        config = replace(config, **overrides)
    result = experiments.run_experiment(config)
    result.write(args.out, args.trials_out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sibm", description="Stochastic Ising block model lab")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="draw (X, G) from the two-community SSBM")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("sample", help="draw m Ising samples on a graph file")
    p.add_argument("--graph", required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--burn-in", type=int, default=None)
    p.add_argument("--anneal", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--exact", action="store_true",
                   help=f"sample by enumeration (n <= {ENUMERATION_CUTOFF})")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("threshold", help="print beta*, m*, g(beta) and regime flags as JSON")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--m", type=int, default=1)
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("stats", help="per-vertex counts, exp_sum and histogram as JSON")
    p.add_argument("--graph", required=True)
    p.add_argument("--beta", type=float, required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("recover", help="run LearnSIBM on a sample file")
    p.add_argument("--samples", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("posterior", help="exact posterior over balanced partitions (n <= 6)")
    p.add_argument("--samples", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--p", type=float, default=None, help="override the within-cluster edge rate")
    p.add_argument("--q", type=float, default=None, help="override the cross-cluster edge rate")
    p.set_defaults(func=cmd_posterior)

    p = sub.add_parser("experiment", help="run a Monte Carlo experiment and write CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--trials-out", default=None)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, RegimeError) as exc:
        print(f"sibm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
