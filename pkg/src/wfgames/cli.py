"""Command-line front end.  Thin adapters over the library, no math here.

Exit codes: 0 success, 1 usage or input error, 2 solver failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .channel import (ChannelRealization, ChannelTopology, RayleighProfile,
                      SamplingError, normalize, sample_admissible_channel)
from .game import ConvergenceError, GameConfig, iterative_waterfilling
from .harness import (ExperimentSpec, reproduce_example, run_experiment,
                      write_cdf_csvs, write_summary_json, write_trials_csv)
from .stackelberg import (EvaluationBudgetError, LeaderProblem,
                          algorithm1_dual, dual_bound, exhaustive_stackelberg,
                          interference_free_bound)

DEFAULT_SEED = 12345


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; this tool reserves 2 for solver
    # failures, so remap to 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _load_channel(path: str) -> ChannelRealization:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read channel file: {exc}")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON at line {exc.lineno} "
                         f"column {exc.colno}: {exc.msg}")
    try:
        return ChannelRealization.from_dict(doc)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"{path}: {exc}")


def _parse_budgets(text: str, num_users: int) -> np.ndarray:
    try:
        parts = [float(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"bad budget list {text!r}")
    if len(parts) == 1:
        parts = parts * num_users
    if len(parts) != num_users:
        raise UsageError(f"{len(parts)} budgets for {num_users} users")
    if any(b <= 0 for b in parts):
        raise UsageError("budgets must be positive")
    return np.array(parts)


def _leader_index(args, num_users: int) -> int:
    leader = args.leader - 1
    if not 0 <= leader < num_users:
        raise UsageError(f"--leader {args.leader} out of range "
                         f"(1..{num_users})")
    return leader


def _print_allocation(label, power):
    bins = " ".join(f"{p:.6g}" for p in power)
    print(f"{label}: [{bins}]")


def _cmd_nash(args) -> int:
    ch = _load_channel(args.channel)
    nc = normalize(ch)
    budgets = _parse_budgets(args.budget, ch.num_users)
    cfg = GameConfig(budgets=budgets, iw_tolerance=args.tolerance,
                     iw_max_iters=args.max_iters)
    result = iterative_waterfilling(nc, cfg)
    if args.json:
        doc = {"rates_bits": result.rates.tolist(),
               "allocations": [a.power.tolist() for a in result.allocations],
               "iterations": result.iterations,
               "converged": result.converged}
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print(f"nash equilibrium ({result.iterations} sweeps, "
              f"converged={result.converged})")
        for u in range(ch.num_users):
            _print_allocation(f"  user {u + 1} power", result.allocations[u].power)
            print(f"  user {u + 1} rate: {result.rates[u]:.6f} bits")
    if not result.converged:
        print("nash solve did not converge", file=sys.stderr)
        return 2
    return 0


def _solve_stackelberg(args, nc, budgets, leader):
    prob = LeaderProblem(nc=nc, budgets=budgets, leader=leader,
                         grid_step=args.grid_step)
    results = []
    if args.method in ("exhaustive", "both"):
        results.append(exhaustive_stackelberg(prob))
    if args.method in ("dual", "both"):
        results.append(algorithm1_dual(prob))
    return results


def _cmd_stackelberg(args) -> int:
    ch = _load_channel(args.channel)
    nc = normalize(ch)
    budgets = _parse_budgets(args.budget, ch.num_users)
    leader = _leader_index(args, ch.num_users)
    results = _solve_stackelberg(args, nc, budgets, leader)
    status = 0
    if args.json:
        docs = []
        for r in results:
            docs.append({"method": r.method,
                         "leader": leader + 1,
                         "rates_bits": r.rates.tolist(),
                         "leader_power": r.leader_alloc.power.tolist(),
                         "converged": r.converged})
        print(json.dumps(docs, indent=2, sort_keys=True))
    for r in results:
        if not args.json:
            print(f"{r.method} leadership of user {leader + 1} "
                  f"(converged={r.converged})")
            _print_allocation("  leader power", r.leader_alloc.power)
            for u in range(ch.num_users):
                print(f"  user {u + 1} rate: {r.rates[u]:.6f} bits")
        if not r.converged:
            print(f"{r.method} solve did not converge", file=sys.stderr)
            status = 2
    return status


def _cmd_bounds(args) -> int:
    ch = _load_channel(args.channel)
    nc = normalize(ch)
    budgets = _parse_budgets(args.budget, ch.num_users)
    leader = _leader_index(args, ch.num_users)
    prob = LeaderProblem(nc=nc, budgets=budgets, leader=leader,
                         grid_step=args.grid_step)
    free = interference_free_bound(prob)
    mu_star, dual_val = dual_bound(prob)
    if args.json:
        print(json.dumps({"interference_free_bits": free,
                          "dual_bound_bits": dual_val,
                          "mu_star": mu_star}, indent=2, sort_keys=True))
    else:
        print(f"interference-free leader bound: {free:.6f} bits")
        print(f"duality upper bound: {dual_val:.6f} bits at mu* = {mu_star:.6g}")
    return 0


def _cmd_example(args) -> int:
    report = reproduce_example(args.which)
    print(report.to_text())
    return 0


def _cmd_montecarlo(args) -> int:
    try:
        with open(args.config) as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}")
    try:
        spec = ExperimentSpec.from_json(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{args.config}: invalid JSON at line {exc.lineno} "
                         f"column {exc.colno}: {exc.msg}")
    except (TypeError, ValueError) as exc:
        raise UsageError(f"{args.config}: {exc}")
    import os
    os.makedirs(args.output, exist_ok=True)
    records, summary = run_experiment(spec, n_jobs=args.threads)
    write_trials_csv(records, os.path.join(args.output, "trials.csv"))
    write_summary_json(summary, os.path.join(args.output, "summary.json"))
    write_cdf_csvs(records, args.output, spec.num_users,
                   cdf_points=spec.cdf_points)
    print(json.dumps(summary, indent=2, sort_keys=True))
    if summary["n_converged"] == 0:
        print("no trial converged", file=sys.stderr)
        return 2
    return 0


def _cmd_gen_channel(args) -> int:
    profile = RayleighProfile(num_rays=args.rays,
                              ray_spacing=args.ray_spacing,
                              bandwidth=args.bandwidth,
                              decay_constant=args.decay_constant)
    topo = ChannelTopology.symmetric(args.users, args.bins,
                                     cross_power=args.cross_power,
                                     direct_power=args.direct_power,
                                     noise=args.noise)
    ch, rejections = sample_admissible_channel(
        profile, topo, args.seed, max_rejections=args.max_rejections)
    text = ch.to_json() + "\n"
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w") as fh:
            fh.write(text)
    print(f"admissible channel after {rejections} rejections", file=sys.stderr)
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="wfgames",
                     description="Water-filling power games: equilibria, "
                                 "leadership, bounds, experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("nash", help="iterated water-filling equilibrium")
    p.add_argument("--channel", required=True, help="channel JSON file")
    p.add_argument("--budget", default="10",
                   help="per-user budget, scalar or comma list")
    p.add_argument("--tolerance", type=float, default=None)
    p.add_argument("--max-iters", type=int, default=10_000)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_nash)

    p = sub.add_parser("stackelberg", help="informed-leader solve")
    p.add_argument("--channel", required=True)
    p.add_argument("--budget", default="10")
    p.add_argument("--leader", type=int, default=1,
                   help="leading user, 1-based (default 1)")
    p.add_argument("--method", choices=["exhaustive", "dual", "both"],
                   default="dual")
    p.add_argument("--grid-step", type=float, default=0.1)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_stackelberg)

    p = sub.add_parser("bounds", help="leader-rate upper bounds")
    p.add_argument("--channel", required=True)
    p.add_argument("--budget", default="10")
    p.add_argument("--leader", type=int, default=1)
    p.add_argument("--grid-step", type=float, default=0.1)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("example", help="recompute a canned two-bin case")
    p.add_argument("which", type=int, choices=[1, 2])
    p.set_defaults(func=_cmd_example)

    p = sub.add_parser("montecarlo", help="run a Monte-Carlo experiment")
    p.add_argument("--config", required=True, help="ExperimentSpec JSON")
    p.add_argument("--output", required=True, help="output directory")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=_cmd_montecarlo)

    p = sub.add_parser("gen-channel",
                       help="sample an admissible channel to JSON")
    p.add_argument("--users", type=int, default=2)
    p.add_argument("--bins", type=int, default=20)
    p.add_argument("--cross-power", type=float, default=0.5)
    p.add_argument("--direct-power", type=float, default=1.0)
    p.add_argument("--noise", type=float, default=0.01)
    p.add_argument("--rays", type=int, default=4)
    p.add_argument("--ray-spacing", type=float, default=160e-9)
    p.add_argument("--bandwidth", type=float, default=6.25e6)
    p.add_argument("--decay-constant", type=float, default=None)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--max-rejections", type=int, default=10_000)
    p.add_argument("--output", default="-", help="file or - for stdout")
    p.set_defaults(func=_cmd_gen_channel)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"wfgames: error: {exc}", file=sys.stderr)
        return 1
    except (SamplingError, ConvergenceError, EvaluationBudgetError) as exc:
        print(f"wfgames: solver failure: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"wfgames: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
