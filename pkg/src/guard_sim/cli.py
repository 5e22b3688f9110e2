"""Command line entry point: ``guard-sim {run,sweep,bench-gr,oracle-check,aggregate}``."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .checks import bench_gr, oracle_check
from .harness import (DEFAULT_SWEEP, ConfigError, ExperimentPlan, aggregate, load_plan, load_run_rows,
                      plan_from_dict, run_plan, write_aggregate)
from .policies import KINDS, PolicySpec

log = logging.getLogger("guard_sim")


def _plan(args, sweep=None) -> ExperimentPlan:
    plan = load_plan(args.config) if args.config else plan_from_dict({})
    if args.seed is not None:
        plan = replace(plan, base_seed=args.seed, game=replace(plan.game, rng_seed=args.seed))
    if args.out is not None:
        plan = replace(plan, output_dir=args.out)
    if args.policies:
        kinds = [k.strip() for k in args.policies.split(",") if k.strip()]
        bad = [k for k in kinds if k not in KINDS]
        if bad:
            raise ConfigError(f"--policies: unknown kind(s) {bad}; expected some of {KINDS}")
        by_kind = {p.kind: p for p in plan.policies}
        plan = replace(plan, policies=tuple(by_kind.get(k, PolicySpec(k)) for k in kinds))
    if sweep is not None:
        plan = replace(plan, sweep=sweep)
    return plan


def _run(args, sweep=None) -> int:
    plan = _plan(args, sweep)
    n_tasks = len(plan.tasks())
    log.info("%d cells x %d replications x %d policies = %d runs -> %s",
             len(plan.cells()), plan.replications, len(plan.policies), n_tasks, plan.output_dir)
    rows = run_plan(plan, jobs=args.jobs)
    print(f"wrote {len(rows)} runs and {Path(plan.output_dir) / 'aggregate.csv'}")
    return 0


def cmd_run(args) -> int:
    return _run(args)


def cmd_sweep(args) -> int:
    return _run(args, sweep={k: list(v) for k, v in DEFAULT_SWEEP.items()})


def cmd_bench_gr(args) -> int:
    rows = bench_gr(rounds=args.rounds, seed=args.seed or 0)
    print("p     M   r     mean_inc   expected   z_inc   mean_pinv  expected  z_pinv")
    for r in rows:
        print(f"{r.p:<5} {r.m_trunc:<3} {r.reward:<5} {r.mean_increment:<10.5f} {r.expected_increment:<10.5f}"
              f" {r.z_increment:+6.2f}  {r.mean_p_inv:<10.4f} {r.expected_p_inv:<9.4f} {r.z_p_inv:+6.2f}")
    bad = sum(not r.ok for r in rows)
    print(f"{len(rows) - bad}/{len(rows)} within 3 SE")
    return 1 if bad else 0


def cmd_oracle_check(args) -> int:
    rep = oracle_check(instances=args.instances, max_n=args.max_n, seed=args.seed or 0)
    print(f"{rep.instances} instances, {rep.mismatches} mismatches")
    for ex in rep.examples:
        print("  ", ex)
    return 0 if rep.ok else 1


def cmd_aggregate(args) -> int:
    src = args.dir or args.out
    if src is None:
        raise ConfigError("aggregate: give a run directory (positional or --out)")
    table = aggregate(load_run_rows(src))
    dest = Path(args.out or src) / "aggregate.csv"
    write_aggregate(table, dest)
    print(f"aggregated {sum(r['n_runs'] for r in table)} runs into {len(table)} rows -> {dest}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML experiment plan")
    common.add_argument("--seed", type=int, help="base seed (unsigned 64-bit)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--jobs", type=int, help="worker processes (default: $GUARD_SIM_JOBS or 1)")
    common.add_argument("--policies", help="comma-separated subset, e.g. HERDS,FPL-UE")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="guard-sim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="execute the plan in --config").set_defaults(func=cmd_run)
    sub.add_parser("sweep", parents=[common],
                   help="execute the plan over K in 3..8, M in {3,8,15}, both attackers").set_defaults(func=cmd_sweep)
    p = sub.add_parser("bench-gr", parents=[common], help="Monte Carlo check of the resampling bias")
    p.add_argument("--rounds", type=int, default=100_000)
    p.set_defaults(func=cmd_bench_gr)
    p = sub.add_parser("oracle-check", parents=[common], help="best response vs exhaustive enumeration")
    p.add_argument("--instances", type=int, default=1000)
    p.add_argument("--max-n", type=int, default=8)
    p.set_defaults(func=cmd_oracle_check)
    p = sub.add_parser("aggregate", parents=[common], help="rebuild aggregate.csv from a run directory")
    p.add_argument("dir", nargs="?", help="run directory (defaults to --out)")
    p.set_defaults(func=cmd_aggregate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"guard-sim: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
