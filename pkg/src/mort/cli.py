"""Command-line front door: generate, solve, check and benchmark.

Exit codes: 0 success, 1 failed check, 2 usage error, 3 infeasible,
4 timeout, 5 greedy hit an unstable intermediate arrangement.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import __version__
from .generators import (
    MODE_DISJOINT,
    MODE_IN_PLACE,
    SCENARIO_PYRAMID2D,
    SCENARIO_PYRAMID3D,
    SCENARIO_RANDOM,
    GenSpec,
    generate,
)
from .planner_greedy import solve_greedy
from .planner_optimal import (
    STATUS_INFEASIBLE,
    STATUS_OPTIMAL,
    STATUS_TIMEOUT,
    STATUS_UNSTABLE,
    PlannerConfig,
    solve,
)
from .scene import (
    PlanViolation,
    SceneError,
    load_instance,
    load_plan,
    save_instance,
    save_plan,
    simulate_plan,
)
from .stability import is_stable

log = logging.getLogger("mort")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_TIMEOUT = 4
EXIT_GREEDY_UNSTABLE = 5

_STATUS_EXIT = {
    STATUS_OPTIMAL: EXIT_OK,
    STATUS_INFEASIBLE: EXIT_INFEASIBLE,
    STATUS_TIMEOUT: EXIT_TIMEOUT,
    STATUS_UNSTABLE: EXIT_GREEDY_UNSTABLE,
}

CSV_HEADER = [
    "scenario",
    "mode",
    "n",
    "seed",
    "algorithm",
    "status",
    "cost",
    "buffers",
    "time_ms",
    "expanded",
    "bans",
]

_MODE_FLAG = {"in-place": MODE_IN_PLACE, "disjoint": MODE_DISJOINT}


def _setup_logging() -> None:
    level = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(
        os.environ.get("MORT_LOG", "error").lower(), logging.ERROR
    )
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _gen_spec_from_args(args) -> GenSpec:
    if args.scenario == SCENARIO_RANDOM:
        if args.n is None:
            raise SystemExit_usage("--n is required for the random scenario")
        size = args.n
    else:
        if args.layers is None:
            raise SystemExit_usage("--layers is required for pyramid scenarios")
        size = args.layers
    return GenSpec(
        scenario=args.scenario,
        size=size,
        mode=_MODE_FLAG[args.mode],
        seed=args.seed,
        region=args.region,
    )


def SystemExit_usage(msg: str) -> SystemExit:
    print(f"error: {msg}", file=sys.stderr)
    return SystemExit(EXIT_USAGE)


def cmd_gen(args) -> int:
    inst = generate(_gen_spec_from_args(args))
    data = save_instance(inst)
    if args.output == "-":
        sys.stdout.buffer.write(data)
    else:
        with open(args.output, "wb") as f:
            f.write(data)
    log.info("wrote instance with n=%d to %s", inst.n, args.output)
    return EXIT_OK


def _planner_config(args) -> PlannerConfig:
    return PlannerConfig(
        time_limit_s=args.time_limit,
        enable_stability=not args.no_stability,
        mu=args.mu,
    )


def cmd_solve(args) -> int:
    with open(args.instance, "rb") as f:
        inst = load_instance(f.read(), check_stability=not args.no_stability)
    config = _planner_config(args)
    result = solve(inst, config) if args.alg == "sipp" else solve_greedy(inst, config)
    print(f"status: {result.status}", file=sys.stderr)
    if result.plan is not None:
        data = save_plan(result.plan, stats=result.stats)
        if args.output == "-":
            sys.stdout.buffer.write(data)
        elif args.output is not None:
            with open(args.output, "wb") as f:
                f.write(data)
        print(
            f"cost: {result.plan.cost}  buffers: {result.plan.buffers}",
            file=sys.stderr,
        )
    return _STATUS_EXIT[result.status]


def cmd_check(args) -> int:
    with open(args.instance, "rb") as f:
        inst = load_instance(f.read(), check_stability=False)
    with open(args.plan, "rb") as f:
        plan = load_plan(f.read())
    try:
        trace = simulate_plan(inst, plan)
    except PlanViolation as e:
        print(f"invalid: action {e.index}: {e}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    if not args.no_stability:
        states = [inst.start] + trace
        for k, arr in enumerate(states):
            verdict = is_stable(inst, arr, mu=args.mu)
            if not verdict.stable:
                where = "start" if k == 0 else f"after action {k - 1}"
                bad = sorted(verdict.unstable_objects)
                print(f"invalid: unstable {where}: objects {bad}", file=sys.stderr)
                return EXIT_CHECK_FAILED
    print(f"valid: {plan.cost} actions, {plan.buffers} buffered", file=sys.stderr)
    return EXIT_OK


def run_instance(spec: GenSpec, alg: str, config: PlannerConfig) -> dict:
    """Generate one instance, run one algorithm, return a result row."""
    inst = generate(spec)
    result = solve(inst, config) if alg == "sipp" else solve_greedy(inst, config)
    return {
        "scenario": spec.scenario,
        "mode": spec.mode,
        "n": inst.n,
        "seed": spec.seed,
        "algorithm": alg,
        "status": result.status,
        "cost": "" if result.plan is None else result.plan.cost,
        "buffers": "" if result.plan is None else result.plan.buffers,
        "time_ms": f"{result.stats['time_ms']:.3f}",
        "expanded": result.stats.get("expanded", 0),
        "bans": result.stats.get("bans", 0),
    }


def _bench_jobs(args):
    sizes = [int(s) for s in args.sizes.split(",")]
    algs = ["sipp", "greedy"] if args.alg == "both" else [args.alg]
    config = _planner_config(args)
    for size in sizes:
        for trial in range(args.trials):
            spec = GenSpec(
                scenario=args.scenario,
                size=size,
                mode=_MODE_FLAG[args.mode],
                seed=args.seed + trial,
                region=args.region,
            )
            for alg in algs:
                yield (spec, alg, config)


def _summarize(rows: list[dict], out) -> None:
    """Optimality-ratio and runtime summary over paired runs."""
    by_key: dict[tuple, dict[str, dict]] = {}
    for r in rows:
        key = (r["scenario"], r["mode"], r["n"], r["seed"])
        by_key.setdefault(key, {})[r["algorithm"]] = r

    ratios = []
    zero_buffer_optimal = 0
    paired = 0
    for runs in by_key.values():
        opt, grd = runs.get("sipp"), runs.get("greedy")
        if not opt or not grd:
            continue
        if opt["status"] != STATUS_OPTIMAL or grd["status"] != STATUS_OPTIMAL:
            continue
        paired += 1
        ob, gb = int(opt["buffers"]), int(grd["buffers"])
        if ob == 0:
            zero_buffer_optimal += 1
        else:
            ratios.append(gb / ob)

    print("# summary", file=out)
    for alg in sorted({r["algorithm"] for r in rows}):
        sub = [r for r in rows if r["algorithm"] == alg]
        ok = [r for r in sub if r["status"] == STATUS_OPTIMAL]
        times_all = [float(r["time_ms"]) for r in sub]
        times_ok = [float(r["time_ms"]) for r in ok]
        mean_all = sum(times_all) / len(times_all) if times_all else 0.0
        mean_ok = sum(times_ok) / len(times_ok) if times_ok else 0.0
        print(
            f"# {alg}: {len(ok)}/{len(sub)} succeeded, "
            f"mean time {mean_all:.1f} ms (all) / {mean_ok:.1f} ms (finished)",
            file=out,
        )
    if ratios:
        print(
            f"# optimality ratio (greedy/optimal buffers): "
            f"mean {sum(ratios) / len(ratios):.3f} over {len(ratios)} instances "
            f"({zero_buffer_optimal} zero-buffer optima excluded, {paired} pairs)",
            file=out,
        )
    elif paired:
        print(
            f"# optimality ratio: undefined ({zero_buffer_optimal} zero-buffer "
            f"optima over {paired} pairs)",
            file=out,
        )


def cmd_bench(args) -> int:
    jobs = list(_bench_jobs(args))
    sink = sys.stdout if args.output == "-" else open(args.output, "w", newline="")
    try:
        writer = csv.DictWriter(sink, fieldnames=CSV_HEADER)
        writer.writeheader()
        rows = []
        if args.jobs > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                results = pool.map(run_instance, *zip(*jobs))
                for row in results:
                    writer.writerow(row)
                    sink.flush()
                    rows.append(row)
        else:
            for spec, alg, config in jobs:
                row = run_instance(spec, alg, config)
                writer.writerow(row)
                sink.flush()
                rows.append(row)
    finally:
        if sink is not sys.stdout:
            sink.close()
    _summarize(rows, sys.stdout if args.output != "-" else sys.stderr)
    return EXIT_OK


def _add_gen_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--scenario",
        required=True,
        choices=[SCENARIO_PYRAMID2D, SCENARIO_PYRAMID3D, SCENARIO_RANDOM],
    )
    p.add_argument("--layers", type=int, default=None, help="pyramid layer count m")
    p.add_argument("--n", type=int, default=None, help="random-pile object count")
    p.add_argument("--mode", choices=sorted(_MODE_FLAG), default="in-place")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--region", type=float, default=5.0, help="random-pile square side")


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--time-limit", type=float, default=300.0, metavar="SECONDS")
    p.add_argument("--mu", type=float, default=None, help="friction override")
    p.add_argument("--no-stability", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mort",
        description="Optimal multi-layer tabletop rearrangement planning.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a benchmark instance")
    _add_gen_flags(p)
    p.add_argument("-o", "--output", required=True, help="instance file ('-' = stdout)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="plan for an instance file")
    p.add_argument("instance")
    p.add_argument("--alg", choices=["sipp", "greedy"], default="sipp")
    _add_solver_flags(p)
    p.add_argument("-o", "--output", default=None, help="plan file ('-' = stdout)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("check", help="validate a plan against an instance")
    p.add_argument("instance")
    p.add_argument("plan")
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--no-stability", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("bench", help="run the benchmark matrix, emit CSV")
    _add_gen_flags(p)
    p.add_argument("--sizes", default=None, help="comma list overriding --layers/--n")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--alg", choices=["sipp", "greedy", "both"], default="both")
    _add_solver_flags(p)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--output", default="-", help="CSV file ('-' = stdout)")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "bench" and args.sizes is None:
        fallback = args.n if args.scenario == SCENARIO_RANDOM else args.layers
        if fallback is None:
            raise SystemExit_usage("bench needs --sizes (or --layers / --n)")
        args.sizes = str(fallback)
    try:
        return args.func(args)
    except SceneError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
