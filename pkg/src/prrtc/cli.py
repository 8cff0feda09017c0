"""Command line interface: plan, validate, bench and ablate.

Exit codes for ``plan``: 0 solved, 2 failed, 3 infeasible endpoint.
``validate`` exits 0 iff the path re-validates and 1 otherwise. Input
errors (unreadable or invalid files, bad flag values) exit 1 with the
message on stderr.
"""

from __future__ import annotations

import argparse
import os
import sys
from datetime import datetime, timezone

from . import BUNDLED_PROBLEMS, __version__
from .bench import (
    ABLATION_AXES,
    AblationSpec,
    ablation_summary,
    format_summary,
    run_ablation,
    run_suite,
    summarize,
    write_ecdf_csv,
    write_records_csv,
)
from .kinematics import ModelError
from .modelio import PathFile, load_path, load_problem_dir, load_robot, load_scene, params_to_dict, write_path
from .planner import PlannerParams, Status, plan, revalidate_path

EXIT = {Status.SOLVED: 0, Status.FAILED: 2, Status.INFEASIBLE: 3}
THREADS_ENV = "PRRTC_THREADS"


class CliError(Exception):
    pass


def parse_config(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(" ", "").split(",") if v != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def env_workers() -> int | None:
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return None
    try:
        n = int(raw)
    except ValueError:
        raise CliError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise CliError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def add_planner_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("planner")
    g.add_argument("--delta", type=float, help="extension range (default 0.5)")
    g.add_argument("--n-cc", type=int, dest="n_cc", help="collision samples per extension (default 32)")
    g.add_argument("--workers", type=int, help=f"worker threads (default: all CPUs; {THREADS_ENV} overrides)")
    g.add_argument("--max-iters", type=int, dest="max_iters", help="iterations per worker (default 2000)")
    g.add_argument("--tree-capacity", type=int, dest="tree_capacity", help="total nodes over both trees (default 200000)")
    g.add_argument("--dd-radius", type=float, dest="dd_radius", help="dynamic-domain radius (default 4 * delta)")
    g.add_argument("--sampler", choices=("halton", "uniform"))
    g.add_argument("--seed", type=int, help="seed for the uniform sampler")


def planner_params(args) -> PlannerParams:
    keys = ("delta", "n_cc", "workers", "max_iters", "tree_capacity", "dd_radius", "sampler", "seed")
    overrides = {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}
    env = env_workers()
    if env is not None:
        overrides["workers"] = env
    try:
        return PlannerParams().updated(**overrides)
    except ValueError as e:
        raise CliError(str(e)) from None


def cmd_plan(args) -> int:
    model = load_robot(args.robot)
    scene = load_scene(args.scene)
    params = planner_params(args)
    for name, q in (("start", args.start), ("goal", args.goal)):
        if len(q) != model.dof:
            raise CliError(f"--{name} has {len(q)} values, robot {model.name!r} has {model.dof} dof")
    res = plan(model, scene, args.start, args.goal, params)
    print(f"status: {res.status.value}")
    print(f"time_ms: {res.wall_time * 1e3:.3f}")
    print(f"iterations: {res.iterations_total}")
    print(f"sphere_tests: {res.check_stats.sphere_tests}")
    if res.solved:
        print(f"cost: {res.cost:.6f}")
        print(f"waypoints: {len(res.path)}")
        if args.out:
            meta = {
                "cost": res.cost,
                "wall_time_ms": res.wall_time * 1e3,
                "iterations": res.iterations_total,
                "params": params_to_dict(params),
                "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            }
            configs = tuple(tuple(float(v) for v in q) for q in res.path)
            write_path(args.out, PathFile(str(args.robot), str(args.scene), configs, meta))
            print(f"path written to {args.out}")
    return EXIT[res.status]


def cmd_validate(args) -> int:
    model = load_robot(args.robot)
    scene = load_scene(args.scene)
    pf = load_path(args.path)
    if len(pf.configs[0]) != model.dof:
        raise CliError(f"{args.path}: configs have {len(pf.configs[0])} values, robot has {model.dof} dof")
    if args.resolution_multiplier < 1 or args.n_cc < 1:
        raise CliError("--resolution-multiplier and --n-cc must be >= 1")
    ok = revalidate_path(model, scene, pf.configs, n_cc=args.n_cc, multiplier=args.resolution_multiplier)
    print("valid" if ok else "INVALID")
    return 0 if ok else 1


def cmd_bench(args) -> int:
    problems = load_problem_dir(args.problems)
    params = planner_params(args)
    if args.trials < 1:
        raise CliError("--trials must be >= 1")
    records = run_suite(problems, args.trials, params)
    write_records_csv(args.csv, records)
    if args.ecdf:
        write_ecdf_csv(args.ecdf, records)
    print(f"{len(problems)} problems x {args.trials} trials, workers={params.workers}")
    print(format_summary(summarize(records)))
    return 0


def parse_axis_values(axis: str, text: str) -> tuple:
    out = []
    for tok in (t.strip().lower() for t in text.split(",") if t.strip()):
        if axis == "workers":
            try:
                out.append(int(tok))
            except ValueError:
                raise CliError(f"--values: {tok!r} is not an integer") from None
        elif tok in ("on", "true", "1"):
            out.append(True)
        elif tok in ("off", "false", "0"):
            out.append(False)
        else:
            raise CliError(f"--values: {tok!r} is not on/off")
    return tuple(out)


def cmd_ablate(args) -> int:
    problems = load_problem_dir(args.problems)
    params = planner_params(args)
    default = "1,2,4,8" if args.axis == "workers" else "on,off"
    try:
        spec = AblationSpec(args.axis, parse_axis_values(args.axis, args.values or default))
    except ValueError as e:
        raise CliError(str(e)) from None
    groups = run_ablation(spec, problems, args.trials, params, out_dir=args.out_dir)
    print(f"{'value':>6} {'succ':>6} {'mean_ms':>10} {'mean_cost':>10} {'iters':>10} {'tests':>12}")
    for _, value, _, succ, t, c, it, st in ablation_summary(spec.axis, groups):
        print(f"{value:>6} {succ:>6.0%} {t:>10.3f} {c:>10.4f} {it:>10.1f} {st:>12.1f}")
    print(f"CSV files in {args.out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prrtc", description="Parallel RRT-Connect planner and benchmark tools.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="plan one query")
    p.add_argument("--robot", required=True)
    p.add_argument("--scene", required=True)
    p.add_argument("--start", required=True, type=parse_config, help='comma-separated, e.g. --start=-1,0.5,0')
    p.add_argument("--goal", required=True, type=parse_config)
    p.add_argument("--out", help="write the path JSON here when solved")
    add_planner_args(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("validate", help="re-check a path with the fine-only checker")
    p.add_argument("--robot", required=True)
    p.add_argument("--scene", required=True)
    p.add_argument("--path", required=True)
    p.add_argument("--resolution-multiplier", type=int, default=4)
    p.add_argument("--n-cc", type=int, default=32, dest="n_cc", help="base samples per edge")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bench", help="run a problem suite")
    p.add_argument("--problems", default=str(BUNDLED_PROBLEMS), help="directory of problem JSON (default: bundled suite)")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--csv", required=True, help="per-run results")
    p.add_argument("--ecdf", help="ECDF points of time and cost")
    add_planner_args(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("ablate", help="sweep one design choice over a problem suite")
    p.add_argument("--axis", required=True, choices=ABLATION_AXES)
    p.add_argument("--values", help="comma-separated; default 1,2,4,8 for workers, on,off otherwise")
    p.add_argument("--problems", default=str(BUNDLED_PROBLEMS))
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--out-dir", default="ablation")
    add_planner_args(p)
    p.set_defaults(func=cmd_ablate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ModelError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
