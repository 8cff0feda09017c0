"""Benchmark harness: repeated planning runs, quantile summaries, ECDFs and ablations.

Only the ``plan()`` call is timed. Problems are loaded once, before any
timing starts, and run one after another so that the planner's own
workers have the machine to themselves.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .collision import CollisionChecker
from .modelio import Problem, ResultRow, write_results_csv
from .planner import PlannerParams, Status, plan

ABLATION_AXES = ("workers", "early_exit", "two_stage", "dynamic_domain", "batched_cc")
ECDF_HEADER = ["metric", "value", "fraction_solved"]
POOLED = "pooled"


def config_hash(params: PlannerParams) -> str:
    """Short stable digest of every planner parameter."""
    blob = json.dumps(asdict(params), sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


@dataclass(frozen=True)
class BenchRecord:
    problem: str
    trial: int
    status: Status
    time_ms: float
    cost: float | None
    iterations: int
    sphere_tests: int
    workers: int
    seed: int | None
    config_hash: str

    def __post_init__(self):
        if (self.cost is not None) != (self.status == Status.SOLVED):
            raise ValueError("cost must be present exactly when the run is solved")
        if self.status != Status.INFEASIBLE and not self.time_ms > 0:
            raise ValueError("completed runs need a positive wall time")

    @property
    def solved(self) -> bool:
        return self.status == Status.SOLVED

    def as_row(self) -> ResultRow:
        return ResultRow(
            self.problem,
            self.status.value,
            self.time_ms,
            self.cost,
            self.iterations,
            self.sphere_tests,
            self.workers,
            self.seed,
        )


def trial_params(params: PlannerParams, problem: Problem, trial: int) -> PlannerParams:
    """Per-run parameters: problem overrides on top of ``params``; uniform runs get seed base + trial."""
    p = params.updated(**problem.params)
    if p.sampler == "uniform":
        p = p.updated(seed=(p.seed or 0) + trial)
    return p


def warm_up(problem: Problem, params: PlannerParams) -> None:
    """Load the compiled kernels for this model/scene so the first timed run does not pay for it."""
    chk = CollisionChecker(problem.model, problem.scene, two_stage=params.two_stage, batch_width=params.batch_width)
    chk.colliding(problem.start[None])
    chk.validate_edge(problem.start, problem.goal, params.n_cc)


def run_suite(problems: Sequence[Problem], trials: int, params: PlannerParams | None = None) -> list[BenchRecord]:
    """Plan every problem ``trials`` times; records come back ordered by (problem, trial)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    params = params or PlannerParams()
    records = []
    for prob in problems:
        warm_up(prob, params)
        for trial in range(trials):
            p = trial_params(params, prob, trial)
            t0 = time.perf_counter()
            res = plan(prob.model, prob.scene, prob.start, prob.goal, p)
            elapsed = time.perf_counter() - t0
            records.append(
                BenchRecord(
                    problem=prob.name,
                    trial=trial,
                    status=res.status,
                    time_ms=max(round(elapsed * 1e3, 3), 0.001),
                    cost=res.cost if res.solved else None,
                    iterations=res.iterations_total,
                    sphere_tests=res.check_stats.sphere_tests,
                    workers=p.workers,
                    seed=p.seed,
                    config_hash=config_hash(p),
                )
            )
    return records


# --- summaries ---------------------------------------------------------------------


@dataclass(frozen=True)
class Quantiles:
    mean: float
    q1: float
    median: float
    q3: float
    p95: float
    max: float

    @classmethod
    def of(cls, values) -> "Quantiles":
        v = np.asarray(values, dtype=float)
        if v.size == 0:
            raise ValueError("no values")
        q1, med, q3, p95 = np.percentile(v, [25, 50, 75, 95])
        # fsum keeps the mean independent of record order
        return cls(math.fsum(v.tolist()) / v.size, float(q1), float(med), float(q3), float(p95), float(v.max()))


@dataclass(frozen=True)
class SummaryRow:
    """Quantiles are over solved runs only; None when nothing was solved."""

    name: str
    runs: int
    solved: int
    time_ms: Quantiles | None
    cost: Quantiles | None

    @property
    def success_rate(self) -> float:
        return self.solved / self.runs

    @property
    def failed(self) -> int:
        return self.runs - self.solved


def _summary_row(name: str, records: Sequence[BenchRecord]) -> SummaryRow:
    ok = [r for r in records if r.solved]
    if not ok:
        return SummaryRow(name, len(records), 0, None, None)
    return SummaryRow(
        name,
        len(records),
        len(ok),
        Quantiles.of([r.time_ms for r in ok]),
        Quantiles.of([r.cost for r in ok]),
    )


def summarize(records: Sequence[BenchRecord]) -> list[SummaryRow]:
    """One row per problem (first-seen order) followed by the pooled row."""
    if not records:
        raise ValueError("summarize needs at least one record")
    groups: dict[str, list[BenchRecord]] = {}
    for r in records:
        groups.setdefault(r.problem, []).append(r)
    rows = [_summary_row(name, rs) for name, rs in groups.items()]
    rows.append(_summary_row(POOLED, records))
    return rows


def format_summary(rows: Iterable[SummaryRow]) -> str:
    cols = ("problem", "succ", "mean", "q1", "med", "q3", "95%", "100%", "cost_mean", "cost_med")
    lines = ["{:<28} {:>6} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}".format(*cols)]
    for r in rows:
        t, c = r.time_ms, r.cost
        nums = ["-"] * 8 if t is None else [f"{x:.3f}" for x in (t.mean, t.q1, t.median, t.q3, t.p95, t.max, c.mean, c.median)]
        lines.append("{:<28} {:>6} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}".format(r.name, f"{r.success_rate:.0%}", *nums))
    lines.append("(times in ms over solved runs; cost is path arclength)")
    return "\n".join(lines)


# --- ECDF --------------------------------------------------------------------------


def ecdf(records: Sequence[BenchRecord], metric: str = "time_ms") -> list[tuple[float, float]]:
    """(value, fraction of all runs solved with a value <= it) for each solved run.

    Failed runs count in the denominator, so the curve tops out at the
    success rate.
    """
    if metric not in ("time_ms", "cost"):
        raise ValueError(f"unknown metric {metric!r}")
    if not records:
        return []
    values = np.sort([getattr(r, metric) for r in records if r.solved])
    n = len(records)
    return [(float(v), (i + 1) / n) for i, v in enumerate(values)]


def write_ecdf_csv(path, records: Sequence[BenchRecord]) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(ECDF_HEADER)
        for metric in ("time_ms", "cost"):
            for value, frac in ecdf(records, metric):
                w.writerow([metric, repr(value), repr(frac)])


def write_records_csv(path, records: Iterable[BenchRecord]) -> None:
    write_results_csv(path, (r.as_row() for r in records))


# --- ablations ---------------------------------------------------------------------


@dataclass(frozen=True)
class AblationSpec:
    axis: str
    values: tuple

    def __post_init__(self):
        if self.axis not in ABLATION_AXES:
            raise ValueError(f"axis must be one of {', '.join(ABLATION_AXES)}")
        if not self.values:
            raise ValueError("ablation needs at least one value")
        for v in self.values:
            if self.axis == "workers":
                if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                    raise ValueError(f"workers values must be positive integers, got {v!r}")
            elif not isinstance(v, bool):
                raise ValueError(f"{self.axis} values must be booleans, got {v!r}")


def value_label(value) -> str:
    if isinstance(value, bool):
        return "on" if value else "off"
    return str(value)


def run_ablation(
    spec: AblationSpec,
    problems: Sequence[Problem],
    trials: int,
    params: PlannerParams | None = None,
    out_dir=None,
) -> dict:
    """Sweep one axis with everything else fixed; returns {value: records}.

    With ``out_dir`` writes ``<axis>_<value>.csv`` per value and
    ``<axis>_summary.csv`` comparing the means.
    """
    params = params or PlannerParams()
    groups = {}
    for value in spec.values:
        groups[value] = run_suite(problems, trials, params.updated(**{spec.axis: value}))
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for value, recs in groups.items():
            write_records_csv(out / f"{spec.axis}_{value_label(value)}.csv", recs)
        write_ablation_summary(out / f"{spec.axis}_summary.csv", spec.axis, groups)
    return groups


ABLATION_SUMMARY_HEADER = ["axis", "value", "runs", "success_rate", "mean_time_ms", "mean_cost", "mean_iterations", "mean_sphere_tests"]


def ablation_summary(axis: str, groups: dict) -> list[list]:
    rows = []
    for value, recs in groups.items():
        ok = [r for r in recs if r.solved]
        rows.append(
            [
                axis,
                value_label(value),
                len(recs),
                len(ok) / len(recs) if recs else 0.0,
                float(np.mean([r.time_ms for r in ok])) if ok else float("nan"),
                float(np.mean([r.cost for r in ok])) if ok else float("nan"),
                float(np.mean([r.iterations for r in recs])) if recs else float("nan"),
                float(np.mean([r.sphere_tests for r in recs])) if recs else float("nan"),
            ]
        )
    return rows


def write_ablation_summary(path, axis: str, groups: dict) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(ABLATION_SUMMARY_HEADER)
        w.writerows(ablation_summary(axis, groups))
