"""Parallel bidirectional RRT-Connect over two shared append-only trees."""

from __future__ import annotations

import enum
import itertools
import math
import os
import threading
import time
from dataclasses import dataclass, field, fields, replace
from typing import Callable, NamedTuple

import numpy as np

from .collision import CheckStats, CollisionChecker, Scene
from .kinematics import RobotModel
from .nn import NnResult, distance, nearest_serial
from .sampling import (
    DynamicDomain,
    HaltonSampler,
    UniformSampler,
    dynamic_domain_accept,
    dynamic_domain_record_failure,
)

ROOT = -1


def available_workers() -> int:
    """CPUs this process may run on (the default worker count)."""
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:  # not available on macOS / Windows
        return os.cpu_count() or 1


class Status(str, enum.Enum):
    SOLVED = "solved"
    FAILED = "failed"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class PlannerParams:
    delta: float = 0.5
    n_cc: int = 32
    workers: int = field(default_factory=available_workers)
    max_iters: int = 2000
    tree_capacity: int = 200_000
    dd_radius: float | None = None  # None -> 4 * delta
    dynamic_domain: bool = True
    balance: bool = True
    early_exit: bool = True
    two_stage: bool = True
    batched_cc: bool = True
    batch_width: int = 8
    sampler: str = "halton"
    seed: int | None = None

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be > 0")
        if self.n_cc < 1:
            raise ValueError("n_cc must be >= 1")
        if self.workers < 1 or self.max_iters < 1 or self.tree_capacity < 2:
            raise ValueError("workers, max_iters and tree_capacity must be positive")
        if self.sampler not in ("halton", "uniform"):
            raise ValueError(f"unknown sampler {self.sampler!r}")

    @property
    def domain_radius(self) -> float:
        return 4.0 * self.delta if self.dd_radius is None else self.dd_radius

    def updated(self, **overrides) -> "PlannerParams":
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise ValueError(f"unknown planner parameter(s): {', '.join(sorted(unknown))}")
        return replace(self, **overrides)


class Tree:
    """Append-only node store with two-phase publish.

    ``append`` reserves a slot from an atomic counter, writes the node, marks
    the slot ready, then advances ``published_len`` over every contiguous
    ready slot. Readers only look at indices below ``published_len``; those
    nodes never change.
    """

    def __init__(self, dof: int, capacity: int, dd_radius: float):
        self.capacity = capacity
        self.configs = np.empty((capacity, dof))
        self.parents = np.full(capacity, ROOT, dtype=np.int64)
        self.domain = DynamicDomain(capacity, dd_radius)
        self.published_len = 0
        self._reserve = itertools.count()
        self._ready = np.zeros(capacity, dtype=bool)
        self._publish = threading.Lock()

    def append(self, config, parent: int) -> int | None:
        """Index of the new node, or None when the tree is full."""
        slot = next(self._reserve)  # atomic under the interpreter lock
        if slot >= self.capacity:
            return None
        self.configs[slot] = config
        self.parents[slot] = parent
        self._ready[slot] = True
        with self._publish:
            n = self.published_len
            while n < self.capacity and self._ready[n]:
                n += 1
            self.published_len = n
        return slot

    def snapshot(self) -> np.ndarray:
        return self.configs[: self.published_len]

    def nearest(self, q) -> NnResult:
        return nearest_serial(self.snapshot(), q)

    def branch(self, node: int) -> list[np.ndarray]:
        """Configs from ``node`` back to the root."""
        out = []
        while node != ROOT:
            out.append(self.configs[node].copy())
            node = int(self.parents[node])
        return out

    def __len__(self) -> int:
        return self.published_len


@dataclass
class PlanResult:
    status: Status
    path: list[np.ndarray] = field(default_factory=list)
    cost: float | None = None
    wall_time: float = 0.0
    iterations_total: int = 0
    check_stats: CheckStats = field(default_factory=CheckStats)
    solving_worker: int | None = None
    start_tree: Tree | None = field(default=None, repr=False)
    goal_tree: Tree | None = field(default=None, repr=False)

    @property
    def solved(self) -> bool:
        return self.status is Status.SOLVED


def path_cost(path) -> float:
    return float(sum(distance(a, b) for a, b in zip(path[:-1], path[1:])))


class ExtendResult(NamedTuple):
    config: np.ndarray
    valid: bool


class ConnectResult(NamedTuple):
    reached: bool
    last_added: int
    target: int


def steer(c_from, c_to, delta: float) -> np.ndarray:
    """``c_from`` moved toward ``c_to`` by min(delta, distance)."""
    c_from = np.asarray(c_from, dtype=float)
    c_to = np.asarray(c_to, dtype=float)
    d = distance(c_from, c_to)
    if d <= delta:
        return c_to.copy()
    return c_from + (c_to - c_from) * (delta / d)


def extend_step(
    tree: Tree,
    c_rand,
    nn: NnResult,
    params: PlannerParams,
    checker: CollisionChecker,
    stats: CheckStats | None = None,
) -> ExtendResult:
    c_nn = tree.configs[nn.index]
    c_new = steer(c_nn, c_rand, params.delta)
    valid = _validate_chain(checker, np.stack([c_nn, c_new]), params, stats) == 1
    if not valid:
        dynamic_domain_record_failure(nn.index, tree.domain)
    return ExtendResult(c_new, valid)


def _validate_chain(checker: CollisionChecker, points, params: PlannerParams, stats) -> int:
    if params.batched_cc:
        return checker.validate_chain(points, params.n_cc, stats)
    # one configuration at a time, edge after edge
    for k in range(len(points) - 1):
        a, b = points[k], points[k + 1]
        for i in range(params.n_cc, 0, -1):
            q = b if i == params.n_cc else a + (i / params.n_cc) * (b - a)
            if checker.colliding(q[None, :], stats)[0]:
                return k
    return len(points) - 1


def greedy_connect(
    ts: Tree,
    node: int,
    to: Tree,
    params: PlannerParams,
    checker: CollisionChecker,
    stats: CheckStats | None = None,
) -> ConnectResult:
    """Step from ``ts[node]`` toward its nearest node in ``to``, appending valid steps to ``ts``.

    The segment is split into ceil(distance / delta) equal steps, the last
    landing exactly on the target, so a successful connect ends on a node
    bitwise equal to the target.
    """
    c_new = ts.configs[node].copy()
    target = to.nearest(c_new)
    c_nno = to.configs[target.index]
    n_ext = math.ceil(target.distance / params.delta)
    if n_ext == 0:
        return ConnectResult(True, node, target.index)
    points = np.empty((n_ext + 1, len(c_new)))
    points[0] = c_new
    for k in range(1, n_ext):
        points[k] = c_new + (k / n_ext) * (c_nno - c_new)
    points[n_ext] = c_nno
    n_ok = _validate_chain(checker, points, params, stats)
    last = node
    for k in range(1, n_ok + 1):
        idx = ts.append(points[k], last)
        if idx is None:
            return ConnectResult(False, last, target.index)
        last = idx
    return ConnectResult(n_ok == n_ext, last, target.index)


def assemble_path(ta: Tree, tb: Tree, meet_a: int, meet_b: int) -> list[np.ndarray]:
    """Start-to-goal path through the meeting nodes of the start tree ``ta`` and goal tree ``tb``."""
    ca, cb = ta.configs[meet_a], tb.configs[meet_b]
    if not np.allclose(ca, cb, rtol=0.0, atol=1e-12):
        raise RuntimeError(f"meeting configs differ: start-tree node {meet_a} {ca} vs goal-tree node {meet_b} {cb}")
    first = ta.branch(meet_a)[::-1]
    second = tb.branch(meet_b)[1:]
    path = []
    for c in first + second:
        if not path or not np.array_equal(path[-1], c):
            path.append(c)
    return path


def _make_sampler(model: RobotModel, params: PlannerParams, worker: int):
    if params.sampler == "uniform":
        return UniformSampler(model.dof, seed=(params.seed or 0, worker))
    return HaltonSampler(model.dof, offset=worker + 1, stride=params.workers)


Observer = Callable[[int, bool, int, int], None]


class _Shared:
    def __init__(self, ta: Tree, tb: Tree):
        self.ta = ta
        self.tb = tb
        self.stop = threading.Event()
        self.lock = threading.Lock()
        self.result: tuple[int, list[np.ndarray]] | None = None

    def claim(self, worker: int, path) -> bool:
        with self.lock:
            if self.result is not None:
                return False
            self.result = (worker, path)
        self.stop.set()
        return True


def _worker(
    wid: int,
    model: RobotModel,
    checker: CollisionChecker,
    params: PlannerParams,
    shared: _Shared,
    stats: CheckStats,
    observer: Observer | None,
) -> int:
    sampler = _make_sampler(model, params, wid)
    limits = model.limits
    ta, tb = shared.ta, shared.tb
    iters = 0
    while iters < params.max_iters and not shared.stop.is_set():
        iters += 1
        la, lb = ta.published_len, tb.published_len
        use_a = la <= lb if params.balance else iters % 2 == 1
        ts, to = (ta, tb) if use_a else (tb, ta)
        if observer is not None:
            observer(wid, use_a, la if use_a else lb, lb if use_a else la)

        c_rand = sampler.sample(limits)
        nn = ts.nearest(c_rand)
        if params.dynamic_domain and not dynamic_domain_accept(c_rand, nn.index, nn.distance, ts.domain):
            continue
        if nn.distance == 0.0:
            continue
        c_new, valid = extend_step(ts, c_rand, nn, params, checker, stats)
        if not valid:
            continue
        node = ts.append(c_new, nn.index)
        if node is None:
            break
        reached, last, target = greedy_connect(ts, node, to, params, checker, stats)
        if reached:
            path = assemble_path(ta, tb, last, target) if use_a else assemble_path(ta, tb, target, last)
            shared.claim(wid, path)
            break
        if len(ts) >= ts.capacity:
            break
    return iters


def plan(
    model: RobotModel,
    scene: Scene,
    start,
    goal,
    params: PlannerParams | None = None,
    *,
    observer: Observer | None = None,
) -> PlanResult:
    """Plan from ``start`` to ``goal``.

    With ``params.workers == 1`` everything runs on the calling thread and
    the result is deterministic. ``observer(worker, extends_start_tree,
    len_extended, len_other)`` is called at every iteration when given.
    """
    params = params or PlannerParams()
    t0 = time.perf_counter()
    start = np.asarray(start, dtype=float)
    goal = np.asarray(goal, dtype=float)
    if start.shape != (model.dof,) or goal.shape != (model.dof,):
        raise ValueError(f"start/goal must have {model.dof} values")

    checker = CollisionChecker(
        model,
        scene,
        two_stage=params.two_stage,
        early_exit=params.early_exit,
        batch_width=params.batch_width,
    )
    stats = CheckStats()
    for q in (start, goal):
        if not model.within_limits(q) or not checker.check_config(q, stats):
            return PlanResult(Status.INFEASIBLE, wall_time=time.perf_counter() - t0, check_stats=stats)
    if np.array_equal(start, goal):
        return PlanResult(Status.SOLVED, [start.copy()], 0.0, time.perf_counter() - t0, 0, stats, 0)

    per_tree = params.tree_capacity // 2
    ta = Tree(model.dof, per_tree, params.domain_radius)
    tb = Tree(model.dof, per_tree, params.domain_radius)
    ta.append(start, ROOT)
    tb.append(goal, ROOT)
    shared = _Shared(ta, tb)

    worker_stats = [CheckStats() for _ in range(params.workers)]
    iters = [0] * params.workers

    def run(w: int) -> None:
        iters[w] = _worker(w, model, checker, params, shared, worker_stats[w], observer)

    if params.workers == 1:
        run(0)
    else:
        threads = [threading.Thread(target=run, args=(w,), daemon=True) for w in range(params.workers)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()

    for ws in worker_stats:
        stats.merge(ws)
    elapsed = time.perf_counter() - t0
    if shared.result is None:
        return PlanResult(Status.FAILED, wall_time=elapsed, iterations_total=sum(iters), check_stats=stats, start_tree=ta, goal_tree=tb)
    wid, path = shared.result
    return PlanResult(Status.SOLVED, path, path_cost(path), elapsed, sum(iters), stats, wid, ta, tb)


def revalidate_path(
    model: RobotModel,
    scene: Scene,
    path,
    n_cc: int = 32,
    multiplier: int = 4,
) -> bool:
    """Re-check a path with the fine-only checker, no early exit, at ``multiplier * n_cc`` samples per edge.

    Every waypoint is checked too, so the first config does not get a pass.
    """
    checker = CollisionChecker(model, scene, two_stage=False, early_exit=False, batch_width=max(1, n_cc * multiplier))
    path = np.asarray(path, dtype=float).reshape(-1, model.dof)
    if not checker.free(path[:1])[0]:
        return False
    return checker.validate_chain(path, n_cc * multiplier) == len(path) - 1
