"""Sphere-based collision checking: primitives, two-stage configuration checks, edge validation.

Collision semantics are strict: a sphere collides with a primitive when the
distance from its center to the primitive is strictly less than its radius.
Touching is free.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Sequence, Union

import numpy as np

from . import _kernels
from .kinematics import RobotModel, Sphere, quat_to_matrix


@dataclass(frozen=True)
class SpherePrimitive:
    center: tuple[float, float, float]
    radius: float


@dataclass(frozen=True)
class BoxPrimitive:
    """Oriented box; the pose is stored as in the file (center + (w, x, y, z) quaternion)."""

    center: tuple[float, float, float]
    quat: tuple[float, float, float, float]
    half_extents: tuple[float, float, float]

    @property
    def rotation(self) -> np.ndarray:
        return quat_to_matrix(self.quat)


@dataclass(frozen=True)
class CapsulePrimitive:
    a: tuple[float, float, float]
    b: tuple[float, float, float]
    radius: float


Primitive = Union[SpherePrimitive, BoxPrimitive, CapsulePrimitive]


_KIND = {SpherePrimitive: 0, BoxPrimitive: 1, CapsulePrimitive: 2}


def _primitive_arrays(obstacles: Sequence[Primitive]) -> tuple:
    """Flat arrays for the kernels: (pc, prot, ph, pab, plen2, pr).

    ``pc[k]`` holds the reference point (sphere/box center, capsule end a)
    and the kind code in column 3.
    """
    n = len(obstacles)
    pc = np.zeros((n, 4))
    prot = np.tile(np.eye(3), (n, 1, 1))
    ph = np.zeros((n, 3))
    pab = np.zeros((n, 3))
    plen2 = np.zeros(n)
    pr = np.zeros(n)
    for k, o in enumerate(obstacles):
        pc[k, 3] = _KIND[type(o)]
        if isinstance(o, SpherePrimitive):
            pc[k, :3] = o.center
            pr[k] = o.radius
        elif isinstance(o, BoxPrimitive):
            pc[k, :3] = o.center
            prot[k] = o.rotation
            ph[k] = o.half_extents
        else:
            pc[k, :3] = o.a
            pab[k] = np.subtract(o.b, o.a)
            plen2[k] = pab[k] @ pab[k]
            pr[k] = o.radius
    return pc, prot, ph, pab, plen2, pr


@dataclass(frozen=True)
class Scene:
    obstacles: tuple[Primitive, ...] = ()

    @cached_property
    def arrays(self) -> tuple:
        return _primitive_arrays(self.obstacles)


class CheckStats:
    """Diagnostic counters. Not locked: the planner gives each worker its own instance and merges them."""

    __slots__ = ("sphere_tests", "fk_calls", "fine_stage_entries")

    def __init__(self, sphere_tests: int = 0, fk_calls: int = 0, fine_stage_entries: int = 0):
        self.sphere_tests = sphere_tests
        self.fk_calls = fk_calls
        self.fine_stage_entries = fine_stage_entries

    def merge(self, other: "CheckStats") -> None:
        self.sphere_tests += other.sphere_tests
        self.fk_calls += other.fk_calls
        self.fine_stage_entries += other.fine_stage_entries

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__slots__}

    def __repr__(self) -> str:
        return f"CheckStats({self.as_dict()})"


class EdgeCheckRequest(NamedTuple):
    start: np.ndarray
    end: np.ndarray
    resolution_count: int = 32


def sphere_vs_primitive(sphere: Sphere, prim: Primitive) -> bool:
    """True when the sphere penetrates the primitive (touching is free)."""
    if type(prim) not in _KIND:
        raise TypeError(f"unknown primitive {type(prim).__name__}")
    cx, cy, cz = (float(v) for v in sphere.center)
    return bool(_kernels.sphere_hits_primitive(cx, cy, cz, float(sphere.radius), 0, *_primitive_arrays([prim])))


class CollisionChecker:
    """Configuration and edge checks for one (model, scene) pair.

    ``two_stage`` tests coarse link spheres first and re-tests only flagged
    links with their fine spheres; with it off every fine sphere is tested.
    ``batch_width`` is how many configurations along an edge are checked
    together; ``early_exit`` stops an edge after the first batch holding a
    collision. None of these knobs changes a boolean outcome.
    """

    def __init__(
        self,
        model: RobotModel,
        scene: Scene,
        *,
        two_stage: bool = True,
        early_exit: bool = True,
        batch_width: int = 8,
    ):
        if batch_width < 1:
            raise ValueError("batch_width must be >= 1")
        self.model = model
        self.scene = scene
        self.two_stage = two_stage
        self.early_exit = early_exit
        self.batch_width = batch_width
        m = model.compiled
        self._args = (
            m.parent, m.jkind, m.qidx, m.a0, m.a1, m.a2, m.origin_t, m.slide,
            m.coarse_c, m.coarse_r, m.fine_c, m.fine_r, m.fine_link, m.fine_start,
            m.pairs, m.pair_fi, m.pair_fj, m.pair_start,
            *scene.arrays,
        )  # fmt: skip
        self._orders: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def _as_batch(self, qs) -> np.ndarray:
        qs = np.ascontiguousarray(qs, dtype=float)
        if qs.ndim == 1:
            qs = qs[None, :]
        if qs.ndim != 2 or qs.shape[1] != self.model.dof:
            raise ValueError(f"configurations must have {self.model.dof} values")
        return qs

    def colliding(self, qs, stats: CheckStats | None = None) -> np.ndarray:
        """Collision flag for each configuration in ``qs`` (B, dof)."""
        qs = self._as_batch(qs)
        out = np.zeros(len(qs), dtype=bool)
        tests, entries = _kernels.collide_batch(qs, self.two_stage, out, *self._args)
        if stats is not None:
            stats.sphere_tests += tests
            stats.fine_stage_entries += entries
            stats.fk_calls += len(qs)
        return out

    def free(self, qs, stats: CheckStats | None = None) -> np.ndarray:
        return ~self.colliding(qs, stats)

    def check_config(self, q, stats: CheckStats | None = None) -> bool:
        """True when ``q`` is collision-free."""
        q = np.asarray(q, dtype=float)
        if q.shape != (self.model.dof,):
            raise ValueError(f"configuration has {q.size} values, robot has {self.model.dof} dof")
        return not bool(self.colliding(q, stats)[0])

    def batch_order(self, n_cc: int) -> list[np.ndarray]:
        """Sample indices 1..n_cc grouped into batches of at most ``batch_width``.

        Batch 0 holds the far endpoint; batches interleave so that each one
        spans the whole edge.
        """
        n_batches = -(-n_cc // self.batch_width)
        idx = np.arange(n_cc, 0, -1)
        return [idx[k::n_batches] for k in range(n_batches)]

    def _order(self, n_cc: int):
        if n_cc not in self._orders:
            batches = self.batch_order(n_cc)
            flat = np.concatenate(batches).astype(np.int64)
            starts = np.cumsum([0] + [len(b) for b in batches]).astype(np.int64)
            self._orders[n_cc] = (flat, starts)
        return self._orders[n_cc]

    def validate_chain(self, points, n_cc: int, stats: CheckStats | None = None) -> int:
        """Number of leading valid edges along the polyline ``points`` (K+1, dof).

        Edge k runs points[k] -> points[k+1], sampled at i/n_cc for
        i = 1..n_cc; points[0] is assumed valid. With early exit, edges past
        the first invalid one stop being checked.
        """
        points = np.ascontiguousarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != self.model.dof:
            raise ValueError(f"edge endpoints must have {self.model.dof} values")
        if n_cc < 1:
            raise ValueError("resolution_count must be >= 1")
        if len(points) < 2:
            return 0
        order, starts = self._order(int(n_cc))
        first_bad, tests, entries, checked = _kernels.chain_first_bad(
            points, int(n_cc), order, starts, self.early_exit, self.two_stage, *self._args
        )
        if stats is not None:
            stats.sphere_tests += tests
            stats.fine_stage_entries += entries
            stats.fk_calls += checked
        return int(first_bad)

    def validate_edge(self, start, end, n_cc: int = 32, stats: CheckStats | None = None) -> bool:
        """True when every sample i/n_cc, i = 1..n_cc, of start -> end is free.

        A degenerate edge (start == end) is a single check of that configuration.
        """
        start = np.asarray(start, dtype=float)
        end = np.asarray(end, dtype=float)
        if start.shape != end.shape:
            raise ValueError("edge endpoints differ in dimension")
        if n_cc < 1:
            raise ValueError("resolution_count must be >= 1")
        if np.array_equal(start, end):
            return self.check_config(end, stats)
        return self.validate_chain(np.stack([start, end]), n_cc, stats) == 1

    def validate_edges(self, requests: Sequence[EdgeCheckRequest], stats: CheckStats | None = None) -> list[bool]:
        """Validate independent edges together.

        Edges sharing a resolution are checked in rounds: each round tests one
        batch of samples of every edge still live. Results equal per-edge
        ``validate_edge`` whatever the order.
        """
        out = [True] * len(requests)
        groups: dict[int, list[int]] = {}
        for k, req in enumerate(requests):
            a = np.asarray(req.start, dtype=float)
            b = np.asarray(req.end, dtype=float)
            if a.shape != (self.model.dof,) or b.shape != (self.model.dof,):
                raise ValueError(f"request {k}: endpoints must both have {self.model.dof} values")
            if req.resolution_count < 1:
                raise ValueError(f"request {k}: resolution_count must be >= 1")
            if np.array_equal(a, b):
                out[k] = self.check_config(b, stats)
            else:
                groups.setdefault(int(req.resolution_count), []).append(k)
        for n_cc, members in groups.items():
            starts = np.array([requests[k].start for k in members], dtype=float)
            ends = np.array([requests[k].end for k in members], dtype=float)
            valid = np.ones(len(members), dtype=np.bool_)
            order, order_start = self._order(n_cc)
            tests, entries, checked = _kernels.edges_valid(
                starts, ends, n_cc, order, order_start, self.early_exit, self.two_stage, valid, *self._args
            )
            if stats is not None:
                stats.sphere_tests += tests
                stats.fine_stage_entries += entries
                stats.fk_calls += checked
            for k, v in zip(members, valid):
                out[k] = bool(v)
        return out


def _checker(model, scene, *, early_exit=True, two_stage=True) -> CollisionChecker:
    return CollisionChecker(model, scene, early_exit=early_exit, two_stage=two_stage)


def check_config(model: RobotModel, scene: Scene, q, stats: CheckStats | None = None) -> bool:
    """Two-stage check of one configuration; True when collision-free."""
    q = np.asarray(q, dtype=float)
    if q.shape != (model.dof,):
        raise ValueError(f"configuration has {q.size} values, robot has {model.dof} dof")
    return _checker(model, scene).check_config(q, stats)


def validate_edge(
    model: RobotModel,
    scene: Scene,
    req: EdgeCheckRequest,
    early_exit: bool = True,
    stats: CheckStats | None = None,
) -> bool:
    """True when every sample ``start + i/N (end - start)``, i = 1..N, is collision-free."""
    return _checker(model, scene, early_exit=early_exit).validate_edge(req.start, req.end, req.resolution_count, stats)


def validate_edge_batched(
    model: RobotModel,
    scene: Scene,
    requests: Sequence[EdgeCheckRequest],
    stats: CheckStats | None = None,
) -> list[bool]:
    return _checker(model, scene).validate_edges(requests, stats)
