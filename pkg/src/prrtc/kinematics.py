"""Forward kinematics for serial chains (and forests of chains) with sphere link models."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

REVOLUTE = "revolute"
PRISMATIC = "prismatic"
FIXED = "fixed"
JOINT_KINDS = (REVOLUTE, PRISMATIC, FIXED)

WORLD = -1


class ModelError(ValueError):
    """Invalid robot model, scene or problem; the message names the offending field."""


class Transform:
    """Rigid transform stored as a 3x3 rotation and a translation."""

    __slots__ = ("rotation", "translation")

    def __init__(self, rotation=None, translation=None):
        self.rotation = np.eye(3) if rotation is None else np.asarray(rotation, dtype=float)
        self.translation = np.zeros(3) if translation is None else np.asarray(translation, dtype=float)

    @classmethod
    def identity(cls) -> "Transform":
        return cls()

    @classmethod
    def from_quat(cls, xyz, quat) -> "Transform":
        """Build from a translation and a (w, x, y, z) quaternion; the quaternion is normalized."""
        return cls(quat_to_matrix(quat), xyz)

    def __matmul__(self, other: "Transform") -> "Transform":
        return Transform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def apply(self, points) -> np.ndarray:
        return np.asarray(points, dtype=float) @ self.rotation.T + self.translation

    def as_matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def __repr__(self) -> str:
        return f"Transform(rotation={self.rotation.tolist()}, translation={self.translation.tolist()})"


def quat_to_matrix(quat) -> np.ndarray:
    w, x, y, z = np.asarray(quat, dtype=float) / np.linalg.norm(quat)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def _skew(v) -> np.ndarray:
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


@dataclass(frozen=True)
class Sphere:
    center: tuple[float, float, float]
    radius: float


@dataclass(frozen=True)
class LinkSpheres:
    coarse: Sphere
    fine: tuple[Sphere, ...]


@dataclass(frozen=True)
class Joint:
    """Joint attaching a link to its parent link (or to the world when ``parent == -1``).

    The fixed offset from the parent frame is kept as given in the file
    (``xyz`` plus a (w, x, y, z) quaternion); ``origin`` is the derived transform.
    """

    kind: str
    parent: int
    xyz: tuple[float, float, float] = (0.0, 0.0, 0.0)
    quat: tuple[float, float, float, float] = (1.0, 0.0, 0.0, 0.0)
    axis: tuple[float, float, float] = (0.0, 0.0, 1.0)
    limits: tuple[float, float] | None = None
    name: str = ""

    @property
    def origin(self) -> Transform:
        return Transform.from_quat(self.xyz, self.quat)

    @property
    def actuated(self) -> bool:
        return self.kind != FIXED


class _Compiled:
    """Array form of a RobotModel used by the batched kernels."""

    def __init__(self, model: "RobotModel"):
        joints = model.joints
        n = len(joints)
        self.n_links = n
        self.parent = np.array([j.parent for j in joints], dtype=np.int64)
        self.qidx = np.full(n, -1, dtype=np.int64)
        k = 0
        for i, j in enumerate(joints):
            if j.actuated:
                self.qidx[i] = k
                k += 1
        self.kind = [j.kind for j in joints]
        self.jkind = np.array([JOINT_KINDS.index(j.kind) for j in joints], dtype=np.int64)
        self.origin_t = np.array([j.xyz for j in joints], dtype=float).reshape(n, 3)
        origin_r = np.array([quat_to_matrix(j.quat) for j in joints]).reshape(n, 3, 3)
        axes = np.array([j.axis for j in joints], dtype=float).reshape(n, 3)
        # revolute: R_local = O + sin(q) O K + (1 - cos(q)) O K^2  (Rodrigues, pre-multiplied by origin)
        self.a0 = origin_r
        self.a1 = np.array([origin_r[i] @ _skew(axes[i]) for i in range(n)]).reshape(n, 3, 3)
        self.a2 = np.array([origin_r[i] @ _skew(axes[i]) @ _skew(axes[i]) for i in range(n)]).reshape(n, 3, 3)
        self.slide = np.einsum("nij,nj->ni", origin_r, axes) if n else np.zeros((0, 3))

        self.coarse_c = np.array([s.coarse.center for s in model.spheres], dtype=float).reshape(n, 3)
        self.coarse_r = np.array([s.coarse.radius for s in model.spheres], dtype=float)
        fine_c, fine_r, fine_link, start = [], [], [], [0]
        for i, s in enumerate(model.spheres):
            for f in s.fine:
                fine_c.append(f.center)
                fine_r.append(f.radius)
                fine_link.append(i)
            start.append(len(fine_r))
        self.fine_c = np.array(fine_c, dtype=float).reshape(-1, 3)
        self.fine_r = np.array(fine_r, dtype=float)
        self.fine_link = np.array(fine_link, dtype=np.int64)
        self.fine_start = np.array(start, dtype=np.int64)

        pairs = np.array(model.self_pairs, dtype=np.int64).reshape(-1, 2)
        self.pairs = pairs
        pi, pj, pstart = [], [], [0]
        for a, b in pairs:
            ia = np.arange(self.fine_start[a], self.fine_start[a + 1])
            ib = np.arange(self.fine_start[b], self.fine_start[b + 1])
            ga, gb = np.meshgrid(ia, ib, indexing="ij")
            pi.append(ga.ravel())
            pj.append(gb.ravel())
            pstart.append(pstart[-1] + ga.size)
        self.pair_fi = np.concatenate(pi) if pi else np.zeros(0, dtype=np.int64)
        self.pair_fj = np.concatenate(pj) if pj else np.zeros(0, dtype=np.int64)
        self.pair_start = np.array(pstart, dtype=np.int64)


@dataclass(frozen=True)
class RobotModel:
    """Links are listed in topological order; link ``i`` is attached by ``joints[i]``.

    Several roots (``parent == -1``) make a forest, e.g. two arms sharing one model.
    Configuration entries map to the actuated joints in link order.
    """

    name: str
    joints: tuple[Joint, ...]
    spheres: tuple[LinkSpheres, ...]
    self_pairs: tuple[tuple[int, int], ...] = ()

    @property
    def n_links(self) -> int:
        return len(self.joints)

    @cached_property
    def dof(self) -> int:
        return sum(1 for j in self.joints if j.actuated)

    @cached_property
    def limits(self) -> np.ndarray:
        """(dof, 2) array of [lo, hi] per actuated joint."""
        return np.array([j.limits for j in self.joints if j.actuated], dtype=float).reshape(-1, 2)

    @cached_property
    def compiled(self) -> _Compiled:
        return _Compiled(self)

    def within_limits(self, q) -> bool:
        q = np.asarray(q, dtype=float)
        return bool(np.all(q >= self.limits[:, 0]) and np.all(q <= self.limits[:, 1]))

    def validate(self) -> None:
        """Raise ModelError on the first violated model invariant."""
        if len(self.spheres) != len(self.joints):
            raise ModelError(f"links: {len(self.joints)} joints but {len(self.spheres)} sphere sets")
        for i, j in enumerate(self.joints):
            where = f"links[{i}].joint"
            if j.kind not in JOINT_KINDS:
                raise ModelError(f"{where}.type: unknown joint type {j.kind!r}")
            if not (j.parent == WORLD or 0 <= j.parent < i):
                raise ModelError(f"{where}.parent: parent {j.parent} must be -1 or an earlier link index (< {i})")
            if abs(np.linalg.norm(j.quat) - 1.0) > 1e-6:
                raise ModelError(f"{where}.quat: quaternion norm {np.linalg.norm(j.quat):.9g} deviates from 1")
            if j.actuated:
                if abs(np.linalg.norm(j.axis) - 1.0) > 1e-9:
                    raise ModelError(f"{where}.axis: axis {list(j.axis)} must have unit norm")
                if j.limits is None:
                    raise ModelError(f"{where}.limits: actuated joint needs limits")
                lo, hi = j.limits
                if not lo <= hi:
                    raise ModelError(f"{where}.limits: lo {lo} > hi {hi}")
        for i, ls in enumerate(self.spheres):
            where = f"links[{i}].spheres"
            c = ls.coarse
            if not c.radius > 0:
                raise ModelError(f"{where}.coarse.radius: radius must be > 0")
            for k, f in enumerate(ls.fine):
                if not f.radius > 0:
                    raise ModelError(f"{where}.fine[{k}].radius: radius must be > 0")
                gap = np.linalg.norm(np.subtract(f.center, c.center)) + f.radius
                if gap > c.radius + 1e-9:
                    raise ModelError(f"{where}.fine[{k}]: fine sphere escapes the coarse sphere by {gap - c.radius:.3g} m")
        for k, (a, b) in enumerate(self.self_pairs):
            where = f"self_pairs[{k}]"
            if not (0 <= a < self.n_links and 0 <= b < self.n_links):
                raise ModelError(f"{where}: link index out of range")
            if a == b:
                raise ModelError(f"{where}: pair ({a}, {b}) tests a link against itself")
            if self.joints[a].parent == b or self.joints[b].parent == a:
                raise ModelError(f"{where}: pair ({a}, {b}) is an adjacent parent-child pair")


def _as_batch(model: RobotModel, qs) -> np.ndarray:
    qs = np.asarray(qs, dtype=float)
    if qs.ndim == 1:
        qs = qs[None, :]
    if qs.ndim != 2 or qs.shape[1] != model.dof:
        raise ValueError(f"configuration has {qs.shape[-1]} values, robot {model.name!r} has {model.dof} dof")
    return qs


def fk_batch(model: RobotModel, qs) -> tuple[np.ndarray, np.ndarray]:
    """World poses of every link for a batch of configurations.

    Returns rotations ``(B, L, 3, 3)`` and translations ``(B, L, 3)``.
    """
    qs = _as_batch(model, qs)
    m = model.compiled
    b = qs.shape[0]
    rot = np.empty((b, m.n_links, 3, 3))
    trans = np.empty((b, m.n_links, 3))
    for i in range(m.n_links):
        kind = m.kind[i]
        if kind == REVOLUTE:
            theta = qs[:, m.qidx[i]]
            s = np.sin(theta)[:, None, None]
            c = (1.0 - np.cos(theta))[:, None, None]
            local_r = m.a0[i] + s * m.a1[i] + c * m.a2[i]
            local_t = np.broadcast_to(m.origin_t[i], (b, 3))
        elif kind == PRISMATIC:
            local_r = np.broadcast_to(m.a0[i], (b, 3, 3))
            local_t = m.origin_t[i] + qs[:, m.qidx[i], None] * m.slide[i]
        else:
            local_r = np.broadcast_to(m.a0[i], (b, 3, 3))
            local_t = np.broadcast_to(m.origin_t[i], (b, 3))
        p = m.parent[i]
        if p == WORLD:
            rot[:, i] = local_r
            trans[:, i] = local_t
        else:
            rot[:, i] = rot[:, p] @ local_r
            trans[:, i] = np.einsum("bij,bj->bi", rot[:, p], local_t) + trans[:, p]
    return rot, trans


def forward_kinematics(model: RobotModel, q) -> list[Transform]:
    """World pose of each link frame for a single configuration."""
    q = np.asarray(q, dtype=float)
    if q.ndim != 1:
        raise ValueError("forward_kinematics takes a single configuration")
    rot, trans = fk_batch(model, q)
    return [Transform(rot[0, i], trans[0, i]) for i in range(model.n_links)]


class PosedSpheres(NamedTuple):
    centers: np.ndarray
    radii: np.ndarray
    links: np.ndarray


def sphere_positions(model: RobotModel, q, level: str = "fine") -> PosedSpheres:
    """World-frame spheres ordered by link, then by sphere index within the link."""
    rot, trans = fk_batch(model, np.asarray(q, dtype=float))
    m = model.compiled
    if level == "coarse":
        centers = np.einsum("lij,lj->li", rot[0], m.coarse_c) + trans[0]
        return PosedSpheres(centers, m.coarse_r.copy(), np.arange(m.n_links))
    if level == "fine":
        links = m.fine_link
        centers = np.einsum("fij,fj->fi", rot[0, links], m.fine_c) + trans[0, links]
        return PosedSpheres(centers, m.fine_r.copy(), links.copy())
    raise ValueError(f"level must be 'coarse' or 'fine', got {level!r}")


def bounding_sphere(spheres: Sequence[Sphere], pad: float = 0.0) -> Sphere:
    """A sphere (not necessarily minimal) enclosing all given spheres."""
    centers = np.array([s.center for s in spheres], dtype=float)
    radii = np.array([s.radius for s in spheres], dtype=float)
    lo = (centers - radii[:, None]).min(axis=0)
    hi = (centers + radii[:, None]).max(axis=0)
    c = (lo + hi) / 2
    r = float(np.max(np.linalg.norm(centers - c, axis=1) + radii)) + pad
    return Sphere(tuple(float(x) for x in c), r)
