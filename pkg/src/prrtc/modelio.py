"""JSON robot / scene / problem / path files and the benchmark CSV.

All angles are radians and all lengths meters. Orientations are (w, x, y, z)
quaternions; they are stored exactly as read (after checking the norm is
within 1e-6 of one) and normalized when converted to rotation matrices.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from .collision import BoxPrimitive, CapsulePrimitive, Primitive, Scene, SpherePrimitive
from .kinematics import JOINT_KINDS, Joint, LinkSpheres, ModelError, RobotModel, Sphere
from .planner import PlannerParams

CSV_HEADER = ["problem", "status", "time_ms", "cost", "iterations", "sphere_tests", "workers", "seed"]
QUAT_TOL = 1e-6


# --- field readers -----------------------------------------------------------------


def _get(obj: dict, key: str, where: str, default: Any = ...):
    if not isinstance(obj, dict):
        raise ModelError(f"{where}: expected an object")
    if key not in obj:
        if default is ...:
            raise ModelError(f"{where}.{key}: missing required field")
        return default
    return obj[key]


def _num(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ModelError(f"{where}: expected a finite number, got {value!r}")
    return float(value)


def _vec(value, n: int, where: str) -> tuple[float, ...]:
    if not isinstance(value, (list, tuple)) or len(value) != n:
        raise ModelError(f"{where}: expected a list of {n} numbers, got {value!r}")
    return tuple(_num(v, f"{where}[{i}]") for i, v in enumerate(value))


def _positive(value, where: str) -> float:
    v = _num(value, where)
    if not v > 0:
        raise ModelError(f"{where}: must be > 0, got {v}")
    return v


def _quat(value, where: str) -> tuple[float, ...]:
    q = _vec(value, 4, where)
    norm = math.sqrt(sum(x * x for x in q))
    if abs(norm - 1.0) > QUAT_TOL:
        raise ModelError(f"{where}: quaternion norm {norm:.9g} deviates from 1 by more than {QUAT_TOL}")
    return q


def _read_json(path) -> Any:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ModelError(f"{path}: cannot read file ({e.strerror})") from e
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelError(f"{path}: JSON parse error at line {e.lineno} column {e.colno}: {e.msg}") from e


def _write_json(path, data) -> None:
    Path(path).write_text(json.dumps(data, indent=2) + "\n")


def _with_file(path, fn, data):
    try:
        return fn(data)
    except ModelError as e:
        raise ModelError(f"{path}: {e}") from None


# --- robots --------------------------------------------------------------------------


def _sphere_from(d, where) -> Sphere:
    return Sphere(_vec(_get(d, "center", where), 3, f"{where}.center"), _positive(_get(d, "radius", where), f"{where}.radius"))


def robot_from_dict(data: dict) -> RobotModel:
    links = _get(data, "links", "robot")
    if not isinstance(links, list) or not links:
        raise ModelError("links: expected a non-empty list")
    joints, spheres = [], []
    for i, link in enumerate(links):
        w = f"links[{i}]"
        jd = _get(link, "joint", w)
        wj = f"{w}.joint"
        kind = _get(jd, "type", wj)
        if kind not in JOINT_KINDS:
            raise ModelError(f"{wj}.type: unknown joint type {kind!r}")
        parent = _get(jd, "parent", wj)
        if isinstance(parent, bool) or not isinstance(parent, int):
            raise ModelError(f"{wj}.parent: expected an integer link index or -1")
        limits = _get(jd, "limits", wj, None)
        if kind != "fixed" or limits is not None:
            limits = _vec(_get(jd, "limits", wj), 2, f"{wj}.limits")
        joints.append(
            Joint(
                kind=kind,
                parent=parent,
                xyz=_vec(_get(jd, "xyz", wj, [0.0, 0.0, 0.0]), 3, f"{wj}.xyz"),
                quat=_quat(_get(jd, "quat", wj, [1.0, 0.0, 0.0, 0.0]), f"{wj}.quat"),
                axis=_vec(_get(jd, "axis", wj, [0.0, 0.0, 1.0]), 3, f"{wj}.axis"),
                limits=limits,
                name=str(_get(link, "name", w, "")),
            )
        )
        sd = _get(link, "spheres", w)
        ws = f"{w}.spheres"
        fine = _get(sd, "fine", ws)
        if not isinstance(fine, list):
            raise ModelError(f"{ws}.fine: expected a list")
        spheres.append(
            LinkSpheres(
                coarse=_sphere_from(_get(sd, "coarse", ws), f"{ws}.coarse"),
                fine=tuple(_sphere_from(f, f"{ws}.fine[{k}]") for k, f in enumerate(fine)),
            )
        )
    pairs = _get(data, "self_pairs", "robot", [])
    if not isinstance(pairs, list):
        raise ModelError("self_pairs: expected a list")
    self_pairs = []
    for k, p in enumerate(pairs):
        if not isinstance(p, list) or len(p) != 2 or not all(isinstance(x, int) and not isinstance(x, bool) for x in p):
            raise ModelError(f"self_pairs[{k}]: expected a pair of link indices")
        self_pairs.append((p[0], p[1]))
    model = RobotModel(
        name=str(_get(data, "name", "robot", "")),
        joints=tuple(joints),
        spheres=tuple(spheres),
        self_pairs=tuple(self_pairs),
    )
    model.validate()
    return model


def robot_to_dict(model: RobotModel) -> dict:
    links = []
    for j, s in zip(model.joints, model.spheres):
        jd: dict[str, Any] = {"type": j.kind, "parent": j.parent, "xyz": list(j.xyz), "quat": list(j.quat)}
        if j.actuated:
            jd["axis"] = list(j.axis)
        if j.limits is not None:
            jd["limits"] = list(j.limits)
        links.append(
            {
                "name": j.name,
                "joint": jd,
                "spheres": {
                    "coarse": {"center": list(s.coarse.center), "radius": s.coarse.radius},
                    "fine": [{"center": list(f.center), "radius": f.radius} for f in s.fine],
                },
            }
        )
    return {"name": model.name, "links": links, "self_pairs": [list(p) for p in model.self_pairs]}


def load_robot(path) -> RobotModel:
    return _with_file(path, robot_from_dict, _read_json(path))


def write_robot(path, model: RobotModel) -> None:
    _write_json(path, robot_to_dict(model))


# --- scenes --------------------------------------------------------------------------


def primitive_from_dict(d: dict, where: str) -> Primitive:
    kind = _get(d, "type", where)
    if kind == "sphere":
        return SpherePrimitive(_vec(_get(d, "center", where), 3, f"{where}.center"), _positive(_get(d, "radius", where), f"{where}.radius"))
    if kind == "box":
        half = _vec(_get(d, "half_extents", where), 3, f"{where}.half_extents")
        for i, h in enumerate(half):
            _positive(h, f"{where}.half_extents[{i}]")
        return BoxPrimitive(
            _vec(_get(d, "center", where), 3, f"{where}.center"),
            _quat(_get(d, "quat", where, [1.0, 0.0, 0.0, 0.0]), f"{where}.quat"),
            half,
        )
    if kind == "capsule":
        return CapsulePrimitive(
            _vec(_get(d, "a", where), 3, f"{where}.a"),
            _vec(_get(d, "b", where), 3, f"{where}.b"),
            _positive(_get(d, "radius", where), f"{where}.radius"),
        )
    raise ModelError(f"{where}.type: unknown primitive type {kind!r}")


def primitive_to_dict(p: Primitive) -> dict:
    if isinstance(p, SpherePrimitive):
        return {"type": "sphere", "center": list(p.center), "radius": p.radius}
    if isinstance(p, BoxPrimitive):
        return {"type": "box", "center": list(p.center), "quat": list(p.quat), "half_extents": list(p.half_extents)}
    return {"type": "capsule", "a": list(p.a), "b": list(p.b), "radius": p.radius}


def scene_from_dict(data: dict) -> Scene:
    obstacles = _get(data, "obstacles", "scene", [])
    if not isinstance(obstacles, list):
        raise ModelError("obstacles: expected a list")
    return Scene(tuple(primitive_from_dict(o, f"obstacles[{i}]") for i, o in enumerate(obstacles)))


def scene_to_dict(scene: Scene) -> dict:
    return {"obstacles": [primitive_to_dict(p) for p in scene.obstacles]}


def load_scene(path) -> Scene:
    return _with_file(path, scene_from_dict, _read_json(path))


def write_scene(path, scene: Scene) -> None:
    _write_json(path, scene_to_dict(scene))


# --- problems ------------------------------------------------------------------------


@dataclass(frozen=True)
class ProblemSpec:
    """A planning query. ``robot`` and ``scene`` are paths relative to the problem file."""

    name: str
    robot: str
    scene: str
    start: tuple[float, ...]
    goal: tuple[float, ...]
    params: dict = field(default_factory=dict, hash=False)


_PARAM_TYPES = {"n_cc": int, "workers": int, "max_iters": int, "tree_capacity": int, "batch_width": int, "seed": int}
_BOOL_PARAMS = {"dynamic_domain", "balance", "early_exit", "two_stage", "batched_cc"}


def _params_from(d, where) -> dict:
    if not isinstance(d, dict):
        raise ModelError(f"{where}: expected an object")
    known = PlannerParams.__dataclass_fields__
    out = {}
    for k, v in d.items():
        w = f"{where}.{k}"
        if k not in known:
            raise ModelError(f"{w}: unknown planner parameter")
        if v is None and k in ("dd_radius", "seed"):
            pass
        elif k in _BOOL_PARAMS:
            if not isinstance(v, bool):
                raise ModelError(f"{w}: expected true or false")
        elif k == "sampler":
            if v not in ("halton", "uniform"):
                raise ModelError(f"{w}: expected 'halton' or 'uniform'")
        elif k in _PARAM_TYPES:
            if isinstance(v, bool) or not isinstance(v, int):
                raise ModelError(f"{w}: expected an integer")
        else:
            v = _positive(v, w)
        out[k] = v
    return out


def problem_from_dict(data: dict) -> ProblemSpec:
    start = _get(data, "start", "problem")
    goal = _get(data, "goal", "problem")
    for key, q in (("start", start), ("goal", goal)):
        if not isinstance(q, list) or not q:
            raise ModelError(f"{key}: expected a non-empty list of joint values")
    return ProblemSpec(
        name=str(_get(data, "name", "problem", "")),
        robot=str(_get(data, "robot", "problem")),
        scene=str(_get(data, "scene", "problem")),
        start=_vec(start, len(start), "start"),
        goal=_vec(goal, len(goal), "goal"),
        params=_params_from(_get(data, "params", "problem", {}), "params"),
    )


def problem_to_dict(p: ProblemSpec) -> dict:
    return {
        "name": p.name,
        "robot": p.robot,
        "scene": p.scene,
        "start": list(p.start),
        "goal": list(p.goal),
        "params": dict(p.params),
    }


def load_problem(path) -> ProblemSpec:
    return _with_file(path, problem_from_dict, _read_json(path))


def write_problem(path, problem: ProblemSpec) -> None:
    _write_json(path, problem_to_dict(problem))


@dataclass
class Problem:
    """A loaded problem: model and scene resolved, dimensions checked."""

    name: str
    model: RobotModel
    scene: Scene
    start: np.ndarray
    goal: np.ndarray
    params: dict
    spec: ProblemSpec
    path: Path


def resolve_problem(path) -> Problem:
    path = Path(path)
    spec = load_problem(path)
    model = load_robot(path.parent / spec.robot)
    scene = load_scene(path.parent / spec.scene)
    for key, q in (("start", spec.start), ("goal", spec.goal)):
        if len(q) != model.dof:
            raise ModelError(f"{path}: {key}: has {len(q)} values but robot {model.name!r} has {model.dof} dof")
    return Problem(spec.name or path.stem, model, scene, np.array(spec.start), np.array(spec.goal), spec.params, spec, path)


def load_problem_dir(directory) -> list[Problem]:
    files = sorted(Path(directory).glob("*.json"))
    if not files:
        raise ModelError(f"{directory}: no problem files (*.json)")
    return [resolve_problem(f) for f in files]


# --- paths ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PathFile:
    robot: str
    scene: str
    configs: tuple[tuple[float, ...], ...]
    metadata: dict = field(default_factory=dict, hash=False)


def path_from_dict(data: dict) -> PathFile:
    configs = _get(data, "configs", "path")
    if not isinstance(configs, list) or not configs:
        raise ModelError("configs: expected a non-empty list of configurations")
    dof = len(configs[0]) if isinstance(configs[0], list) else -1
    rows = tuple(_vec(c, dof, f"configs[{i}]") for i, c in enumerate(configs))
    for i in range(1, len(rows)):
        if rows[i] == rows[i - 1]:
            raise ModelError(f"configs[{i}]: repeats the previous configuration")
    metadata = _get(data, "metadata", "path", {})
    if not isinstance(metadata, dict):
        raise ModelError("metadata: expected an object")
    return PathFile(str(_get(data, "robot", "path")), str(_get(data, "scene", "path")), rows, metadata)


def path_to_dict(p: PathFile) -> dict:
    return {"robot": p.robot, "scene": p.scene, "configs": [list(c) for c in p.configs], "metadata": p.metadata}


def load_path(path) -> PathFile:
    return _with_file(path, path_from_dict, _read_json(path))


def write_path(path, path_file: PathFile) -> None:
    _write_json(path, path_to_dict(path_file))


# --- CSV -----------------------------------------------------------------------------


@dataclass(frozen=True)
class ResultRow:
    problem: str
    status: str
    time_ms: float
    cost: float | None
    iterations: int
    sphere_tests: int
    workers: int
    seed: int | None

    def as_csv(self) -> list[str]:
        return [
            self.problem,
            self.status,
            repr(float(self.time_ms)),
            "" if self.cost is None else repr(float(self.cost)),
            str(self.iterations),
            str(self.sphere_tests),
            str(self.workers),
            "" if self.seed is None else str(self.seed),
        ]


def write_results_csv(path, rows: Iterable[ResultRow]) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow(r.as_csv())


def read_results_csv(path) -> list[ResultRow]:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise ModelError(f"{path}: header must be {','.join(CSV_HEADER)}")
        out = []
        for line, row in enumerate(reader, start=2):
            if len(row) != len(CSV_HEADER):
                raise ModelError(f"{path}: line {line}: expected {len(CSV_HEADER)} fields")
            try:
                out.append(
                    ResultRow(
                        problem=row[0],
                        status=row[1],
                        time_ms=float(row[2]),
                        cost=float(row[3]) if row[3] else None,
                        iterations=int(row[4]),
                        sphere_tests=int(row[5]),
                        workers=int(row[6]),
                        seed=int(row[7]) if row[7] else None,
                    )
                )
            except ValueError as e:
                raise ModelError(f"{path}: line {line}: {e}") from None
        return out


def params_to_dict(params: PlannerParams) -> dict:
    return asdict(params)
