"""Regenerate the bundled scenes and the 20-problem suite.

Three scene archetypes per robot: tabletop (open clutter), shelf (reach into
a cell) and cage (reach into a box open on one side). Goals are found by
rejection sampling configurations whose tool point lies in the target
region. Problems are then timed with default parameters (one worker) and
numbered by increasing mean solve time; candidates not solved within the
budget are dropped and regenerated.

    python scripts/make_problems.py
"""

import math
from pathlib import Path

import numpy as np

from prrtc.collision import BoxPrimitive, CapsulePrimitive, CollisionChecker, Scene, SpherePrimitive
from prrtc.kinematics import fk_batch
from prrtc.modelio import ProblemSpec, load_robot, write_problem, write_scene
from prrtc.planner import PlannerParams, plan

DATA = Path(__file__).resolve().parents[1] / "src" / "prrtc" / "data"
IDENT = (1.0, 0.0, 0.0, 0.0)
BUDGET_S = 1.5
TRIALS = 1


def r6(x):
    return round(float(x), 6)


def box(center, half, yaw=0.0):
    quat = (math.cos(yaw / 2), 0.0, 0.0, math.sin(yaw / 2))
    return BoxPrimitive(tuple(r6(c) for c in center), tuple(r6(q) for q in quat), tuple(r6(h) for h in half))


def cell_walls(lo, hi, t, open_side):
    """Five thin walls around the box [lo, hi]; ``open_side`` is '-x' or '+x' etc. (left open)."""
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    c = (lo + hi) / 2
    h = (hi - lo) / 2
    walls = []
    for axis in range(3):
        for sign, name in ((-1, "-"), (1, "+")):
            if f"{name}{'xyz'[axis]}" == open_side:
                continue
            center = c.copy()
            center[axis] = (lo if sign < 0 else hi)[axis] + sign * t
            half = h + t
            half[axis] = t
            walls.append(box(center, half))
    return walls


# --- planar scenes (xy plane) ----------------------------------------------------


def planar_tool(model, qs):
    rot, trans = fk_batch(model, qs)
    return trans[:, -1] + rot[:, -1, :, 0] * 0.6


def planar_tabletop(rng):
    obs = []
    for _ in range(5):
        ang = rng.uniform(-math.pi, math.pi)
        rad = rng.uniform(1.1, 2.0)
        p = (rad * math.cos(ang), rad * math.sin(ang), 0.0)
        kind = rng.integers(3)
        if kind == 0:
            obs.append(SpherePrimitive(tuple(r6(v) for v in p), r6(rng.uniform(0.12, 0.22))))
        elif kind == 1:
            obs.append(box(p, (rng.uniform(0.08, 0.2), rng.uniform(0.08, 0.2), 0.3), rng.uniform(-1, 1)))
        else:
            d = np.array([math.cos(ang + 1.2), math.sin(ang + 1.2), 0.0]) * 0.2
            obs.append(CapsulePrimitive(tuple(r6(v) for v in np.add(p, d)), tuple(r6(v) for v in np.subtract(p, d)), 0.08))
    return Scene(tuple(obs)), None


def planar_shelf(rng):
    ang = rng.uniform(-math.pi, math.pi)
    rot = np.array([[math.cos(ang), -math.sin(ang)], [math.sin(ang), math.cos(ang)]])
    gap = rng.uniform(0.38, 0.48)

    def place(x, y, hx, hy):
        p = rot @ [x, y]
        return box((p[0], p[1], 0.0), (hx, hy, 0.3), ang)

    obs = [
        place(1.8, gap / 2 + 0.05, 0.4, 0.05),
        place(1.8, -gap / 2 - 0.05, 0.4, 0.05),
        place(2.3, 0.0, 0.05, gap / 2 + 0.1),
        place(1.8, gap / 2 + 0.45, 0.4, 0.05),
    ]
    target = rot @ [1.95, 0.0]
    return Scene(tuple(obs)), (np.array([target[0], target[1], 0.0]), 0.12)


def planar_cage(rng):
    ang = rng.uniform(-math.pi, math.pi)
    rot = np.array([[math.cos(ang), -math.sin(ang)], [math.sin(ang), math.cos(ang)]])

    def place(x, y, hx, hy):
        p = rot @ [x, y]
        return box((p[0], p[1], 0.0), (hx, hy, 0.3), ang)

    gap = rng.uniform(0.36, 0.42)
    obs = [
        place(1.75, 0.45, 0.45, 0.05),
        place(1.75, -0.45, 0.45, 0.05),
        place(2.25, 0.0, 0.05, 0.5),
        place(1.3, gap / 2 + 0.2, 0.05, 0.2),
        place(1.3, -gap / 2 - 0.2, 0.05, 0.2),
    ]
    target = rot @ [1.8, 0.0]
    return Scene(tuple(obs)), (np.array([target[0], target[1], 0.0]), 0.15)


# --- arm scenes ----------------------------------------------------------------


def arm_tool(model, qs):
    rot, trans = fk_batch(model, qs)
    return trans[:, -1] + rot[:, -1, :, 2] * 0.08


def arm_tabletop(rng):
    obs = [box((0.6, 0.0, -0.02), (0.3, 0.6, 0.02))]
    for _ in range(4):
        x, y = rng.uniform(0.4, 0.8), rng.uniform(-0.45, 0.45)
        if rng.random() < 0.5:
            h = rng.uniform(0.05, 0.12)
            obs.append(box((x, y, h), (rng.uniform(0.03, 0.06), rng.uniform(0.03, 0.06), h), rng.uniform(-1, 1)))
        else:
            obs.append(CapsulePrimitive((r6(x), r6(y), 0.03), (r6(x), r6(y), r6(rng.uniform(0.12, 0.25))), r6(rng.uniform(0.025, 0.04))))
    return Scene(tuple(obs)), (np.array([0.55, rng.uniform(-0.3, 0.3), 0.25]), 0.12)


def arm_shelf(rng):
    yaw = rng.uniform(-0.5, 0.5)
    rot = np.array([[math.cos(yaw), -math.sin(yaw), 0], [math.sin(yaw), math.cos(yaw), 0], [0, 0, 1]])

    def place(c, h):
        return box(rot @ np.asarray(c), h, yaw)

    x0, depth, width = 0.55, 0.3, 0.5
    obs = [place((x0 + depth + 0.01, 0.0, 0.45), (0.01, width, 0.45))]
    for z in (0.0, 0.3, 0.6, 0.9):
        obs.append(place((x0 + depth / 2, 0.0, z), (depth / 2, width, 0.01)))
    for y in (-width, width):
        obs.append(place((x0 + depth / 2, y, 0.45), (depth / 2, 0.01, 0.45)))
    level = rng.choice([0.15, 0.45])
    target = rot @ np.array([x0 + 0.12, rng.uniform(-0.2, 0.2), level])
    return Scene(tuple(obs)), (target, 0.07)


def arm_cage(rng):
    yaw = rng.uniform(-0.6, 0.6)
    rot = np.array([[math.cos(yaw), -math.sin(yaw), 0], [math.sin(yaw), math.cos(yaw), 0], [0, 0, 1]])
    lo = np.array([0.42, -0.22, 0.1])
    hi = np.array([0.75, 0.22, 0.55])
    obs = []
    for w in cell_walls(lo, hi, 0.01, "-x"):
        obs.append(box(rot @ np.asarray(w.center), w.half_extents, yaw))
    target = rot @ np.array([rng.uniform(0.5, 0.6), 0.0, 0.3])
    return Scene(tuple(obs)), (target, 0.08)


def sample_query(model, scene, target, tool, rng, n=200_000):
    chk = CollisionChecker(model, scene)
    lim = model.limits
    qs = lim[:, 0] + rng.random((n, model.dof)) * (lim[:, 1] - lim[:, 0])
    free = qs[chk.free(qs)]
    if target is None:
        goals = free
    else:
        center, radius = target
        d = np.linalg.norm(tool(model, free) - center, axis=1)
        goals = free[d < radius]
    if len(goals) == 0:
        return None
    goal = goals[rng.integers(len(goals))]
    # start: free configuration with the tool well away from the target
    tp = tool(model, free)
    far = free[np.linalg.norm(tp - (tool(model, goal[None])[0]), axis=1) > 0.5]
    start = far[rng.integers(len(far))]
    return tuple(r6(v) for v in start), tuple(r6(v) for v in goal)


LAYOUT = [
    ("planar3", "tabletop", planar_tabletop, planar_tool, 3),
    ("planar3", "shelf", planar_shelf, planar_tool, 3),
    ("planar3", "cage", planar_cage, planar_tool, 2),
    ("arm7", "tabletop", arm_tabletop, arm_tool, 4),
    ("arm7", "shelf", arm_shelf, arm_tool, 4),
    ("arm7", "cage", arm_cage, arm_tool, 4),
]


def mean_solve_time(model, scene, start, goal):
    times = []
    for _ in range(TRIALS):
        r = plan(model, scene, start, goal, PlannerParams(workers=1))
        if not r.solved or r.wall_time > BUDGET_S:
            return None
        times.append(r.wall_time)
    return float(np.mean(times))


def main():
    rng = np.random.default_rng(20260418)
    for sub in ("scenes", "problems"):
        for f in (DATA / sub).glob("*.json"):
            f.unlink()
    made = []
    for robot, arche, make_scene, tool, count in LAYOUT:
        model = load_robot(DATA / "robots" / f"{robot}.json")
        k = 0
        while k < count:
            scene, target = make_scene(rng)
            q = sample_query(model, scene, target, tool, rng)
            if q is None:
                continue
            t = mean_solve_time(model, scene, *q)
            if t is None:
                print("dropped", robot, arche)
                continue
            k += 1
            made.append((t, robot, arche, k, scene, q))
            print(f"{robot} {arche} {k}: {t * 1e3:.1f} ms")
    made.sort(key=lambda m: m[0])
    for rank, (t, robot, arche, k, scene, (start, goal)) in enumerate(made, start=1):
        name = f"{rank:02d}_{robot}_{arche}_{k}"
        write_scene(DATA / "scenes" / f"{robot}_{arche}_{k}.json", scene)
        write_problem(
            DATA / "problems" / f"{name}.json",
            ProblemSpec(name, f"../robots/{robot}.json", f"../scenes/{robot}_{arche}_{k}.json", start, goal, {}),
        )
        print(name, f"{t * 1e3:.1f} ms")


if __name__ == "__main__":
    main()
