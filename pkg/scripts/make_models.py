"""Regenerate the bundled robot models in src/prrtc/data/robots.

planar3: three revolute z joints in the xy plane.
arm7: Franka Panda joint layout and limits with a sphere skeleton along each
link segment (link origin to the next joint origin), plus a fixed hand.
Self-collision pairs are every non-adjacent link pair that is free at the
home pose and collides in at most half of random configurations.
"""

import math
from pathlib import Path

import numpy as np

from prrtc.collision import CollisionChecker, Scene
from prrtc.kinematics import Joint, LinkSpheres, RobotModel, Sphere, bounding_sphere
from prrtc.modelio import write_robot

OUT = Path(__file__).resolve().parents[1] / "src" / "prrtc" / "data" / "robots"


def quat_x(angle):
    return (math.cos(angle / 2), math.sin(angle / 2), 0.0, 0.0)


def r6(x):
    return round(float(x), 6)


def segment_spheres(end, radius, spacing=None):
    """Spheres from the link origin to ``end`` (link frame)."""
    end = np.asarray(end, dtype=float)
    length = float(np.linalg.norm(end))
    spacing = spacing or radius
    n = max(1, int(math.ceil(length / spacing)) + 1)
    pts = [end * t for t in np.linspace(0.0, 1.0, n)] if length > 0 else [end]
    return [Sphere(tuple(r6(v) for v in p), radius) for p in pts]


def link(spheres):
    return LinkSpheres(bounding_sphere(spheres, pad=1e-6), tuple(spheres))


def prune_pairs(model, home, n_samples=20000, max_rate=0.5, seed=0):
    rng = np.random.default_rng(seed)
    lim = model.limits
    qs = lim[:, 0] + rng.random((n_samples, model.dof)) * (lim[:, 1] - lim[:, 0])
    keep = []
    for i in range(model.n_links):
        for j in range(i + 1, model.n_links):
            if model.joints[j].parent == i or model.joints[i].parent == j:
                continue
            probe = RobotModel(model.name, model.joints, model.spheres, ((i, j),))
            chk = CollisionChecker(probe, Scene(), two_stage=False)
            if chk.colliding(np.asarray(home)[None])[0]:
                continue
            rate = chk.colliding(qs).mean()
            if rate <= max_rate:
                keep.append((i, j))
    return tuple(keep)


def planar3():
    lengths = [1.0, 0.8, 0.6]
    joints, spheres = [], []
    x = 0.0
    for i, ln in enumerate(lengths):
        joints.append(
            Joint("revolute", i - 1, (x, 0.0, 0.0), (1.0, 0.0, 0.0, 0.0), (0.0, 0.0, 1.0), (r6(-math.pi), r6(math.pi)), f"link{i + 1}")
        )
        spheres.append(link(segment_spheres((ln, 0.0, 0.0), 0.08, 0.1)))
        x = ln
    return RobotModel("planar3", tuple(joints), tuple(spheres), ((0, 2),))


PANDA = [
    # xyz, x-rotation, limits, link-frame segment to the next joint, radius
    ((0.0, 0.0, 0.333), 0.0, (-2.8973, 2.8973), (0.0, 0.0, 0.0), 0.07),
    ((0.0, 0.0, 0.0), -math.pi / 2, (-1.7628, 1.7628), (0.0, -0.316, 0.0), 0.07),
    ((0.0, -0.316, 0.0), math.pi / 2, (-2.8973, 2.8973), (0.0825, 0.0, 0.0), 0.065),
    ((0.0825, 0.0, 0.0), math.pi / 2, (-3.0718, -0.0698), (-0.0825, 0.384, 0.0), 0.065),
    ((-0.0825, 0.384, 0.0), -math.pi / 2, (-2.8973, 2.8973), (0.0, 0.0, 0.0), 0.06),
    ((0.0, 0.0, 0.0), math.pi / 2, (-0.0175, 3.7525), (0.088, 0.0, 0.0), 0.06),
    ((0.088, 0.0, 0.0), math.pi / 2, (-2.8973, 2.8973), (0.0, 0.0, 0.107), 0.05),
]
HOME = (0.0, -0.785, 0.0, -2.356, 0.0, 1.571, 0.785)


def arm7():
    joints = [Joint("fixed", -1, (0.0, 0.0, 0.0), (1.0, 0.0, 0.0, 0.0), name="base")]
    spheres = [link(segment_spheres((0.0, 0.0, 0.24), 0.09, 0.08))]
    for i, (xyz, rx, lim, seg, r) in enumerate(PANDA):
        joints.append(Joint("revolute", i, xyz, tuple(r6(v) for v in quat_x(rx)), (0.0, 0.0, 1.0), lim, f"link{i + 1}"))
        spheres.append(link(segment_spheres(seg, r)))
    joints.append(Joint("fixed", 7, (0.0, 0.0, 0.107), (1.0, 0.0, 0.0, 0.0), name="hand"))
    hand = [
        Sphere((0.0, 0.0, 0.03), 0.05),
        Sphere((0.0, 0.06, 0.04), 0.03),
        Sphere((0.0, -0.06, 0.04), 0.03),
        Sphere((0.0, 0.03, 0.09), 0.02),
        Sphere((0.0, -0.03, 0.09), 0.02),
    ]
    spheres.append(link(hand))
    model = RobotModel("arm7", tuple(joints), tuple(spheres))
    return RobotModel("arm7", model.joints, model.spheres, prune_pairs(model, HOME))


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    for m in (planar3(), arm7()):
        m.validate()
        write_robot(OUT / f"{m.name}.json", m)
        print(m.name, "dof", m.dof, "links", m.n_links, "fine", len(m.compiled.fine_r), "pairs", m.self_pairs)
