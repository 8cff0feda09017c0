import math

import numpy as np
import pytest

from prrtc import DATA_DIR
from prrtc.kinematics import Joint, LinkSpheres, RobotModel, Sphere, bounding_sphere
from prrtc.modelio import load_robot

ROBOTS = DATA_DIR / "robots"


@pytest.fixture(scope="session")
def planar3():
    return load_robot(ROBOTS / "planar3.json")


@pytest.fixture(scope="session")
def arm7():
    return load_robot(ROBOTS / "arm7.json")


@pytest.fixture(scope="session", params=["planar3", "arm7"])
def bundled_model(request):
    return load_robot(ROBOTS / f"{request.param}.json")


def random_configs(model, n, rng, margin=0.0):
    lim = model.limits
    return lim[:, 0] - margin + rng.random((n, model.dof)) * (lim[:, 1] - lim[:, 0] + 2 * margin)


def two_link_arm():
    """Planar 2R arm with unit links plus a fixed tool frame at the tip."""
    s = Sphere((0.5, 0.0, 0.0), 0.1)
    ls = LinkSpheres(Sphere((0.5, 0.0, 0.0), 0.2), (s,))
    lim = (-math.pi, math.pi)
    joints = (
        Joint("revolute", -1, (0.0, 0.0, 0.0), axis=(0.0, 0.0, 1.0), limits=lim),
        Joint("revolute", 0, (1.0, 0.0, 0.0), axis=(0.0, 0.0, 1.0), limits=lim),
        Joint("fixed", 1, (1.0, 0.0, 0.0)),
    )
    tip = LinkSpheres(Sphere((0.0, 0.0, 0.0), 0.05), (Sphere((0.0, 0.0, 0.0), 0.05),))
    return RobotModel("two_link", joints, (ls, ls, tip))


def dual_arm():
    """Two 3-joint spatial chains (one prismatic joint each) in a single forest model."""
    def chain(offset_y, first):
        spheres = []
        joints = [
            Joint("revolute", -1, (0.0, offset_y, 0.1), axis=(0.0, 0.0, 1.0), limits=(-2.0, 2.0)),
            Joint("revolute", first, (0.0, 0.0, 0.3), (math.cos(0.3), math.sin(0.3), 0.0, 0.0), (0.0, 1.0, 0.0), (-1.5, 1.5)),
            Joint("prismatic", first + 1, (0.4, 0.0, 0.0), axis=(1.0, 0.0, 0.0), limits=(0.0, 0.3)),
        ]
        for seg in ((0.0, 0.0, 0.3), (0.4, 0.0, 0.0), (0.2, 0.0, 0.0)):
            fine = tuple(Sphere(tuple(t * np.array(seg)), 0.05) for t in (0.0, 0.5, 1.0))
            spheres.append(LinkSpheres(bounding_sphere(fine, 1e-6), fine))
        return joints, spheres

    ja, sa = chain(-0.4, 0)
    jb, sb = chain(0.4, 3)
    pairs = tuple((i, j) for i in range(3) for j in range(3, 6))
    return RobotModel("dual", tuple(ja + jb), tuple(sa + sb), pairs)


def random_primitive(rng, lo, hi, size=(0.05, 0.3)):
    from prrtc.collision import BoxPrimitive, CapsulePrimitive, SpherePrimitive

    c = tuple(float(v) for v in lo + rng.random(3) * (hi - lo))
    kind = rng.integers(3)
    if kind == 0:
        return SpherePrimitive(c, float(rng.uniform(*size)))
    if kind == 1:
        quat = rng.normal(size=4)
        quat = tuple(float(v) for v in quat / np.linalg.norm(quat))
        return BoxPrimitive(c, quat, tuple(float(v) for v in rng.uniform(*size, size=3)))
    d = rng.normal(size=3)
    d *= rng.uniform(0.0, 0.4) / np.linalg.norm(d)
    return CapsulePrimitive(c, tuple(float(v) for v in np.add(c, d)), float(rng.uniform(size[0], size[1] / 2)))


WORKSPACE = {
    "planar3": (np.array([-2.5, -2.5, -0.2]), np.array([2.5, 2.5, 0.2])),
    "arm7": (np.array([-0.8, -0.8, 0.0]), np.array([0.8, 0.8, 1.2])),
    "dual": (np.array([-0.8, -1.0, 0.0]), np.array([0.8, 1.0, 0.8])),
}


def random_scene(rng, model, n=(1, 6)):
    from prrtc.collision import Scene

    lo, hi = WORKSPACE[model.name]
    return Scene(tuple(random_primitive(rng, lo, hi) for _ in range(rng.integers(n[0], n[1] + 1))))


def point_robot(radius=0.05, lim=2.0):
    """A sphere moving in the xy plane on two prismatic joints; link 0's sphere is parked far below."""
    parked = Sphere((0.0, 0.0, -10.0), 0.01)
    body = Sphere((0.0, 0.0, 0.0), radius)
    joints = (
        Joint("prismatic", -1, axis=(1.0, 0.0, 0.0), limits=(-lim, lim)),
        Joint("prismatic", 0, axis=(0.0, 1.0, 0.0), limits=(-lim, lim)),
    )
    return RobotModel("point", joints, (LinkSpheres(parked, (parked,)), LinkSpheres(body, (body,))))


# criterion number -> "PASS ..." / "FAIL ..." line, filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
