import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from prrtc.kinematics import (
    Joint,
    LinkSpheres,
    ModelError,
    RobotModel,
    Sphere,
    Transform,
    fk_batch,
    forward_kinematics,
    sphere_positions,
)

from conftest import dual_arm, random_configs, two_link_arm
from oracles import oracle_fk


def test_planar_closed_form():
    model = two_link_arm()
    tip = forward_kinematics(model, [math.pi / 2, 0.0])[2]
    np.testing.assert_allclose(tip.translation, [0.0, 2.0, 0.0], atol=1e-9)
    np.testing.assert_allclose(tip.rotation, Rotation.from_euler("z", math.pi / 2).as_matrix(), atol=1e-9)


@pytest.mark.parametrize("q", [(0.3, -1.1), (-2.0, 0.7), (math.pi, math.pi / 3)])
def test_planar_two_link_matches_trig(q):
    t1, t2 = q
    tip = forward_kinematics(two_link_arm(), q)[2].translation
    expect = [math.cos(t1) + math.cos(t1 + t2), math.sin(t1) + math.sin(t1 + t2), 0.0]
    np.testing.assert_allclose(tip, expect, atol=1e-9)


def test_planar3_closed_form(planar3):
    q = np.array([0.4, -1.2, 2.1])
    frames = forward_kinematics(planar3, q)
    a = np.cumsum(q)
    x = math.cos(a[0]) + 0.8 * math.cos(a[1])
    y = math.sin(a[0]) + 0.8 * math.sin(a[1])
    np.testing.assert_allclose(frames[2].translation, [x, y, 0.0], atol=1e-9)


def test_zero_config_sums_origins(planar3):
    assert all(j.quat == (1.0, 0.0, 0.0, 0.0) for j in planar3.joints)
    frames = forward_kinematics(planar3, np.zeros(planar3.dof))
    running = np.zeros(3)
    for k, j in enumerate(planar3.joints):
        running = running + np.asarray(j.xyz)
        np.testing.assert_allclose(frames[k].translation, running, atol=1e-12)


def test_zero_config_identity_chain():
    model = two_link_arm()
    frames = forward_kinematics(model, [0.0, 0.0])
    np.testing.assert_allclose([f.translation for f in frames], [[0, 0, 0], [1, 0, 0], [2, 0, 0]], atol=1e-12)


@pytest.mark.parametrize("make", [two_link_arm, dual_arm])
def test_matches_dense_oracle_small_models(make):
    model = make()
    model.validate()
    rng = np.random.default_rng(3)
    for q in random_configs(model, 200, rng):
        for got, want in zip(forward_kinematics(model, q), oracle_fk(model, q)):
            np.testing.assert_allclose(got.as_matrix(), want, rtol=0, atol=1e-9)


def test_matches_dense_oracle_bundled(bundled_model):
    rng = np.random.default_rng(11)
    qs = random_configs(bundled_model, 100, rng)
    rot, trans = fk_batch(bundled_model, qs)
    for b, q in enumerate(qs):
        for i, want in enumerate(oracle_fk(bundled_model, q)):
            assert np.max(np.abs(rot[b, i] - want[:3, :3])) <= 1e-9
            assert np.max(np.abs(trans[b, i] - want[:3, 3])) <= 1e-9


def test_out_of_limit_configs_are_computed(planar3):
    q = np.array([10.0, -7.0, 4.0])
    frames = forward_kinematics(planar3, q)
    for got, want in zip(frames, oracle_fk(planar3, q)):
        np.testing.assert_allclose(got.as_matrix(), want, atol=1e-9)


def test_dimension_mismatch(planar3):
    with pytest.raises(ValueError):
        forward_kinematics(planar3, [0.0, 0.0])
    with pytest.raises(ValueError):
        sphere_positions(planar3, [0.0] * 4)


def test_pure_function(arm7):
    q = random_configs(arm7, 1, np.random.default_rng(0))[0]
    a = fk_batch(arm7, q)
    b = fk_batch(arm7, q.copy())
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_rotations_orthonormal(bundled_model):
    rot, _ = fk_batch(bundled_model, random_configs(bundled_model, 200, np.random.default_rng(5)))
    eye = np.broadcast_to(np.eye(3), rot.shape)
    assert np.max(np.abs(np.swapaxes(rot, -1, -2) @ rot - eye)) <= 1e-9
    assert np.max(np.abs(np.linalg.det(rot) - 1.0)) <= 1e-9


def test_forest_chains_are_independent():
    model = dual_arm()
    q = np.array([0.3, 0.5, 0.1, 0.0, 0.0, 0.0])
    frames = forward_kinematics(model, q)
    moved = forward_kinematics(model, np.array([0.3, 0.5, 0.1, 1.0, -0.7, 0.2]))
    for i in range(3):
        np.testing.assert_array_equal(frames[i].as_matrix(), moved[i].as_matrix())
    assert not np.allclose(frames[5].translation, moved[5].translation)


# --- transforms ---------------------------------------------------------------------

unit = st.floats(-1.0, 1.0, allow_nan=False)
coord = st.floats(-5.0, 5.0, allow_nan=False)


@st.composite
def transforms(draw):
    q = np.array([draw(unit) for _ in range(4)])
    if np.linalg.norm(q) < 1e-3:
        q = np.array([1.0, 0.0, 0.0, 0.0])
    return Transform.from_quat([draw(coord) for _ in range(3)], q)


@given(transforms(), transforms(), transforms())
def test_transform_composition_associative(a, b, c):
    np.testing.assert_allclose(((a @ b) @ c).as_matrix(), (a @ (b @ c)).as_matrix(), atol=1e-9)


@given(transforms())
def test_identity_is_noop(t):
    np.testing.assert_allclose((Transform.identity() @ t).as_matrix(), t.as_matrix(), atol=0)
    np.testing.assert_allclose((t @ Transform.identity()).as_matrix(), t.as_matrix(), atol=0)


@given(transforms())
def test_transform_rotation_orthonormal(t):
    r = t.rotation
    np.testing.assert_allclose(r.T @ r, np.eye(3), atol=1e-9)
    assert abs(np.linalg.det(r) - 1.0) <= 1e-9


@given(transforms(), st.lists(coord, min_size=3, max_size=3))
def test_transform_matches_matrix(t, p):
    want = (t.as_matrix() @ np.append(p, 1.0))[:3]
    np.testing.assert_allclose(t.apply(p), want, atol=1e-9)


# --- sphere positions --------------------------------------------------------------


def test_identity_chain_sphere_at_origin():
    s = Sphere((0.0, 0.0, 0.0), 0.1)
    model = RobotModel("one", (Joint("revolute", -1, limits=(-1.0, 1.0)),), (LinkSpheres(s, (s,)),))
    posed = sphere_positions(model, [0.0], "coarse")
    np.testing.assert_array_equal(posed.centers, [[0.0, 0.0, 0.0]])
    assert posed.radii.tolist() == [0.1]


def test_rotated_link_moves_sphere():
    s = Sphere((1.0, 0.0, 0.0), 0.1)
    model = RobotModel("one", (Joint("revolute", -1, limits=(-4.0, 4.0)),), (LinkSpheres(Sphere((1.0, 0, 0), 0.2), (s,)),))
    posed = sphere_positions(model, [math.pi / 2], "fine")
    np.testing.assert_allclose(posed.centers, [[0.0, 1.0, 0.0]], atol=1e-12)


def test_sphere_order_by_link_then_index(arm7):
    posed = sphere_positions(arm7, np.zeros(arm7.dof), "fine")
    assert np.all(np.diff(posed.links) >= 0)
    expect = [s for ls in arm7.spheres for s in ls.fine]
    assert posed.radii.tolist() == [s.radius for s in expect]


def test_sphere_positions_match_oracle(arm7):
    rng = np.random.default_rng(8)
    for q in random_configs(arm7, 20, rng):
        frames = oracle_fk(arm7, q)
        posed = sphere_positions(arm7, q, "fine")
        want = [(frames[link] @ np.append(s.center, 1.0))[:3] for link, ls in enumerate(arm7.spheres) for s in ls.fine]
        np.testing.assert_allclose(posed.centers, want, atol=1e-9)


def test_bad_level(planar3):
    with pytest.raises(ValueError):
        sphere_positions(planar3, np.zeros(3), "medium")


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_coarse_contains_fine_in_world(bundled_model, seed):
    q = random_configs(bundled_model, 1, np.random.default_rng(seed), margin=1.0)[0]
    coarse = sphere_positions(bundled_model, q, "coarse")
    fine = sphere_positions(bundled_model, q, "fine")
    gap = np.linalg.norm(fine.centers - coarse.centers[fine.links], axis=1) + fine.radii
    assert np.all(gap <= coarse.radii[fine.links] + 1e-9)


# --- model invariants --------------------------------------------------------------


def _one_link(**joint):
    s = Sphere((0.0, 0.0, 0.0), 0.1)
    j = dict(kind="revolute", parent=-1, limits=(-1.0, 1.0))
    j.update(joint)
    return RobotModel("m", (Joint(**j),), (LinkSpheres(s, (s,)),))


@pytest.mark.parametrize(
    "joint, field",
    [
        (dict(axis=(0.0, 0.0, 2.0)), "axis"),
        (dict(limits=(1.0, -1.0)), "limits"),
        (dict(limits=None), "limits"),
        (dict(kind="ball"), "type"),
        (dict(parent=0), "parent"),
        (dict(quat=(1.0, 0.1, 0.0, 0.0)), "quat"),
    ],
)
def test_invalid_joint_names_field(joint, field):
    with pytest.raises(ModelError, match=rf"links\[0\]\.joint\.{field}"):
        _one_link(**joint).validate()


def test_fine_escaping_coarse_rejected():
    coarse = Sphere((0.0, 0.0, 0.0), 0.1)
    model = RobotModel("m", (Joint("revolute", -1, limits=(-1.0, 1.0)),), (LinkSpheres(coarse, (Sphere((0.05, 0, 0), 0.06),)),))
    with pytest.raises(ModelError, match=r"fine\[0\]"):
        model.validate()


def test_self_pair_rules():
    m = two_link_arm()
    for pairs, msg in ((((0, 0),), "itself"), (((0, 1),), "adjacent"), (((0, 9),), "range")):
        bad = RobotModel(m.name, m.joints, m.spheres, pairs)
        with pytest.raises(ModelError, match=msg):
            bad.validate()
    RobotModel(m.name, m.joints, m.spheres, ((0, 2),)).validate()


def test_dof_counts_actuated(arm7, planar3):
    assert planar3.dof == 3 and planar3.n_links == 3
    assert arm7.dof == 7
    assert arm7.dof == sum(j.kind in ("revolute", "prismatic") for j in arm7.joints)
    assert dual_arm().dof == 6
