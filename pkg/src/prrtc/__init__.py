"""Parallel RRT-Connect motion planning with sphere-model collision checking."""

from pathlib import Path

from .collision import (
    BoxPrimitive,
    CapsulePrimitive,
    CheckStats,
    CollisionChecker,
    EdgeCheckRequest,
    Scene,
    SpherePrimitive,
    check_config,
    sphere_vs_primitive,
    validate_edge,
    validate_edge_batched,
)
from .kinematics import Joint, LinkSpheres, ModelError, RobotModel, Sphere, Transform, forward_kinematics, sphere_positions
from .planner import PlannerParams, PlanResult, Status, plan, revalidate_path

DATA_DIR = Path(__file__).parent / "data"
BUNDLED_PROBLEMS = DATA_DIR / "problems"

__version__ = "0.1.0"

__all__ = [
    "BUNDLED_PROBLEMS",
    "DATA_DIR",
    "BoxPrimitive",
    "CapsulePrimitive",
    "CheckStats",
    "CollisionChecker",
    "EdgeCheckRequest",
    "Joint",
    "LinkSpheres",
    "ModelError",
    "PlanResult",
    "PlannerParams",
    "RobotModel",
    "Scene",
    "Sphere",
    "SpherePrimitive",
    "Status",
    "Transform",
    "check_config",
    "forward_kinematics",
    "plan",
    "revalidate_path",
    "sphere_positions",
    "sphere_vs_primitive",
    "validate_edge",
    "validate_edge_batched",
]
