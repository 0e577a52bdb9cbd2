"""Planar 4-revolute arm: forward kinematics and damped-least-squares IK.

The arm supplies the 4 motor channels (joint angles) for each fitted pen
position. Targets are always inside the configured workspace rectangle,
which by construction lies strictly inside the reach disk, so the solver
is expected to converge for every query.
"""

from __future__ import annotations

import numpy as np

from .config import ArmConfig
from .errors import IKError

IK_TOL = 1e-6
IK_MAX_ITERS = 200

# elbow-down seed used for the first point of a trajectory
DEFAULT_SEED_Q = np.array([0.4, -0.6, -0.6, -0.4])


class ArmModel:
    """Kinematic chain state derived from an ArmConfig."""

    def __init__(self, cfg: ArmConfig):
        self.links = np.asarray(cfg.link_lengths, dtype=float)
        self.base = np.array([cfg.base_y, cfg.base_z], dtype=float)
        self.joint_limits = np.asarray(cfg.joint_limits, dtype=float)
        # damping fixed relative to scale, favors stability over speed
        self.damping = 0.1 * float(np.mean(self.links))


def forward(arm: ArmModel, q) -> np.ndarray:
    """End-effector (y, z) for joint angles q via cumulative-angle summation."""
    q = np.asarray(q, dtype=float)
    phi = np.cumsum(q)
    y = arm.base[0] + np.sum(arm.links * np.cos(phi))
    z = arm.base[1] + np.sum(arm.links * np.sin(phi))
    return np.array([y, z])


def joint_positions(arm: ArmModel, q) -> np.ndarray:
    """All joint positions including base and tip, shape (5, 2)."""
    q = np.asarray(q, dtype=float)
    phi = np.cumsum(q)
    steps = np.stack([arm.links * np.cos(phi), arm.links * np.sin(phi)], axis=1)
    return np.vstack([arm.base, arm.base + np.cumsum(steps, axis=0)])


def jacobian(arm: ArmModel, q) -> np.ndarray:
    """2x4 positional Jacobian of the planar chain."""
    q = np.asarray(q, dtype=float)
    phi = np.cumsum(q)
    # column j sums contributions of links j..3
    sin_terms = arm.links * np.sin(phi)
    cos_terms = arm.links * np.cos(phi)
    J = np.empty((2, 4))
    for j in range(4):
        J[0, j] = -np.sum(sin_terms[j:])
        J[1, j] = np.sum(cos_terms[j:])
    return J


def inverse(arm: ArmModel, target, q_init) -> np.ndarray:
    """Damped-least-squares iteration from q_init until the tip matches target.

    Raises IKError when the position error is still above IK_TOL after
    IK_MAX_ITERS iterations.
    """
    target = np.asarray(target, dtype=float)
    q = np.array(q_init, dtype=float)
    lam2 = arm.damping ** 2
    for _ in range(IK_MAX_ITERS):
        err = target - forward(arm, q)
        if np.dot(err, err) < IK_TOL ** 2:
            return q
        J = jacobian(arm, q)
        A = J @ J.T + lam2 * np.eye(2)
        q = q + J.T @ np.linalg.solve(A, err)
    err = target - forward(arm, q)
    if np.dot(err, err) < IK_TOL ** 2:
        return q
    raise IKError(f"IK did not converge for target {target.tolist()}; residual {np.linalg.norm(err):.3e}")


def trajectory_ik(arm: ArmModel, points: np.ndarray, q_seed=None) -> np.ndarray:
    """Solve IK along a path, seeding each solve with the previous solution.

    Continuity seeding keeps the redundant chain on one branch, so joint
    deltas stay small between neighboring targets.
    """
    points = np.asarray(points, dtype=float)
    q = DEFAULT_SEED_Q if q_seed is None else np.asarray(q_seed, dtype=float)
    out = np.empty((len(points), 4))
    for i, p in enumerate(points):
        q = inverse(arm, p, q)
        out[i] = q
    return out
