"""Independent oracles used by the test suite.

These deliberately avoid the library's internal kinematics/dynamics code
paths: rotations go through scipy, velocities are propagated with plain
point kinematics, and integrals/sums are brute force.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial.transform import Rotation

from quadbench.simulator import RobotModel, RobotState, link_frames, mass_matrix


def quat_to_rotation(q_wxyz: np.ndarray) -> Rotation:
    return Rotation.from_quat(np.roll(q_wxyz, -1))  # scipy uses xyzw


def rotate_world(q_wxyz: np.ndarray, rotvec: np.ndarray) -> np.ndarray:
    """Apply a world-frame rotation vector to a wxyz quaternion."""
    rot = Rotation.from_rotvec(rotvec) * quat_to_rotation(q_wxyz)
    return np.roll(rot.as_quat(), 1)


def advance_configuration(state: RobotState, u: np.ndarray, eps: float) -> RobotState:
    """Move the configuration along generalized velocity u by eps."""
    s = state.copy()
    s.position = state.position + eps * u[0:3]
    s.orientation = rotate_world(state.orientation, eps * u[3:6])
    s.joint_angles = state.joint_angles + eps * u[6:18]
    return s


def per_link_kinetic_energy(model: RobotModel, state: RobotState) -> float:
    """Total kinetic energy from per-link velocity propagation."""
    R, coms, jor, jax = link_frames(model, state)
    u = state.generalized_velocity()
    base_inertia_w = R[0] @ model.base_inertia @ R[0].T
    total = 0.5 * model.base_mass * u[0:3] @ u[0:3] \
        + 0.5 * u[3:6] @ base_inertia_w @ u[3:6]
    for leg in range(4):
        omega = u[3:6].copy()
        for depth in range(3):
            j = 3 * leg + depth
            body = 1 + j
            omega = omega + jax[j] * u[6 + j]
            v_origin = u[0:3] + np.cross(u[3:6], jor[j] - state.position)
            for d2 in range(depth):
                j2 = 3 * leg + d2
                v_origin = v_origin + u[6 + j2] * np.cross(jax[j2], jor[j] - jor[j2])
            v_com = v_origin + np.cross(omega, coms[body] - jor[j])
            inertia_w = R[body] @ model.link_inertias[leg, depth] @ R[body].T
            total += 0.5 * model.link_masses[leg, depth] * v_com @ v_com \
                + 0.5 * omega @ inertia_w @ omega
    return float(total)


def hand_forward_kinematics_zero(model: RobotModel, base_pos: np.ndarray):
    """Foot positions at zero joint angles and identity orientation."""
    feet = np.empty((4, 3))
    for leg in range(4):
        hip = model.hip_offsets[leg]
        lateral = model.abduction_offsets[leg]
        drop = model.link_lengths[leg, 1] + model.link_lengths[leg, 2]
        feet[leg] = base_pos + hip + lateral + np.array([0.0, 0.0, -drop])
    return feet


def finite_difference_mass_matrix_rate(
    model: RobotModel, state: RobotState, eps: float = 1e-6
) -> np.ndarray:
    """dM/dt along the state's own velocity via central differences."""
    u = state.generalized_velocity()
    plus = mass_matrix(model, advance_configuration(state, u, eps))
    minus = mass_matrix(model, advance_configuration(state, u, -eps))
    return (plus - minus) / (2 * eps)


def random_state(rng: np.random.Generator, height: float = 1.0) -> RobotState:
    quat = rng.standard_normal(4)
    quat /= np.linalg.norm(quat)
    return RobotState(
        position=rng.uniform(-1.0, 1.0, 3) + np.array([0.0, 0.0, height]),
        orientation=quat,
        joint_angles=rng.uniform(-1.0, 1.0, 12),
        linear_velocity=rng.uniform(-1.0, 1.0, 3),
        angular_velocity=rng.uniform(-2.0, 2.0, 3),
        joint_velocities=rng.uniform(-5.0, 5.0, 12),
        time=0.0,
    )
