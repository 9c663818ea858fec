"""Quadruped model description: a 12-joint floating-base robot.

The robot is a trunk plus four identical (mirror-symmetric) legs. Each leg
is a serial chain of three revolute joints:

    hip abduction (axis body-x) -> hip flexion (axis body-y) -> knee (axis body-y)

Leg order is FL, FR, RL, RR; joint order within a leg is abduction, flexion,
knee, so joint j belongs to leg j // 3.

All link frames are axis-aligned with the trunk frame at zero joint angles,
and the trunk frame origin sits at the trunk's center of mass.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import InvalidStateError

GRAVITY = 9.81

N_LEGS = 4
N_JOINTS = 12
NV = 18  # 6 base + 12 joint velocity coordinates

# Leg sign conventions: (x, y) of (FL, FR, RL, RR).
LEG_SIGNS = np.array([[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]])
LEG_NAMES = ("FL", "FR", "RL", "RR")
JOINT_NAMES = tuple(
    f"{leg}_{j}" for leg in LEG_NAMES for j in ("abduction", "flexion", "knee")
)


@dataclass(frozen=True)
class RobotModel:
    """Parameters of the floating-base quadruped.

    Leg-indexed arrays follow the FL, FR, RL, RR order; per-leg link arrays
    are ordered hip (abduction link), thigh, shank.
    """

    base_mass: float
    base_inertia: np.ndarray          # (3, 3) about trunk CoM, trunk frame
    trunk_half_extents: np.ndarray    # (3,) collision box half sizes
    hip_offsets: np.ndarray           # (4, 3) abduction joint anchor in trunk frame
    abduction_offsets: np.ndarray     # (4, 3) flexion joint anchor in hip-link frame
    link_masses: np.ndarray           # (4, 3)
    link_com_offsets: np.ndarray      # (4, 3, 3) CoM in own link frame
    link_inertias: np.ndarray         # (4, 3, 3, 3) about link CoM, link frame
    link_lengths: np.ndarray          # (4, 3) hip spacing, thigh, shank lengths
    foot_radius: float
    hip_collision_radius: float
    joint_limits: np.ndarray          # (12, 2) [lower, upper] rad
    torque_limit: np.ndarray          # (12,) N*m
    kp: np.ndarray                    # (12,) N*m/rad
    kd: np.ndarray                    # (12,) N*m*s/rad
    gravity: float = GRAVITY
    stance_angles: np.ndarray = field(
        default_factory=lambda: np.tile([0.0, 0.9, -1.8], N_LEGS)
    )

    @property
    def total_mass(self) -> float:
        return float(self.base_mass + self.link_masses.sum())

    def validate(self) -> None:
        """Check structural invariants; raises InvalidStateError on violation."""
        if abs(self.total_mass - 12.0) > 1e-9:
            raise InvalidStateError(
                f"total mass must be 12.0 kg, got {self.total_mass!r}"
            )
        if np.any(self.link_masses <= 0.0) or self.base_mass <= 0.0:
            raise InvalidStateError("all masses must be positive")
        for name, inertia in [("base", self.base_inertia)] + [
            (f"leg{leg} link{i}", self.link_inertias[leg, i])
            for leg in range(N_LEGS)
            for i in range(3)
        ]:
            if not np.allclose(inertia, inertia.T, atol=1e-12):
                raise InvalidStateError(f"{name} inertia is not symmetric")
            if np.linalg.eigvalsh(inertia).min() <= 0.0:
                raise InvalidStateError(f"{name} inertia is not positive definite")
        if self.link_masses.shape != (N_LEGS, 3):
            raise InvalidStateError("joint topology must be 4 legs x 3 joints")
        # Left/right mirror symmetry: legs (FL, FR) and (RL, RR) must agree in
        # everything except the sign of y offsets.
        flip = np.array([1.0, -1.0, 1.0])
        for left, right in ((0, 1), (2, 3)):
            pairs = [
                (self.hip_offsets[left], self.hip_offsets[right]),
                (self.abduction_offsets[left], self.abduction_offsets[right]),
            ] + [
                (self.link_com_offsets[left, i], self.link_com_offsets[right, i])
                for i in range(3)
            ]
            for a, b in pairs:
                if not np.allclose(a * flip, b, atol=1e-12):
                    raise InvalidStateError("legs are not mirror-symmetric")
            if not np.allclose(self.link_masses[left], self.link_masses[right]):
                raise InvalidStateError("leg masses are not mirror-symmetric")
        if np.any(self.torque_limit <= 0.0):
            raise InvalidStateError("torque limits must be positive")
        if np.any(self.joint_limits[:, 0] >= self.joint_limits[:, 1]):
            raise InvalidStateError("joint limit intervals must be nonempty")
        lo, hi = self.joint_limits[:, 0], self.joint_limits[:, 1]
        if np.any(self.stance_angles < lo) or np.any(self.stance_angles > hi):
            raise InvalidStateError("stance angles violate joint limits")

    def with_overrides(self, **kwargs) -> "RobotModel":
        model = replace(self, **kwargs)
        model.validate()
        return model


def go1_like_model(**overrides) -> RobotModel:
    """Build the default Go1-scale model (12.0 kg total, 0.213 m segments)."""
    base_mass = 5.16
    hip_mass, thigh_mass, shank_mass = 0.55, 0.86, 0.30
    thigh_len = shank_len = 0.213
    hip_spacing = 0.08  # abduction axis to flexion axis, lateral

    half = np.array([0.183, 0.097, 0.057])
    base_inertia = np.diag(
        base_mass
        / 12.0
        * np.array(
            [
                (2 * half[1]) ** 2 + (2 * half[2]) ** 2,
                (2 * half[0]) ** 2 + (2 * half[2]) ** 2,
                (2 * half[0]) ** 2 + (2 * half[1]) ** 2,
            ]
        )
    )

    hip_offsets = np.column_stack(
        [0.19 * LEG_SIGNS[:, 0], 0.047 * LEG_SIGNS[:, 1], np.zeros(N_LEGS)]
    )
    abduction_offsets = np.column_stack(
        [np.zeros(N_LEGS), hip_spacing * LEG_SIGNS[:, 1], np.zeros(N_LEGS)]
    )

    link_masses = np.tile([hip_mass, thigh_mass, shank_mass], (N_LEGS, 1))
    link_com_offsets = np.zeros((N_LEGS, 3, 3))
    link_com_offsets[:, 0, 1] = 0.04 * LEG_SIGNS[:, 1]
    link_com_offsets[:, 1, 2] = -thigh_len / 2
    link_com_offsets[:, 2, 2] = -shank_len / 2

    def rod_inertia(mass, length, axis):
        # Thin rod through its CoM along `axis`; small axial term keeps it SPD.
        perp = mass * length**2 / 12.0
        diag = np.full(3, perp)
        diag[axis] = mass * (length / 10.0) ** 2 / 2.0
        return np.diag(diag)

    link_inertias = np.zeros((N_LEGS, 3, 3, 3))
    for leg in range(N_LEGS):
        link_inertias[leg, 0] = rod_inertia(hip_mass, hip_spacing, axis=1)
        link_inertias[leg, 1] = rod_inertia(thigh_mass, thigh_len, axis=2)
        link_inertias[leg, 2] = rod_inertia(shank_mass, shank_len, axis=2)

    link_lengths = np.tile([hip_spacing, thigh_len, shank_len], (N_LEGS, 1))

    joint_limits = np.tile(
        [[-0.863, 0.863], [-0.686, 4.501], [-2.818, -0.888]], (N_LEGS, 1)
    )

    model = RobotModel(
        base_mass=base_mass,
        base_inertia=base_inertia,
        trunk_half_extents=half,
        hip_offsets=hip_offsets,
        abduction_offsets=abduction_offsets,
        link_masses=link_masses,
        link_com_offsets=link_com_offsets,
        link_inertias=link_inertias,
        link_lengths=link_lengths,
        foot_radius=0.02,
        hip_collision_radius=0.045,
        joint_limits=joint_limits,
        torque_limit=np.full(N_JOINTS, 23.7),
        kp=np.full(N_JOINTS, 60.0),
        kd=np.full(N_JOINTS, 2.0),
    )
    if overrides:
        model = replace(model, **overrides)
    model.validate()
    return model


def pack_model(model: RobotModel) -> tuple:
    """Flatten the model into the positional-array form the kernels take."""
    return (
        float(model.base_mass),
        np.ascontiguousarray(model.base_inertia, dtype=np.float64),
        np.ascontiguousarray(model.trunk_half_extents, dtype=np.float64),
        np.ascontiguousarray(model.hip_offsets, dtype=np.float64),
        np.ascontiguousarray(model.abduction_offsets, dtype=np.float64),
        np.ascontiguousarray(model.link_masses, dtype=np.float64),
        np.ascontiguousarray(model.link_com_offsets, dtype=np.float64),
        np.ascontiguousarray(model.link_inertias, dtype=np.float64),
        np.ascontiguousarray(model.link_lengths, dtype=np.float64),
        float(model.foot_radius),
        float(model.hip_collision_radius),
        np.ascontiguousarray(model.joint_limits, dtype=np.float64),
        np.ascontiguousarray(model.torque_limit, dtype=np.float64),
        np.ascontiguousarray(model.kp, dtype=np.float64),
        np.ascontiguousarray(model.kd, dtype=np.float64),
        float(model.gravity),
    )
