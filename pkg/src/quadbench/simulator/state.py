"""Robot state: base pose plus joint coordinates, with flat-array packing.

Velocities are expressed in the world frame. The packed layout is

    [0:3]   base position           [19:22] base linear velocity
    [3:7]   base quaternion (wxyz)  [22:25] base angular velocity
    [7:19]  joint angles            [25:37] joint velocities
    [37]    time
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidStateError
from .model import RobotModel

STATE_DIM = 38

_P = slice(0, 3)
_QUAT = slice(3, 7)
_Q = slice(7, 19)
_V = slice(19, 22)
_W = slice(22, 25)
_QD = slice(25, 37)
_T = 37


@dataclass
class RobotState:
    position: np.ndarray                 # (3,) m, world
    orientation: np.ndarray              # (4,) unit quaternion, wxyz
    joint_angles: np.ndarray             # (12,) rad
    linear_velocity: np.ndarray          # (3,) m/s, world
    angular_velocity: np.ndarray         # (3,) rad/s, world
    joint_velocities: np.ndarray         # (12,) rad/s
    time: float = 0.0

    def validate(self) -> None:
        arr = self.as_array()
        if not np.all(np.isfinite(arr)):
            raise InvalidStateError("state contains non-finite components")
        norm = float(np.linalg.norm(self.orientation))
        if abs(norm - 1.0) > 1e-9:
            raise InvalidStateError(f"quaternion norm {norm!r} deviates from 1")

    def as_array(self) -> np.ndarray:
        arr = np.empty(STATE_DIM)
        arr[_P] = self.position
        arr[_QUAT] = self.orientation
        arr[_Q] = self.joint_angles
        arr[_V] = self.linear_velocity
        arr[_W] = self.angular_velocity
        arr[_QD] = self.joint_velocities
        arr[_T] = self.time
        return arr

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "RobotState":
        return cls(
            position=arr[_P].copy(),
            orientation=arr[_QUAT].copy(),
            joint_angles=arr[_Q].copy(),
            linear_velocity=arr[_V].copy(),
            angular_velocity=arr[_W].copy(),
            joint_velocities=arr[_QD].copy(),
            time=float(arr[_T]),
        )

    def generalized_velocity(self) -> np.ndarray:
        return np.concatenate(
            [self.linear_velocity, self.angular_velocity, self.joint_velocities]
        )

    def copy(self) -> "RobotState":
        return RobotState.from_array(self.as_array())


def nominal_stance_state(
    model: RobotModel,
    terrain_height: float = 0.0,
    settle_depth: float | None = None,
) -> RobotState:
    """Standing state at the model's stance angles, feet just loading the ground.

    The base height is chosen so each foot carries its static share of the
    weight through the contact spring (penetration m*g / (4*k_n) by default,
    assuming k_n = 30000 N/m when `settle_depth` is not given).
    """
    if settle_depth is None:
        settle_depth = model.total_mass * model.gravity / (4 * 30000.0)
    q = model.stance_angles
    theta_f, theta_k = q[1], q[2]
    thigh, shank = model.link_lengths[0, 1], model.link_lengths[0, 2]
    drop = thigh * np.cos(theta_f) + shank * np.cos(theta_f + theta_k)
    base_z = terrain_height + drop + model.foot_radius - settle_depth
    return RobotState(
        position=np.array([0.0, 0.0, base_z]),
        orientation=np.array([1.0, 0.0, 0.0, 0.0]),
        joint_angles=q.copy().astype(float),
        linear_velocity=np.zeros(3),
        angular_velocity=np.zeros(3),
        joint_velocities=np.zeros(12),
        time=0.0,
    )
