"""Velocity-tracking reward shaping for the walking task."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..mpc.cost import tilt_sine
from ..simulator import RobotModel, RobotState, pd_torques


@dataclass(frozen=True)
class RewardSpec:
    tracking: float = 1.0        # exp kernel on forward velocity
    lateral: float = 0.5         # v_y^2 penalty
    upright: float = 0.5         # tilt^2 penalty
    energy: float = 0.002        # sum |tau * qd| * dt penalty
    alive: float = 0.1
    termination: float = 10.0
    target_velocity: float = 0.5

    def validate(self) -> None:
        for name in ("tracking", "lateral", "upright", "energy", "alive",
                     "termination"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"reward weight {name} must be finite")


def reward(
    state: RobotState,
    action_targets: np.ndarray,
    prev_state: RobotState,
    model: RobotModel,
    spec: RewardSpec,
    fallen: bool = False,
    dt: float = 0.02,
) -> float:
    """r = tracking kernel - lateral - posture - energy + alive - termination."""
    vx = state.linear_velocity[0]
    vy = state.linear_velocity[1]
    tilt = tilt_sine(state.orientation)
    tau = pd_torques(model, state, action_targets)
    power = float(np.sum(np.abs(tau * state.joint_velocities)))
    r = spec.tracking * np.exp(-4.0 * (vx - spec.target_velocity) ** 2)
    r -= spec.lateral * vy * vy
    r -= spec.upright * tilt * tilt
    r -= spec.energy * power * dt
    r += spec.alive
    if fallen:
        r -= spec.termination
    return float(r)
