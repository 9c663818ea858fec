"""Walking environment: 20 ms position-target decisions over 1 ms physics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..simulator import (
    RobotModel,
    RobotState,
    TerrainSpec,
    nominal_stance_state,
)
from ..simulator import core
from ..simulator.model import pack_model
from .reward import RewardSpec, reward

ACTION_SCALE = 0.5  # rad of joint-target offset per unit action


@dataclass
class WalkingEnv:
    model: RobotModel
    terrain: TerrainSpec
    reward_spec: RewardSpec = field(default_factory=RewardSpec)
    control_dt: float = 0.02
    physics_dt: float = 1e-3
    episode_limit: float = 20.0   # s

    def __post_init__(self):
        self._m = pack_model(self.model)
        self._terr = self.terrain.pack()
        self._substeps = int(round(self.control_dt / self.physics_dt))
        self._no_force = np.zeros(3)
        self._out = np.empty(core.STATE_DIM)

    def reset(self, rng: np.random.Generator) -> RobotState:
        """Nominal stance with small joint and height randomization."""
        state = nominal_stance_state(self.model)
        state.joint_angles = state.joint_angles + rng.uniform(-0.05, 0.05, 12)
        state.position[2] += rng.uniform(-0.02, 0.02)
        lo, hi = self.model.joint_limits[:, 0], self.model.joint_limits[:, 1]
        state.joint_angles = np.clip(state.joint_angles, lo, hi)
        return state

    def targets_for_action(self, action: np.ndarray) -> np.ndarray:
        clipped = np.clip(action, -1.0, 1.0)
        targets = self.model.stance_angles + ACTION_SCALE * clipped
        lo, hi = self.model.joint_limits[:, 0], self.model.joint_limits[:, 1]
        return np.clip(targets, lo, hi)

    def step(self, state: RobotState, action: np.ndarray):
        """Advance one control period; returns (next_state, reward, done, info).

        Episodes end on a non-foot ground contact or at the time limit.
        """
        targets = self.targets_for_action(action)
        arr = state.as_array()
        kt = np.array([state.time, state.time + self.control_dt])
        kv = np.vstack([targets, targets])
        ok, fell, fail_time, energy = core._advance(
            self._m, self._terr, arr, kt, kv, self._substeps,
            self.physics_dt, self._no_force, 0.0, -1.0, self._out,
        )
        next_state = RobotState.from_array(self._out)
        fell = bool(fell) or not ok
        r = reward(
            next_state, targets, state, self.model, self.reward_spec,
            fallen=fell, dt=self.control_dt,
        )
        timeout = next_state.time >= self.episode_limit - 1e-9
        done = fell or timeout
        info = {
            "fell": fell,
            "timeout": timeout,
            "targets": targets,
            "energy": energy,
            "fail_time": fail_time,
        }
        return next_state, r, done, info
