"""Gaussian MLP actor-critic: parameters, observation encoding, sampling."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import CorruptedParametersError, InvalidStateError
from ..simulator import RobotState
from .network import init_mlp, mlp_forward

OBS_DIM = 45
ACT_DIM = 12
HIDDEN = (64, 64)
LOG_STD_MIN, LOG_STD_MAX = -5.0, 2.0
LOG_2PI = float(np.log(2.0 * np.pi))

# fixed input scaling (part of the architecture): gravity dir, lin vel,
# ang vel, joint angles, joint velocities, previous action
OBS_SCALE = np.concatenate(
    [
        np.full(3, 1.0),
        np.full(3, 0.5),
        np.full(3, 0.25),
        np.full(12, 1.0),
        np.full(12, 0.05),
        np.full(12, 1.0),
    ]
)


@dataclass
class PolicyParams:
    actor: list          # [(W, b), ...] 45 -> 64 -> 64 -> 12
    critic: list         # [(W, b), ...] 45 -> 64 -> 64 -> 1
    log_std: np.ndarray  # (12,), clamped to [-5, 2] on use

    def validate(self) -> None:
        for W, b in self.actor + self.critic:
            if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
                raise CorruptedParametersError("non-finite network weights")
        if not np.all(np.isfinite(self.log_std)):
            raise CorruptedParametersError("non-finite log-std")

    def flat(self) -> list[np.ndarray]:
        """Canonical parameter ordering shared by gradients and the optimizer."""
        arrays = []
        for W, b in self.actor:
            arrays.extend([W, b])
        for W, b in self.critic:
            arrays.extend([W, b])
        arrays.append(self.log_std)
        return arrays

    def copy(self) -> "PolicyParams":
        return PolicyParams(
            actor=[(W.copy(), b.copy()) for W, b in self.actor],
            critic=[(W.copy(), b.copy()) for W, b in self.critic],
            log_std=self.log_std.copy(),
        )

    def assign(self, other: "PolicyParams") -> None:
        for (W, b), (W2, b2) in zip(self.actor + self.critic,
                                    other.actor + other.critic):
            W[:] = W2
            b[:] = b2
        self.log_std[:] = other.log_std


def init_policy_params(rng: np.random.Generator, log_std_init: float = 0.0):
    return PolicyParams(
        actor=init_mlp(rng, (OBS_DIM, *HIDDEN, ACT_DIM), out_gain=0.01),
        critic=init_mlp(rng, (OBS_DIM, *HIDDEN, 1), out_gain=1.0),
        log_std=np.full(ACT_DIM, log_std_init),
    )


def observe(state: RobotState, prev_action: np.ndarray) -> np.ndarray:
    """45-dim observation; body-frame quantities via the inverse base rotation."""
    w, x, y, z = state.orientation
    R = np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )
    gravity_body = R.T @ np.array([0.0, 0.0, -1.0])
    v_body = R.T @ state.linear_velocity
    w_body = R.T @ state.angular_velocity
    obs = np.concatenate(
        [
            gravity_body,
            v_body,
            w_body,
            state.joint_angles,
            state.joint_velocities,
            np.asarray(prev_action, dtype=float),
        ]
    )
    if obs.shape != (OBS_DIM,) or not np.all(np.isfinite(obs)):
        raise InvalidStateError("observation is malformed")
    return obs


def clamped_log_std(params: PolicyParams) -> np.ndarray:
    return np.clip(params.log_std, LOG_STD_MIN, LOG_STD_MAX)


def policy_forward(params: PolicyParams, obs: np.ndarray):
    """(mean, std, value) for a single observation or a batch."""
    params.validate()
    squeeze = obs.ndim == 1
    batch = np.atleast_2d(obs) * OBS_SCALE
    mean, _ = mlp_forward(params.actor, batch)
    value, _ = mlp_forward(params.critic, batch)
    std = np.exp(clamped_log_std(params))
    if squeeze:
        return mean[0], std, float(value[0, 0])
    return mean, std, value[:, 0]


def sample_action(mean, std, rng: np.random.Generator):
    """Draw from N(mean, diag(std^2)); returns (action, log probability)."""
    noise = rng.standard_normal(mean.shape)
    action = mean + std * noise
    return action, gaussian_log_prob(action, mean, std)


def gaussian_log_prob(action, mean, std):
    z = (action - mean) / std
    return float(
        -0.5 * np.sum(z * z) - np.sum(np.log(std)) - 0.5 * len(std) * LOG_2PI
    )


def gaussian_entropy(log_std: np.ndarray) -> float:
    k = len(log_std)
    return float(np.sum(log_std) + 0.5 * k * (1.0 + LOG_2PI))
