"""Rollout storage and generalized advantage estimation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidStateError


def gae(rewards, values, dones, bootstrap_value, gamma, lam):
    """delta_t = r_t + gamma*V_{t+1}*(1-done_t) - V_t,
    A_t = delta_t + gamma*lam*(1-done_t)*A_{t+1}; returns = A + V."""
    rewards = np.asarray(rewards, dtype=float)
    values = np.asarray(values, dtype=float)
    dones = np.asarray(dones, dtype=float)
    n = len(rewards)
    if not (len(values) == len(dones) == n):
        raise InvalidStateError("gae inputs must have equal lengths")
    advantages = np.zeros(n)
    last = 0.0
    for t in range(n - 1, -1, -1):
        next_value = bootstrap_value if t == n - 1 else values[t + 1]
        nonterminal = 1.0 - dones[t]
        delta = rewards[t] + gamma * next_value * nonterminal - values[t]
        last = delta + gamma * lam * nonterminal * last
        advantages[t] = last
    return advantages, advantages + values


@dataclass
class RolloutBuffer:
    n_steps: int
    obs_dim: int
    act_dim: int

    def __post_init__(self):
        self.observations = np.zeros((self.n_steps, self.obs_dim))
        self.actions = np.zeros((self.n_steps, self.act_dim))
        self.log_probs = np.zeros(self.n_steps)
        self.rewards = np.zeros(self.n_steps)
        self.values = np.zeros(self.n_steps)
        self.dones = np.zeros(self.n_steps)
        self.advantages = np.zeros(self.n_steps)
        self.returns = np.zeros(self.n_steps)
        self.ptr = 0

    @property
    def full(self) -> bool:
        return self.ptr == self.n_steps

    def add(self, obs, action, log_prob, reward, value, done):
        if self.full:
            raise InvalidStateError("rollout buffer overflow")
        i = self.ptr
        self.observations[i] = obs
        self.actions[i] = action
        self.log_probs[i] = log_prob
        self.rewards[i] = reward
        self.values[i] = value
        self.dones[i] = float(done)
        self.ptr += 1

    def finish(self, bootstrap_value, gamma, lam):
        if not self.full:
            raise InvalidStateError("buffer must be full before finish()")
        self.advantages, self.returns = gae(
            self.rewards, self.values, self.dones, bootstrap_value, gamma, lam
        )

    def reset(self):
        self.ptr = 0
