"""Clipped-surrogate loss and its exact analytic gradients.

The total loss is  L = policy + c_v * value - c_e * entropy  with

    policy  = -mean_i min(rho_i A_i, clip(rho_i, 1-eps, 1+eps) A_i)
    value   = mean_i (V(s_i) - R_i)^2
    entropy = sum_j log sigma_j + k/2 (1 + log 2pi)

Gradients honor the piecewise structure: samples whose clipped branch is
active and strictly smaller contribute no policy gradient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import TrainingDivergenceError
from .network import mlp_backward, mlp_forward
from .policy import (
    LOG_2PI,
    LOG_STD_MAX,
    LOG_STD_MIN,
    OBS_SCALE,
    PolicyParams,
    clamped_log_std,
    gaussian_entropy,
)


@dataclass
class LossReport:
    policy_loss: float
    value_loss: float
    entropy: float
    total_loss: float
    clip_fraction: float
    approx_kl: float


def _forward_batch(params: PolicyParams, minibatch):
    obs = np.atleast_2d(minibatch["observations"]) * OBS_SCALE
    actions = np.atleast_2d(minibatch["actions"])
    mean, actor_acts = mlp_forward(params.actor, obs)
    values, critic_acts = mlp_forward(params.critic, obs)
    log_std = clamped_log_std(params)
    std = np.exp(log_std)
    z = (actions - mean) / std
    log_probs = (
        -0.5 * np.sum(z * z, axis=1)
        - np.sum(log_std)
        - 0.5 * actions.shape[1] * LOG_2PI
    )
    return obs, actions, mean, actor_acts, values[:, 0], critic_acts, \
        log_std, std, log_probs


def ppo_losses(params: PolicyParams, minibatch, clip_eps: float,
               value_coef: float = 0.5, entropy_coef: float = 0.0) -> LossReport:
    _, _, _, _, values, _, log_std, _, log_probs = _forward_batch(params, minibatch)
    old_log_probs = minibatch["old_log_probs"]
    advantages = minibatch["advantages"]
    returns = minibatch["returns"]

    ratios = np.exp(log_probs - old_log_probs)
    if not np.all(np.isfinite(ratios)):
        raise TrainingDivergenceError(
            "non-finite probability ratio",
            diagnostics={"max_logp_delta": float(np.max(log_probs - old_log_probs))},
        )
    unclipped = ratios * advantages
    clipped = np.clip(ratios, 1.0 - clip_eps, 1.0 + clip_eps) * advantages
    surrogate = np.minimum(unclipped, clipped)
    policy_loss = -float(np.mean(surrogate))
    value_loss = float(np.mean((values - returns) ** 2))
    entropy = gaussian_entropy(log_std)
    total = policy_loss + value_coef * value_loss - entropy_coef * entropy
    return LossReport(
        policy_loss=policy_loss,
        value_loss=value_loss,
        entropy=entropy,
        total_loss=total,
        clip_fraction=float(np.mean(np.abs(ratios - 1.0) > clip_eps)),
        approx_kl=float(np.mean(old_log_probs - log_probs)),
    )


def gradients(params: PolicyParams, minibatch, clip_eps: float,
              value_coef: float = 0.5, entropy_coef: float = 0.0):
    """Analytic gradient of the total loss, in PolicyParams.flat() order."""
    obs, actions, mean, actor_acts, values, critic_acts, log_std, std, \
        log_probs = _forward_batch(params, minibatch)
    old_log_probs = minibatch["old_log_probs"]
    advantages = minibatch["advantages"]
    returns = minibatch["returns"]
    batch = obs.shape[0]

    ratios = np.exp(log_probs - old_log_probs)
    if not np.all(np.isfinite(ratios)):
        raise TrainingDivergenceError("non-finite probability ratio")
    unclipped = ratios * advantages
    clipped = np.clip(ratios, 1.0 - clip_eps, 1.0 + clip_eps) * advantages
    # policy gradient flows only where the unclipped branch attains the min
    active = unclipped <= clipped
    dsurr_dlogp = np.where(active, ratios * advantages, 0.0)
    dlogp_coeff = -dsurr_dlogp / batch          # d(policy_loss)/d(log_probs)

    z = (actions - mean) / std
    dmean = dlogp_coeff[:, None] * (z / std)     # dlogp/dmean = z/std
    actor_grads = mlp_backward(params.actor, actor_acts, dmean)

    # log-std gradient: policy term plus entropy bonus, zero where clamped
    dlogstd_policy = (dlogp_coeff[:, None] * (z * z - 1.0)).sum(axis=0)
    inside = (params.log_std > LOG_STD_MIN) & (params.log_std < LOG_STD_MAX)
    dlogstd = (dlogstd_policy - entropy_coef) * inside

    dvalues = value_coef * 2.0 * (values - returns) / batch
    critic_grads = mlp_backward(params.critic, critic_acts, dvalues[:, None])

    flat = []
    for gW, gb in actor_grads:
        flat.extend([gW, gb])
    for gW, gb in critic_grads:
        flat.extend([gW, gb])
    flat.append(dlogstd)
    for g in flat:
        if not np.all(np.isfinite(g)):
            raise TrainingDivergenceError("non-finite gradient")
    return flat


def global_norm(grads) -> float:
    return float(np.sqrt(sum(float(np.sum(g * g)) for g in grads)))


def clip_by_global_norm(grads, max_norm: float):
    norm = global_norm(grads)
    if max_norm > 0.0 and norm > max_norm:
        scale = max_norm / norm
        return [g * scale for g in grads], norm
    return grads, norm
