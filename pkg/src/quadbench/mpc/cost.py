"""Weighted-residual step cost for the walking task.

The cost is a sum of nonnegative terms w_i * n_i(r_i): each residual block
measures one kind of task error (velocity tracking, posture, control
deviation) and each norm attains 0 exactly at a zero residual.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from ..simulator import RobotState, TerrainSpec, terrain_sample
from ..simulator.core import SMOOTH_ABS_EPS

QUADRATIC = "quadratic"
SMOOTH_ABS = "smooth-abs"
_NORM_IDS = {QUADRATIC: 0, SMOOTH_ABS: 1}

# residual blocks in order: name -> length
RESIDUAL_BLOCKS = (
    ("forward_velocity", 1),
    ("lateral_velocity", 1),
    ("height", 1),
    ("upright", 1),
    ("yaw_rate", 1),
    ("control", 12),
)


@dataclass(frozen=True)
class CostTerm:
    residual: str
    weight: float
    norm: str = QUADRATIC


@dataclass(frozen=True)
class CostSpec:
    terms: tuple[CostTerm, ...]
    target_velocity: float = 0.5    # m/s, along world x
    target_height: float = 0.27     # m, trunk height above local terrain

    def __post_init__(self):
        names = [t.residual for t in self.terms]
        if names != [name for name, _ in RESIDUAL_BLOCKS]:
            raise ConfigError(
                f"cost terms must cover the residual blocks in order, got {names}"
            )
        for term in self.terms:
            if term.weight < 0.0:
                raise ConfigError(f"negative weight for {term.residual!r}")
            if term.norm not in _NORM_IDS:
                raise ConfigError(f"unknown norm {term.norm!r}")

    def weights_array(self) -> np.ndarray:
        return np.array([t.weight for t in self.terms])

    def norms_array(self) -> np.ndarray:
        return np.array([_NORM_IDS[t.norm] for t in self.terms], dtype=np.int64)


def default_cost_spec(**overrides) -> CostSpec:
    weights = {
        "forward_velocity": 5.0,
        "lateral_velocity": 1.0,
        "height": 10.0,
        "upright": 5.0,
        "yaw_rate": 0.5,
        "control": 0.05,
    }
    weights.update(overrides.pop("weights", {}))
    terms = tuple(
        CostTerm(residual=name, weight=weights[name]) for name, _ in RESIDUAL_BLOCKS
    )
    return CostSpec(terms=terms, **overrides)


def tilt_sine(orientation_wxyz: np.ndarray) -> float:
    """Sine of the angle between the body z axis and world vertical."""
    w, x, y, z = orientation_wxyz
    # third column of the rotation matrix = body z in world coordinates
    bz_x = 2.0 * (x * z + w * y)
    bz_y = 2.0 * (y * z - w * x)
    return float(np.sqrt(bz_x * bz_x + bz_y * bz_y))


def residuals(
    state: RobotState,
    targets: np.ndarray,
    spec: CostSpec,
    terrain: TerrainSpec | None = None,
) -> np.ndarray:
    """Concatenated residual vector (17,), blocks per RESIDUAL_BLOCKS."""
    local_height = 0.0
    if terrain is not None:
        local_height, _, _ = terrain_sample(
            terrain, state.position[0], state.position[1]
        )
    r = np.empty(17)
    r[0] = state.linear_velocity[0] - spec.target_velocity
    r[1] = state.linear_velocity[1]
    r[2] = (state.position[2] - local_height) - spec.target_height
    r[3] = tilt_sine(state.orientation)
    r[4] = state.angular_velocity[2]
    r[5:17] = np.asarray(targets) - state.joint_angles
    return r


def _norm_value(block: np.ndarray, norm: str) -> float:
    if norm == QUADRATIC:
        total = 0.0
        for v in block:
            total += v * v
        return total
    total = 0.0
    for v in block:
        total += np.sqrt(v * v + SMOOTH_ABS_EPS**2) - SMOOTH_ABS_EPS
    return total


def step_cost(residual: np.ndarray, spec: CostSpec) -> float:
    """c = sum_i w_i * n_i(r_i) over the ordered residual blocks."""
    if residual.shape != (17,):
        raise ConfigError("residual vector must have 17 entries")
    cost = 0.0
    offset = 0
    for term, (_, length) in zip(spec.terms, RESIDUAL_BLOCKS):
        if term.weight < 0.0:
            raise ConfigError(f"negative weight for {term.residual!r}")
        block = residual[offset:offset + length]
        cost += term.weight * _norm_value(block, term.norm)
        offset += length
    return float(cost)
