"""Articulated rigid-body quadruped simulator with penalty contact."""

from .api import (
    ContactPoint,
    ExternalWrench,
    StepInfo,
    bias_forces,
    center_of_mass,
    contact_forces,
    foot_positions,
    forward_dynamics,
    inverse_dynamics,
    kinetic_energy,
    link_frames,
    mass_matrix,
    pd_torques,
    potential_energy,
    rollout,
    step,
)
from .model import (
    JOINT_NAMES,
    LEG_NAMES,
    N_JOINTS,
    N_LEGS,
    NV,
    RobotModel,
    go1_like_model,
    pack_model,
)
from .state import STATE_DIM, RobotState, nominal_stance_state
from .terrain import (
    TerrainSpec,
    flat_terrain,
    heightfield_from_csv,
    heightfield_terrain,
    rough_terrain,
    terrain_sample,
)

__all__ = [
    "ContactPoint",
    "ExternalWrench",
    "JOINT_NAMES",
    "LEG_NAMES",
    "N_JOINTS",
    "N_LEGS",
    "NV",
    "RobotModel",
    "RobotState",
    "STATE_DIM",
    "StepInfo",
    "TerrainSpec",
    "bias_forces",
    "center_of_mass",
    "contact_forces",
    "flat_terrain",
    "foot_positions",
    "forward_dynamics",
    "go1_like_model",
    "heightfield_from_csv",
    "heightfield_terrain",
    "inverse_dynamics",
    "kinetic_energy",
    "link_frames",
    "mass_matrix",
    "nominal_stance_state",
    "pack_model",
    "pd_torques",
    "potential_energy",
    "rollout",
    "rough_terrain",
    "step",
    "terrain_sample",
]
