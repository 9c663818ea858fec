"""Derivative-free predictive-sampling MPC."""

from .cost import (
    QUADRATIC,
    SMOOTH_ABS,
    CostSpec,
    CostTerm,
    default_cost_spec,
    residuals,
    step_cost,
    tilt_sine,
)
from .planner import (
    PlanOutcome,
    PlannerConfig,
    mpc_control_loop,
    plan_step,
    planning_terrain,
    propose_candidates,
    trajectory_cost,
)
from .spline import ActionSpline, constant_spline, shift_plan

__all__ = [
    "ActionSpline",
    "CostSpec",
    "CostTerm",
    "PlanOutcome",
    "PlannerConfig",
    "QUADRATIC",
    "SMOOTH_ABS",
    "constant_spline",
    "default_cost_spec",
    "mpc_control_loop",
    "plan_step",
    "planning_terrain",
    "propose_candidates",
    "residuals",
    "shift_plan",
    "step_cost",
    "tilt_sine",
    "trajectory_cost",
]
