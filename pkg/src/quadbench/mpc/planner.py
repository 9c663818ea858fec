"""Predictive sampling: Gaussian candidate splines, elitist selection,
receding-horizon control loop."""

from __future__ import annotations

import dataclasses
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..benchmark.log import (
    EVENT_FAILURE,
    EVENT_PERTURBATION,
    EpisodeLog,
    Event,
    terrain_hash,
)
from ..errors import ConfigError, IntegrationBlowupError, InvalidStateError
from ..simulator import (
    ExternalWrench,
    RobotModel,
    RobotState,
    TerrainSpec,
    contact_forces,
    pd_torques,
)
from ..simulator import core
from ..simulator.model import pack_model
from .cost import CostSpec, default_cost_spec
from .spline import ActionSpline, constant_spline, shift_plan


@dataclass(frozen=True)
class PlannerConfig:
    horizon: float = 0.5           # s
    rollout_dt: float = 5e-3       # s, integer multiple of physics_dt
    physics_dt: float = 1e-3       # s
    candidates: int = 32           # K
    noise_scale: float = 0.05      # rad, Gaussian std per knot per joint
    replan_period: float = 0.02    # s
    knots: int = 4
    # soften planner-rollout contact stiffness by (physics_dt/rollout_dt)^2 so
    # coarse rollouts stay in the integrator's stable region
    contact_softening: bool = True

    def validate(self) -> None:
        if self.horizon < 0.0:
            raise ConfigError("horizon must be >= 0")
        if self.candidates < 0:
            raise ConfigError("candidate count must be >= 0")
        if self.noise_scale < 0.0:
            raise ConfigError("noise scale must be >= 0")
        if self.replan_period < self.physics_dt:
            raise ConfigError("replan period must be >= physics dt")
        if self.rollout_dt < self.physics_dt:
            raise ConfigError("rollout dt must be >= physics dt")
        if self.knots < 2:
            raise ConfigError("need at least two knots")


@dataclass
class PlanOutcome:
    spline: ActionSpline
    cost: float
    nominal_cost: float
    candidate_costs: np.ndarray
    planning_time: float
    chosen_index: int              # -1 for the nominal


def planning_terrain(terrain: TerrainSpec, config: PlannerConfig) -> TerrainSpec:
    """Terrain used inside rollouts; contact softened for coarse timesteps."""
    if not config.contact_softening or config.rollout_dt <= config.physics_dt:
        return terrain
    scale = (config.physics_dt / config.rollout_dt) ** 2
    return dataclasses.replace(
        terrain, contact_stiffness=terrain.contact_stiffness * scale
    )


def trajectory_cost(
    model: RobotModel,
    state: RobotState,
    spline: ActionSpline,
    terrain: TerrainSpec,
    config: PlannerConfig,
    spec: CostSpec,
) -> float:
    """Roll the spline out at the planner timestep and sum step costs.

    Diverging rollouts cost infinity instead of raising: bad candidates lose,
    they do not crash the planner.
    """
    config.validate()
    if spline.times[0] > state.time + 1e-9:
        raise InvalidStateError("spline does not cover the rollout start")
    if spline.times[-1] < state.time + config.horizon - 1e-9:
        raise InvalidStateError("spline does not cover the rollout horizon")
    m = pack_model(model)
    terr = planning_terrain(terrain, config).pack()
    return float(
        core._trajectory_cost(
            m,
            terr,
            state.as_array(),
            np.ascontiguousarray(spline.times),
            np.ascontiguousarray(spline.values),
            config.horizon,
            config.rollout_dt,
            spec.weights_array(),
            spec.norms_array(),
            spec.target_velocity,
            spec.target_height,
        )
    )


def propose_candidates(
    nominal: ActionSpline,
    count: int,
    noise_scale: float,
    rng: np.random.Generator,
    joint_limits: np.ndarray,
) -> list[ActionSpline]:
    """Nominal knots plus i.i.d. Gaussian noise, clamped to joint limits."""
    if count < 0:
        raise ConfigError("candidate count must be >= 0")
    lo, hi = joint_limits[:, 0], joint_limits[:, 1]
    noise = rng.normal(0.0, noise_scale, size=(count,) + nominal.values.shape)
    candidates = []
    for k in range(count):
        values = np.clip(nominal.values + noise[k], lo, hi)
        candidates.append(ActionSpline(times=nominal.times.copy(), values=values))
    return candidates


def _evaluate_candidate_costs(model, state, splines, terrain, config, spec,
                              parallel, workers):
    if not parallel:
        return [
            trajectory_cost(model, state, s, terrain, config, spec)
            for s in splines
        ]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(trajectory_cost, model, state, s, terrain, config, spec)
            for s in splines
        ]
        return [f.result() for f in futures]


def plan_step(
    model: RobotModel,
    state: RobotState,
    nominal: ActionSpline,
    config: PlannerConfig,
    spec: CostSpec,
    terrain: TerrainSpec,
    rng: np.random.Generator,
    parallel: bool = False,
    workers: int = 4,
) -> PlanOutcome:
    """Evaluate nominal + K noisy candidates from the same state, keep the best.

    The nominal always competes, so the chosen cost never exceeds the nominal
    cost (elitism). Ties prefer the nominal, then the lowest candidate index,
    making the reduction order-independent.
    """
    start = time.perf_counter()
    nominal.validate(model.joint_limits)
    candidates = propose_candidates(
        nominal, config.candidates, config.noise_scale, rng, model.joint_limits
    )
    costs = _evaluate_candidate_costs(
        model, state, [nominal] + candidates, terrain, config, spec,
        parallel, workers,
    )
    nominal_cost = costs[0]
    chosen_index = -1
    chosen_cost = nominal_cost
    for i, cost in enumerate(costs[1:]):
        if cost < chosen_cost:
            chosen_cost = cost
            chosen_index = i
    chosen = nominal if chosen_index < 0 else candidates[chosen_index]
    return PlanOutcome(
        spline=chosen,
        cost=chosen_cost,
        nominal_cost=nominal_cost,
        candidate_costs=np.array(costs[1:]),
        planning_time=time.perf_counter() - start,
        chosen_index=chosen_index,
    )


def mpc_control_loop(
    model: RobotModel,
    initial_state: RobotState,
    config: PlannerConfig,
    spec: CostSpec | None = None,
    terrain: TerrainSpec | None = None,
    duration: float = 10.0,
    wrench: ExternalWrench | None = None,
    seed: int = 0,
    log_period: float | None = None,
    parallel: bool = False,
    workers: int = 4,
) -> EpisodeLog:
    """Receding-horizon loop: replan, then track the plan at the physics rate.

    Failures (non-foot ground contact) are recorded as events and the loop
    keeps running; recovery behavior is part of what the benchmark measures.
    """
    config.validate()
    spec = spec or default_cost_spec()
    terrain = terrain or TerrainSpec()
    if duration <= 0.0:
        raise ConfigError("duration must be positive")
    log_period = log_period or config.replan_period
    steps_per_period = int(round(config.replan_period / config.physics_dt))
    n_periods = int(round(duration / config.replan_period))
    rng = np.random.default_rng(seed)

    m = pack_model(model)
    terr = terrain.pack()
    if wrench is None:
        wf, wt0, wt1 = np.zeros(3), 0.0, -1.0
    else:
        wrench.validate()
        wf = np.ascontiguousarray(wrench.force, dtype=np.float64)
        wt0, wt1 = wrench.window()

    state = initial_state.copy()
    nominal = constant_spline(
        model.stance_angles, state.time, config.horizon, config.knots
    )

    rows = []
    events: list[Event] = []
    plan_costs = []
    failed = False
    plan_cost = np.nan
    arr = state.as_array()
    out = np.empty(core.STATE_DIM)

    def log_row(s: RobotState, targets: np.ndarray, cost: float):
        tau = pd_torques(model, s, targets)
        normals = np.zeros(4)
        for point in contact_forces(model, s, terrain):
            normals[point.foot_index] = point.normal_force
        code = 0
        if wrench is not None and wt0 <= s.time < wt1:
            code |= EVENT_PERTURBATION
        if failed:
            code |= EVENT_FAILURE
        rows.append((s.time, s, targets, tau, normals, code))
        plan_costs.append(cost)

    for period in range(n_periods):
        state = RobotState.from_array(arr)
        nominal = shift_plan(nominal, state.time)
        outcome = plan_step(
            model, state, nominal, config, spec, terrain, rng,
            parallel=parallel, workers=workers,
        )
        nominal = outcome.spline
        plan_cost = outcome.cost
        targets_now = nominal.evaluate(state.time)
        log_row(state, targets_now, plan_cost)

        ok, fail, fail_time, _ = core._advance(
            m, terr, arr,
            np.ascontiguousarray(nominal.times),
            np.ascontiguousarray(nominal.values),
            steps_per_period, config.physics_dt, wf, wt0, wt1, out,
        )
        if fail and not failed:
            failed = True
            events.append(Event(time=float(fail_time), kind="failure"))
        if not ok:
            raise IntegrationBlowupError("mpc rollout blowup", time=float(out[37]))
        arr[:] = out

    state = RobotState.from_array(arr)
    log_row(state, nominal.evaluate(state.time), plan_cost)

    if wrench is not None:
        events.append(Event(time=wt0, kind="perturbation_start"))
        events.append(Event(time=wt1, kind="perturbation_end"))
        events.sort(key=lambda e: e.time)

    times = np.array([r[0] for r in rows])
    log = EpisodeLog(
        times=times,
        positions=np.array([r[1].position for r in rows]),
        orientations=np.array([r[1].orientation for r in rows]),
        joint_angles=np.array([r[1].joint_angles for r in rows]),
        linear_velocities=np.array([r[1].linear_velocity for r in rows]),
        angular_velocities=np.array([r[1].angular_velocity for r in rows]),
        joint_velocities=np.array([r[1].joint_velocities for r in rows]),
        targets=np.array([r[2] for r in rows]),
        torques=np.array([r[3] for r in rows]),
        foot_normals=np.array([r[4] for r in rows]),
        event_codes=np.array([r[5] for r in rows], dtype=int),
        events=events,
        metadata={
            "controller": "mpc",
            "seed": str(seed),
            "duration": repr(float(duration)),
            "log_period": repr(float(log_period)),
            "terrain_hash": terrain_hash(terrain),
        },
        plan_costs=np.array(plan_costs),
    )
    log.validate()
    return log
