"""Public simulator operations.

Thin wrappers over the JIT kernels: validation, dataclass packing, and error
translation happen here; the math lives in core.py. Every operation is a
pure function of its explicit inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import IntegrationBlowupError, InvalidStateError, QuadbenchError
from . import core
from .model import N_JOINTS, N_LEGS, NV, RobotModel, pack_model
from .state import STATE_DIM, RobotState
from .terrain import TerrainSpec


@dataclass(frozen=True)
class ExternalWrench:
    """A pure force applied at the robot's CoM inside a time window."""

    force: np.ndarray                   # (3,) N
    start_time: float = 0.0
    duration: float = np.inf

    def validate(self) -> None:
        if self.duration < 0.0:
            raise InvalidStateError("wrench duration must be >= 0")
        if not np.all(np.isfinite(self.force)):
            raise InvalidStateError("wrench force must be finite")

    def window(self) -> tuple[float, float]:
        return float(self.start_time), float(self.start_time + self.duration)


@dataclass(frozen=True)
class ContactPoint:
    foot_index: int
    position: np.ndarray                # (3,) world
    normal_force: float
    tangential_force: np.ndarray        # (2,) in the tangent-plane basis
    penetration: float


_NO_WRENCH = (np.zeros(3), 0.0, -1.0)


def _wrench_args(wrench: ExternalWrench | None):
    if wrench is None:
        return _NO_WRENCH
    wrench.validate()
    t0, t1 = wrench.window()
    return np.ascontiguousarray(wrench.force, dtype=np.float64), t0, t1


def _check_state(model: RobotModel, state: RobotState) -> None:
    state.validate()


def _fk_arrays(model, state):
    m = pack_model(model)
    arr = state.as_array()
    R = np.empty((13, 3, 3))
    coms = np.empty((13, 3))
    jor = np.empty((N_JOINTS, 3))
    jax = np.empty((N_JOINTS, 3))
    feet = np.empty((N_LEGS, 3))
    core._fk(m, arr[0:3], arr[3:7], arr[7:19], R, coms, jor, jax, feet)
    return m, arr, R, coms, jor, jax, feet


def mass_matrix(model: RobotModel, state: RobotState) -> np.ndarray:
    """Generalized inertia matrix (18x18) via the composite-rigid-body pass."""
    _check_state(model, state)
    m, arr, R, coms, jor, jax, _ = _fk_arrays(model, state)
    M = np.empty((NV, NV))
    core._crba(m, arr[0:3], R, coms, jor, jax, M)
    return M


def bias_forces(model: RobotModel, state: RobotState) -> np.ndarray:
    """Coriolis/centrifugal plus gravity terms: M qdd + bias = tau + J^T f."""
    _check_state(model, state)
    m, arr, R, coms, jor, jax, _ = _fk_arrays(model, state)
    Q = np.empty(NV)
    gvec = np.array([0.0, 0.0, -model.gravity])
    core._rnea(m, arr[0:3], R, coms, jor, jax, arr[19:37], np.zeros(NV), gvec, Q)
    return Q


def inverse_dynamics(
    model: RobotModel, state: RobotState, accel: np.ndarray
) -> np.ndarray:
    """Generalized force realizing `accel`, via one recursive Newton-Euler pass."""
    _check_state(model, state)
    accel = np.asarray(accel, dtype=np.float64)
    if accel.shape != (NV,) or not np.all(np.isfinite(accel)):
        raise InvalidStateError("acceleration must be a finite 18-vector")
    m, arr, R, coms, jor, jax, _ = _fk_arrays(model, state)
    Q = np.empty(NV)
    gvec = np.array([0.0, 0.0, -model.gravity])
    core._rnea(m, arr[0:3], R, coms, jor, jax, arr[19:37], accel, gvec, Q)
    return Q


def foot_positions(model: RobotModel, state: RobotState) -> np.ndarray:
    """World coordinates of the four foot centers, legs in FL, FR, RL, RR order."""
    _check_state(model, state)
    *_, feet = _fk_arrays(model, state)
    return feet


def link_frames(model: RobotModel, state: RobotState):
    """World rotations and CoM positions of all 13 bodies (base first)."""
    _check_state(model, state)
    _, _, R, coms, jor, jax, _ = _fk_arrays(model, state)
    return R, coms, jor, jax


def center_of_mass(model: RobotModel, state: RobotState) -> np.ndarray:
    _check_state(model, state)
    m, _, _, coms, _, _, _ = _fk_arrays(model, state)
    out = np.empty(3)
    core._total_com(m, coms, out)
    return out


def kinetic_energy(model: RobotModel, state: RobotState) -> float:
    u = state.generalized_velocity()
    return 0.5 * float(u @ mass_matrix(model, state) @ u)


def potential_energy(model: RobotModel, state: RobotState) -> float:
    m, _, _, coms, _, _, _ = _fk_arrays(model, state)
    masses = np.concatenate([[model.base_mass], model.link_masses.ravel()])
    return float(model.gravity * (masses * coms[:, 2]).sum())


def contact_forces(
    model: RobotModel, state: RobotState, terrain: TerrainSpec
) -> list[ContactPoint]:
    """Penalty contacts at the feet; feet above the terrain produce none."""
    _check_state(model, state)
    m, arr, R, coms, jor, jax, feet = _fk_arrays(model, state)
    terr = terrain.pack()
    forces = np.empty((N_LEGS, 3))
    infos = np.empty((N_LEGS, 4))
    core._foot_contacts(
        m, terr, arr[0:3], jor, jax, feet, arr[19:37],
        terrain.contact_damping, forces, infos,
    )
    points = []
    for leg in range(N_LEGS):
        if infos[leg, 3] > 0.0:
            points.append(
                ContactPoint(
                    foot_index=leg,
                    position=feet[leg].copy(),
                    normal_force=float(infos[leg, 0]),
                    tangential_force=infos[leg, 1:3].copy(),
                    penetration=float(infos[leg, 3]),
                )
            )
    return points


def pd_torques(
    model: RobotModel, state: RobotState, targets: np.ndarray
) -> np.ndarray:
    """Position-servo torques clamped to the actuator limits."""
    targets = np.asarray(targets, dtype=np.float64)
    if targets.shape != (N_JOINTS,) or not np.all(np.isfinite(targets)):
        raise InvalidStateError("targets must be a finite 12-vector")
    m = pack_model(model)
    tau = np.empty(N_JOINTS)
    core._pd_torques(m, state.joint_angles, state.joint_velocities, targets, tau)
    return tau


def forward_dynamics(
    model: RobotModel,
    state: RobotState,
    torques: np.ndarray,
    wrench: ExternalWrench | None = None,
    terrain: TerrainSpec | None = None,
) -> np.ndarray:
    """Generalized accelerations under joint torques, contacts, and wrench."""
    _check_state(model, state)
    torques = np.asarray(torques, dtype=np.float64)
    if torques.shape != (N_JOINTS,) or not np.all(np.isfinite(torques)):
        raise InvalidStateError("torques must be a finite 12-vector")
    terrain = terrain or TerrainSpec()
    m = pack_model(model)
    terr = terrain.pack()
    wf, wt0, wt1 = _wrench_args(wrench)
    udot = np.empty(NV)
    foot_forces = np.empty((N_LEGS, 3))
    foot_infos = np.empty((N_LEGS, 4))
    ok, _ = core._forward_dynamics(
        m, terr, state.as_array(), torques, wf, wt0, wt1,
        terrain.contact_damping, udot, foot_forces, foot_infos,
    )
    if not ok:
        raise QuadbenchError(
            "mass matrix is not positive definite; simulator state is corrupt"
        )
    return udot


@dataclass
class StepInfo:
    torques: np.ndarray                 # (12,) applied this step
    foot_normal_forces: np.ndarray      # (4,)
    nonfoot_contact: bool


def step(
    model: RobotModel,
    state: RobotState,
    targets: np.ndarray,
    wrench: ExternalWrench | None = None,
    terrain: TerrainSpec | None = None,
    dt: float = 1e-3,
    return_info: bool = False,
):
    """Semi-implicit Euler step driven by joint-position targets."""
    if not (0.0 < dt <= 5e-3):
        raise InvalidStateError("dt must be in (0, 5 ms]")
    _check_state(model, state)
    targets = np.asarray(targets, dtype=np.float64)
    if targets.shape != (N_JOINTS,) or not np.all(np.isfinite(targets)):
        raise InvalidStateError("targets must be a finite 12-vector")
    terrain = terrain or TerrainSpec()
    m = pack_model(model)
    terr = terrain.pack()
    wf, wt0, wt1 = _wrench_args(wrench)
    out = np.empty(STATE_DIM)
    tau = np.empty(N_JOINTS)
    foot_infos = np.empty((N_LEGS, 4))
    ok, touched = core._step(
        m, terr, state.as_array(), targets, wf, wt0, wt1, dt, out, tau,
        foot_infos,
    )
    if not ok:
        raise IntegrationBlowupError("integration blowup", time=state.time)
    new_state = RobotState.from_array(out)
    if return_info:
        info = StepInfo(
            torques=tau,
            foot_normal_forces=foot_infos[:, 0].copy(),
            nonfoot_contact=bool(touched),
        )
        return new_state, info
    return new_state


def rollout(
    model: RobotModel,
    state: RobotState,
    target_schedule,
    wrench: ExternalWrench | None = None,
    terrain: TerrainSpec | None = None,
    duration: float = 1.0,
    dt: float = 1e-3,
):
    """Step repeatedly; returns (states, torques) trajectories.

    `target_schedule` is either a constant 12-vector or a callable t -> targets.
    The trajectory has duration/dt + 1 states and duration/dt torque rows.
    """
    n = int(round(duration / dt))
    if n <= 0 or abs(n * dt - duration) > 1e-9:
        raise InvalidStateError("duration must be a positive multiple of dt")
    states = [state]
    torques = np.empty((n, N_JOINTS))
    cur = state
    for k in range(n):
        targets = (
            target_schedule(cur.time) if callable(target_schedule)
            else target_schedule
        )
        try:
            cur, info = step(
                model, cur, targets, wrench, terrain, dt, return_info=True
            )
        except IntegrationBlowupError:
            raise
        torques[k] = info.torques
        states.append(cur)
    return states, torques
