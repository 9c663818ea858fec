"""Simulator oracle suite: kinematics, dynamics, contacts, integration."""

import dataclasses

import numpy as np
import pytest

from quadbench.errors import IntegrationBlowupError, InvalidStateError
from quadbench.simulator import (
    ExternalWrench,
    RobotState,
    bias_forces,
    contact_forces,
    flat_terrain,
    foot_positions,
    forward_dynamics,
    go1_like_model,
    heightfield_terrain,
    inverse_dynamics,
    kinetic_energy,
    mass_matrix,
    nominal_stance_state,
    pd_torques,
    potential_energy,
    rollout,
    step,
    terrain_sample,
)
from oracles import (
    finite_difference_mass_matrix_rate,
    hand_forward_kinematics_zero,
    per_link_kinetic_energy,
    random_state,
)

MODEL = go1_like_model()
TERRAIN = flat_terrain()


@pytest.fixture(scope="module")
def settled_stance():
    """Stance state after the initial servo sag has died out."""
    state = nominal_stance_state(MODEL)
    for _ in range(2000):
        state = step(MODEL, state, MODEL.stance_angles, terrain=TERRAIN)
    return state


# ---------------------------------------------------------------------------
# model and state validation


def test_model_invariants():
    MODEL.validate()
    assert abs(MODEL.total_mass - 12.0) < 1e-9


def test_model_rejects_broken_mass_budget():
    bad = dataclasses.replace(MODEL, base_mass=MODEL.base_mass + 0.5)
    with pytest.raises(InvalidStateError):
        bad.validate()


def test_model_rejects_asymmetric_legs():
    hips = MODEL.hip_offsets.copy()
    hips[1, 0] += 0.01
    bad = dataclasses.replace(MODEL, hip_offsets=hips)
    with pytest.raises(InvalidStateError):
        bad.validate()


def test_state_rejects_nonfinite():
    state = nominal_stance_state(MODEL)
    state.joint_velocities[3] = np.nan
    with pytest.raises(InvalidStateError):
        mass_matrix(MODEL, state)


def test_state_rejects_denormalized_quaternion():
    state = nominal_stance_state(MODEL)
    state.orientation = state.orientation * 1.001
    with pytest.raises(InvalidStateError):
        bias_forces(MODEL, state)


# ---------------------------------------------------------------------------
# mass matrix


def test_mass_matrix_symmetry_and_spd():
    rng = np.random.default_rng(1)
    for _ in range(100):
        M = mass_matrix(MODEL, random_state(rng))
        assert np.abs(M - M.T).max() < 1e-10
        assert np.linalg.eigvalsh(M).min() > 0.0


def test_mass_matrix_matches_per_link_kinetic_energy():
    rng = np.random.default_rng(2)
    for _ in range(25):
        state = random_state(rng)
        ke = kinetic_energy(MODEL, state)
        assert ke == pytest.approx(per_link_kinetic_energy(MODEL, state), abs=1e-8)


# ---------------------------------------------------------------------------
# bias forces


def test_bias_at_rest_is_pure_gravity():
    rng = np.random.default_rng(3)
    for _ in range(10):
        state = random_state(rng)
        state.linear_velocity[:] = 0.0
        state.angular_velocity[:] = 0.0
        state.joint_velocities[:] = 0.0
        bias = bias_forces(MODEL, state)
        assert np.linalg.norm(bias[0:3]) == pytest.approx(
            MODEL.total_mass * MODEL.gravity, rel=1e-12
        )


def test_bias_gravity_moments_at_zero_angles():
    state = nominal_stance_state(MODEL)
    state.position = np.array([0.0, 0.0, 1.0])
    state.joint_angles = np.zeros(12)
    bias = bias_forces(MODEL, state)
    g = MODEL.gravity
    for leg in range(4):
        sy = MODEL.hip_offsets[leg, 1] / abs(MODEL.hip_offsets[leg, 1])
        hip_m, thigh_m, shank_m = MODEL.link_masses[leg]
        # hanging legs: weight below a lateral offset loads only the abduction
        # joint; holding torque opposes gravity's moment about the x axis
        expected_abd = sy * g * (
            hip_m * abs(MODEL.link_com_offsets[leg, 0, 1])
            + (thigh_m + shank_m) * abs(MODEL.abduction_offsets[leg, 1])
        )
        assert bias[6 + 3 * leg] == pytest.approx(expected_abd, abs=1e-10)
        assert bias[6 + 3 * leg + 1] == pytest.approx(0.0, abs=1e-10)
        assert bias[6 + 3 * leg + 2] == pytest.approx(0.0, abs=1e-10)


def test_passivity_identity():
    rng = np.random.default_rng(4)
    for _ in range(10):
        state = random_state(rng)
        u = state.generalized_velocity()
        mdot = finite_difference_mass_matrix_rate(MODEL, state)
        rest = state.copy()
        rest.linear_velocity = np.zeros(3)
        rest.angular_velocity = np.zeros(3)
        rest.joint_velocities = np.zeros(12)
        coriolis = bias_forces(MODEL, state) - bias_forces(MODEL, rest)
        assert abs(0.5 * u @ mdot @ u - u @ coriolis) < 1e-6


# ---------------------------------------------------------------------------
# forward kinematics


def test_feet_translate_with_base():
    rng = np.random.default_rng(5)
    state = random_state(rng)
    feet = foot_positions(MODEL, state)
    shifted = state.copy()
    d = np.array([0.3, -0.2, 0.5])
    shifted.position = state.position + d
    assert np.allclose(foot_positions(MODEL, shifted), feet + d, atol=1e-12)


def test_feet_at_zero_angles_match_hand_kinematics():
    state = nominal_stance_state(MODEL)
    state.position = np.array([0.1, -0.2, 1.0])
    state.joint_angles = np.zeros(12)
    feet = foot_positions(MODEL, state)
    assert np.allclose(
        feet, hand_forward_kinematics_zero(MODEL, state.position), atol=1e-12
    )


def test_mirrored_angles_mirror_feet():
    state = nominal_stance_state(MODEL)
    q = np.zeros(12)
    q[0:3] = [0.3, 0.7, -1.2]    # FL
    q[3:6] = [-0.3, 0.7, -1.2]   # FR mirrors abduction sign
    state.joint_angles = q
    feet = foot_positions(MODEL, state)
    assert feet[0, 0] == pytest.approx(feet[1, 0], abs=1e-12)
    assert feet[0, 1] == pytest.approx(-feet[1, 1], abs=1e-12)
    assert feet[0, 2] == pytest.approx(feet[1, 2], abs=1e-12)


# ---------------------------------------------------------------------------
# contacts


def test_feet_above_terrain_no_contact():
    state = nominal_stance_state(MODEL)
    state.position = state.position + np.array([0.0, 0.0, 0.5])
    assert contact_forces(MODEL, state, TERRAIN) == []


def test_static_penetration_force():
    # zero angles hang the legs straight down; place the feet 1 mm deep
    state = nominal_stance_state(MODEL)
    state.joint_angles = np.zeros(12)
    drop = MODEL.link_lengths[0, 1] + MODEL.link_lengths[0, 2]
    state.position = np.array([0.0, 0.0, drop + MODEL.foot_radius - 1e-3])
    points = contact_forces(MODEL, state, flat_terrain(contact_stiffness=30000.0))
    assert len(points) == 4
    for point in points:
        assert point.normal_force == pytest.approx(30.0, rel=1e-9)
        assert point.penetration == pytest.approx(1e-3, rel=1e-9)


def test_friction_cone_never_violated():
    rng = np.random.default_rng(6)
    for _ in range(50):
        state = random_state(rng, height=0.2)
        points = contact_forces(MODEL, state, TERRAIN)
        for point in points:
            tangential = np.linalg.norm(point.tangential_force)
            assert tangential <= TERRAIN.friction * point.normal_force + 1e-9


# ---------------------------------------------------------------------------
# PD actuation


def test_pd_zero_error_zero_torque():
    state = nominal_stance_state(MODEL)
    tau = pd_torques(MODEL, state, state.joint_angles)
    assert np.all(tau == 0.0)


def test_pd_saturation():
    state = nominal_stance_state(MODEL)
    targets = state.joint_angles + 10.0
    tau = pd_torques(MODEL, state, targets)
    assert np.all(tau == MODEL.torque_limit)


def test_pd_linearity_below_saturation():
    state = nominal_stance_state(MODEL)
    err = np.full(12, 0.1)
    tau1 = pd_torques(MODEL, state, state.joint_angles + err)
    tau2 = pd_torques(MODEL, state, state.joint_angles + 2 * err)
    assert np.allclose(tau2, 2 * tau1, atol=1e-12)


# ---------------------------------------------------------------------------
# forward dynamics


def test_free_fall():
    state = nominal_stance_state(MODEL)
    state.position = state.position + np.array([0.0, 0.0, 3.0])
    udot = forward_dynamics(MODEL, state, np.zeros(12), terrain=TERRAIN)
    expected = np.zeros(18)
    expected[2] = -MODEL.gravity
    assert np.allclose(udot, expected, atol=1e-8)


def test_com_wrench_newton():
    state = nominal_stance_state(MODEL)
    state.position = state.position + np.array([0.0, 0.0, 3.0])
    base = forward_dynamics(MODEL, state, np.zeros(12), terrain=TERRAIN)
    wrench = ExternalWrench(force=np.array([30.0, 0.0, 0.0]))
    pushed = forward_dynamics(MODEL, state, np.zeros(12), wrench, TERRAIN)
    delta = pushed - base
    assert delta[0] == pytest.approx(30.0 / 12.0, rel=1e-12)
    assert np.abs(np.delete(delta, 0)).max() < 1e-10


def test_inverse_dynamics_round_trip():
    rng = np.random.default_rng(7)
    for _ in range(20):
        state = random_state(rng)
        tau_gen = rng.uniform(-10.0, 10.0, 18)
        M = mass_matrix(MODEL, state)
        udot = np.linalg.solve(M, tau_gen - bias_forces(MODEL, state))
        recovered = inverse_dynamics(MODEL, state, udot)
        rel = np.abs(recovered - tau_gen).max() / max(1.0, np.abs(tau_gen).max())
        assert rel < 1e-6


# ---------------------------------------------------------------------------
# stepping


def test_step_deterministic():
    state = nominal_stance_state(MODEL)
    a = step(MODEL, state, MODEL.stance_angles, terrain=TERRAIN)
    b = step(MODEL, state, MODEL.stance_angles, terrain=TERRAIN)
    assert np.array_equal(a.as_array(), b.as_array())


def test_step_rejects_bad_dt():
    state = nominal_stance_state(MODEL)
    with pytest.raises(InvalidStateError):
        step(MODEL, state, MODEL.stance_angles, dt=6e-3)


def test_stance_height_drift(settled_stance):
    state = settled_stance
    z0 = state.position[2]
    for _ in range(1000):
        state = step(MODEL, state, MODEL.stance_angles, terrain=TERRAIN)
    assert abs(state.position[2] - z0) < 2e-3


def test_contact_free_energy_drift():
    passive = dataclasses.replace(MODEL, kp=np.zeros(12), kd=np.zeros(12))
    state = nominal_stance_state(passive)
    state.position = state.position + np.array([0.0, 0.0, 5.5])
    state.joint_angles = np.tile([0.3, 1.4, -1.0], 4)

    def total_energy(s):
        return kinetic_energy(passive, s) + potential_energy(passive, s)

    e0 = total_energy(state)
    drifts = []
    for dt in (1e-3, 5e-4):
        states, _ = rollout(
            passive, state, np.zeros(12), terrain=TERRAIN, duration=1.0, dt=dt
        )
        drifts.append(abs(total_energy(states[-1]) - e0))
    assert drifts[0] < 0.01 * abs(e0)
    # first-order integrator: halving dt roughly halves the drift
    assert drifts[1] < 0.75 * drifts[0]


def test_quaternion_stays_normalized():
    rng = np.random.default_rng(8)
    state = random_state(rng, height=0.5)
    for _ in range(200):
        state = step(MODEL, state, MODEL.stance_angles, terrain=TERRAIN)
        assert abs(np.linalg.norm(state.orientation) - 1.0) < 1e-9


def test_integration_blowup_reports_time():
    state = nominal_stance_state(MODEL)
    state.linear_velocity = np.array([2e6, 0.0, 0.0])
    state.time = 1.25
    with pytest.raises(IntegrationBlowupError) as err:
        for _ in range(10):
            state = step(MODEL, state, MODEL.stance_angles, terrain=TERRAIN)
    assert err.value.time >= 1.25


# ---------------------------------------------------------------------------
# rollout


def test_rollout_base_case():
    state = nominal_stance_state(MODEL)
    states, torques = rollout(
        MODEL, state, MODEL.stance_angles, terrain=TERRAIN, duration=1e-3, dt=1e-3
    )
    assert len(states) == 2
    direct = step(MODEL, state, MODEL.stance_angles, terrain=TERRAIN)
    assert np.array_equal(states[1].as_array(), direct.as_array())
    assert torques.shape == (1, 12)


def test_rollout_composition():
    state = nominal_stance_state(MODEL)
    full, _ = rollout(
        MODEL, state, MODEL.stance_angles, terrain=TERRAIN, duration=0.2, dt=1e-3
    )
    first, _ = rollout(
        MODEL, state, MODEL.stance_angles, terrain=TERRAIN, duration=0.1, dt=1e-3
    )
    second, _ = rollout(
        MODEL, first[-1], MODEL.stance_angles, terrain=TERRAIN,
        duration=0.1, dt=1e-3,
    )
    assert np.array_equal(full[-1].as_array(), second[-1].as_array())


def test_rollout_deterministic():
    state = nominal_stance_state(MODEL)
    a, ta = rollout(
        MODEL, state, MODEL.stance_angles, terrain=TERRAIN, duration=0.05, dt=1e-3
    )
    b, tb = rollout(
        MODEL, state, MODEL.stance_angles, terrain=TERRAIN, duration=0.05, dt=1e-3
    )
    assert np.array_equal(ta, tb)
    assert all(
        np.array_equal(x.as_array(), y.as_array()) for x, y in zip(a, b)
    )


# ---------------------------------------------------------------------------
# terrain


def test_zero_amplitude_heightfield_equals_flat():
    flat = flat_terrain()
    zero_field = heightfield_terrain(
        np.zeros((40, 40)), resolution=0.1, origin=(-2.0, -2.0)
    )
    assert terrain_sample(zero_field, 0.3, 0.7) == (0.0, 0.0, 0.0)
    state = nominal_stance_state(MODEL)
    for _ in range(50):
        a = step(MODEL, state, MODEL.stance_angles, terrain=flat)
        b = step(MODEL, state, MODEL.stance_angles, terrain=zero_field)
        assert np.array_equal(a.as_array(), b.as_array())
        state = a


def test_heightfield_interpolation():
    heights = np.array([[0.0, 0.1], [0.0, 0.1]])
    terr = heightfield_terrain(heights, resolution=1.0)
    h, dhdx, dhdy = terrain_sample(terr, 0.5, 0.5)
    assert h == pytest.approx(0.05)
    assert dhdx == pytest.approx(0.1)
    assert dhdy == pytest.approx(0.0)
