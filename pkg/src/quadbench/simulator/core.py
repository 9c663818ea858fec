"""Numba kernels for the quadruped dynamics.

Everything here works on plain float64 arrays (see model.pack_model and the
state layout in state.py) so the hot loops stay allocation-light and can be
JIT-compiled once per process. All kernels are pure functions of their
arguments; repeated invocation is bit-identical, and nogil compilation lets
the planner evaluate rollouts from worker threads.

Spatial quantities are expressed in the world frame at the base reference
point (the trunk CoM), which keeps the composite-inertia arithmetic well
conditioned regardless of how far the robot has walked.
"""

from __future__ import annotations

import numpy as np
from numba import njit

N_LEGS = 4
N_JOINTS = 12
NV = 18
STATE_DIM = 38

# Model tuple indices (must match model.pack_model ordering).
BM, BI, TH, HIP, ABD, LM, LC, LI, LL, FR, HR, JL, TL, KP, KD, GRAV = range(16)

# Terrain tuple indices (must match TerrainSpec.pack ordering).
T_MODE, T_MU, T_KN, T_CN, T_GRID, T_RES, T_ORG = range(7)

_JIT = dict(cache=True, nogil=True)


# ---------------------------------------------------------------------------
# small algebra helpers


@njit(**_JIT)
def _cross(a, b, out):
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]


@njit(**_JIT)
def _quat_to_mat(q, R):
    w, x, y, z = q[0], q[1], q[2], q[3]
    R[0, 0] = 1.0 - 2.0 * (y * y + z * z)
    R[0, 1] = 2.0 * (x * y - w * z)
    R[0, 2] = 2.0 * (x * z + w * y)
    R[1, 0] = 2.0 * (x * y + w * z)
    R[1, 1] = 1.0 - 2.0 * (x * x + z * z)
    R[1, 2] = 2.0 * (y * z - w * x)
    R[2, 0] = 2.0 * (x * z - w * y)
    R[2, 1] = 2.0 * (y * z + w * x)
    R[2, 2] = 1.0 - 2.0 * (x * x + y * y)


@njit(**_JIT)
def _quat_mul(a, b, out):
    out[0] = a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3]
    out[1] = a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2]
    out[2] = a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1]
    out[3] = a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0]


@njit(**_JIT)
def _quat_integrate(q, omega, dt, out):
    """out = exp(omega * dt) * q, renormalized (world-frame angular velocity)."""
    wx, wy, wz = omega[0] * dt, omega[1] * dt, omega[2] * dt
    angle = np.sqrt(wx * wx + wy * wy + wz * wz)
    dq = np.empty(4)
    if angle < 1e-12:
        dq[0] = 1.0
        dq[1] = 0.5 * wx
        dq[2] = 0.5 * wy
        dq[3] = 0.5 * wz
    else:
        half = 0.5 * angle
        s = np.sin(half) / angle
        dq[0] = np.cos(half)
        dq[1] = s * wx
        dq[2] = s * wy
        dq[3] = s * wz
    _quat_mul(dq, q, out)
    norm = np.sqrt(out[0] ** 2 + out[1] ** 2 + out[2] ** 2 + out[3] ** 2)
    for i in range(4):
        out[i] /= norm


@njit(**_JIT)
def _rot_x(theta, R):
    c, s = np.cos(theta), np.sin(theta)
    R[0, 0] = 1.0; R[0, 1] = 0.0; R[0, 2] = 0.0
    R[1, 0] = 0.0; R[1, 1] = c; R[1, 2] = -s
    R[2, 0] = 0.0; R[2, 1] = s; R[2, 2] = c


@njit(**_JIT)
def _rot_y(theta, R):
    c, s = np.cos(theta), np.sin(theta)
    R[0, 0] = c; R[0, 1] = 0.0; R[0, 2] = s
    R[1, 0] = 0.0; R[1, 1] = 1.0; R[1, 2] = 0.0
    R[2, 0] = -s; R[2, 1] = 0.0; R[2, 2] = c


@njit(**_JIT)
def _mat_mul(A, B, out):
    for i in range(3):
        for j in range(3):
            s = 0.0
            for k in range(3):
                s += A[i, k] * B[k, j]
            out[i, j] = s


@njit(**_JIT)
def _mat_vec(A, v, out):
    for i in range(3):
        out[i] = A[i, 0] * v[0] + A[i, 1] * v[1] + A[i, 2] * v[2]


@njit(**_JIT)
def _rotate_inertia(R, I, out):
    # out = R @ I @ R.T
    tmp = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            s = 0.0
            for k in range(3):
                s += R[i, k] * I[k, j]
            tmp[i, j] = s
    for i in range(3):
        for j in range(3):
            s = 0.0
            for k in range(3):
                s += tmp[i, k] * R[j, k]
            out[i, j] = s


@njit(**_JIT)
def _solve_spd(A, b, x):
    """Cholesky solve for symmetric positive definite A. Returns False if not SPD."""
    n = A.shape[0]
    L = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            s = A[i, j]
            for k in range(j):
                s -= L[i, k] * L[j, k]
            if i == j:
                if s <= 0.0 or not np.isfinite(s):
                    return False
                L[i, i] = np.sqrt(s)
            else:
                L[i, j] = s / L[j, j]
    for i in range(n):
        s = b[i]
        for k in range(i):
            s -= L[i, k] * x[k]
        x[i] = s / L[i, i]
    for i in range(n - 1, -1, -1):
        s = x[i]
        for k in range(i + 1, n):
            s -= L[k, i] * x[k]
        x[i] = s / L[i, i]
    return True


# ---------------------------------------------------------------------------
# kinematics
#
# Body indexing: 0 = base, then 1 + j where joint j = 3*leg + depth drives the
# link at that depth (0 = hip link, 1 = thigh, 2 = shank).


@njit(**_JIT)
def _fk(m, pos, quat, q, R, coms, jor, jax, feet):
    """World rotations, CoMs, joint origins/axes, and foot centers."""
    R0 = np.empty((3, 3))
    _quat_to_mat(quat, R0)
    for i in range(3):
        for j in range(3):
            R[0, i, j] = R0[i, j]
        coms[0, i] = pos[i]

    Rj = np.empty((3, 3))
    tmp3 = np.empty(3)
    off = np.empty(3)
    for leg in range(N_LEGS):
        # abduction joint: anchored to the trunk, axis = trunk x
        j0 = 3 * leg
        _mat_vec(R0, m[HIP][leg], tmp3)
        for i in range(3):
            jor[j0, i] = pos[i] + tmp3[i]
            jax[j0, i] = R0[i, 0]
        _rot_x(q[j0], Rj)
        b0 = 1 + j0
        _mat_mul(R0, Rj, R[b0])
        _mat_vec(R[b0], m[LC][leg, 0], tmp3)
        for i in range(3):
            coms[b0, i] = jor[j0, i] + tmp3[i]

        # hip flexion joint: anchored to the hip link, axis = hip-link y
        j1 = j0 + 1
        _mat_vec(R[b0], m[ABD][leg], tmp3)
        for i in range(3):
            jor[j1, i] = jor[j0, i] + tmp3[i]
            jax[j1, i] = R[b0, i, 1]
        _rot_y(q[j1], Rj)
        b1 = 1 + j1
        _mat_mul(R[b0], Rj, R[b1])
        _mat_vec(R[b1], m[LC][leg, 1], tmp3)
        for i in range(3):
            coms[b1, i] = jor[j1, i] + tmp3[i]

        # knee joint: anchored to the thigh, axis = thigh y
        j2 = j0 + 2
        off[0] = 0.0
        off[1] = 0.0
        off[2] = -m[LL][leg, 1]
        _mat_vec(R[b1], off, tmp3)
        for i in range(3):
            jor[j2, i] = jor[j1, i] + tmp3[i]
            jax[j2, i] = R[b1, i, 1]
        _rot_y(q[j2], Rj)
        b2 = 1 + j2
        _mat_mul(R[b1], Rj, R[b2])
        _mat_vec(R[b2], m[LC][leg, 2], tmp3)
        for i in range(3):
            coms[b2, i] = jor[j2, i] + tmp3[i]

        off[2] = -m[LL][leg, 2]
        _mat_vec(R[b2], off, tmp3)
        for i in range(3):
            feet[leg, i] = jor[j2, i] + tmp3[i]


@njit(**_JIT)
def _body_velocities(u, pos, coms, jor, jax, omg, vcom, vfoot, feet):
    """Per-body angular and CoM velocities, plus foot-center velocities."""
    for i in range(3):
        omg[0, i] = u[3 + i]
        vcom[0, i] = u[i]
    tmp = np.empty(3)
    d = np.empty(3)
    vjor = np.empty((3, 3))  # joint-origin velocities along the current chain
    for leg in range(N_LEGS):
        for depth in range(3):
            j = 3 * leg + depth
            b = 1 + j
            parent = 0 if depth == 0 else b - 1
            for i in range(3):
                omg[b, i] = omg[parent, i] + jax[j, i] * u[6 + j]
            if depth == 0:
                for i in range(3):
                    d[i] = jor[j, i] - pos[i]
                _cross(omg[0], d, tmp)
                for i in range(3):
                    vjor[0, i] = u[i] + tmp[i]
            else:
                for i in range(3):
                    d[i] = jor[j, i] - jor[j - 1, i]
                _cross(omg[parent], d, tmp)
                for i in range(3):
                    vjor[depth, i] = vjor[depth - 1, i] + tmp[i]
            for i in range(3):
                d[i] = coms[b, i] - jor[j, i]
            _cross(omg[b], d, tmp)
            for i in range(3):
                vcom[b, i] = vjor[depth, i] + tmp[i]
        j2 = 3 * leg + 2
        b2 = 1 + j2
        for i in range(3):
            d[i] = feet[leg, i] - jor[j2, i]
        _cross(omg[b2], d, tmp)
        for i in range(3):
            vfoot[leg, i] = vjor[2, i] + tmp[i]


# ---------------------------------------------------------------------------
# mass matrix via the composite-rigid-body procedure
#
# A spatial inertia about the base point p is kept as the block pair
# (A, B, mass) of [[A, B], [B^T, m*1]] acting on motion vectors (omega, v_p),
# with A = I_com_world - m*D@D and B = m*D for D = skew(com - p).


@njit(**_JIT)
def _spatial_inertia(mass, com, inertia_world, pos, A, B):
    d0 = com[0] - pos[0]
    d1 = com[1] - pos[1]
    d2 = com[2] - pos[2]
    # D @ D for D = skew(d)
    A[0, 0] = inertia_world[0, 0] - mass * (-d2 * d2 - d1 * d1)
    A[0, 1] = inertia_world[0, 1] - mass * (d0 * d1)
    A[0, 2] = inertia_world[0, 2] - mass * (d0 * d2)
    A[1, 0] = inertia_world[1, 0] - mass * (d0 * d1)
    A[1, 1] = inertia_world[1, 1] - mass * (-d2 * d2 - d0 * d0)
    A[1, 2] = inertia_world[1, 2] - mass * (d1 * d2)
    A[2, 0] = inertia_world[2, 0] - mass * (d0 * d2)
    A[2, 1] = inertia_world[2, 1] - mass * (d1 * d2)
    A[2, 2] = inertia_world[2, 2] - mass * (-d1 * d1 - d0 * d0)
    B[0, 0] = 0.0
    B[0, 1] = -mass * d2
    B[0, 2] = mass * d1
    B[1, 0] = mass * d2
    B[1, 1] = 0.0
    B[1, 2] = -mass * d0
    B[2, 0] = -mass * d1
    B[2, 1] = mass * d0
    B[2, 2] = 0.0


@njit(**_JIT)
def _crba(m, pos, R, coms, jor, jax, M):
    """Generalized inertia matrix (18x18), symmetric by construction."""
    M[:, :] = 0.0

    Iw = np.empty((3, 3))
    A = np.empty((N_LEGS, 3, 3, 3))  # per leg, per depth composite (tip-up)
    B = np.empty((N_LEGS, 3, 3, 3))
    mass_c = np.empty((N_LEGS, 3))
    Ab = np.empty((3, 3))
    Bb = np.empty((3, 3))

    # composite inertias per leg, accumulated from the shank upward
    for leg in range(N_LEGS):
        for depth in range(2, -1, -1):
            j = 3 * leg + depth
            b = 1 + j
            _rotate_inertia(R[b], m[LI][leg, depth], Iw)
            _spatial_inertia(m[LM][leg, depth], coms[b], Iw, pos, Ab, Bb)
            if depth == 2:
                for i in range(3):
                    for k in range(3):
                        A[leg, depth, i, k] = Ab[i, k]
                        B[leg, depth, i, k] = Bb[i, k]
                mass_c[leg, depth] = m[LM][leg, depth]
            else:
                for i in range(3):
                    for k in range(3):
                        A[leg, depth, i, k] = A[leg, depth + 1, i, k] + Ab[i, k]
                        B[leg, depth, i, k] = B[leg, depth + 1, i, k] + Bb[i, k]
                mass_c[leg, depth] = mass_c[leg, depth + 1] + m[LM][leg, depth]

    # whole-robot composite for the floating-base block
    _rotate_inertia(R[0], m[BI], Iw)
    _spatial_inertia(m[BM], coms[0], Iw, pos, Ab, Bb)
    At = Ab.copy()
    Bt = Bb.copy()
    mt = m[BM]
    for leg in range(N_LEGS):
        for i in range(3):
            for k in range(3):
                At[i, k] += A[leg, 0, i, k]
                Bt[i, k] += B[leg, 0, i, k]
        mt += mass_c[leg, 0]

    for i in range(3):
        M[i, i] = mt
        for k in range(3):
            M[i, 3 + k] = Bt[k, i]   # B^T
            M[3 + i, k] = Bt[i, k]
            M[3 + i, 3 + k] = At[i, k]

    # joint columns
    Sw = np.empty(3)  # linear part of a joint's spatial axis at p
    d = np.empty(3)
    ISa = np.empty(3)  # angular rows of I_C @ S
    ISl = np.empty(3)  # linear rows of I_C @ S
    a2 = np.empty(3)
    w2 = np.empty(3)
    for leg in range(N_LEGS):
        for depth in range(3):
            j = 3 * leg + depth
            for i in range(3):
                d[i] = jor[j, i] - pos[i]
            _cross(d, jax[j], Sw)
            # I_C(j) @ S_j with the composite rooted at this joint's body
            for i in range(3):
                sa = 0.0
                sl = 0.0
                for k in range(3):
                    sa += A[leg, depth, i, k] * jax[j, k] + B[leg, depth, i, k] * Sw[k]
                    sl += B[leg, depth, k, i] * jax[j, k]  # B^T
                ISa[i] = sa
                ISl[i] = sl + mass_c[leg, depth] * Sw[i]
            # base coupling
            for i in range(3):
                M[i, 6 + j] = ISl[i]
                M[6 + j, i] = ISl[i]
                M[3 + i, 6 + j] = ISa[i]
                M[6 + j, 3 + i] = ISa[i]
            # same-leg joint coupling (ancestor depth <= this depth)
            for depth2 in range(depth + 1):
                j2 = 3 * leg + depth2
                for i in range(3):
                    d[i] = jor[j2, i] - pos[i]
                    a2[i] = jax[j2, i]
                _cross(d, a2, w2)
                val = 0.0
                for i in range(3):
                    val += a2[i] * ISa[i] + w2[i] * ISl[i]
                M[6 + j2, 6 + j] = val
                M[6 + j, 6 + j2] = val


# ---------------------------------------------------------------------------
# recursive Newton-Euler: generalized force required to realize (u, udot)


@njit(**_JIT)
def _rnea(m, pos, R, coms, jor, jax, u, udot, gvec, Q):
    """Q = M(q) udot + C(q,u) u + G(q) under gravity field gvec."""
    omg = np.empty((13, 3))
    alp = np.empty((13, 3))
    acom = np.empty((13, 3))
    vjor = np.empty((3, 3))
    ajor = np.empty((3, 3))
    tmp = np.empty(3)
    tmp2 = np.empty(3)
    tmp3 = np.empty(3)
    d = np.empty(3)

    for i in range(3):
        omg[0, i] = u[3 + i]
        alp[0, i] = udot[3 + i]
        acom[0, i] = udot[i]

    for leg in range(N_LEGS):
        for depth in range(3):
            j = 3 * leg + depth
            b = 1 + j
            parent = 0 if depth == 0 else b - 1
            # joint origin velocity/acceleration as a point of the parent
            if depth == 0:
                for i in range(3):
                    d[i] = jor[j, i] - pos[i]
                _cross(omg[0], d, tmp)
                for i in range(3):
                    vjor[0, i] = u[i] + tmp[i]
                _cross(alp[0], d, tmp)
                _cross(omg[0], d, tmp2)
                _cross(omg[0], tmp2, tmp3)
                for i in range(3):
                    ajor[0, i] = udot[i] + tmp[i] + tmp3[i]
            else:
                for i in range(3):
                    d[i] = jor[j, i] - jor[j - 1, i]
                _cross(omg[parent], d, tmp)
                for i in range(3):
                    vjor[depth, i] = vjor[depth - 1, i] + tmp[i]
                _cross(alp[parent], d, tmp)
                _cross(omg[parent], d, tmp2)
                _cross(omg[parent], tmp2, tmp3)
                for i in range(3):
                    ajor[depth, i] = ajor[depth - 1, i] + tmp[i] + tmp3[i]
            # body angular velocity/acceleration
            qd = u[6 + j]
            qdd = udot[6 + j]
            _cross(omg[parent], jax[j], tmp)
            for i in range(3):
                omg[b, i] = omg[parent, i] + jax[j, i] * qd
                alp[b, i] = alp[parent, i] + jax[j, i] * qdd + tmp[i] * qd
            # CoM acceleration
            for i in range(3):
                d[i] = coms[b, i] - jor[j, i]
            _cross(alp[b], d, tmp)
            _cross(omg[b], d, tmp2)
            _cross(omg[b], tmp2, tmp3)
            for i in range(3):
                acom[b, i] = ajor[depth, i] + tmp[i] + tmp3[i]

    # net required force (minus gravity) and moment about each body CoM
    F = np.empty((13, 3))
    N = np.empty((13, 3))
    Iw = np.empty((3, 3))
    for b in range(13):
        if b == 0:
            mass = m[BM]
            _rotate_inertia(R[0], m[BI], Iw)
        else:
            leg = (b - 1) // 3
            depth = (b - 1) % 3
            mass = m[LM][leg, depth]
            _rotate_inertia(R[b], m[LI][leg, depth], Iw)
        for i in range(3):
            F[b, i] = mass * (acom[b, i] - gvec[i])
        _mat_vec(Iw, omg[b], tmp)
        _cross(omg[b], tmp, tmp2)
        _mat_vec(Iw, alp[b], tmp)
        for i in range(3):
            N[b, i] = tmp[i] + tmp2[i]

    # backward pass: transmitted forces and joint torques
    f0 = np.zeros(3)
    n0 = np.zeros(3)
    for i in range(3):
        f0[i] = F[0, i]
        n0[i] = N[0, i]  # base CoM coincides with pos
    fch = np.empty(3)
    nch = np.empty(3)
    for leg in range(N_LEGS):
        for i in range(3):
            fch[i] = 0.0
            nch[i] = 0.0
        for depth in range(2, -1, -1):
            j = 3 * leg + depth
            b = 1 + j
            # moment of child chain about this joint origin
            if depth < 2:
                for i in range(3):
                    d[i] = jor[j + 1, i] - jor[j, i]
                _cross(d, fch, tmp)
                for i in range(3):
                    nch[i] += tmp[i]
            for i in range(3):
                d[i] = coms[b, i] - jor[j, i]
            _cross(d, F[b], tmp)
            for i in range(3):
                nch[i] += N[b, i] + tmp[i]
                fch[i] += F[b, i]
            Q[6 + j] = jax[j, 0] * nch[0] + jax[j, 1] * nch[1] + jax[j, 2] * nch[2]
        # fold the whole leg into the base
        j0 = 3 * leg
        for i in range(3):
            d[i] = jor[j0, i] - pos[i]
        _cross(d, fch, tmp)
        for i in range(3):
            f0[i] += fch[i]
            n0[i] += nch[i] + tmp[i]
    for i in range(3):
        Q[i] = f0[i]
        Q[3 + i] = n0[i]


# ---------------------------------------------------------------------------
# terrain + contacts


@njit(**_JIT)
def _terrain_sample(mode, grid, res, org, x, y):
    """Height and gradient at (x, y); bilinear with clamped edges."""
    if mode == 0:
        return 0.0, 0.0, 0.0
    rows, cols = grid.shape
    gx = (x - org[0]) / res
    gy = (y - org[1]) / res
    if gx < 0.0:
        gx = 0.0
    elif gx > cols - 1.0:
        gx = cols - 1.0
    if gy < 0.0:
        gy = 0.0
    elif gy > rows - 1.0:
        gy = rows - 1.0
    if cols == 1 or rows == 1:
        return grid[int(gy), int(gx)], 0.0, 0.0
    i0 = int(gx)
    if i0 > cols - 2:
        i0 = cols - 2
    j0 = int(gy)
    if j0 > rows - 2:
        j0 = rows - 2
    fx = gx - i0
    fy = gy - j0
    h00 = grid[j0, i0]
    h10 = grid[j0, i0 + 1]
    h01 = grid[j0 + 1, i0]
    h11 = grid[j0 + 1, i0 + 1]
    h = (1 - fx) * (1 - fy) * h00 + fx * (1 - fy) * h10 \
        + (1 - fx) * fy * h01 + fx * fy * h11
    dhdx = ((1 - fy) * (h10 - h00) + fy * (h11 - h01)) / res
    dhdy = ((1 - fx) * (h01 - h00) + fx * (h11 - h10)) / res
    return h, dhdx, dhdy


@njit(**_JIT)
def _point_contact(terr, x, v, radius, c_damp, force, info):
    """Penalty contact for a sphere of `radius` at point x with velocity v.

    Writes the world force into `force` and (normal magnitude, tangential t1,
    tangential t2, penetration) into `info`. Returns True if in contact.
    """
    h, dhdx, dhdy = _terrain_sample(terr[T_MODE], terr[T_GRID], terr[T_RES],
                                    terr[T_ORG], x[0], x[1])
    gap = x[2] - radius - h
    if gap >= 0.0:
        for i in range(3):
            force[i] = 0.0
        info[0] = 0.0
        info[1] = 0.0
        info[2] = 0.0
        info[3] = 0.0
        return False
    # surface normal from the height gradient
    nx, ny, nz = -dhdx, -dhdy, 1.0
    nn = np.sqrt(nx * nx + ny * ny + nz * nz)
    nx /= nn
    ny /= nn
    nz /= nn
    depth = -gap
    vn = v[0] * nx + v[1] * ny + v[2] * nz  # separation rate along the normal
    fn = terr[T_KN] * depth - c_damp * vn
    if fn < 0.0:
        fn = 0.0
    # tangential: viscous drag opposing slip, Coulomb-clamped
    tx = v[0] - vn * nx
    ty = v[1] - vn * ny
    tz = v[2] - vn * nz
    ftx = -c_damp * tx
    fty = -c_damp * ty
    ftz = -c_damp * tz
    fmag = np.sqrt(ftx * ftx + fty * fty + ftz * ftz)
    fmax = terr[T_MU] * fn
    if fmag > fmax:
        scale = fmax / fmag if fmag > 0.0 else 0.0
        ftx *= scale
        fty *= scale
        ftz *= scale
    force[0] = fn * nx + ftx
    force[1] = fn * ny + fty
    force[2] = fn * nz + ftz
    # tangent-plane basis for reporting: t1 along world x projected, t2 = n x t1
    t1x = 1.0 - nx * nx
    t1y = -nx * ny
    t1z = -nx * nz
    t1n = np.sqrt(t1x * t1x + t1y * t1y + t1z * t1z)
    if t1n < 1e-9:
        t1x, t1y, t1z = 0.0, 1.0, 0.0
        t1n = 1.0
    t1x /= t1n
    t1y /= t1n
    t1z /= t1n
    t2x = ny * t1z - nz * t1y
    t2y = nz * t1x - nx * t1z
    t2z = nx * t1y - ny * t1x
    info[0] = fn
    info[1] = ftx * t1x + fty * t1y + ftz * t1z
    info[2] = ftx * t2x + fty * t2y + ftz * t2z
    info[3] = depth
    return True


@njit(**_JIT)
def _foot_contacts(m, terr, pos, jor, jax, feet, u, c_damp, forces, infos):
    """Contact forces at the four feet. Returns number in contact."""
    v = np.empty(3)
    count = 0
    for leg in range(N_LEGS):
        _point_velocity_leg(u, pos, jor, jax, leg, feet[leg], v)
        if _point_contact(terr, feet[leg], v, m[FR], c_damp,
                          forces[leg], infos[leg]):
            count += 1
    return count


@njit(**_JIT)
def _point_velocity_leg(u, pos, jor, jax, leg, x, out):
    """World velocity of a material point x on the shank of `leg`."""
    tmp = np.empty(3)
    d = np.empty(3)
    w = np.empty(3)
    for i in range(3):
        w[i] = u[3 + i]
        d[i] = x[i] - pos[i]
    _cross(w, d, tmp)
    for i in range(3):
        out[i] = u[i] + tmp[i]
    for depth in range(3):
        j = 3 * leg + depth
        for i in range(3):
            d[i] = x[i] - jor[j, i]
        _cross(jax[j], d, tmp)
        for i in range(3):
            out[i] += u[6 + j] * tmp[i]


@njit(**_JIT)
def _trunk_hip_contacts(m, terr, pos, R, jor, u, c_damp, Qext):
    """Trunk corner contact forces (added to Qext) and non-foot touch flag."""
    corner_local = np.empty(3)
    corner = np.empty(3)
    v = np.empty(3)
    d = np.empty(3)
    tmp = np.empty(3)
    force = np.empty(3)
    info = np.empty(4)
    touched = False
    half = m[TH]
    for sx in range(2):
        for sy in range(2):
            for sz in range(2):
                corner_local[0] = half[0] * (2.0 * sx - 1.0)
                corner_local[1] = half[1] * (2.0 * sy - 1.0)
                corner_local[2] = half[2] * (2.0 * sz - 1.0)
                _mat_vec(R[0], corner_local, corner)
                for i in range(3):
                    corner[i] += pos[i]
                    d[i] = corner[i] - pos[i]
                _cross(u[3:6], d, tmp)
                for i in range(3):
                    v[i] = u[i] + tmp[i]
                if _point_contact(terr, corner, v, 0.0, c_damp, force, info):
                    touched = True
                    _cross(d, force, tmp)
                    for i in range(3):
                        Qext[i] += force[i]
                        Qext[3 + i] += tmp[i]
    # hip collision spheres at the flexion joints: failure detection only
    for leg in range(N_LEGS):
        j1 = 3 * leg + 1
        h, _, _ = _terrain_sample(terr[T_MODE], terr[T_GRID], terr[T_RES],
                                  terr[T_ORG], jor[j1, 0], jor[j1, 1])
        if jor[j1, 2] - m[HR] - h < 0.0:
            touched = True
    return touched


@njit(**_JIT)
def _accumulate_foot_forces(pos, jor, jax, feet, forces, Qext):
    """Map world foot forces into generalized forces."""
    d = np.empty(3)
    tmp = np.empty(3)
    for leg in range(N_LEGS):
        f = forces[leg]
        if f[0] == 0.0 and f[1] == 0.0 and f[2] == 0.0:
            continue
        for i in range(3):
            d[i] = feet[leg, i] - pos[i]
        _cross(d, f, tmp)
        for i in range(3):
            Qext[i] += f[i]
            Qext[3 + i] += tmp[i]
        for depth in range(3):
            j = 3 * leg + depth
            for i in range(3):
                d[i] = feet[leg, i] - jor[j, i]
            _cross(d, f, tmp)
            Qext[6 + j] += jax[j, 0] * tmp[0] + jax[j, 1] * tmp[1] + jax[j, 2] * tmp[2]


# ---------------------------------------------------------------------------
# actuation, forward dynamics, stepping


@njit(**_JIT)
def _pd_torques(m, q, qd, targets, tau):
    for j in range(N_JOINTS):
        t = m[KP][j] * (targets[j] - q[j]) - m[KD][j] * qd[j]
        lim = m[TL][j]
        if t > lim:
            t = lim
        elif t < -lim:
            t = -lim
        tau[j] = t


@njit(**_JIT)
def _total_com(m, coms, out):
    mt = m[BM]
    for i in range(3):
        out[i] = m[BM] * coms[0, i]
    for leg in range(N_LEGS):
        for depth in range(3):
            b = 1 + 3 * leg + depth
            mass = m[LM][leg, depth]
            mt += mass
            for i in range(3):
                out[i] += mass * coms[b, i]
    for i in range(3):
        out[i] /= mt


@njit(**_JIT)
def _forward_dynamics(m, terr, state, tau, wf, wt0, wt1, c_damp, udot,
                      foot_forces, foot_infos):
    """Generalized accelerations. Returns (ok, nonfoot_touch)."""
    pos = state[0:3]
    quat = state[3:7]
    q = state[7:19]
    u = state[19:37]
    t = state[37]

    R = np.empty((13, 3, 3))
    coms = np.empty((13, 3))
    jor = np.empty((N_JOINTS, 3))
    jax = np.empty((N_JOINTS, 3))
    feet = np.empty((N_LEGS, 3))
    _fk(m, pos, quat, q, R, coms, jor, jax, feet)

    Qext = np.zeros(NV)
    _foot_contacts(m, terr, pos, jor, jax, feet, u, c_damp, foot_forces,
                   foot_infos)
    _accumulate_foot_forces(pos, jor, jax, feet, foot_forces, Qext)
    touched = _trunk_hip_contacts(m, terr, pos, R, jor, u, c_damp, Qext)
    for j in range(N_JOINTS):
        Qext[6 + j] += tau[j]

    # perturbation wrench at the robot CoM enters as a uniform acceleration
    # field (exactly Jacobian-transpose of the CoM for a pure CoM force)
    gvec = np.empty(3)
    gvec[0] = 0.0
    gvec[1] = 0.0
    gvec[2] = -m[GRAV]
    mt = m[BM] + m[LM].sum()
    if wt0 <= t < wt1:
        for i in range(3):
            gvec[i] += wf[i] / mt

    bias = np.empty(NV)
    udot_zero = np.zeros(NV)
    _rnea(m, pos, R, coms, jor, jax, u, udot_zero, gvec, bias)

    M = np.empty((NV, NV))
    _crba(m, pos, R, coms, jor, jax, M)

    rhs = np.empty(NV)
    for i in range(NV):
        rhs[i] = Qext[i] - bias[i]
    ok = _solve_spd(M, rhs, udot)
    return ok, touched


@njit(**_JIT)
def _integrate(state, udot, dt, out):
    """Semi-implicit Euler: velocities first, then positions."""
    for i in range(NV):
        out[19 + i] = state[19 + i] + dt * udot[i]
    for i in range(3):
        out[i] = state[i] + dt * out[19 + i]
    _quat_integrate(state[3:7], out[22:25], dt, out[3:7])
    for j in range(N_JOINTS):
        out[7 + j] = state[7 + j] + dt * out[25 + j]
    out[37] = state[37] + dt


@njit(**_JIT)
def _state_ok(state):
    for i in range(STATE_DIM):
        if not np.isfinite(state[i]):
            return False
    for i in range(3):
        if abs(state[i]) > 1e6:
            return False
    for i in range(NV):
        if abs(state[19 + i]) > 1e6:
            return False
    return True


@njit(**_JIT)
def _step(m, terr, state, targets, wf, wt0, wt1, dt, out, tau, foot_infos):
    """One physics step. Returns (ok, nonfoot_touch).

    Contact damping is clamped to shank_mass/(3 dt) so coarse planner
    rollouts stay numerically stable; at the 1 ms physics rate the default
    damping passes through unclamped.
    """
    c_damp = terr[T_CN]
    c_max = m[LM][0, 2] / (3.0 * dt)
    if c_damp > c_max:
        c_damp = c_max
    _pd_torques(m, state[7:19], state[25:37], targets, tau)
    udot = np.empty(NV)
    foot_forces = np.empty((N_LEGS, 3))
    ok, touched = _forward_dynamics(m, terr, state, tau, wf, wt0, wt1, c_damp,
                                    udot, foot_forces, foot_infos)
    if not ok:
        return False, touched
    _integrate(state, udot, dt, out)
    return _state_ok(out), touched


@njit(**_JIT)
def _spline_eval(kt, kv, t, out):
    """Piecewise-linear interpolation, clamped to the end values."""
    n = kt.shape[0]
    if t <= kt[0]:
        for j in range(N_JOINTS):
            out[j] = kv[0, j]
        return
    if t >= kt[n - 1]:
        for j in range(N_JOINTS):
            out[j] = kv[n - 1, j]
        return
    i = 0
    while kt[i + 1] < t:
        i += 1
    alpha = (t - kt[i]) / (kt[i + 1] - kt[i])
    for j in range(N_JOINTS):
        out[j] = (1.0 - alpha) * kv[i, j] + alpha * kv[i + 1, j]


@njit(**_JIT)
def _advance(m, terr, state, kt, kv, n_steps, dt, wf, wt0, wt1, out):
    """Advance n_steps with spline-interpolated targets.

    Returns (ok, fail_flag, fail_time, energy) where energy is the
    accumulated positive-clamped |tau . qd| dt over the window and fail_flag
    records any non-foot ground contact.
    """
    cur = state.copy()
    tau = np.empty(N_JOINTS)
    targets = np.empty(N_JOINTS)
    foot_infos = np.empty((N_LEGS, 4))
    fail = False
    fail_time = -1.0
    energy = 0.0
    for _ in range(n_steps):
        _spline_eval(kt, kv, cur[37], targets)
        ok, touched = _step(m, terr, cur, targets, wf, wt0, wt1, dt, out, tau,
                            foot_infos)
        if touched and not fail:
            fail = True
            fail_time = cur[37]
        if not ok:
            return False, fail, fail_time, energy
        for j in range(N_JOINTS):
            p = tau[j] * cur[25 + j]
            if p < 0.0:
                p = -p
            energy += p * dt
        cur[:] = out
    out[:] = cur
    return True, fail, fail_time, energy


@njit(**_JIT)
def _step_cost(m, terr, state, targets, weights, norms, v_target, h_target):
    """Weighted-residual cost of one (state, action) pair."""
    pos = state[0:3]
    h, _, _ = _terrain_sample(terr[T_MODE], terr[T_GRID], terr[T_RES],
                              terr[T_ORG], pos[0], pos[1])
    R = np.empty((3, 3))
    _quat_to_mat(state[3:7], R)
    # residual blocks: forward velocity, lateral velocity, height, tilt, yaw
    # rate, control deviation
    r_v = state[19] - v_target
    r_y = state[20]
    r_h = (pos[2] - h) - h_target
    r_up = np.sqrt(R[0, 2] * R[0, 2] + R[1, 2] * R[1, 2])
    r_w = state[24]
    cost = 0.0
    cost += weights[0] * _norm_scalar(r_v, norms[0])
    cost += weights[1] * _norm_scalar(r_y, norms[1])
    cost += weights[2] * _norm_scalar(r_h, norms[2])
    cost += weights[3] * _norm_scalar(r_up, norms[3])
    cost += weights[4] * _norm_scalar(r_w, norms[4])
    ctrl = 0.0
    for j in range(N_JOINTS):
        ctrl += _norm_scalar(targets[j] - state[7 + j], norms[5])
    cost += weights[5] * ctrl
    return cost


SMOOTH_ABS_EPS = 1e-3


@njit(**_JIT)
def _norm_scalar(r, norm_id):
    if norm_id == 0:
        return r * r
    s = np.sqrt(r * r + SMOOTH_ABS_EPS * SMOOTH_ABS_EPS)
    return s - SMOOTH_ABS_EPS


@njit(**_JIT)
def _trajectory_cost(m, terr, state, kt, kv, horizon, dt, weights, norms,
                     v_target, h_target):
    """Sum of step costs over the rollout; inf if the rollout blows up."""
    n = int(round(horizon / dt))
    cur = state.copy()
    nxt = np.empty(STATE_DIM)
    tau = np.empty(N_JOINTS)
    targets = np.empty(N_JOINTS)
    foot_infos = np.empty((N_LEGS, 4))
    wf = np.zeros(3)
    cost = 0.0
    for _ in range(n):
        _spline_eval(kt, kv, cur[37], targets)
        cost += _step_cost(m, terr, cur, targets, weights, norms, v_target,
                           h_target)
        ok, _ = _step(m, terr, cur, targets, wf, 0.0, -1.0, dt, nxt, tau,
                      foot_infos)
        if not ok:
            return np.inf
        cur[:] = nxt
    _spline_eval(kt, kv, cur[37], targets)
    cost += _step_cost(m, terr, cur, targets, weights, norms, v_target,
                       h_target)
    if not np.isfinite(cost):
        return np.inf
    return cost
