"""Compiled inner loops for the simulators and the benchmark.

Each kernel mirrors a numpy implementation elsewhere in the package; the
tests check both routes against each other.  Friction parameters travel as
a flat float array laid out by :func:`pack_params`.

Helpers called from other kernels are inlined at the numba IR level; an
ordinary call would pay array reference counting on every argument, which
costs more than the arithmetic of the reduced model.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

from .distributed import FrictionParams
from .limit_surface import NODE_SNAP

# indices into the packed parameter array
SIGMA0, SIGMA1, SIGMA2, MU_C, MU_S, GAMMA, V_S, S_BA, EP, G_CUT = range(10)

MODE_ELLIPSOID = 0
MODE_LS = 1


def pack_params(params: FrictionParams) -> np.ndarray:
    return np.array(
        [
            params.sigma0,
            params.sigma1,
            params.sigma2,
            params.mu_c,
            params.mu_s,
            params.gamma,
            params.v_s,
            params.s_ba,
            1.0 if params.elasto_plastic else 0.0,
            _stribeck_cutoff(params),
        ]
    )


def _stribeck_cutoff(params: FrictionParams) -> float:
    """Exponent beyond which the Stribeck term is below half an ulp of mu_c.

    Past it ``mu_c + (mu_s - mu_c) exp(-e)`` rounds to ``mu_c`` exactly, so
    skipping the exponential does not change any result.
    """
    if params.mu_s == params.mu_c:
        return 0.0
    return math.log((params.mu_s - params.mu_c) / params.mu_c) + 55.0 * math.log(2.0)


@njit(cache=True, inline="always", error_model="numpy")
def g_scalar(speed, prm):
    if prm[MU_S] == prm[MU_C]:
        return prm[MU_C]
    s = speed / prm[V_S]
    if prm[GAMMA] == 2.0:
        e = s * s
    else:
        e = s ** prm[GAMMA]
    if e > prm[G_CUT]:
        return prm[MU_C]
    return prm[MU_C] + (prm[MU_S] - prm[MU_C]) * math.exp(-e)


@njit(cache=True, inline="always", error_model="numpy")
def beta_bar_scalar(zn, z_max, s_ba):
    z_ba = s_ba * z_max
    if zn <= z_ba:
        return 0.0
    if zn >= z_max:
        return 1.0
    return 0.5 * math.sin(math.pi * (zn - 0.5 * (z_max + z_ba)) / (z_max - z_ba)) + 0.5


# -- distributed model -------------------------------------------------------

@njit(cache=True, inline="always", error_model="numpy")
def dist_rate(x, y, z, vx, vy, om, prm, dz):
    """Bristle rate for the compact ``(2, m)`` state, written into ``dz``."""
    s0 = prm[SIGMA0]
    ep = prm[EP] != 0.0
    for i in range(x.size):
        ux = vx - om * y[i]
        uy = vy + om * x[i]
        speed = math.sqrt(ux * ux + uy * uy)
        if speed == 0.0:
            dz[0, i] = 0.0
            dz[1, i] = 0.0
            continue
        g = g_scalar(speed, prm)
        k = s0 * speed / g
        if ep:
            zx = z[0, i]
            zy = z[1, i]
            zn = math.sqrt(zx * zx + zy * zy)
            b = beta_bar_scalar(zn, g / s0, prm[S_BA])
            if b > 0.0:
                b *= 0.5 * ((zx * ux + zy * uy) / (zn * speed) + 1.0)
            k *= b
        dz[0, i] = ux - z[0, i] * k
        dz[1, i] = uy - z[1, i] * k


@njit(cache=True, inline="always", error_model="numpy")
def dist_wrench(x, y, w, z, dz, vx, vy, om, prm, f_N, out):
    s0 = prm[SIGMA0]
    s1 = prm[SIGMA1]
    s2 = prm[SIGMA2]
    fx = 0.0
    fy = 0.0
    tau = 0.0
    for i in range(x.size):
        ux = vx - om * y[i]
        uy = vy + om * x[i]
        lx = (s0 * z[0, i] + s1 * dz[0, i] + s2 * ux) * w[i]
        ly = (s0 * z[1, i] + s1 * dz[1, i] + s2 * uy) * w[i]
        fx += lx
        fy += ly
        tau += x[i] * ly - y[i] * lx
    out[0] = -f_N * fx
    out[1] = -f_N * fy
    out[2] = -f_N * tau


@njit(cache=True, inline="always", error_model="numpy")
def dist_rate_wrench(x, y, w, z, vx, vy, om, prm, f_N, dz, out):
    dist_rate(x, y, z, vx, vy, om, prm, dz)
    dist_wrench(x, y, w, z, dz, vx, vy, om, prm, f_N, out)


# -- limit surface lookup ----------------------------------------------------

@njit(cache=True, inline="always", error_model="numpy")
def ls_lookup3(corners, n_ls, r, vx, vy, om):
    vt = math.sqrt(vx * vx + vy * vy)
    if vt == 0.0 and om == 0.0:
        return 0.0, 0.0, 0.0
    theta = math.atan2(vy, vx)
    if om < 0.0:
        theta += math.pi
    # same result as theta % 2pi for theta in (-pi, 2pi]
    if theta < 0.0:
        theta += 2.0 * math.pi
    elif theta >= 2.0 * math.pi:
        theta -= 2.0 * math.pi
    phi = math.atan2(vt, r * abs(om))
    a = 2.0 * theta * n_ls / math.pi
    b = 2.0 * phi * n_ls / math.pi
    ka = math.floor(a + 0.5)
    if abs(a - ka) < NODE_SNAP:
        a = ka
    kb = math.floor(b + 0.5)
    if abs(b - kb) < NODE_SNAP:
        b = kb
    i_theta = math.floor(a)
    i_phi = min(math.floor(b), n_ls - 1)
    dt = a - i_theta
    dp = b - i_phi
    ic = n_ls * (int(i_theta) % (4 * n_ls)) + int(i_phi)
    sgn = 1.0 if om >= 0.0 else -1.0
    w0 = sgn * (1.0 - dt) * (1.0 - dp)
    w1 = sgn * dt * (1.0 - dp)
    w2 = sgn * (1.0 - dt) * dp
    w3 = sgn * dt * dp
    c = corners[ic]
    return (
        w0 * c[0, 0] + w1 * c[1, 0] + w2 * c[2, 0] + w3 * c[3, 0],
        w0 * c[0, 1] + w1 * c[1, 1] + w2 * c[2, 1] + w3 * c[3, 1],
        w0 * c[0, 2] + w1 * c[1, 2] + w2 * c[2, 2] + w3 * c[3, 2],
    )


@njit(cache=True, error_model="numpy")
def ls_lookup(corners, n_ls, r, vx, vy, om, out):
    out[0], out[1], out[2] = ls_lookup3(corners, n_ls, r, vx, vy, om)


# -- reduced model -----------------------------------------------------------

@njit(cache=True, inline="always", error_model="numpy")
def reduced_rate(z, vx, vy, om, r, mode, corners, n_ls, prm, dz):
    """Rate of the 3-bristle state; ``mode`` selects ellipsoid or LS correction."""
    vs0 = vx
    vs1 = vy
    vs2 = r * om
    speed = math.sqrt(vs0 * vs0 + vs1 * vs1 + vs2 * vs2)
    if speed == 0.0:
        dz[0] = 0.0
        dz[1] = 0.0
        dz[2] = 0.0
        return
    s0 = prm[SIGMA0]
    g = g_scalar(speed, prm)
    if mode == MODE_ELLIPSOID:
        # steady direction S v_S / |v_S|; -h plays the same role below
        d0 = vs0 / speed
        d1 = vs1 / speed
        d2 = r * vs2 / speed
        h0 = vs0 / speed
        h1 = vs1 / speed
        h2 = vs2 / speed
    else:
        a0, a1, a2 = ls_lookup3(corners, n_ls, r, vx, vy, om)
        h0 = -a0
        h1 = -a1
        h2 = -a2
        d0 = h0
        d1 = h1
        d2 = r * h2
    k = s0 / g
    if prm[EP] != 0.0:
        # beta on S^-1 z against the direction -h, saturating at |h| g / sigma0
        q0 = z[0]
        q1 = z[1]
        q2 = z[2] / r
        qn = math.sqrt(q0 * q0 + q1 * q1 + q2 * q2)
        hn = math.sqrt(h0 * h0 + h1 * h1 + h2 * h2)
        b = beta_bar_scalar(qn, hn * g / s0, prm[S_BA])
        if b > 0.0:
            b *= 0.5 * ((q0 * h0 + q1 * h1 + q2 * h2) / (qn * hn) + 1.0)
        k *= b
    dz[0] = (d0 - z[0] * k) * speed
    dz[1] = (d1 - z[1] * k) * speed
    dz[2] = (d2 - z[2] * k) * speed


@njit(cache=True, inline="always", error_model="numpy")
def reduced_wrench(z, dz, vx, vy, om, u, prm, f_N, out):
    s0 = prm[SIGMA0]
    s1 = prm[SIGMA1]
    s2 = prm[SIGMA2]
    out[0] = -(s0 * z[0] + s1 * dz[0] + s2 * vx) * f_N
    out[1] = -(s0 * z[1] + s1 * dz[1] + s2 * vy) * f_N
    out[2] = -(s0 * z[2] + s1 * dz[2] + s2 * u * om) * f_N


@njit(cache=True, inline="always", error_model="numpy")
def reduced_rate_wrench(z, vx, vy, om, r, u, mode, corners, n_ls, prm, f_N, dz, out):
    reduced_rate(z, vx, vy, om, r, mode, corners, n_ls, prm, dz)
    reduced_wrench(z, dz, vx, vy, om, u, prm, f_N, out)


# -- benchmark loops ---------------------------------------------------------

@njit(cache=True, error_model="numpy")
def bench_distributed(x, y, w, z, twists, prm, f_N, iterations):
    dz = np.empty_like(z)
    out = np.empty(3)
    acc = 0.0
    k = twists.shape[0]
    j = 0
    for _ in range(iterations):
        dist_rate_wrench(x, y, w, z, twists[j, 0], twists[j, 1], twists[j, 2], prm, f_N, dz, out)
        acc += out[0]
        j += 1
        if j == k:
            j = 0
    return acc


@njit(cache=True, error_model="numpy")
def bench_reduced(z, twists, r, u, mode, corners, n_ls, prm, f_N, iterations):
    dz = np.empty(3)
    out = np.empty(3)
    acc = 0.0
    k = twists.shape[0]
    j = 0
    for _ in range(iterations):
        reduced_rate_wrench(z, twists[j, 0], twists[j, 1], twists[j, 2], r, u, mode, corners, n_ls,
                            prm, f_N, dz, out)
        acc += out[0]
        j += 1
        if j == k:
            j = 0
    return acc


# -- fixed-step kinematic integration ----------------------------------------

@njit(cache=True, inline="always", error_model="numpy")
def _twist_at(t, knots_t, knots_v, out):
    for j in range(3):
        out[j] = np.interp(t, knots_t, knots_v[:, j])


@njit(cache=True, error_model="numpy")
def dist_kinematic_rk4(x, y, w, prm, f_N, knots_t, knots_v, dt, n_steps, every, z):
    """Classical RK4 on the bristle field along a piecewise-linear twist.

    Returns wrenches at every ``every``-th step (step 0 included).  ``z`` is
    updated in place.
    """
    m = x.size
    n_out = n_steps // every + 1
    wrenches = np.empty((n_out, 3))
    k1 = np.empty((2, m))
    k2 = np.empty((2, m))
    k3 = np.empty((2, m))
    k4 = np.empty((2, m))
    tmp = np.empty((2, m))
    tw0 = np.empty(3)
    tw1 = np.empty(3)
    tw2 = np.empty(3)
    out = np.empty(3)
    j = 0
    for s in range(n_steps + 1):
        t = s * dt
        _twist_at(t, knots_t, knots_v, tw0)
        dist_rate(x, y, z, tw0[0], tw0[1], tw0[2], prm, k1)
        if s % every == 0:
            dist_wrench(x, y, w, z, k1, tw0[0], tw0[1], tw0[2], prm, f_N, out)
            wrenches[j, 0] = out[0]
            wrenches[j, 1] = out[1]
            wrenches[j, 2] = out[2]
            j += 1
        if s == n_steps:
            break
        _twist_at(t + 0.5 * dt, knots_t, knots_v, tw1)
        _twist_at(t + dt, knots_t, knots_v, tw2)
        for a in range(2):
            for i in range(m):
                tmp[a, i] = z[a, i] + 0.5 * dt * k1[a, i]
        dist_rate(x, y, tmp, tw1[0], tw1[1], tw1[2], prm, k2)
        for a in range(2):
            for i in range(m):
                tmp[a, i] = z[a, i] + 0.5 * dt * k2[a, i]
        dist_rate(x, y, tmp, tw1[0], tw1[1], tw1[2], prm, k3)
        for a in range(2):
            for i in range(m):
                tmp[a, i] = z[a, i] + dt * k3[a, i]
        dist_rate(x, y, tmp, tw2[0], tw2[1], tw2[2], prm, k4)
        for a in range(2):
            for i in range(m):
                z[a, i] += dt / 6.0 * (k1[a, i] + 2.0 * k2[a, i] + 2.0 * k3[a, i] + k4[a, i])
    return wrenches


@njit(cache=True, error_model="numpy")
def reduced_kinematic_rk4(r, u, mode, corners, n_ls, prm, f_N, knots_t, knots_v, dt, n_steps, every, z):
    n_out = n_steps // every + 1
    wrenches = np.empty((n_out, 3))
    k1 = np.empty(3)
    k2 = np.empty(3)
    k3 = np.empty(3)
    k4 = np.empty(3)
    tmp = np.empty(3)
    tw0 = np.empty(3)
    tw1 = np.empty(3)
    tw2 = np.empty(3)
    out = np.empty(3)
    j = 0
    for s in range(n_steps + 1):
        t = s * dt
        _twist_at(t, knots_t, knots_v, tw0)
        reduced_rate(z, tw0[0], tw0[1], tw0[2], r, mode, corners, n_ls, prm, k1)
        if s % every == 0:
            reduced_wrench(z, k1, tw0[0], tw0[1], tw0[2], u, prm, f_N, out)
            wrenches[j, 0] = out[0]
            wrenches[j, 1] = out[1]
            wrenches[j, 2] = out[2]
            j += 1
        if s == n_steps:
            break
        _twist_at(t + 0.5 * dt, knots_t, knots_v, tw1)
        _twist_at(t + dt, knots_t, knots_v, tw2)
        for a in range(3):
            tmp[a] = z[a] + 0.5 * dt * k1[a]
        reduced_rate(tmp, tw1[0], tw1[1], tw1[2], r, mode, corners, n_ls, prm, k2)
        for a in range(3):
            tmp[a] = z[a] + 0.5 * dt * k2[a]
        reduced_rate(tmp, tw1[0], tw1[1], tw1[2], r, mode, corners, n_ls, prm, k3)
        for a in range(3):
            tmp[a] = z[a] + dt * k3[a]
        reduced_rate(tmp, tw2[0], tw2[1], tw2[2], r, mode, corners, n_ls, prm, k4)
        for a in range(3):
            z[a] += dt / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a])
    return wrenches
