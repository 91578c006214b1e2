"""Compiled closed-loop right-hand side and its integrators.

This mirrors the reference path in ``sim.Simulation.reference_rhs`` (plant
dynamics plus the control laws of ``control``) in a single compiled function.
The two are cross-checked by the test suite.
"""

from collections import namedtuple
import math

import numpy as np
from numba import njit

from ._kernels import coriolis_from_gradient, mass_gravity_gradient, reference, spd_solve3

KINEMATIC, PDFL, PDFL_HYST, PASSIVITY, ADAPTIVE, ADAPTIVE_SIGMA = range(6)
CONTROLLER_CODES = {
    "kinematic": KINEMATIC,
    "pdfl": PDFL,
    "pdfl_hyst_comp": PDFL_HYST,
    "passivity": PASSIVITY,
    "adaptive_passivity": ADAPTIVE,
    "adaptive_passivity_sigma": ADAPTIVE_SIGMA,
}

OK, STEP_UNDERFLOW = 0, 1

LoopParams = namedtuple("LoopParams", [
    "controller",
    "true_geo",   # L0, r, m, ixx, g
    "true_K",
    "true_D",
    "nom_geo",
    "nom_K",
    "nom_D",
    "nodes_t",
    "weights_t",
    "nodes_n",
    "weights_n",
    "shared",     # nominal inertia, gravity and geometry equal the true ones
    "hyst_mode",  # -1 off, 0 rate driven, 1 literal
    "hyst",       # alpha, beta, gamma
    "K_kin",
    "K_p",
    "K_d",
    "K_G",
    "Lam",
    "Gam",        # Gamma_inv tiled over (K, D)
    "sig",        # sigma tiled over (K, D)
    "anchor",
    "g1",
    "g2",
    "i_theta",
    "i_hhat",
    "i_x1",
    "i_x2",
    "sat_lo",
    "sat_hi",
    "traj_kind",
    "traj_shape",
    "traj_breaks",
    "traj_coefs",
    "traj_dt",
])


@njit(cache=True, error_model="numpy")
def _terms(l, qdot, geo, nodes, weights):
    M, G, dM = mass_gravity_gradient(l, geo[0], geo[1], geo[2], geo[3], geo[4], nodes, weights)
    return M, coriolis_from_gradient(dM, qdot), G


@njit(cache=True, error_model="numpy")
def bouc_wen(h, lead, ldot, coeffs, out):
    for i in range(3):
        hv = h[i]
        sg = ldot[i] * hv
        sgn = 1.0 if sg > 0 else (-1.0 if sg < 0 else 0.0)
        out[i] = lead[i] * (coeffs[0] - (coeffs[1] * sgn + coeffs[2]) * abs(hv))


@njit(cache=True, error_model="numpy")
def control(t, X, y, vel, p, Mc, Cc, Gc, rates):
    """Raw control force; controller-state rates are written into ``rates``."""
    _, q_d, qd_dot, qd_ddot = reference(t, p.traj_kind, p.traj_shape, p.traj_breaks,
                                        p.traj_coefs, p.nom_geo[0], p.nom_geo[1], p.traj_dt)
    ctrl = p.controller
    if ctrl == KINEMATIC:
        return p.K_kin * (q_d - y)
    e = y - q_d
    edot = vel - qd_dot
    if ctrl == PDFL or ctrl == PDFL_HYST:
        tp = qd_ddot - p.K_d * edot - p.K_p * e
        tau = Mc @ tp + Cc @ vel + p.nom_D * vel + p.nom_K * y + Gc
        if ctrl == PDFL_HYST:
            i = p.i_hhat
            hhat = X[i:i + 3]
            tau = tau + hhat
            rate = np.empty(3)
            bouc_wen(hhat, vel if p.hyst_mode == 0 else y, vel, p.hyst, rate)
            rates[i:i + 3] = rate
        return tau
    v = qd_dot - p.Lam * e
    a = qd_ddot - p.Lam * edot
    r = vel - v
    base = Mc @ a + Cc @ v + Gc - p.K_G * r
    if ctrl == PASSIVITY:
        return base + p.nom_K * y + p.nom_D * v
    i = p.i_theta
    th = X[i:i + 6]
    for k in range(3):
        rates[i + k] = -p.Gam[k] * y[k] * r[k]
        rates[i + 3 + k] = -p.Gam[3 + k] * v[k] * r[k]
    if ctrl == ADAPTIVE_SIGMA:
        for k in range(6):
            rates[i + k] -= p.sig[k] * (th[k] - p.anchor[k])
    return base + th[:3] * y + th[3:] * v


@njit(cache=True, error_model="numpy")
def rhs(t, X, p, noise, held, use_held, dX, info):
    """State derivative of the closed loop.

    With ``use_held`` the control force, controller-state rates and
    measurement are taken from ``held`` = [tau_raw, tau, y, rates...].
    ``info`` receives [tau_raw, tau].
    """
    q = X[0:3]
    qdot = X[3:6]
    M, C, G = _terms(q, qdot, p.true_geo, p.nodes_t, p.weights_t)
    if use_held:
        tau_raw = held[0:3]
        tau = held[3:6]
        y = held[6:9]
        dX[:] = held[9:9 + X.shape[0]]
    else:
        dX[:] = 0.0
        y = q + noise
        vel = X[p.i_x2:p.i_x2 + 3] if p.i_x2 >= 0 else qdot
        if p.controller == KINEMATIC:
            Mc, Cc, Gc = M, C, G
        elif p.shared and p.i_x2 < 0 and noise[0] == 0.0 and noise[1] == 0.0 and noise[2] == 0.0:
            Mc, Cc, Gc = M, C, G
        else:
            Mc, Cc, Gc = _terms(y, vel, p.nom_geo, p.nodes_n, p.weights_n)
        tau_raw = control(t, X, y, vel, p, Mc, Cc, Gc, dX)
        tau = np.minimum(np.maximum(tau_raw, p.sat_lo), p.sat_hi)
    force = tau - C @ qdot - p.true_D * qdot - p.true_K * q - G
    if p.hyst_mode >= 0:
        h = X[6:9]
        force = force - h
        rate = np.empty(3)
        bouc_wen(h, qdot if p.hyst_mode == 0 else q, qdot, p.hyst, rate)
        dX[6:9] = rate
    dX[0:3] = qdot
    dX[3:6] = spd_solve3(M, force)
    if p.i_x1 >= 0:
        x1 = X[p.i_x1:p.i_x1 + 3]
        x2 = X[p.i_x2:p.i_x2 + 3]
        Mn, Cn, Gn = _terms(x1, x2, p.nom_geo, p.nodes_n, p.weights_n)
        theta0 = spd_solve3(Mn, tau - Cn @ x2 - p.nom_D * x2 - p.nom_K * x1 - Gn)
        innov = y - x1
        dX[p.i_x1:p.i_x1 + 3] = x2 + p.g1 * innov
        dX[p.i_x2:p.i_x2 + 3] = theta0 + p.g2 * innov
    info[0:3] = tau_raw
    info[3:6] = tau


@njit(cache=True, error_model="numpy")
def held_control(t, X, p, noise, held):
    """Sample the controller once and store [tau_raw, tau, y, rates] in ``held``."""
    q = X[0:3]
    y = q + noise
    vel = X[p.i_x2:p.i_x2 + 3] if p.i_x2 >= 0 else X[3:6]
    if p.controller == KINEMATIC:
        Mc = np.zeros((3, 3))
        Cc = np.zeros((3, 3))
        Gc = np.zeros(3)
    else:
        Mc, Cc, Gc = _terms(y, vel, p.nom_geo, p.nodes_n, p.weights_n)
    rates = np.zeros(X.shape[0])
    tau_raw = control(t, X, y, vel, p, Mc, Cc, Gc, rates)
    held[0:3] = tau_raw
    held[3:6] = np.minimum(np.maximum(tau_raw, p.sat_lo), p.sat_hi)
    held[6:9] = y
    held[9:9 + X.shape[0]] = rates


# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.array([
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1 / 5, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3 / 40, 9 / 40, 0.0, 0.0, 0.0, 0.0],
    [44 / 45, -56 / 15, 32 / 9, 0.0, 0.0, 0.0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0.0, 0.0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0.0],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
])
# fifth-order weights minus embedded fourth-order weights
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])


@njit(cache=True, error_model="numpy")
def dopri_advance(t, y, t_end, k1, h, rtol, atol, h_min, p, noise, held, use_held, info):
    """Adaptive Dormand-Prince from t to t_end, ending exactly on t_end.

    ``k1`` is the derivative at (t, y).  Returns (y, derivative at the end,
    next step size, accepted steps, rejected steps, status).
    """
    n = y.shape[0]
    K = np.empty((7, n))
    K[0] = k1
    yi = np.empty(n)
    y = y.copy()
    n_acc = 0
    n_rej = 0
    while t < t_end:
        last = t + 1.01 * h >= t_end
        step = t_end - t if last else h
        for i in range(1, 7):
            for j in range(n):
                acc = 0.0
                for k in range(i):
                    acc += _A[i, k] * K[k, j]
                yi[j] = y[j] + step * acc
            rhs(t + _C[i] * step, yi, p, noise, held, use_held, K[i], info)
        err = 0.0
        for j in range(n):
            e = 0.0
            for k in range(7):
                e += _E[k] * K[k, j]
            sc = atol + rtol * max(abs(y[j]), abs(yi[j]))
            err += (step * e / sc) ** 2
        err = math.sqrt(err / n)
        if not math.isfinite(err):
            err = math.inf
        if err == 0.0:
            factor = 5.0
        else:
            factor = min(5.0, max(0.2, 0.9 * err ** -0.2))
        if err <= 1.0:
            t = t_end if last else t + step
            y[:] = yi
            K[0] = K[6]
            n_acc += 1
            # a shortened final step should not shrink the carried step size
            h = max(h, step * factor) if last else step * factor
        else:
            n_rej += 1
            h = step * factor
            if h < h_min:
                return y, K[0], h, n_acc, n_rej, STEP_UNDERFLOW
    return y, K[0], h, n_acc, n_rej, OK


@njit(cache=True, error_model="numpy")
def rk4_advance(t, y, t_end, h, p, noise, held, use_held, info):
    """Classical RK4 from t to t_end with equal steps no longer than h."""
    n_steps = max(1, int(math.ceil((t_end - t) / h - 1e-9)))
    step = (t_end - t) / n_steps
    n = y.shape[0]
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    y = y.copy()
    for i in range(n_steps):
        ti = t + i * step
        rhs(ti, y, p, noise, held, use_held, k1, info)
        rhs(ti + 0.5 * step, y + 0.5 * step * k1, p, noise, held, use_held, k2, info)
        rhs(ti + 0.5 * step, y + 0.5 * step * k2, p, noise, held, use_held, k3, info)
        rhs(ti + step, y + step * k3, p, noise, held, use_held, k4, info)
        y += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y, n_steps
