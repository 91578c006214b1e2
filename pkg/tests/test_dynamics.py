import numpy as np
import pytest
from scipy.integrate import simpson, solve_ivp

from softarm.dynamics import (
    DynamicParams,
    coriolis_matrix,
    dynamics_terms,
    forward_dynamics,
    gravity_vector,
    inertia_matrix,
    kinetic_energy,
    mass_gradient,
    mass_gradient_fd,
    potential_energy,
)
from softarm.kinematics import pose_from_actuators

P = DynamicParams()


def brute_force_terms(l, params, n=2001, h=1e-6):
    """M and G from finite-difference pose partials and Simpson's rule.

    Slices are thin disks: body inertia diag(Ixx, Ixx, 2 Ixx) per unit mass.
    """
    xi = np.linspace(0, 1, n)
    geom = params.geometry
    inertia = params.ixx * np.diag([1.0, 1.0, 2.0])
    Mi = np.empty((n, 3, 3))
    Gi = np.empty((n, 3))
    for k, x in enumerate(xi):
        R = pose_from_actuators(x, l, geom).R
        Jv = np.empty((3, 3))
        Jw = np.empty((3, 3))
        for i in range(3):
            e = np.zeros(3)
            e[i] = h
            a = pose_from_actuators(x, l + e, geom)
            b = pose_from_actuators(x, l - e, geom)
            Jv[:, i] = (a.P - b.P) / (2 * h)
            W = R.T @ (a.R - b.R) / (2 * h)
            Jw[:, i] = [W[2, 1], W[0, 2], W[1, 0]]
        Mi[k] = params.m * Jv.T @ Jv + Jw.T @ inertia @ Jw
        Gi[k] = -params.m * params.g * Jv[2]
    return simpson(Mi, x=xi, axis=0), simpson(Gi, x=xi, axis=0)


@pytest.mark.parametrize("l", [np.zeros(3), np.array([0.03, 0.0, 0.0]),
                               np.array([0.021, -0.034, 0.012])])
def test_terms_match_brute_force_integration(l):
    M, G = brute_force_terms(l, P)
    assert np.allclose(inertia_matrix(l, P), M, rtol=1e-8, atol=1e-8 * np.abs(M).max())
    assert np.allclose(gravity_vector(l, P), G, rtol=1e-8, atol=1e-10)


def test_straight_gravity_value():
    # dPz/dl_i = xi / 3 when straight, so G_i = -m g / 6
    assert np.allclose(gravity_vector(np.zeros(3), P), -0.13 * -9.81 / 6, rtol=1e-13)


def test_zero_gravity():
    assert np.all(gravity_vector([0.01, -0.02, 0.0], P.replace(g=0.0)) == 0)


def test_inertia_spd_at_500_states(rng):
    for l in rng.uniform(-0.05, 0.05, (500, 3)):
        M = inertia_matrix(l, P)
        assert np.max(np.abs(M - M.T)) <= 1e-10 * np.abs(M).max()
        assert np.linalg.eigvalsh(M)[0] > 0


def test_mass_scaling():
    l = np.array([0.01, -0.02, 0.015])
    a = inertia_matrix(l, P)
    b = inertia_matrix(l, P.replace(m=0.26))
    assert np.allclose(b, 2 * a, rtol=1e-14)


def test_gravity_is_potential_gradient(rng):
    h = 1e-6
    for l in rng.uniform(-0.04, 0.04, (20, 3)):
        G = gravity_vector(l, P)
        fd = np.empty(3)
        for i in range(3):
            e = np.zeros(3)
            e[i] = h
            fd[i] = (potential_energy(l + e, P) - potential_energy(l - e, P)) / (2 * h)
        assert np.allclose(G, fd, rtol=1e-5, atol=1e-5 * np.abs(G).max())


def test_exact_gradient_matches_finite_differences(rng):
    states = list(rng.uniform(-0.05, 0.05, (30, 3))) + [np.zeros(3), np.array([1e-7, 0, 0])]
    for l in states:
        a = mass_gradient(l, P)
        b = mass_gradient_fd(l, P)
        assert np.max(np.abs(a - b)) <= 1e-6 * np.abs(b).max() + 1e-12


def test_coriolis_examples(rng):
    l = np.array([0.02, -0.01, 0.005])
    assert np.all(coriolis_matrix(l, np.zeros(3), P) == 0)
    qd = rng.normal(size=3)
    assert np.array_equal(coriolis_matrix(l, 2 * qd, P), 2 * coriolis_matrix(l, qd, P))


def test_skew_symmetry_at_100_states(rng):
    for _ in range(100):
        l = rng.uniform(-0.05, 0.05, 3)
        qd = rng.normal(size=3)
        t = dynamics_terms(l, qd, P)
        Mdot = t.mass_rate(qd)
        resid = abs(qd @ (Mdot - 2 * t.C) @ qd)
        assert resid / (qd @ qd * np.linalg.norm(t.M, 2)) < 1e-6
        # the skew property holds with the difference quotient of M along qd
        h = 1e-7
        fd = (inertia_matrix(l + h * qd, P) - inertia_matrix(l - h * qd, P)) / (2 * h)
        assert abs(qd @ (fd - 2 * t.C) @ qd) / (qd @ qd * np.linalg.norm(t.M, 2)) < 1e-6


def test_quadrature_convergence(rng):
    fine = P.replace(n_quad=60)
    for l in rng.uniform(-0.05, 0.05, (10, 3)):
        a, b = inertia_matrix(l, P), inertia_matrix(l, fine)
        assert np.max(np.abs(a - b)) <= 1e-8 * np.abs(b).max()
        assert np.allclose(gravity_vector(l, P), gravity_vector(l, fine), rtol=1e-8)


def test_forward_dynamics_examples(rng):
    l = np.array([0.01, -0.005, 0.02])
    tau = P.K * l + gravity_vector(l, P)
    assert np.allclose(forward_dynamics(l, np.zeros(3), None, tau, P), 0, atol=1e-12)
    acc = forward_dynamics(np.zeros(3), np.zeros(3), None, np.zeros(3), P)
    M = inertia_matrix(np.zeros(3), P)
    assert np.allclose(acc, -np.linalg.solve(M, gravity_vector(np.zeros(3), P)))
    assert np.all(acc < 0)
    qd = rng.normal(size=3) * 0.1
    tau = rng.normal(size=3)
    delta = rng.normal(size=3)
    M = inertia_matrix(l, P)
    a = forward_dynamics(l, qd, None, tau, P)
    b = forward_dynamics(l, qd, None, tau + M @ delta, P)
    assert np.allclose(b, a + delta, atol=1e-9)


def test_hysteresis_force_enters_like_a_spring_force():
    l = np.array([0.01, -0.005, 0.02])
    h = np.array([0.3, -0.2, 0.1])
    a = forward_dynamics(l, np.zeros(3), h, np.zeros(3), P)
    b = forward_dynamics(l, np.zeros(3), None, -h, P)
    assert np.allclose(a, b, rtol=1e-14)
    c = forward_dynamics(l, np.zeros(3), h, np.zeros(3), P, include_hysteresis=False)
    assert np.allclose(c, forward_dynamics(l, np.zeros(3), None, np.zeros(3), P), rtol=1e-14)


def _free_rhs(params):
    def f(t, x):
        return np.concatenate([x[3:], forward_dynamics(x[:3], x[3:], None, np.zeros(3), params)])
    return f


def test_kinetic_energy_conserved_without_forces():
    # tiny K and D stand in for zero (the parameter type requires positive values)
    free = P.replace(K=1e-12, D=1e-12, g=0.0)
    x0 = np.array([0.01, -0.02, 0.005, 0.2, -0.1, 0.3])
    sol = solve_ivp(_free_rhs(free), (0, 1), x0, method="DOP853", rtol=1e-10, atol=1e-12,
                    dense_output=True)
    E0 = kinetic_energy(x0[:3], x0[3:], free)
    E = [kinetic_energy(x[:3], x[3:], free) for x in sol.sol(np.linspace(0, 1, 50)).T]
    assert np.max(np.abs(np.array(E) - E0)) / E0 < 1e-3


def test_energy_non_increasing_with_damping():
    damped = P.replace(g=0.0)
    x0 = np.array([0.01, -0.02, 0.005, 0.2, -0.1, 0.3])
    sol = solve_ivp(_free_rhs(damped), (0, 0.2), x0, method="DOP853", rtol=1e-10, atol=1e-12,
                    dense_output=True)

    def energy(x):
        return kinetic_energy(x[:3], x[3:], damped) + 0.5 * x[:3] @ (damped.K * x[:3])

    E = np.array([energy(x) for x in sol.sol(np.linspace(0, 0.2, 200)).T])
    assert np.all(np.diff(E) <= 1e-9 * E[0])
