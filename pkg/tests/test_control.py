import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import solve_ivp

from softarm.control import (
    ControllerGains,
    ObserverGains,
    adaptation_rate,
    adaptive_passivity_control,
    kinematic_control,
    observer_rate,
    passivity_control,
    passivity_signals,
    pdfl_control,
    regressor,
)
from softarm.dynamics import DynamicParams, dynamics_terms, forward_dynamics, gravity_vector

P = DynamicParams()
G = ControllerGains()
vec = st.tuples(*[st.floats(-0.04, 0.04)] * 3).map(np.array)


def test_kinematic_examples():
    gains = ControllerGains(K_kin=500.0)
    assert np.all(kinematic_control(np.ones(3), np.ones(3), gains) == 0)
    tau = kinematic_control([0.01, 0, -0.01], np.zeros(3), gains)
    assert np.allclose(tau, [5, 0, -5], rtol=1e-15)
    double = ControllerGains(K_kin=1000.0)
    assert np.allclose(kinematic_control([0.01, 0, -0.01], np.zeros(3), double), 2 * tau)


@given(vec, vec)
def test_pdfl_zero_error_is_pure_compensation(q, qdot):
    t = dynamics_terms(q, qdot, P)
    tau = pdfl_control(q, qdot, q, qdot, np.zeros(3), t, P, G)
    beta = t.C @ qdot + P.D * qdot + P.K * q + t.G
    assert np.allclose(tau, beta, rtol=1e-13, atol=1e-12)


@given(vec, vec, vec, vec)
def test_pdfl_linearizes_exact_plant(q, qdot, qd, qd_dot):
    qdd = np.array([0.3, -0.2, 0.1])
    t = dynamics_terms(q, qdot, P)
    tau = pdfl_control(q, qdot, qd, qd_dot, qdd, t, P, G)
    acc = forward_dynamics(q, qdot, None, tau, P)
    e, ed = q - qd, qdot - qd_dot
    # closed loop: e'' + K_d e' + K_p e = 0
    assert np.allclose(acc - qdd + G.K_d * ed + G.K_p * e, 0,
                       atol=1e-9 * (1 + np.abs(G.K_p * e).max()))


def test_pdfl_understated_stiffness_leaves_static_error():
    weak = P.replace(K=P.K - 1020.0)
    qd = np.array([0.01, -0.005, 0.008])
    # static equilibrium of the true plant under the mismatched law
    q = qd.copy()
    for _ in range(50):
        t = dynamics_terms(q, np.zeros(3), weak)
        tau = pdfl_control(q, np.zeros(3), qd, np.zeros(3), np.zeros(3), t, weak, G)
        resid = tau - P.K * q - gravity_vector(q, P)
        J = t.M * -G.K_p - np.diag(P.K - weak.K)
        q = q - np.linalg.solve(J, resid)
    assert np.max(np.abs(resid)) < 1e-10
    assert np.max(np.abs(q - qd)) > 1e-4


def test_passivity_signal_examples():
    q, qd = np.array([0.01, 0.02, -0.01]), np.array([0.3, -0.1, 0.2])
    s = passivity_signals(q, qd, q, qd, np.ones(3), G.Lambda)
    assert np.array_equal(s.v, qd) and np.array_equal(s.a, np.ones(3)) and np.all(s.r == 0)
    s0 = passivity_signals(q, qd, np.zeros(3), np.zeros(3), np.zeros(3), np.zeros(3))
    assert np.array_equal(s0.r, qd)


@given(vec, vec, vec, vec)
def test_filtered_error_identity(q, qdot, qd, qd_dot):
    s = passivity_signals(q, qdot, qd, qd_dot, np.zeros(3), G.Lambda)
    assert np.allclose(s.r, (qdot - qd_dot) + G.Lambda * (q - qd), atol=1e-15)


def test_passivity_examples():
    q, qdot = np.array([0.01, -0.02, 0.005]), np.array([0.1, 0.05, -0.2])
    t = dynamics_terms(q, qdot, P)
    s = passivity_signals(q, qdot, q, qdot, np.array([0.5, 0, -0.5]), G.Lambda)
    tau = passivity_control(s, q, qdot, t, P, G)
    expect = t.M @ s.a + t.C @ qdot + t.G + P.K * q + P.D * qdot
    assert np.allclose(tau, expect, rtol=1e-13)
    t0 = dynamics_terms(q, np.zeros(3), P)
    s0 = passivity_signals(q, np.zeros(3), q, np.zeros(3), np.zeros(3), G.Lambda)
    assert np.allclose(passivity_control(s0, q, np.zeros(3), t0, P, G), t0.G + P.K * q)


def test_regressor_examples():
    assert np.all(regressor(np.zeros(3), np.zeros(3)) == 0)
    Y = regressor([1, 2, 3], [4, 5, 6])
    expect = np.zeros((3, 6))
    expect[[0, 1, 2], [0, 1, 2]] = [1, 2, 3]
    expect[[0, 1, 2], [3, 4, 5]] = [4, 5, 6]
    assert np.array_equal(Y, expect)


@given(vec, vec)
def test_regressor_identity(q, v):
    theta = np.concatenate([P.K, P.D])
    assert np.allclose(regressor(q, v) @ theta, P.K * q + P.D * v, rtol=1e-14, atol=1e-14)


def test_adaptive_examples():
    q, qdot = np.array([0.01, -0.02, 0.005]), np.array([0.1, 0.05, -0.2])
    t = dynamics_terms(q, qdot, P)
    s = passivity_signals(q, qdot, q + 0.001, qdot, np.zeros(3), G.Lambda)
    theta = np.concatenate([P.K, P.D])
    assert np.allclose(adaptive_passivity_control(s, q, qdot, t, theta, G),
                       passivity_control(s, q, qdot, t, P, G), rtol=1e-13)
    bare = adaptive_passivity_control(s, q, qdot, t, np.zeros(6), G)
    assert np.allclose(bare, t.M @ s.a + t.C @ s.v + t.G - G.K_G * s.r, rtol=1e-13)


def test_adaptation_rate_examples():
    Y = regressor([0.01, 0.02, 0.03], [0.1, 0.2, 0.3])
    theta = np.arange(1.0, 7.0)
    sig = ControllerGains(sigma=5.0)
    assert np.all(adaptation_rate(Y, np.zeros(3), G, theta) == 0)
    assert np.allclose(adaptation_rate(Y, np.zeros(3), sig, theta, sigma_on=True), -5.0 * theta)
    anchor = np.full(6, 2.0)
    assert np.allclose(adaptation_rate(Y, np.zeros(3), sig, theta, True, anchor),
                       -5.0 * (theta - 2.0))
    r = np.array([1e-3, -2e-3, 0.5e-3])
    rate = adaptation_rate(Y, r, G, theta)
    assert np.allclose(rate, -1e5 * (Y.T @ r))
    # a constant rate integrates linearly
    assert np.allclose(theta + 0.1 * rate + 0.1 * rate, theta + 0.2 * rate)


@given(st.floats(-2e3, 2e3), st.floats(1.0, 1e3), st.integers(0, 2**31))
def test_sigma_leakage_bound(theta0, sigma, seed):
    rng = np.random.default_rng(seed)
    freq = rng.uniform(1, 50, 3)
    amp = rng.uniform(0, 1e4, 3)

    def forcing(t):
        return float(amp @ np.sin(freq * t))

    sol = solve_ivp(lambda t, x: [forcing(t) - sigma * x[0]], (0, 2), [theta0],
                    max_step=1e-3, rtol=1e-9, atol=1e-9)
    bound = max(abs(theta0), amp.sum() / sigma)
    assert np.max(np.abs(sol.y)) <= bound * (1 + 1e-6) + 1e-9


def test_observer_is_consistent_at_true_state():
    q, qdot = np.array([0.01, -0.02, 0.005]), np.array([0.1, 0.05, -0.2])
    tau = np.array([40.0, 60.0, 20.0])
    d1, d2 = observer_rate(q, qdot, q, tau, P, ObserverGains())
    assert np.array_equal(d1, qdot)
    assert np.allclose(d2, forward_dynamics(q, qdot, None, tau, P), rtol=1e-13)


def test_observer_converges_on_static_plant():
    q = np.array([0.01, -0.005, 0.008])
    tau = P.K * q + gravity_vector(q, P)
    gains = ObserverGains(g1=200.0, g2=1e4)

    def f(t, x):
        a, b = observer_rate(x[:3], x[3:], q, tau, P, gains)
        return np.concatenate([a, b])

    x0 = np.concatenate([q, [0.2, -0.1, 0.05]])
    sol = solve_ivp(f, (0, 0.5), x0, method="LSODA", rtol=1e-9, atol=1e-12)
    assert np.max(np.abs(sol.y[3:, -1])) < 1e-6
    assert np.max(np.abs(sol.y[:3, -1] - q)) < 1e-8


def test_observer_gain_validation():
    with pytest.raises(ValueError):
        ObserverGains(g1=-1.0)
    with pytest.warns(UserWarning):
        ObserverGains(g1=100.0, g2=200.0)
    with pytest.raises(ValueError):
        ControllerGains(K_p=-1.0)
