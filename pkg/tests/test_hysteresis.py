import numpy as np
import pytest
from hypothesis import given, strategies as st

from softarm.hysteresis import LITERAL, BoucWenParams, hysteresis_rate

BW = BoucWenParams()
A, W = 0.02, 3.0
PERIOD = 2 * np.pi / W


def rk4_history(h0, lead_sign=1.0, periods=2, n=20000, params=BW):
    """Fine fixed-step RK4 of h along l(t) = A sin(W t)."""
    dt = periods * PERIOD / n
    h = np.array(h0, dtype=float)
    out = [h.copy()]

    def f(t, h):
        l = np.full(3, A * np.sin(W * t)) * lead_sign
        ld = np.full(3, A * W * np.cos(W * t)) * lead_sign
        return hysteresis_rate(h, l, ld, params)

    for k in range(n):
        t = k * dt
        k1 = f(t, h)
        k2 = f(t + dt / 2, h + dt / 2 * k1)
        k3 = f(t + dt / 2, h + dt / 2 * k2)
        k4 = f(t + dt, h + dt * k3)
        h = h + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out.append(h.copy())
    return np.linspace(0, periods * PERIOD, n + 1), np.array(out)


def test_zero_rate_gives_zero_derivative():
    assert np.all(hysteresis_rate([0.3, -0.2, 1.0], [0.01, 0, 0], np.zeros(3)) == 0)


def test_linear_start():
    v = 0.05
    assert np.allclose(hysteresis_rate(np.zeros(3), np.zeros(3), [v, 0, 0]),
                       [BW.alpha * v, 0, 0], rtol=1e-15)


def test_sign_of_zero_is_zero():
    # at a velocity reversal the beta term drops out
    out = hysteresis_rate([0.5, 0, 0], np.zeros(3), [0.0, 0, 0])
    assert np.all(out == 0)


def test_sinusoidal_loop_closes_with_distinct_branches():
    # from h = 0 the loop drifts by about 9% less each cycle; it closes to
    # within 1e-4 N once that start-up drift has decayed
    per = 2000
    settle = 25
    t, h = rk4_history(np.zeros(3), periods=settle + 1, n=(settle + 1) * per)
    first = np.max(np.abs(h[2 * per] - h[per]))
    last = np.max(np.abs(h[(settle + 1) * per] - h[settle * per]))
    assert last < 1e-4 < first
    l = A * np.sin(W * t)
    cycle = slice(settle * per, (settle + 1) * per)
    rising = np.cos(W * t[cycle]) > 0
    # loading and unloading branches at the same displacement l = 0
    lc, hc = l[cycle], h[cycle, 0]
    up = hc[rising][np.argmin(np.abs(lc[rising]))]
    down = hc[~rising][np.argmin(np.abs(lc[~rising]))]
    assert abs(up - down) > 1e-3


@given(st.floats(-1, 1), st.floats(0.1, 2.0))
def test_odd_symmetry(h0, scale):
    _, a = rk4_history(np.full(3, h0), 1.0, periods=0.5, n=500,
                       params=BoucWenParams(alpha=BW.alpha * scale))
    _, b = rk4_history(np.full(3, -h0), -1.0, periods=0.5, n=500,
                       params=BoucWenParams(alpha=BW.alpha * scale))
    assert np.allclose(a, -b, atol=1e-13)


def test_bounded_over_60_seconds():
    n = 60000
    dt = 60.0 / n
    h = np.zeros(3)
    peak = 0.0
    for k in range(n):
        t = k * dt
        # three unrelated bounded velocity profiles
        ld = np.array([0.06 * np.cos(3 * t), 0.1 * np.sin(7.3 * t), 0.02 * np.sign(np.sin(t))])
        h = h + dt * hysteresis_rate(h, np.zeros(3), ld, BW)
        peak = max(peak, np.max(np.abs(h)))
    assert peak < 1e3


def test_constant_state_with_zero_velocity():
    h0 = np.array([0.2, -0.1, 0.05])
    _, h = rk4_history(h0, 0.0, periods=0.2, n=200)
    assert np.all(h == h0)


def test_literal_mode_grows_for_held_extension():
    lit = BoucWenParams(mode=LITERAL)
    h = np.zeros(3)
    dt = 1e-2
    hist = []
    for _ in range(1000):
        h = h + dt * hysteresis_rate(h, np.full(3, 0.02), np.zeros(3), lit)
        hist.append(h[0])
    # a held positive displacement keeps driving h upward in the literal form
    assert np.all(np.diff(hist) > 0) and hist[-1] > 100


def test_mode_validation():
    with pytest.raises(ValueError):
        BoucWenParams(mode="other")
