"""Control laws, parameter adaptation and the high-gain velocity observer.

Every law here is a pure function of its inputs.  Internal controller states
(parameter estimates, observer states, the hysteresis model copy) are
integrated by the simulator alongside the plant.
"""

from dataclasses import dataclass, field, fields
import warnings

import numpy as np

from . import _kernels
from .dynamics import _vec3, dynamics_terms


def _gain(value):
    return field(default_factory=lambda: np.full(3, float(value)))


@dataclass(frozen=True)
class ControllerGains:
    K_kin: np.ndarray = _gain(5000.0)
    K_p: np.ndarray = _gain(1e4)
    K_d: np.ndarray = _gain(200.0)
    K_G: np.ndarray = _gain(10.0)
    Lambda: np.ndarray = _gain(100.0)
    Gamma_inv: np.ndarray = _gain(1e5)
    sigma: np.ndarray = _gain(0.0)

    def __post_init__(self):
        for f in fields(self):
            v = _vec3(getattr(self, f.name))
            if np.any(v < 0):
                raise ValueError(f"gain {f.name} must be non-negative, got {v}")
            object.__setattr__(self, f.name, v)

    @classmethod
    def critically_damped(cls, omega, **kw):
        omega = _vec3(omega)
        return cls(K_p=omega**2, K_d=2.0 * omega, **kw)

    def __eq__(self, other):
        if not isinstance(other, ControllerGains):
            return NotImplemented
        return all(np.array_equal(getattr(self, f.name), getattr(other, f.name)) for f in fields(self))

    __hash__ = None


@dataclass(frozen=True)
class ObserverGains:
    g1: np.ndarray = _gain(1e3)
    g2: np.ndarray = _gain(1e6)

    def __post_init__(self):
        g1, g2 = _vec3(self.g1), _vec3(self.g2)
        object.__setattr__(self, "g1", g1)
        object.__setattr__(self, "g2", g2)
        if np.any(g1 <= 0) or np.any(g2 <= 0):
            raise ValueError("observer gains must be positive")
        if np.any(g2 < 10 * g1) or np.any(g1 < 10):
            warnings.warn(f"observer gains g1={g1}, g2={g2} violate g2 >> g1 >> 1", stacklevel=2)

    def __eq__(self, other):
        if not isinstance(other, ObserverGains):
            return NotImplemented
        return np.array_equal(self.g1, other.g1) and np.array_equal(self.g2, other.g2)

    __hash__ = None


@dataclass(frozen=True)
class PassivitySignals:
    v: np.ndarray
    a: np.ndarray
    r: np.ndarray


def kinematic_control(q_d, q, gains):
    return gains.K_kin * (np.asarray(q_d, dtype=float) - np.asarray(q, dtype=float))


def pdfl_control(q, qdot, q_d, qd_dot, qd_ddot, terms, params, gains, hyst=None):
    """Feedback linearization with a PD outer loop.

    ``hyst`` adds an identified hysteresis force to the cancelled terms.
    """
    q = np.asarray(q, dtype=float)
    qdot = np.asarray(qdot, dtype=float)
    e = q - q_d
    edot = qdot - qd_dot
    tau_prime = qd_ddot - gains.K_d * edot - gains.K_p * e
    beta = terms.C @ qdot + params.D * qdot + params.K * q + terms.G
    if hyst is not None:
        beta = beta + hyst
    return terms.M @ tau_prime + beta


def passivity_signals(q, qdot, q_d, qd_dot, qd_ddot, Lambda):
    e = np.asarray(q, dtype=float) - q_d
    edot = np.asarray(qdot, dtype=float) - qd_dot
    v = qd_dot - Lambda * e
    a = qd_ddot - Lambda * edot
    r = qdot - v
    return PassivitySignals(v, a, r)


def passivity_control(signals, q, qdot, terms, params, gains):
    s = signals
    return (terms.M @ s.a + terms.C @ s.v + terms.G + params.K * np.asarray(q, dtype=float)
            + params.D * s.v - gains.K_G * s.r)


def regressor(q, v):
    """3x6 matrix Y with Y @ [K; D] = K q + D v."""
    return np.hstack([np.diag(np.asarray(q, dtype=float)), np.diag(np.asarray(v, dtype=float))])


def adaptive_passivity_control(signals, q, qdot, terms, theta_hat, gains):
    s = signals
    theta_hat = np.asarray(theta_hat, dtype=float)
    # Y @ theta_hat without forming Y
    ykd = theta_hat[:3] * q + theta_hat[3:] * s.v
    return terms.M @ s.a + terms.C @ s.v + terms.G + ykd - gains.K_G * s.r


def adaptation_rate(Y, r, gains, theta_hat, sigma_on=False, anchor=None):
    """Gradient update -Gamma_inv Y^T r, with optional sigma leakage.

    The leakage pulls toward ``anchor`` (zero by default).  Each actuator's
    sigma is shared by its stiffness and damping estimates.
    """
    rate = -np.tile(gains.Gamma_inv, 2) * (np.asarray(Y).T @ np.asarray(r, dtype=float))
    if sigma_on:
        target = 0.0 if anchor is None else anchor
        rate = rate - np.tile(gains.sigma, 2) * (np.asarray(theta_hat, dtype=float) - target)
    return rate


def observer_rate(x1_hat, x2_hat, y, tau, nominal_params, obs_gains, terms=None):
    """High-gain observer driven by position measurements only.

    The nominal model excludes hysteresis and evaluates C and D at the
    estimated velocity.
    """
    x1_hat = np.asarray(x1_hat, dtype=float)
    x2_hat = np.asarray(x2_hat, dtype=float)
    if terms is None:
        terms = dynamics_terms(x1_hat, x2_hat, nominal_params)
    p = nominal_params
    rhs = np.asarray(tau, dtype=float) - terms.C @ x2_hat - p.D * x2_hat - p.K * x1_hat - terms.G
    theta0 = _kernels.spd_solve3(terms.M, rhs)
    innov = np.asarray(y, dtype=float) - x1_hat
    return x2_hat + obs_gains.g1 * innov, theta0 + obs_gains.g2 * innov
