"""Actuator, arc-parameter and Cartesian maps for a three-actuator section.

Actuator 1 sits on the +X axis, actuators 2 and 3 at +120 and +240 degrees.
Extending an actuator bends the section away from it.
"""

from dataclasses import dataclass
import math

import numpy as np

from . import _kernels
from .errors import StraightSingularity, Unreachable

STRAIGHT_EPS = 1e-8


@dataclass(frozen=True)
class GeometryParams:
    L0: float = 0.15
    r: float = 0.0125

    def __post_init__(self):
        if not (self.L0 > 0 and self.r > 0):
            raise ValueError(f"L0 and r must be positive, got L0={self.L0}, r={self.r}")


@dataclass(frozen=True)
class ConfigurationSpace:
    lam: float
    phi: float
    theta: float


@dataclass(frozen=True)
class Pose:
    R: np.ndarray
    P: np.ndarray


@dataclass
class ActuatorState:
    l: np.ndarray
    ldot: np.ndarray

    def __post_init__(self):
        self.l = np.asarray(self.l, dtype=float)
        self.ldot = np.asarray(self.ldot, dtype=float)
        if self.l.shape != (3,) or self.ldot.shape != (3,):
            raise ValueError("actuator state vectors must have length 3")
        if not (np.all(np.isfinite(self.l)) and np.all(np.isfinite(self.ldot))):
            raise ValueError("actuator state must be finite")

    def validate(self, geom):
        if np.any(geom.L0 + self.l <= 0):
            raise ValueError(f"actuator length collapsed: L0 + l = {geom.L0 + self.l}")
        return self


def _as3(l):
    l = np.asarray(l, dtype=float)
    if l.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {l.shape}")
    return l


def curvature_discriminant(l):
    """sqrt(l1^2 + l2^2 + l3^2 - l1 l2 - l2 l3 - l1 l3)."""
    l1, l2, l3 = l
    d2 = l1 * l1 + l2 * l2 + l3 * l3 - l1 * l2 - l2 * l3 - l1 * l3
    return math.sqrt(max(d2, 0.0))


def config_from_actuators(l, geom=GeometryParams()):
    """Arc parameters (lambda, phi, theta) of the section.

    lambda carries the offset radius so that lambda * phi is the mean
    actuator length.  Raises StraightSingularity near the straight
    configuration, where the arc parameters are 0/0.
    """
    l = _as3(l)
    disc = curvature_discriminant(l)
    if disc < STRAIGHT_EPS:
        raise StraightSingularity(f"curvature discriminant {disc:.3e} below {STRAIGHT_EPS}")
    phi = 2.0 * disc / (3.0 * geom.r)
    lam = geom.r * (3.0 * geom.L0 + l.sum()) / (2.0 * disc)
    theta = math.atan2(math.sqrt(3.0) * (l[2] - l[1]), l[1] + l[2] - 2.0 * l[0])
    return ConfigurationSpace(lam, phi, theta)


def _rotz(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _roty(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def pose(xi, c):
    """Pose of the disk at normalized arc position ``xi`` on the arc ``c``."""
    if not 0.0 <= xi <= 1.0:
        raise ValueError(f"xi must lie in [0, 1], got {xi}")
    u = xi * c.phi
    ct, st = math.cos(c.theta), math.sin(c.theta)
    vers = 2.0 * math.sin(0.5 * u) ** 2
    P = np.array([c.lam * vers * ct, c.lam * vers * st, c.lam * math.sin(u)])
    R = _rotz(c.theta) @ _roty(u) @ _rotz(-c.theta)
    return Pose(R, P)


def pose_transform_product(xi, c):
    """Same pose via the 4x4 product Rotz Transx Roty Transx(-lam) Rotz(-theta)."""

    def hom(R=None, p=None):
        T = np.eye(4)
        if R is not None:
            T[:3, :3] = R
        if p is not None:
            T[:3, 3] = p
        return T

    T = (hom(R=_rotz(c.theta)) @ hom(p=[c.lam, 0, 0]) @ hom(R=_roty(xi * c.phi))
         @ hom(p=[-c.lam, 0, 0]) @ hom(R=_rotz(-c.theta)))
    return Pose(T[:3, :3], T[:3, 3])


def pose_straight_limit(xi, l, geom=GeometryParams()):
    """Pose from the series expansion valid at and near the straight configuration."""
    l = _as3(l)
    s, kx, ky = _kernels.shape_coords(l, geom.L0, geom.r)
    P, R, _, _ = _kernels.frame(float(xi), s, kx, ky, True)
    return Pose(R, P)


def pose_from_actuators(xi, l, geom=GeometryParams()):
    """Pose for any valid actuator vector, straight or bent."""
    l = _as3(l)
    s, kx, ky = _kernels.shape_coords(l, geom.L0, geom.r)
    P, R, _, _ = _kernels.frame(float(xi), s, kx, ky, False)
    return Pose(R, P)


def tip_position(l, geom=GeometryParams()):
    return pose_from_actuators(1.0, l, geom).P


def position_partials(xi, l, geom=GeometryParams()):
    """Partials of P and R with respect to each actuator length.

    Returns ``(dP, dR)`` where ``dP[:, i]`` is dP/dl_i and ``dR[i]`` is dR/dl_i.
    """
    l = _as3(l)
    _, _, dP, dR = _kernels.frame_partials_l(float(xi), l, geom.L0, geom.r, False)
    return dP, dR


def linear_jacobian(xi, l, geom=GeometryParams()):
    """Linear-velocity Jacobian in the moving frame, column i = R^T dP/dl_i."""
    l = _as3(l)
    _, R, dP, _ = _kernels.frame_partials_l(float(xi), l, geom.L0, geom.r, False)
    return R.T @ dP


def actuators_from_tip(p_tip, geom=GeometryParams()):
    """Closed-form inverse kinematics from a tip position to actuator lengths.

    The bend plane is atan2(y, x), the bend angle 2 atan2(rho, z), and the arc
    length follows from the chord |p| = 2 lambda sin(phi / 2).
    """
    x, y, z = (float(v) for v in p_tip)
    l = _kernels.tip_to_actuators(x, y, z, geom.L0, geom.r)
    if np.isnan(l[0]):
        raise Unreachable(f"tip {tuple(p_tip)} has no valid actuator configuration")
    return l
