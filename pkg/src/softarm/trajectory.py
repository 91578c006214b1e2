"""Desired tip paths and their actuator-space references."""

import numpy as np
from scipy.interpolate import CubicSpline

from . import _kernels
from .errors import Unreachable
from .kinematics import GeometryParams

FD_TIME_STEP = 1e-5

_NO_BREAKS = np.zeros(2)
_NO_COEFS = np.zeros((4, 1, 3))


class Trajectory:
    """Tip path with the actuator reference obtained through inverse kinematics.

    Rates of the actuator reference are central differences of the inverse
    kinematics with time step ``dt``.
    """

    kind = None

    def __init__(self, geom=GeometryParams(), dt=FD_TIME_STEP):
        self.geom = geom
        self.dt = dt
        self.shape = np.zeros(3)
        self.breaks = _NO_BREAKS
        self.coefs = _NO_COEFS

    def kernel_args(self):
        return (self.kind, self.shape, self.breaks, self.coefs, self.geom.L0, self.geom.r, self.dt)

    def tip(self, t):
        return _kernels.desired_tip(float(t), self.kind, self.shape, self.breaks, self.coefs)

    def __call__(self, t):
        """Return (p_d, q_d, qd_dot, qd_ddot) at time t."""
        p, q, qd, qdd = _kernels.reference(float(t), *self.kernel_args())
        if np.isnan(q[0]) or np.isnan(qd[0]) or np.isnan(qdd[0]):
            raise Unreachable(f"reference tip {p} at t={t} is unreachable")
        return p, q, qd, qdd


class CircleTrajectory(Trajectory):
    """X = R sin(w t), Y = R cos(w t), Z = height."""

    kind = _kernels.CIRCLE

    def __init__(self, radius=0.1, omega=3.0, height=0.147, **kw):
        super().__init__(**kw)
        self.shape = np.array([radius, omega, height], dtype=float)


class WaypointTrajectory(Trajectory):
    """Clamped cubic spline through (t, x, y, z) rows, held constant outside the span."""

    kind = _kernels.SPLINE

    def __init__(self, waypoints, **kw):
        super().__init__(**kw)
        rows = np.asarray(waypoints, dtype=float)
        spline = CubicSpline(rows[:, 0], rows[:, 1:], bc_type="clamped")
        self.breaks = np.ascontiguousarray(spline.x)
        self.coefs = np.ascontiguousarray(spline.c)


def make_trajectory(spec, geom):
    if spec.kind == "circle":
        return CircleTrajectory(spec.radius, spec.omega, spec.height, geom=geom)
    return WaypointTrajectory(spec.waypoints, geom=geom)
