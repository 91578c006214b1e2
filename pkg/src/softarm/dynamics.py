"""Lagrangian dynamics M(q) qddot + C(q, qdot) qdot + D qdot + K q + G(q) [+ H] = tau."""

from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from . import _kernels
from .errors import IllConditioned
from .kinematics import GeometryParams, pose_from_actuators

FD_STEP = 1e-6
MAX_CONDITION = 1e12


def _vec3(v):
    a = np.asarray(v, dtype=float)
    if a.ndim == 0:
        a = np.full(3, float(a))
    if a.shape != (3,):
        raise ValueError(f"expected scalar or 3-vector, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class DynamicParams:
    """Physical parameters of the arm.

    ``ixx_coeff`` is the slice moment of inertia per unit slice mass (m^2);
    ``None`` selects the thin-disk rule r^2 / 4.
    """

    m: float = 0.13
    L0: float = 0.15
    r: float = 0.0125
    K: np.ndarray = field(default_factory=lambda: np.full(3, 1700.0))
    D: np.ndarray = field(default_factory=lambda: np.full(3, 110.0))
    g: float = -9.81
    n_quad: int = 30
    ixx_coeff: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "K", _vec3(self.K))
        object.__setattr__(self, "D", _vec3(self.D))
        if not self.m > 0:
            raise ValueError(f"mass must be positive, got {self.m}")
        if self.L0 <= 0 or self.r <= 0:
            raise ValueError("L0 and r must be positive")
        if np.any(self.K <= 0) or np.any(self.D <= 0):
            raise ValueError("stiffness and damping entries must be positive")
        if self.n_quad < 8:
            raise ValueError(f"n_quad must be >= 8, got {self.n_quad}")

    @property
    def geometry(self):
        return GeometryParams(self.L0, self.r)

    @property
    def ixx(self):
        coeff = 0.25 * self.r**2 if self.ixx_coeff is None else self.ixx_coeff
        return coeff * self.m

    def replace(self, **changes):
        return replace(self, **changes)

    def __eq__(self, other):
        if not isinstance(other, DynamicParams):
            return NotImplemented
        return (self.m, self.L0, self.r, self.g, self.n_quad, self.ixx_coeff) == (
            other.m, other.L0, other.r, other.g, other.n_quad, other.ixx_coeff
        ) and np.array_equal(self.K, other.K) and np.array_equal(self.D, other.D)

    __hash__ = None


@dataclass
class DynamicsTerms:
    M: np.ndarray
    C: np.ndarray
    G: np.ndarray
    dM: np.ndarray  # dM[i] = dM/dq_i, used to build C

    def mass_rate(self, qdot):
        return np.einsum("ijk,i->jk", self.dM, qdot)


@lru_cache(maxsize=None)
def quadrature(n):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def _args(params):
    x, w = quadrature(params.n_quad)
    return params.L0, params.r, params.m, params.ixx, params.g, x, w


def inertia_matrix(l, params):
    M, _ = _kernels.mass_gravity(np.asarray(l, dtype=float), *_args(params))
    return M


def gravity_vector(l, params):
    """Generalized gravity force, the gradient of :func:`potential_energy`."""
    _, G = _kernels.mass_gravity(np.asarray(l, dtype=float), *_args(params))
    return G


def potential_energy(l, params):
    """-m int G_v . P dxi with G_v = [0, 0, g]."""
    x, w = quadrature(params.n_quad)
    geom = params.geometry
    z = np.array([pose_from_actuators(xi, l, geom).P[2] for xi in x])
    return -params.m * params.g * float(w @ z)


def mass_gradient(l, params):
    """Exact partials dM[i] = dM/dl_i."""
    return _kernels.mass_gravity_gradient(np.asarray(l, dtype=float), *_args(params))[2]


def mass_gradient_fd(l, params, h=FD_STEP):
    """Central-difference partials of M, used to cross-check :func:`mass_gradient`."""
    return _kernels.mass_gradient(np.asarray(l, dtype=float), *_args(params), h)


def coriolis_matrix(l, ldot, params):
    return _kernels.coriolis_from_gradient(mass_gradient(l, params),
                                           np.asarray(ldot, dtype=float))


def dynamics_terms(l, ldot, params):
    M, C, G, dM = _kernels.terms(np.asarray(l, dtype=float), np.asarray(ldot, dtype=float),
                                 *_args(params))
    return DynamicsTerms(M, C, G, dM)


def solve_spd(M, b, check=True):
    if check:
        ev = np.linalg.eigvalsh(M)
        if ev[0] <= 0 or ev[-1] / ev[0] > MAX_CONDITION:
            raise IllConditioned(f"inertia matrix eigenvalues {ev}")
    x = _kernels.spd_solve3(M, np.asarray(b, dtype=float))
    if not np.all(np.isfinite(x)):
        raise IllConditioned("inertia matrix is not positive definite")
    return x


def forward_dynamics(l, ldot, h, tau, params, include_hysteresis=True, terms=None, check=True):
    """Joint accelerations from the full plant equation."""
    l = np.asarray(l, dtype=float)
    ldot = np.asarray(ldot, dtype=float)
    if terms is None:
        terms = dynamics_terms(l, ldot, params)
    rhs = np.asarray(tau, dtype=float) - terms.C @ ldot - params.D * ldot - params.K * l - terms.G
    if include_hysteresis and h is not None:
        rhs = rhs - np.asarray(h, dtype=float)
    return solve_spd(terms.M, rhs, check=check)


def kinetic_energy(l, ldot, params):
    ldot = np.asarray(ldot, dtype=float)
    return 0.5 * ldot @ inertia_matrix(l, params) @ ldot
