"""Closed-loop simulation of plant, hysteresis, controller states and observer.

The controller is sampled at ``control_rate``.  Measurement noise is drawn
once per sample and held.  In ``zoh`` mode the control force is also computed
once per sample and held; in ``continuous`` mode it is re-evaluated at every
integrator stage from the (held-noise) measurement.
"""

import logging

import numpy as np

from . import _closed_loop as cl
from . import _kernels
from .config import ScenarioConfig
from .control import (
    adaptation_rate,
    adaptive_passivity_control,
    kinematic_control,
    observer_rate,
    passivity_control,
    passivity_signals,
    pdfl_control,
    regressor,
)
from .dynamics import MAX_CONDITION, dynamics_terms, forward_dynamics, quadrature
from .errors import ConfigError, Diverged, IllConditioned
from .hysteresis import LITERAL, hysteresis_rate
from .kinematics import actuators_from_tip
from .trajectory import make_trajectory

log = logging.getLogger(__name__)

DIVERGENCE_LIMIT = 1e6


def measure(q_true, noise_std, rng):
    """Position measurement with additive white Gaussian noise."""
    q_true = np.asarray(q_true, dtype=float)
    if noise_std == 0:
        return q_true.copy()
    return q_true + rng.normal(0.0, noise_std, size=q_true.shape)


def saturate(tau, limits):
    lo, hi = limits
    return np.clip(tau, lo, hi)


class _Layout:
    """Slices of the state vector: q, qdot, h, then optional controller states."""

    def __init__(self, config):
        n = 9
        self.theta = self.hhat = self.x1 = self.x2 = None
        if config.adaptive:
            self.theta = slice(n, n + 6)
            n += 6
        if config.uses_hysteresis_model:
            self.hhat = slice(n, n + 3)
            n += 3
        if config.observer is not None:
            self.x1 = slice(n, n + 3)
            self.x2 = slice(n + 3, n + 6)
            n += 6
        self.size = n


def _start(s):
    return -1 if s is None else s.start


class SimTrace:
    """Uniformly sampled simulation record; one row per controller sample."""

    BASE_COLUMNS = (
        ["t"]
        + [f"q{i}" for i in (1, 2, 3)]
        + [f"qd{i}" for i in (1, 2, 3)]
        + [f"qdot{i}" for i in (1, 2, 3)]
        + [f"y{i}" for i in (1, 2, 3)]
        + [f"tau{i}" for i in (1, 2, 3)]
        + [f"tau_sat{i}" for i in (1, 2, 3)]
        + ["tip_x", "tip_y", "tip_z", "des_x", "des_y", "des_z", "l2_err"]
    )

    def __init__(self, columns, data, meta=None):
        self.columns = list(columns)
        self.data = np.asarray(data, dtype=float)
        self.meta = dict(meta or {})
        self._index = {c: i for i, c in enumerate(self.columns)}

    @staticmethod
    def columns_for(config):
        cols = list(SimTrace.BASE_COLUMNS)
        if config.hysteresis is not None:
            cols += [f"h{i}" for i in (1, 2, 3)]
        if config.adaptive:
            cols += [f"theta_hat{i}" for i in range(1, 7)]
        if config.uses_hysteresis_model:
            cols += [f"h_hat{i}" for i in (1, 2, 3)]
        if config.observer is not None:
            cols += [f"x1_hat{i}" for i in (1, 2, 3)] + [f"x2_hat{i}" for i in (1, 2, 3)]
        return cols

    def __getitem__(self, key):
        if isinstance(key, str):
            return self.data[:, self._index[key]]
        return self.data[:, [self._index[k] for k in key]]

    def __len__(self):
        return self.data.shape[0]

    def __contains__(self, key):
        return key in self._index

    @property
    def t(self):
        return self["t"]

    def block(self, prefix, n=3):
        return self[[f"{prefix}{i}" for i in range(1, n + 1)]]

    def to_csv(self, path):
        # repr keeps the shortest exact decimal form, so files are byte-stable
        with open(path, "w", newline="") as fh:
            fh.write(",".join(self.columns) + "\n")
            for row in self.data:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")

    @classmethod
    def from_csv(cls, path):
        with open(path) as fh:
            header = fh.readline().strip().split(",")
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(header, data)


class Simulation:
    def __init__(self, config: ScenarioConfig):
        if config.uses_hysteresis_model and config.hysteresis is None:
            raise ConfigError("pdfl_hyst_comp needs a hysteresis section", "hysteresis")
        self.config = config
        self.true = config.true_params
        self.nominal = config.nominal_params
        self.gains = config.gains
        self.geom = self.true.geometry
        self.traj = make_trajectory(config.trajectory, self.nominal.geometry)
        self.layout = _Layout(config)
        self.rng = np.random.default_rng(config.seed)
        self.dt = 1.0 / config.control_rate
        self.limits = config.saturation
        self.theta0 = np.concatenate([self.nominal.K, self.nominal.D])
        self.params = self._pack()

    def _pack(self):
        cfg, lay, g = self.config, self.layout, self.gains
        t, n = self.true, self.nominal
        xt, wt = quadrature(t.n_quad)
        xn, wn = quadrature(n.n_quad)
        shared = (t.L0, t.r, t.m, t.ixx, t.g, t.n_quad) == (n.L0, n.r, n.m, n.ixx, n.g, n.n_quad)
        hyst = cfg.hysteresis
        obs = cfg.observer
        kind, shape, breaks, coefs, _, _, fd_dt = self.traj.kernel_args()
        return cl.LoopParams(
            controller=cl.CONTROLLER_CODES[cfg.controller],
            true_geo=np.array([t.L0, t.r, t.m, t.ixx, t.g]),
            true_K=t.K.copy(),
            true_D=t.D.copy(),
            nom_geo=np.array([n.L0, n.r, n.m, n.ixx, n.g]),
            nom_K=n.K.copy(),
            nom_D=n.D.copy(),
            nodes_t=np.array(xt),
            weights_t=np.array(wt),
            nodes_n=np.array(xn),
            weights_n=np.array(wn),
            shared=bool(shared),
            hyst_mode=-1 if hyst is None else (1 if hyst.mode == LITERAL else 0),
            hyst=np.zeros(3) if hyst is None else np.array([hyst.alpha, hyst.beta, hyst.gamma]),
            K_kin=g.K_kin.copy(),
            K_p=g.K_p.copy(),
            K_d=g.K_d.copy(),
            K_G=g.K_G.copy(),
            Lam=g.Lambda.copy(),
            Gam=np.tile(g.Gamma_inv, 2),
            sig=np.tile(g.sigma, 2) if cfg.controller == "adaptive_passivity_sigma" else np.zeros(6),
            anchor=self.theta0.copy() if cfg.leak_anchor == "initial" else np.zeros(6),
            g1=np.zeros(3) if obs is None else obs.g1.copy(),
            g2=np.zeros(3) if obs is None else obs.g2.copy(),
            i_theta=_start(lay.theta),
            i_hhat=_start(lay.hhat),
            i_x1=_start(lay.x1),
            i_x2=_start(lay.x2),
            sat_lo=float(self.limits[0]),
            sat_hi=float(self.limits[1]),
            traj_kind=int(kind),
            traj_shape=shape,
            traj_breaks=breaks,
            traj_coefs=coefs,
            traj_dt=float(fd_dt),
        )

    # -- right-hand sides -------------------------------------------------
    def rhs(self, t, X, noise=None):
        """State derivative from the compiled closed loop; returns (dX, tau_raw, tau)."""
        noise = np.zeros(3) if noise is None else np.asarray(noise, dtype=float)
        dX = np.empty(self.layout.size)
        info = np.empty(6)
        cl.rhs(float(t), np.asarray(X, dtype=float), self.params, noise,
               np.zeros(9 + self.layout.size), False, dX, info)
        return dX, info[:3].copy(), info[3:].copy()

    def reference_rhs(self, t, X, noise=None):
        """Same derivative assembled from the public control and dynamics functions."""
        cfg, lay, g = self.config, self.layout, self.gains
        X = np.asarray(X, dtype=float)
        noise = np.zeros(3) if noise is None else np.asarray(noise, dtype=float)
        q, qdot, h = X[0:3], X[3:6], X[6:9]
        y = q + noise
        vel = X[lay.x2] if lay.x2 is not None else qdot
        dX = np.zeros(lay.size)
        _, q_d, qd_dot, qd_ddot = self.traj(t)
        ctrl = cfg.controller
        if ctrl == "kinematic":
            tau_raw = kinematic_control(q_d, y, g)
        else:
            terms = dynamics_terms(y, vel, self.nominal)
            if ctrl in ("pdfl", "pdfl_hyst_comp"):
                hyst = None
                if ctrl == "pdfl_hyst_comp":
                    hyst = X[lay.hhat]
                    dX[lay.hhat] = hysteresis_rate(hyst, y, vel, cfg.hysteresis)
                tau_raw = pdfl_control(y, vel, q_d, qd_dot, qd_ddot, terms, self.nominal, g, hyst)
            else:
                sig = passivity_signals(y, vel, q_d, qd_dot, qd_ddot, g.Lambda)
                if ctrl == "passivity":
                    tau_raw = passivity_control(sig, y, vel, terms, self.nominal, g)
                else:
                    theta = X[lay.theta]
                    tau_raw = adaptive_passivity_control(sig, y, vel, terms, theta, g)
                    sigma_on = ctrl == "adaptive_passivity_sigma"
                    anchor = self.theta0 if cfg.leak_anchor == "initial" else None
                    dX[lay.theta] = adaptation_rate(regressor(y, sig.v), sig.r, g, theta,
                                                    sigma_on, anchor)
        tau = saturate(tau_raw, self.limits)
        plant = dynamics_terms(q, qdot, self.true)
        dX[0:3] = qdot
        dX[3:6] = forward_dynamics(q, qdot, h if cfg.hysteresis is not None else None, tau,
                                   self.true, terms=plant, check=False)
        if cfg.hysteresis is not None:
            dX[6:9] = hysteresis_rate(h, q, qdot, cfg.hysteresis)
        if lay.x1 is not None:
            dX[lay.x1], dX[lay.x2] = observer_rate(X[lay.x1], X[lay.x2], y, tau, self.nominal,
                                                   cfg.observer)
        return dX, tau_raw, tau

    # -- driver -----------------------------------------------------------
    def initial_state(self):
        lay = self.layout
        X = np.zeros(lay.size)
        X[0:3] = actuators_from_tip(self.config.initial_tip, self.geom)
        if lay.theta is not None:
            X[lay.theta] = self.theta0
        return X

    def _draw_noise(self):
        if self.config.noise_std > 0:
            return self.rng.normal(0.0, self.config.noise_std, 3)
        return np.zeros(3)

    def run(self, initial_state=None):
        """Integrate to the configured duration.

        ``initial_state`` replaces the default start (IK of the initial tip,
        observer position on the first measurement) when given.
        """
        cfg, lay, p = self.config, self.layout, self.params
        integ = cfg.integrator
        n_ticks = int(round(cfg.duration * cfg.control_rate))
        cols = SimTrace.columns_for(cfg)
        data = np.empty((n_ticks + 1, len(cols)))
        noise = self._draw_noise()
        if initial_state is None:
            X = self.initial_state()
            if lay.x1 is not None:
                X[lay.x1] = X[0:3] + noise
        else:
            X = np.array(initial_state, dtype=float)
            if X.shape != (lay.size,):
                raise ValueError(f"initial state must have {lay.size} entries")
        zoh = cfg.control_mode == "zoh"
        rk45 = integ.method == "rk45"
        held = np.zeros(9 + lay.size)
        info = np.zeros(6)
        k1 = None
        h = min(integ.step, self.dt)
        n_steps = n_rejected = 0
        for k in range(n_ticks + 1):
            t = k * self.dt
            if k > 0:
                noise = self._draw_noise()
            if zoh:
                cl.held_control(t, X, p, noise, held)
            # the derivative carried over from the last step is stale after a
            # new sample; otherwise it is reused
            if k1 is None or zoh or cfg.noise_std > 0 or not rk45:
                k1 = np.empty(lay.size)
                cl.rhs(t, X, p, noise, held, zoh, k1, info)
            self._check(t, X)
            y = held[6:9] if zoh else X[0:3] + noise
            self._record(data[k], t, X, y, info)
            if k == n_ticks:
                break
            t_next = (k + 1) * self.dt
            if rk45:
                X, k1, h, acc, rej, status = cl.dopri_advance(
                    t, X, t_next, k1, h, integ.rtol, integ.atol, 1e-12, p, noise, held, zoh, info)
                n_steps += acc
                n_rejected += rej
                if status != cl.OK:
                    raise Diverged(f"integrator step underflow near t={t:.6g}", t, X.copy())
            else:
                X, acc = cl.rk4_advance(t, X, t_next, integ.step, p, noise, held, zoh, info)
                n_steps += acc
        meta = {"name": cfg.name, "controller": cfg.controller, "seed": cfg.seed,
                "steps": n_steps, "rejected": n_rejected}
        return SimTrace(cols, data, meta)

    def _check(self, t, X):
        if not np.all(np.isfinite(X)) or np.max(np.abs(X)) > DIVERGENCE_LIMIT:
            raise Diverged(f"state diverged at t={t:.6g}", t, X.copy())
        p = self.true
        x, w = quadrature(p.n_quad)
        M, _ = _kernels.mass_gravity(X[0:3], p.L0, p.r, p.m, p.ixx, p.g, x, w)
        ev = np.linalg.eigvalsh(M)
        if ev[0] <= 0 or ev[-1] / ev[0] > MAX_CONDITION:
            raise IllConditioned(f"inertia matrix ill-conditioned at t={t:.6g}: {ev}")

    def _record(self, row, t, X, y, info):
        lay, cfg = self.layout, self.config
        p_d, q_d, _, _ = self.traj(t)
        q = X[0:3]
        s, kx, ky = _kernels.shape_coords(q, self.geom.L0, self.geom.r)
        tip = _kernels.frame(1.0, s, kx, ky, False)[0]
        parts = [[t], q, q_d, X[3:6], y, info[:3], info[3:], tip, p_d,
                 [float(np.linalg.norm(tip - p_d))]]
        if cfg.hysteresis is not None:
            parts.append(X[6:9])
        if lay.theta is not None:
            parts.append(X[lay.theta])
        if lay.hhat is not None:
            parts.append(X[lay.hhat])
        if lay.x1 is not None:
            parts += [X[lay.x1], X[lay.x2]]
        row[:] = np.concatenate(parts)


def run_scenario(config):
    """Run one scenario and return its trace."""
    return Simulation(config).run()
