"""Scenario description and its YAML form.

Every section is optional in a scenario file; omitted keys take the defaults
shown by ``softarm schema``.  Unknown keys are rejected.
"""

from dataclasses import dataclass, field, fields, replace
import math
from pathlib import Path

import numpy as np
import yaml

from .control import ControllerGains, ObserverGains
from .dynamics import DynamicParams
from .errors import ConfigError
from .hysteresis import BoucWenParams

CONTROLLERS = (
    "kinematic",
    "pdfl",
    "pdfl_hyst_comp",
    "passivity",
    "adaptive_passivity",
    "adaptive_passivity_sigma",
)
CONTROL_MODES = ("continuous", "zoh")
INTEGRATORS = ("rk45", "rk4")
LEAK_ANCHORS = ("zero", "initial")

DEFAULT_INITIAL_TIP = (-0.0990, -0.0017, 0.1067)


@dataclass(frozen=True)
class TrajectorySpec:
    kind: str = "circle"
    radius: float = 0.1
    omega: float = 3.0
    height: float = 0.147
    # waypoint rows of (t, x, y, z); used when kind == "waypoints"
    waypoints: tuple = ()

    def __post_init__(self):
        if self.kind not in ("circle", "waypoints"):
            raise ConfigError(f"unknown trajectory kind {self.kind!r}", "trajectory.kind")
        if self.kind == "waypoints":
            rows = tuple(tuple(float(v) for v in row) for row in self.waypoints)
            if len(rows) < 2 or any(len(row) != 4 for row in rows):
                raise ConfigError("waypoints need at least two rows of (t, x, y, z)",
                                  "trajectory.waypoints")
            if any(b[0] <= a[0] for a, b in zip(rows, rows[1:])):
                raise ConfigError("waypoint times must increase", "trajectory.waypoints")
            object.__setattr__(self, "waypoints", rows)


@dataclass(frozen=True)
class IntegratorSpec:
    method: str = "rk45"
    rtol: float = 1e-6
    atol: float = 1e-8
    step: float = 1e-4

    def __post_init__(self):
        if self.method not in INTEGRATORS:
            raise ConfigError(f"integrator method must be one of {INTEGRATORS}", "integrator.method")
        if not (self.rtol > 0 and self.atol > 0 and self.step > 0):
            raise ConfigError("integrator tolerances and step must be positive", "integrator")


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "scenario"
    controller: str = "pdfl"
    duration: float = 10.0
    control_rate: float = 1000.0
    control_mode: str = "continuous"
    seed: int = 0
    noise_std: float = 0.0
    saturation: tuple = (0.0, 100.0)
    initial_tip: tuple = DEFAULT_INITIAL_TIP
    trajectory: TrajectorySpec = field(default_factory=TrajectorySpec)
    true_params: DynamicParams = field(default_factory=DynamicParams)
    nominal_params: DynamicParams = field(default_factory=DynamicParams)
    allow_model_mismatch: bool = False
    gains: ControllerGains = field(default_factory=ControllerGains)
    observer: ObserverGains | None = None
    hysteresis: BoucWenParams | None = None
    leak_anchor: str = "zero"
    integrator: IntegratorSpec = field(default_factory=IntegratorSpec)

    def __post_init__(self):
        if self.controller not in CONTROLLERS:
            raise ConfigError(f"controller must be one of {CONTROLLERS}, got {self.controller!r}",
                              "controller")
        if not self.duration >= 0 or not math.isfinite(self.duration):
            raise ConfigError(f"duration must be non-negative, got {self.duration}", "duration")
        if not self.control_rate > 0:
            raise ConfigError(f"control_rate must be positive, got {self.control_rate}",
                              "control_rate")
        if self.control_mode not in CONTROL_MODES:
            raise ConfigError(f"control_mode must be one of {CONTROL_MODES}", "control_mode")
        if self.noise_std < 0:
            raise ConfigError("noise_std must be non-negative", "noise_std")
        sat = tuple(float(v) for v in self.saturation)
        if len(sat) != 2 or not sat[0] < sat[1]:
            raise ConfigError(f"saturation must be [min, max] with min < max, got {sat}",
                              "saturation")
        object.__setattr__(self, "saturation", sat)
        tip = tuple(float(v) for v in self.initial_tip)
        if len(tip) != 3:
            raise ConfigError("initial_tip must have three entries", "initial_tip")
        object.__setattr__(self, "initial_tip", tip)
        if self.leak_anchor not in LEAK_ANCHORS:
            raise ConfigError(f"leak_anchor must be one of {LEAK_ANCHORS}", "leak_anchor")
        if not self.allow_model_mismatch:
            t, n = self.true_params, self.nominal_params
            for key in ("m", "L0", "r", "g", "n_quad", "ixx_coeff"):
                if getattr(t, key) != getattr(n, key):
                    raise ConfigError(
                        f"nominal_params.{key} differs from true_params.{key}; only K and D may "
                        "differ unless allow_model_mismatch is set", f"nominal_params.{key}")

    @property
    def uses_hysteresis_model(self):
        return self.controller == "pdfl_hyst_comp"

    @property
    def adaptive(self):
        return self.controller.startswith("adaptive")

    def replace(self, **changes):
        return replace(self, **changes)

    def to_dict(self):
        return _to_plain(self)

    def to_yaml(self):
        return yaml.safe_dump(self.to_dict(), sort_keys=False, default_flow_style=None)

    def save(self, path):
        Path(path).write_text(self.to_yaml())

    @classmethod
    def from_dict(cls, data):
        return _build(cls, data, "")

    @classmethod
    def from_yaml(cls, text):
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"could not parse scenario: {exc}") from exc
        if data is None:
            data = {}
        return cls.from_dict(data)

    @classmethod
    def load(cls, path):
        return cls.from_yaml(Path(path).read_text())


_NESTED = {
    "trajectory": TrajectorySpec,
    "true_params": DynamicParams,
    "nominal_params": DynamicParams,
    "gains": ControllerGains,
    "observer": ObserverGains,
    "hysteresis": BoucWenParams,
    "integrator": IntegratorSpec,
}


def _to_plain(obj):
    if obj is None or isinstance(obj, (str, bool)):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [float(v) for v in obj]
    if isinstance(obj, (tuple, list)):
        return [_to_plain(v) for v in obj]
    return {f.name: _to_plain(getattr(obj, f.name)) for f in fields(obj)}


def _build(cls, data, prefix):
    if not isinstance(data, dict):
        raise ConfigError(f"section {prefix or '<root>'} must be a mapping", prefix or None)
    known = {f.name for f in fields(cls)}
    for key in data:
        if key not in known:
            raise ConfigError(f"unknown key {prefix}{key!r}", f"{prefix}{key}")
    defaults = {f.name: f.default for f in fields(cls)}
    kwargs = {}
    for key, value in data.items():
        default = defaults.get(key)
        if (isinstance(default, (int, float)) and not isinstance(default, bool)
                and value is not None
                and (isinstance(value, bool) or not isinstance(value, (int, float)))):
            raise ConfigError(f"key {prefix}{key!r} must be a number, got {value!r}",
                              f"{prefix}{key}")
        sub = _NESTED.get(key) if cls is ScenarioConfig else None
        path = f"{prefix}{key}"
        if sub is not None and value is not None:
            kwargs[key] = _build(sub, value, path + ".")
        elif key == "waypoints":
            kwargs[key] = tuple(tuple(row) for row in value)
        elif isinstance(value, list):
            kwargs[key] = np.asarray(value, dtype=float) if cls is not ScenarioConfig else tuple(value)
        else:
            kwargs[key] = value
    try:
        return cls(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid value in section {prefix or '<root>'}: {exc}",
                          prefix.rstrip(".") or None) from exc


DOCS = {
    "name": "label used for output files",
    "controller": f"one of {', '.join(CONTROLLERS)}",
    "duration": "simulated time (s)",
    "control_rate": "controller sample rate (Hz); noise is drawn once per sample",
    "control_mode": "continuous: force re-evaluated at every integrator stage; zoh: held per sample",
    "seed": "seed of the measurement-noise generator",
    "noise_std": "std of white Gaussian noise on each measured length (m)",
    "saturation": "[min, max] actuator force (N); .inf disables a bound",
    "initial_tip": "initial tip position (m); the arm starts at rest there",
    "trajectory": "desired tip path",
    "trajectory.kind": "circle or waypoints",
    "trajectory.radius": "circle radius (m)",
    "trajectory.omega": "angular rate (rad/s)",
    "trajectory.height": "constant tip height (m)",
    "trajectory.waypoints": "rows of [t, x, y, z] for a clamped cubic spline",
    "true_params": "parameters of the simulated arm",
    "nominal_params": "parameters the controllers and observer believe",
    "m": "mass of the section (kg)",
    "L0": "nominal actuator length (m)",
    "r": "actuator offset from the centre line (m)",
    "K": "actuator stiffness (N/m)",
    "D": "actuator damping (N s/m)",
    "g": "gravitational acceleration along z (m/s^2)",
    "n_quad": "Gauss-Legendre nodes along the section",
    "ixx_coeff": "slice inertia per unit mass (m^2); null for r^2/4",
    "allow_model_mismatch": "let nominal_params differ from true_params beyond K and D",
    "gains": "controller gains, each a scalar or 3-vector",
    "gains.K_kin": "kinematic controller gain (N/m)",
    "gains.K_p": "PD+FL position gain (1/s^2)",
    "gains.K_d": "PD+FL rate gain (1/s)",
    "gains.K_G": "passivity damping gain (N s/m)",
    "gains.Lambda": "filtered-error bandwidth (1/s)",
    "gains.Gamma_inv": "adaptation gain",
    "gains.sigma": "leakage rate of the sigma-modified adaptation (1/s)",
    "observer": "high-gain observer gains {g1, g2}; null uses the true actuator rates",
    "hysteresis": "Bouc-Wen force {alpha, beta, gamma, mode}; null disables it",
    "leak_anchor": "value the sigma leakage pulls toward: zero or initial",
    "integrator": "time stepping of the closed loop",
    "integrator.method": "rk45 (adaptive Dormand-Prince) or rk4 (fixed step)",
    "integrator.rtol": "rk45 relative tolerance",
    "integrator.atol": "rk45 absolute tolerance",
    "integrator.step": "rk4 step, and the first rk45 step (s)",
}


def schema_text():
    """Default scenario as YAML with a comment on every key."""
    lines = []

    def emit(data, prefix, indent):
        for key, value in data.items():
            doc = DOCS.get(f"{prefix}{key}") or DOCS.get(key, "")
            pad = "  " * indent
            if isinstance(value, dict):
                lines.append(f"{pad}{key}:  # {doc}" if doc else f"{pad}{key}:")
                emit(value, f"{key}.", indent + 1)
            else:
                text = yaml.safe_dump({key: value}, default_flow_style=True).strip()[1:-1]
                lines.append(f"{pad}{text}  # {doc}" if doc else f"{pad}{text}")

    emit(ScenarioConfig().to_dict(), "", 0)
    lines.append("# observer example: {g1: 1000.0, g2: 1000000.0}")
    lines.append("# hysteresis example: {alpha: 23.705, beta: 1.7267, gamma: -42.593, mode: rate}")
    return "\n".join(lines) + "\n"
