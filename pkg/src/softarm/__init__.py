"""Simulation and control of a single-section, three-actuator soft arm."""

from .config import IntegratorSpec, ScenarioConfig, TrajectorySpec
from .control import ControllerGains, ObserverGains
from .dynamics import DynamicParams, dynamics_terms, forward_dynamics
from .errors import (
    ConfigError,
    Diverged,
    IllConditioned,
    IncompatibleScenarios,
    SoftArmError,
    StraightSingularity,
    Unreachable,
)
from .hysteresis import BoucWenParams
from .kinematics import GeometryParams, actuators_from_tip, tip_position
from .metrics import MetricsReport, summarize
from .sim import SimTrace, Simulation, run_scenario

__version__ = "0.1.0"
