"""Scalar summaries of a simulation trace.

Everything here is a function of the trace columns (plus the scenario for the
reference rates), so metrics can be recomputed from a saved CSV.
"""

from dataclasses import asdict, dataclass

import numpy as np
from scipy.signal import periodogram

from .trajectory import make_trajectory

STEADY_FRACTION = 0.5
HF_CUTOFF = 50.0
SPIKE_FACTOR = 1.1


@dataclass
class MetricsReport:
    name: str
    controller: str
    steady_start: float
    steady_end: float
    steady_rms: float
    peak_transient: float
    mean_l2: float
    mean_abs_tau: float
    saturation_duty: float
    hf_power: float
    spike_duration: float

    def to_dict(self):
        return asdict(self)


def steady_mask(t, fraction=STEADY_FRACTION):
    """Samples in the final ``fraction`` of the run."""
    t = np.asarray(t)
    start = t[-1] - fraction * (t[-1] - t[0])
    return t >= start


def steady_rms(trace):
    e = trace["l2_err"][steady_mask(trace.t)]
    return float(np.sqrt(np.mean(e**2)))


def peak_transient(trace):
    m = ~steady_mask(trace.t)
    e = trace["l2_err"]
    return float(np.max(e[m] if m.any() else e))


def mean_l2(trace):
    return float(np.mean(trace["l2_err"]))


def mean_abs_tau(trace):
    return float(np.mean(np.abs(trace.block("tau_sat"))))


def saturation_duty(trace):
    """Fraction of actuator samples where the saturation was active."""
    return float(np.mean(trace.block("tau") != trace.block("tau_sat")))


def hf_power(trace, cutoff=HF_CUTOFF, column="tau_sat"):
    """Power of the applied force above ``cutoff`` Hz in the steady window, summed over actuators."""
    m = steady_mask(trace.t)
    x = trace.block(column)[m]
    if x.shape[0] < 4:
        return 0.0
    fs = 1.0 / (trace.t[1] - trace.t[0])
    f, pxx = periodogram(x, fs=fs, detrend="constant", axis=0)
    df = f[1] - f[0]
    return float(np.sum(pxx[f > cutoff]) * df)


def spike_duration(trace, factor=SPIKE_FACTOR):
    """Last time the raw force exceeds ``factor`` times its steady-window maximum."""
    t = trace.t
    mag = np.max(np.abs(trace.block("tau")), axis=1)
    level = factor * np.max(mag[steady_mask(t)])
    above = np.nonzero(mag > level)[0]
    return float(t[above[-1]]) if above.size else 0.0


def filtered_error(trace, config):
    """r = (qdot - qd_dot) + Lambda (q - q_d) from true plant states."""
    traj = make_trajectory(config.trajectory, config.nominal_params.geometry)
    qd_dot = np.array([traj(t)[2] for t in trace.t])
    e = trace.block("q") - trace.block("qd")
    return trace.block("qdot") - qd_dot + config.gains.Lambda * e


def summarize(trace, name=None, controller=None):
    m = steady_mask(trace.t)
    return MetricsReport(
        name=name or trace.meta.get("name", ""),
        controller=controller or trace.meta.get("controller", ""),
        steady_start=float(trace.t[m][0]),
        steady_end=float(trace.t[-1]),
        steady_rms=steady_rms(trace),
        peak_transient=peak_transient(trace),
        mean_l2=mean_l2(trace),
        mean_abs_tau=mean_abs_tau(trace),
        saturation_duty=saturation_duty(trace),
        hf_power=hf_power(trace),
        spike_duration=spike_duration(trace),
    )
