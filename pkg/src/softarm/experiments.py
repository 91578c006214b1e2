"""Bundled scenarios, the four comparison suites and their expected outcomes."""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
import math
import os
from pathlib import Path

import numpy as np

from .config import ScenarioConfig
from .control import ControllerGains, ObserverGains
from .dynamics import DynamicParams
from .errors import IncompatibleScenarios
from .hysteresis import BoucWenParams
from .metrics import filtered_error, steady_mask, summarize
from .sim import run_scenario

SCENARIO_DIR = Path(__file__).parent / "scenarios"

# Stiffness and damping the controllers do not know about in the uncertain suites.
STIFFNESS_ERROR = 1020.0
DAMPING_ERROR = 77.0
UNCERTAIN_NOMINAL = DynamicParams(K=1700.0 - STIFFNESS_ERROR, D=110.0 - DAMPING_ERROR)

# Lower observer gains for noise-free exact-model runs (double pole at 100 rad/s).
REDUCED_OBSERVER = ObserverGains(g1=200.0, g2=1e4)
UNSATURATED = (-math.inf, math.inf)

SUITE_DURATION = {"exact": 5.0, "uncertainty": 8.0, "hysteresis": 5.0, "practical": 5.0}
LONG_RUN = 60.0

GAP = 0.2
OVERSHOOT = 0.99
R_LIMIT = 1e-4
R_AFTER = 5.0
SPIKE_LIMIT = 0.2
GROWTH_LIMIT = 1.5


def _scenario(name, **kw):
    return ScenarioConfig(name=name, **kw)


def _exact(controller):
    return _scenario(f"exact_model_{controller}", controller=controller,
                     duration=SUITE_DURATION["exact"])


def _uncertain(name, controller, **kw):
    return _scenario(f"uncertainty_{name}", controller=controller,
                     duration=SUITE_DURATION["uncertainty"], nominal_params=UNCERTAIN_NOMINAL,
                     saturation=UNSATURATED, **kw)


def _hysteresis(name, controller):
    return _scenario(f"hysteresis_{name}", controller=controller,
                     duration=SUITE_DURATION["hysteresis"], hysteresis=BoucWenParams(),
                     saturation=UNSATURATED)


def _practical(name, controller, duration=SUITE_DURATION["practical"], **kw):
    return _scenario(f"practical_{name}", controller=controller, duration=duration,
                     nominal_params=UNCERTAIN_NOMINAL, hysteresis=BoucWenParams(),
                     observer=ObserverGains(), noise_std=1e-4, **kw)


SIGMA_GAINS = ControllerGains(Gamma_inv=1e6, sigma=1e3)
LOW_GAIN = ControllerGains(Gamma_inv=1e3)

SUITES = {
    "exact": [_exact("kinematic"), _exact("pdfl"), _exact("passivity")],
    "uncertainty": [
        _uncertain("pdfl", "pdfl"),
        _uncertain("passivity", "passivity"),
        _uncertain("adaptive_passivity", "adaptive_passivity"),
    ],
    "hysteresis": [
        _hysteresis("pdfl", "pdfl"),
        _hysteresis("passivity", "passivity"),
        _hysteresis("adaptive_passivity", "adaptive_passivity"),
        _hysteresis("pdfl_hyst_comp", "pdfl_hyst_comp"),
    ],
    "practical": [
        _practical("pdfl", "pdfl"),
        _practical("passivity", "passivity"),
        _practical("adaptive_low_gain", "adaptive_passivity", gains=LOW_GAIN),
        _practical("adaptive_sigma", "adaptive_passivity_sigma", gains=SIGMA_GAINS),
    ],
}

EXTRA = [
    _practical("adaptive_sigma_long", "adaptive_passivity_sigma", duration=LONG_RUN,
               gains=SIGMA_GAINS),
    _scenario("exact_model_pdfl_observer", controller="pdfl", duration=SUITE_DURATION["exact"],
              observer=REDUCED_OBSERVER),
    _scenario("table1", controller="adaptive_passivity", hysteresis=BoucWenParams()),
]

PRESETS = {c.name: c for suite in SUITES.values() for c in suite}
PRESETS.update({c.name: c for c in EXTRA})


def bundled_names():
    return sorted(p.stem for p in SCENARIO_DIR.glob("*.yaml"))


def load_scenario(name_or_path):
    """A bundled scenario by name, or a scenario file by path."""
    path = Path(name_or_path)
    if not path.exists():
        path = SCENARIO_DIR / f"{name_or_path}.yaml"
        if not path.exists():
            raise FileNotFoundError(f"no scenario file or bundled scenario named {name_or_path!r}")
    return ScenarioConfig.load(path)


def write_bundled(directory=SCENARIO_DIR):
    """Regenerate the bundled scenario files from PRESETS."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name, cfg in PRESETS.items():
        cfg.save(directory / f"{name}.yaml")


def derive_seed(master, index):
    """Independent per-run seed from (master seed, run index)."""
    return int(np.random.SeedSequence([master, index]).generate_state(1, np.uint32)[0])


@dataclass
class Run:
    config: ScenarioConfig
    trace: object
    report: object


@dataclass
class Check:
    name: str
    passed: bool
    detail: str

    def line(self):
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def _execute(config):
    trace = run_scenario(config)
    return Run(config, trace, summarize(trace, config.name, config.controller))


def run_all(configs, jobs=1):
    """Run scenarios, in parallel processes when ``jobs`` > 1; order is preserved."""
    if jobs <= 1 or len(configs) <= 1:
        return [_execute(c) for c in configs]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_execute, configs))


def suite_configs(name, master_seed=0):
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    return [c.replace(seed=derive_seed(master_seed, i)) for i, c in enumerate(SUITES[name])]


def check_compatible(configs):
    if len(configs) < 2:
        raise IncompatibleScenarios("a comparison needs at least two scenarios")
    first = configs[0]
    for c in configs[1:]:
        if c.trajectory != first.trajectory:
            raise IncompatibleScenarios(f"{c.name} tracks a different trajectory than {first.name}")
        if c.duration != first.duration:
            raise IncompatibleScenarios(f"{c.name} runs for {c.duration} s, {first.name} for "
                                        f"{first.duration} s")


def context(configs):
    """Which suite's expectations apply to a set of scenarios."""
    if any(c.observer is not None or c.noise_std > 0 for c in configs):
        return "practical"
    if any(c.hysteresis is not None for c in configs):
        return "hysteresis"
    if any(not np.array_equal(c.true_params.K, c.nominal_params.K)
           or not np.array_equal(c.true_params.D, c.nominal_params.D) for c in configs):
        return "uncertainty"
    return "exact"


def _ordering(name, runs, order, key, gap=0.0):
    vals = [getattr(runs[c].report, key) for c in order]
    ok = all(a < b and (b - a) >= gap * b for a, b in zip(vals, vals[1:]))
    shown = " < ".join(f"{c}={v:.4g}" for c, v in zip(order, vals))
    if gap:
        shown += f" (gaps >= {gap:.0%})"
    return Check(name, ok, shown)


def expected_outcomes(runs, ctx):
    """Expected outcomes for ``runs`` (controller name -> Run) in suite context ``ctx``.

    Only the checks whose controllers are all present are returned.
    """
    have = set(runs)
    checks = []

    def need(*names):
        return have.issuperset(names)

    if ctx == "exact":
        if need("kinematic"):
            r = runs["kinematic"].trace
            early = r.t < 0.1
            sat = np.any(r.block("tau")[early] != r.block("tau_sat")[early])
            checks.append(Check("kinematic saturates in the first 0.1 s", bool(sat),
                                f"saturated samples {int(np.sum(r.block('tau')[early] != r.block('tau_sat')[early]))}"))
            # the tip error dips below the level it settles at
            level = runs["kinematic"].report.steady_rms
            dip = float(np.min(r["l2_err"][~steady_mask(r.t)]))
            checks.append(Check("kinematic overshoots", dip < OVERSHOOT * level,
                                f"transient minimum {dip:.4g} m, settled {level:.4g} m"))
        for c in ("pdfl", "passivity"):
            if need(c):
                tr = runs[c].trace
                m = steady_mask(tr.t)
                duty = float(np.mean(tr.block("tau")[m] != tr.block("tau_sat")[m]))
                checks.append(Check(f"{c} unsaturated in steady state", duty == 0.0,
                                    f"steady saturation duty {duty:.3g}"))
        if need("kinematic", "pdfl"):
            checks.append(_ordering("pdfl beats kinematic", runs, ["pdfl", "kinematic"],
                                    "steady_rms"))
        if need("pdfl"):
            tr = runs["pdfl"].trace
            e = tr["l2_err"][tr.t >= 0.5]
            rms = float(np.sqrt(np.mean(e**2)))
            checks.append(Check("pdfl RMS error below 1 mm after 0.5 s", rms < 1e-3,
                                f"{rms:.3g} m"))
    elif ctx == "uncertainty":
        if need("adaptive_passivity", "passivity", "pdfl"):
            checks.append(_ordering("steady RMS ordering", runs,
                                    ["adaptive_passivity", "passivity", "pdfl"], "steady_rms", GAP))
        if need("adaptive_passivity"):
            run = runs["adaptive_passivity"]
            r = np.linalg.norm(filtered_error(run.trace, run.config), axis=1)
            late = run.trace.t > R_AFTER
            peak = float(np.max(r[late])) if late.any() else math.nan
            checks.append(Check(f"adaptive |r| below {R_LIMIT:g} after {R_AFTER:g} s",
                                bool(peak < R_LIMIT), f"max |r| {peak:.3g} m/s"))
            spike = run.report.spike_duration
            checks.append(Check(f"adaptive force spike shorter than {SPIKE_LIMIT:g} s",
                                spike < SPIKE_LIMIT, f"{spike:.3g} s"))
    elif ctx == "hysteresis":
        if need("pdfl_hyst_comp", "passivity", "adaptive_passivity", "pdfl"):
            v = {c: runs[c].report.steady_rms for c in runs}
            mid = ("passivity", "adaptive_passivity")
            ok = v["pdfl_hyst_comp"] < min(v[c] for c in mid) and max(v[c] for c in mid) < v["pdfl"]
            detail = ", ".join(f"{c}={v[c]:.4g}" for c in
                               ("pdfl_hyst_comp", "passivity", "adaptive_passivity", "pdfl"))
            checks.append(Check("steady RMS ordering", ok, detail))
    elif ctx == "practical":
        sig = "adaptive_passivity_sigma"
        for other in ("passivity", "pdfl"):
            if need(sig, other):
                checks.append(_ordering(f"sigma adaptive mean L2 below {other}", runs,
                                        [sig, other], "mean_l2"))
        if need("adaptive_passivity", "passivity"):
            a = runs["adaptive_passivity"].report.mean_l2
            p = runs["passivity"].report.mean_l2
            checks.append(Check("low-gain adaptive does not beat passivity", a >= p,
                                f"adaptive_passivity={a:.4g}, passivity={p:.4g}"))
        if need(sig):
            checks.append(estimate_growth_check(runs[sig].trace))
        if need("pdfl", sig):
            checks.append(_ordering("pdfl high-frequency force power exceeds sigma adaptive",
                                    runs, [sig, "pdfl"], "hf_power"))
    return checks


def estimate_growth_check(trace, limit=GROWTH_LIMIT):
    """Estimates count as bounded when the peak norm over the last quarter of
    the run stays within ``limit`` times the peak over the second quarter."""
    t = trace.t
    norm = np.linalg.norm(trace.block("theta_hat", 6), axis=1)
    T = t[-1]
    early = float(np.max(norm[(t >= 0.25 * T) & (t < 0.5 * T)]))
    late = float(np.max(norm[t >= 0.75 * T]))
    ok = bool(np.isfinite(late)) and late <= limit * early
    return Check("sigma estimates bounded", ok,
                 f"peak |theta_hat| {late:.4g} in last quarter vs {early:.4g} in second quarter "
                 f"of {T:g} s")


def by_controller(runs):
    out = {}
    for run in runs:
        if run.config.controller in out:
            raise IncompatibleScenarios(
                f"controller {run.config.controller} appears twice; expected outcomes need one "
                "scenario per controller")
        out[run.config.controller] = run
    return out


def compare(runs):
    """Rank runs by steady RMS and evaluate expected outcomes where they apply."""
    configs = [r.config for r in runs]
    check_compatible(configs)
    ranked = sorted(runs, key=lambda r: r.report.steady_rms)
    try:
        checks = expected_outcomes(by_controller(runs), context(configs))
    except IncompatibleScenarios:
        checks = []
    return ranked, checks


def default_jobs():
    return max(1, min(4, os.cpu_count() or 1))
