import math

import numpy as np
import pytest
import yaml

from softarm.config import ScenarioConfig, schema_text
from softarm.control import ObserverGains
from softarm.errors import ConfigError
from softarm.experiments import PRESETS, SCENARIO_DIR, bundled_names, load_scenario
from softarm.hysteresis import BoucWenParams


def test_default_roundtrip():
    cfg = ScenarioConfig()
    assert ScenarioConfig.from_yaml(cfg.to_yaml()) == cfg


def test_roundtrip_with_optional_sections(tmp_path):
    cfg = ScenarioConfig(controller="adaptive_passivity_sigma", noise_std=1e-4, seed=5,
                         saturation=(-math.inf, math.inf), observer=ObserverGains(g1=200, g2=1e4),
                         hysteresis=BoucWenParams(mode="literal"), leak_anchor="initial")
    cfg.save(tmp_path / "s.yaml")
    back = ScenarioConfig.load(tmp_path / "s.yaml")
    assert back == cfg
    assert back.to_yaml() == cfg.to_yaml()


def test_schema_parses_to_defaults():
    assert ScenarioConfig.from_yaml(schema_text()) == ScenarioConfig()
    # every documented leaf carries a comment
    body = [ln for ln in schema_text().splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    assert all("#" in ln for ln in body)


@pytest.mark.parametrize("text,key", [
    ("controler: pdfl", "controler"),
    ("gains: {K_q: 1}", "gains.K_q"),
    ("true_params: {mass: 1}", "true_params.mass"),
    ("duration: fast", "duration"),
    ("controller: lqr", "controller"),
    ("saturation: [5, 1]", "saturation"),
    ("duration: -1", "duration"),
    ("gains: {K_p: [1, 2]}", "gains"),
    ("true_params: {K: -5}", "true_params"),
    ("nominal_params: {m: 0.2}", "nominal_params.m"),
    ("integrator: {method: euler}", "integrator.method"),
    ("observer: {g1: 0}", "observer"),
])
def test_invalid_keys_are_named(text, key):
    with pytest.raises(ConfigError) as info:
        ScenarioConfig.from_yaml(text)
    assert info.value.key is not None and info.value.key.startswith(key)


def test_mass_mismatch_allowed_when_requested():
    cfg = ScenarioConfig.from_yaml("allow_model_mismatch: true\nnominal_params: {m: 0.2}")
    assert cfg.nominal_params.m == 0.2


def test_empty_document_is_default():
    assert ScenarioConfig.from_yaml("") == ScenarioConfig()


def test_bundled_files_match_presets():
    assert set(bundled_names()) == set(PRESETS)
    for name, cfg in PRESETS.items():
        assert load_scenario(name) == cfg
        assert (SCENARIO_DIR / f"{name}.yaml").read_text() == cfg.to_yaml()


def test_load_by_path_and_missing(tmp_path):
    p = tmp_path / "x.yaml"
    p.write_text("name: x\nduration: 0.1\n")
    assert load_scenario(str(p)).duration == 0.1
    with pytest.raises(FileNotFoundError):
        load_scenario("no_such_scenario")


def test_arrays_are_plain_yaml():
    data = yaml.safe_load(ScenarioConfig().to_yaml())
    assert data["true_params"]["K"] == [1700.0] * 3
