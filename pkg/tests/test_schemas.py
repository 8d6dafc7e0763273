# tests/test_schemas.py
import json

import pytest
from pydantic import ValidationError

from uqcs.config import get_preset, load_presets
from uqcs.schemas import (
    EXPERIMENT_IDS,
    InitialState,
    NoiseModel,
    ObservableSpec,
    RunConfig,
    SpinChainSpec,
    WindowInputs,
)


def base_config(**extra):
    data = {
        "experiment": "spectrum",
        "system": {"kind": "spin-chain", "n_sites": 2, "J_energy": [-1, -1, -1.5], "h_energy": [1.5, 0, 0.5]},
        "initial_state": {"kind": "basis", "label": "01"},
        "window": {"tau_time": 6.0},
    }
    data.update(extra)
    return data


def test_run_config_defaults():
    cfg = RunConfig.model_validate(base_config())
    assert isinstance(cfg.system, SpinChainSpec)
    assert cfg.noise.ideal and cfg.noise.seed == 0
    assert cfg.window.rel_threshold == 0.02
    assert not cfg.outputs.write_grid


def test_run_config_json_roundtrip():
    cfg = RunConfig.model_validate(base_config(noise={"shots": 1000, "seed": 42}))
    again = RunConfig.model_validate(json.loads(cfg.to_json()))
    assert again == cfg
    assert '"tau_time": 6.0' in cfg.to_json()


@pytest.mark.parametrize(
    "window",
    [{"tau_time": 0.0}, {"tau_time": -1.0}, {"tau_time": 6.0, "n_points": 31}, {"eps1": 0.01}, {}],
)
def test_invalid_windows(window):
    with pytest.raises(ValidationError):
        WindowInputs.model_validate(window)


def test_window_from_eps1_and_gap():
    w = WindowInputs.model_validate({"eps1": 0.01, "gap_energy": 1.0})
    assert w.tau is None and w.delta_e_min == 1.0


def test_unknown_fields_are_rejected():
    with pytest.raises(ValidationError):
        RunConfig.model_validate(base_config(colour="blue"))
    with pytest.raises(ValidationError):
        RunConfig.model_validate(base_config(experiment="magic"))


def test_basis_label_validation():
    with pytest.raises(ValidationError):
        InitialState(kind="basis", label="0a1")
    with pytest.raises(ValidationError):
        InitialState(kind="basis")
    assert InitialState(kind="maximally-mixed").label is None


def test_observable_terms_validation():
    assert ObservableSpec(label="M", terms={"ZI": 1.0, "IZ": 1.0}).terms["ZI"] == 1.0
    with pytest.raises(ValidationError):
        ObservableSpec(label="bad", terms={"ZI": 1.0, "Z": 1.0})
    with pytest.raises(ValidationError):
        ObservableSpec(label="bad", terms={"QI": 1.0})
    with pytest.raises(ValidationError):
        ObservableSpec(label="empty", terms={})


def test_noise_model():
    noise = NoiseModel(gate_error=1e-3, query_error=0.01, shots=100)
    assert noise.step_variance(20) == pytest.approx(1e-3 / 10 + 1e-4)
    assert noise.has_step_error and not noise.ideal
    with pytest.raises(ValidationError):
        NoiseModel(shots=0)
    with pytest.raises(ValidationError):
        NoiseModel(gate_error=-1.0)
    with pytest.raises(ValidationError):
        NoiseModel(seed=2**64)


def test_frozen_specs_are_hashable():
    a = SpinChainSpec(n_sites=2, J=(1, 1, 1), h=(0, 0, 0))
    b = SpinChainSpec(n_sites=2, J=(1, 1, 1), h=(0, 0, 0))
    assert hash(a) == hash(b)
    with pytest.raises(ValidationError):
        a.n_sites = 3


def test_every_shipped_preset_validates():
    data = load_presets()
    assert set(data) == set(EXPERIMENT_IDS)
    for experiment, block in data.items():
        assert block["presets"], experiment
        for preset in block["presets"]:
            RunConfig.model_validate({**preset["options"], "experiment": experiment})


def test_get_preset():
    options = get_preset("spectrum", "two-site-chain")
    assert options["system"]["n_sites"] == 2
    with pytest.raises(ValueError):
        get_preset("spectrum", "nope")
    with pytest.raises(ValueError):
        get_preset("nope", "two-site-chain")
