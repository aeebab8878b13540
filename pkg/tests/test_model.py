import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ringsqueeze.errors import ConfigError
from ringsqueeze.model import (
    MODES,
    ProcessToggles,
    baseline_config,
    config_from_mapping,
    config_to_mapping,
    dbm_to_watt,
    derive_rates,
    dumps_config,
    expand_frequencies,
    load_config,
    loads_config,
    watt_to_dbm,
)

from conftest import BASELINE_TOML, MHZ


def test_baseline_values(cfg):
    assert cfg.ring_radius == pytest.approx(113e-6)
    assert cfg.loaded_q == (2e5,) * 5
    assert cfg.lambda_coeff == pytest.approx(2 * math.pi * 0.62)
    assert watt_to_dbm(cfg.pump_total_power) == pytest.approx(15.0)
    assert cfg.pump_powers[0] == pytest.approx(cfg.pump_powers[1])
    lam_s = 2 * math.pi * 299792458.0 / cfg.mode_frequencies[2]
    assert lam_s == pytest.approx(1551.9e-9, rel=1e-12)


def test_shipped_toml_matches_builtin_defaults(cfg):
    loaded = load_config(BASELINE_TOML)
    assert loaded.mode_frequencies == pytest.approx(cfg.mode_frequencies, rel=1e-14)
    assert loaded.replace(spectrum=cfg.spectrum, mode_frequencies=cfg.mode_frequencies) == cfg
    assert loaded.spectrum.thetas == pytest.approx((0.0, math.pi / 4))


def test_frequency_expansion_dispersion():
    w = expand_frequencies(1e15, 2e12, 2e7)
    assert w[1] + w[3] - 2 * w[2] == pytest.approx(2e7, rel=1e-6)
    assert w[2] == 1e15
    assert list(w) == sorted(w)


def test_rates(cfg):
    r = derive_rates(cfg)
    w = cfg.omega
    assert np.allclose(r.gamma_bar, w / (2 * 2e5))
    assert np.allclose(r.kappa_channel + r.kappa_phantom, 2 * r.gamma_bar)
    assert np.allclose(r.kappa_phantom, w / 1e6)
    # |gamma_J|^2 / v_J reproduces the channel rate
    v = cfg.group_velocity_channel[2]
    assert abs(r.coupling(2, v)) ** 2 / v == pytest.approx(r.kappa_channel[2])


def test_lossless_config_has_no_phantom_rate():
    c = config_from_mapping({"q.intrinsic": math.inf})
    r = derive_rates(c)
    assert np.all(r.kappa_phantom == 0)
    assert np.allclose(r.kappa_channel, 2 * r.gamma_bar)


def test_round_trip_mapping_and_text(cfg):
    assert config_from_mapping(config_to_mapping(cfg)) == cfg
    assert loads_config(dumps_config(cfg)) == cfg
    c = cfg.replace(intrinsic_q=(math.inf,) * 5, detuning_mode="absolute", detunings=(-1e8, 2e8))
    assert loads_config(dumps_config(c)) == c


@settings(max_examples=40, deadline=None)
@given(
    dbm=st.floats(-30, 25),
    split=st.floats(0, 1),
    d1=st.floats(-5e9, 5e9),
    d2=st.floats(-5e9, 5e9),
    bits=st.lists(st.booleans(), min_size=6, max_size=6),
)
def test_round_trip_property(dbm, split, d1, d2, bits):
    c = baseline_config().replace(
        pump_total_power=dbm_to_watt(dbm), pump_split=split, detunings=(d1, d2), toggles=ProcessToggles(*bits)
    )
    assert loads_config(dumps_config(c)) == c


def test_unit_aliases_agree():
    a = config_from_mapping({"pump.total_power_dbm": 10.0, "detuning.p1_mhz": 5.0})
    b = config_from_mapping({"pump.total_power_mw": 10.0, "detuning.p1_rad_s": 5 * MHZ})
    assert a.pump_total_power == pytest.approx(b.pump_total_power, rel=1e-12)
    assert a.detunings == pytest.approx(b.detunings)


@pytest.mark.parametrize(
    "mapping, key",
    [
        ({"pump.power": 1.0}, "pump.power"),
        ({"pump.total_power_dbm": 10.0, "pump.total_power_mw": 3.0}, "pump.total_power"),
        ({"q.loaded": "high"}, "q.loaded"),
        ({"q.loaded": 2e5, "q.intrinsic": 1e5}, "q.intrinsic"),
        ({"q.loaded": [1e5, 1e5]}, "q.loaded"),
        ({"pump.split": 1.5}, "pump.split"),
        ({"detuning.mode": "sideways"}, "detuning.mode"),
        ({"processes.dp_sfwm": 1}, "processes.dp_sfwm"),
        ({"modes.dispersion_mhz": -3e6}, "modes"),
        ({"modes.frequencies_thz": [1.0, 2.0, 3.0, 4.0, 5.0], "modes.fsr_thz": 0.1}, "modes.frequencies_thz"),
    ],
)
def test_config_errors_name_the_key(mapping, key):
    with pytest.raises(ConfigError) as exc:
        config_from_mapping(mapping)
    assert key in str(exc.value)


def test_parse_error_is_config_error():
    with pytest.raises(ConfigError):
        loads_config("ring = [unterminated")


def test_toggles():
    assert len(set(ProcessToggles.every_combination())) == 64
    t = ProcessToggles.parse("dp+sp")
    assert t.dp_sfwm and t.sp_sfwm and not t.spm
    assert ProcessToggles.parse("all").label() == "all"
    assert ProcessToggles.parse("none").label() == "none"
    with pytest.raises(ConfigError):
        ProcessToggles.parse("dp+xyz")


def test_power_conversion():
    assert dbm_to_watt(0.0) == pytest.approx(1e-3)
    assert watt_to_dbm(dbm_to_watt(13.7)) == pytest.approx(13.7)
    assert MODES == ("m", "p1", "s", "p2", "n")
