"""Scenario configuration tests: presets, defaults, parsing, round-trips."""

import json
import math

import pytest

from whmcsim.scenario import (
    ConfigurationError,
    Scenario,
    load_scenario,
    parse_scenario,
    preset,
    preset_names,
    serialize_scenario,
)


def test_empty_document_yields_the_case_study():
    s = parse_scenario({})
    assert s.decision_maker == "whmc"
    assert s.topology == "machine_dominated"
    assert s.initial_state.theta == pytest.approx(math.pi / 6)
    assert s.plant.cart_mass == 10.0
    assert s.plant.pole_mass == 4.0
    assert s.plant.pole_length == 4.0
    assert s.plant.weight_mass == 5.0
    for slot in ("sensor_uplink", "actuator_downlink", "human_link"):
        link = s.links.by_slot(slot)
        assert link.transmit_power_dbm == 20.0
        assert link.noise_power_dbm == -70.0
        assert link.carrier_frequency_hz == 915e6
        assert link.path_loss_exponent == 2.9
        assert link.code_rate == 2.0
        assert link.packet_length_symbols == 500
        assert link.distance_m == 50.0
    assert s.duration == 30.0
    assert s.control_period == 0.01
    assert s.physics_substep == 0.001
    assert [e.kind for e in s.disturbances] == ["attach_weight"]
    assert s.disturbances[0].time == 5.0


def test_presets_exist_and_differ_where_expected():
    assert set(preset_names()) == {"case-study-whmc", "fig5a", "fig5b-engaged", "fig5b-distracted"}
    assert preset("fig5b-engaged").human.attention_mode == "always_engaged"
    assert preset("fig5b-distracted").human.attention_mode == "always_distracted"
    assert preset("fig5a").decision_maker == "whmc"
    with pytest.raises(ConfigurationError):
        preset("fig5c")


def test_unknown_keys_are_path_qualified():
    with pytest.raises(ConfigurationError, match=r"plant\.cart_massive"):
        parse_scenario({"plant": {"cart_massive": 1.0}})
    with pytest.raises(ConfigurationError, match="wheel"):
        parse_scenario({"wheel": 3})
    with pytest.raises(ConfigurationError, match=r"links\.sensor_uplink\.power"):
        parse_scenario({"links": {"sensor_uplink": {"power": 10}}})
    with pytest.raises(ConfigurationError, match=r"disturbances\[0\]\.at"):
        parse_scenario({"disturbances": [{"at": 5.0}]})


def test_invariant_violations_are_path_qualified():
    with pytest.raises(ConfigurationError, match=r"plant.*cart_mass"):
        parse_scenario({"plant": {"cart_mass": -1}})
    with pytest.raises(ConfigurationError, match="decision_maker"):
        parse_scenario({"decision_maker": "oracle_only"})
    with pytest.raises(ConfigurationError, match="control_period"):
        parse_scenario({"control_period": 0.0105})
    with pytest.raises(ConfigurationError, match="duration"):
        parse_scenario({"duration": -3.0})
    with pytest.raises(ConfigurationError, match="master_seed"):
        parse_scenario({"master_seed": 1.5})
    with pytest.raises(ConfigurationError, match="theta"):
        parse_scenario({"initial_state": {"theta": 2.0}})
    with pytest.raises(ConfigurationError, match=r"human.*attention_mode|attention_mode"):
        parse_scenario({"human": {"attention_mode": "bored"}})
    with pytest.raises(ConfigurationError, match="transmit_power_dbm"):
        parse_scenario({"links": {"human_link": {"transmit_power_dbm": 3.0}}})


def test_type_errors_are_descriptive():
    with pytest.raises(ConfigurationError, match="expected a number"):
        parse_scenario({"duration": "long"})
    with pytest.raises(ConfigurationError, match="expected an integer"):
        parse_scenario({"links": {"sensor_uplink": {"packet_length_symbols": 499.5}}})
    with pytest.raises(ConfigurationError, match="expected true/false"):
        parse_scenario({"initial_state": {"weight_present": "yes"}})
    with pytest.raises(ConfigurationError, match="expected a list"):
        parse_scenario({"disturbances": {"time": 5}})
    with pytest.raises(ConfigurationError, match="expected an object"):
        parse_scenario({"plant": 7})


def test_partial_overrides_keep_other_defaults():
    s = parse_scenario(
        {
            "decision_maker": "machine_only",
            "links": {"sensor_uplink": {"transmit_power_dbm": 26.0}},
            "human": {"human_force_level": 80.0},
        }
    )
    assert s.decision_maker == "machine_only"
    assert s.links.sensor_uplink.transmit_power_dbm == 26.0
    assert s.links.actuator_downlink.transmit_power_dbm == 20.0
    assert s.human.human_force_level == 80.0
    assert s.human.reaction_delay == 0.25
    assert s.plant.cart_mass == 10.0


def test_preset_baseline_inside_document():
    s = parse_scenario({"preset": "fig5b-distracted", "master_seed": 17})
    assert s.human.attention_mode == "always_distracted"
    assert s.master_seed == 17
    with pytest.raises(ConfigurationError, match="unknown preset"):
        parse_scenario({"preset": "fig9"})


def test_serialize_parse_round_trip():
    original = preset("fig5b-distracted")
    doc = serialize_scenario(original)
    reparsed = parse_scenario(json.loads(json.dumps(doc)))
    assert reparsed == original
    assert serialize_scenario(reparsed) == doc
    assert reparsed.fingerprint() == original.fingerprint()


def test_fingerprint_tracks_content():
    a = preset("case-study-whmc")
    b = parse_scenario({"master_seed": 1})
    c = parse_scenario({"plant": {"cart_mass": 10.5}})
    assert a.fingerprint() != b.fingerprint()
    assert a.fingerprint() != c.fingerprint()
    assert a.fingerprint() == preset("case-study-whmc").fingerprint()


def test_periods_and_substeps():
    s = preset("case-study-whmc")
    assert s.periods == 3000
    assert s.substeps_per_period == 10


def test_load_scenario_resolves_presets_and_files(tmp_path):
    assert load_scenario("case-study-whmc") == preset("case-study-whmc")
    path = tmp_path / "custom.json"
    path.write_text(json.dumps({"duration": 10.0, "master_seed": 3}))
    s = load_scenario(str(path))
    assert s.duration == 10.0 and s.master_seed == 3
    bad = tmp_path / "broken.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigurationError, match="invalid JSON"):
        load_scenario(str(bad))
    with pytest.raises(ConfigurationError, match="neither a preset"):
        load_scenario("no-such-file.json")


def test_scenario_object_validation():
    with pytest.raises(ConfigurationError):
        Scenario(topology="committee")
    with pytest.raises(ConfigurationError):
        Scenario(duration=30.003)
    with pytest.raises(ConfigurationError):
        Scenario(controller_loss_policy="guess")
    with pytest.raises(ConfigurationError):
        Scenario(master_seed=2**64)
