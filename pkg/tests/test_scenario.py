import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from ruralplan.scenario import (
    CostCatalog, EnergyScenario, ScenarioError, derive_unit_costs, dump_scenario, effective_area,
    load_scenario, read_scenario,
)


def minimal(**overrides):
    doc = {
        "villages": [{"id": "V1", "position": [0.0, 0.0], "population": 100}],
        "ubs_position": [0.0, 0.0],
        "demographics": {"N": 100, "lambda": 10},
    }
    doc.update(overrides)
    return doc


def test_minimal_document_derives_area():
    s = load_scenario(json.dumps(minimal()))
    assert s.demographics.A == 10.0
    assert s.radio.wifi_radius_bounds_km == (0.05, 0.45)
    assert s.energy is None


def test_energy_defaults_applied():
    doc = minimal(energy={"c_g": [1, 2], "load": [0, 1], "rho": 0.9, "phi": 0.9,
                          "gamma": 0.2, "c_p": 10, "c_b": 5})
    e = load_scenario(json.dumps(doc)).energy
    assert e.e_b0 == 0.0
    assert e.sigma == (0.0, 0.0)
    assert e.T == 2


def test_lambda_zero_rejected():
    with pytest.raises(ScenarioError, match="lambda must be positive") as info:
        load_scenario(json.dumps(minimal(demographics={"N": 100, "lambda": 0})))
    assert info.value.path == "demographics.lambda"


def test_curve_radii_must_increase():
    doc = minimal(costs={"ap_cost_curve": [[0.2, 500], [0.1, 900]]})
    with pytest.raises(ScenarioError, match="radii strictly increasing"):
        load_scenario(json.dumps(doc))


def test_curve_costs_must_not_decrease():
    doc = minimal(costs={"ap_cost_curve": [[0.1, 900], [0.2, 500]]})
    with pytest.raises(ScenarioError, match="nondecreasing"):
        load_scenario(json.dumps(doc))


def test_malformed_json():
    with pytest.raises(ScenarioError, match="malformed JSON"):
        load_scenario("{not json")


def test_unknown_key_strict_and_lenient():
    doc = minimal(extra_field=1)
    with pytest.raises(ScenarioError, match="extra_field"):
        load_scenario(json.dumps(doc))
    assert load_scenario(json.dumps(doc), strict=False).demographics.N == 100


def test_duplicate_village_id():
    doc = minimal(villages=[{"id": "V", "position": [0, 0], "population": 1},
                            {"id": "V", "position": [1, 0], "population": 1}])
    with pytest.raises(ScenarioError, match="duplicate") as info:
        load_scenario(json.dumps(doc))
    assert info.value.path == "villages[1].id"


def test_series_length_mismatch_names_path():
    doc = minimal(energy={"c_g": [1, 2], "load": [0], "rho": 1, "phi": 1, "gamma": 1, "c_p": 1, "c_b": 1})
    with pytest.raises(ScenarioError) as info:
        load_scenario(json.dumps(doc))
    assert info.value.path == "energy.load"


@pytest.mark.parametrize("name,value", [("rho", 0.0), ("phi", 1.2), ("gamma", -0.1)])
def test_efficiencies_in_unit_interval(name, value):
    energy = {"c_g": [1], "load": [1], "rho": 1, "phi": 1, "gamma": 1, "c_p": 1, "c_b": 1}
    energy[name] = value
    with pytest.raises(ScenarioError, match=name):
        load_scenario(json.dumps(minimal(energy=energy)))


def test_irradiance_is_converted_to_slot_energy():
    doc = minimal(energy={"c_g": [1, 1], "load": [0, 0], "irradiance_kw_m2": [0.5, 0.25],
                          "slot_hours": 2.0, "rho": 1, "phi": 1, "gamma": 1, "c_p": 1, "c_b": 1})
    assert load_scenario(json.dumps(doc)).energy.sigma == (1.0, 0.5)


def test_uhf_radius_out_of_range_warns():
    with pytest.warns(UserWarning, match="uhf_radius_km"):
        s = load_scenario(json.dumps(minimal(radio={"uhf_radius_km": 40})))
    assert s.radio.uhf_radius_km == 40


def test_table_iv_unit_costs():
    u = derive_unit_costs(CostCatalog(uhf_transmitter=2500, spectrum_db_manager=1000,
                                      wifi_transceiver=1000, uhf_receiver=100, platform_mast=800))
    assert (u.c_U, u.c_A, u.c_R) == (3500, 1900, 5400)


def test_zero_catalog():
    zero = CostCatalog(**{k: 0.0 for k in ("uhf_transmitter", "platform_mast", "spectrum_db_manager",
                                           "wifi_transceiver", "uhf_receiver", "tvws_device")})
    u = derive_unit_costs(zero)
    assert u.c_U == u.c_A == u.c_R == 0


def test_curve_interpolation_midpoint():
    u = derive_unit_costs(CostCatalog(ap_cost_curve=((0.05, 500.0), (0.45, 1900.0))))
    assert u.ap_cost_at(0.25) == pytest.approx(1200.0, rel=1e-12)
    assert u.c_A == 1900.0  # value at the upper wifi bound
    assert u.ap_cost_at(0.01) == 500.0 and u.ap_cost_at(1.0) == 1900.0


def test_compositions_are_configurable():
    u = derive_unit_costs(CostCatalog(ap_items=("wifi_transceiver", "uhf_receiver", "platform_mast",
                                                "tvws_device")))
    assert u.c_A == 1900 + 650


@pytest.mark.parametrize("N,lam,A", [(1000, 10, 100.0), (1, 1, 1.0), (5000, 2.5, 2000.0)])
def test_effective_area(N, lam, A):
    assert effective_area(N, lam) == A


@pytest.mark.parametrize("N,lam", [(0, 1), (10, 0), (-1, 2)])
def test_effective_area_rejects_nonpositive(N, lam):
    with pytest.raises(ValueError):
        effective_area(N, lam)


@settings(max_examples=1000, deadline=None)
@given(st.floats(1e-3, 1e7), st.floats(1e-3, 1e5))
def test_effective_area_times_density(N, lam):
    assert math.isclose(effective_area(N, lam) * lam, N, rel_tol=1e-12)


money = st.floats(0, 1e5, allow_nan=False)


@settings(max_examples=1000, deadline=None)
@given(money, money, money, money, money, money)
def test_relay_cost_composition(tx, mast, db, wifi, rx, dev):
    u = derive_unit_costs(CostCatalog(uhf_transmitter=tx, platform_mast=mast, spectrum_db_manager=db,
                                      wifi_transceiver=wifi, uhf_receiver=rx, tvws_device=dev))
    assert u.c_R == u.c_A + u.c_U
    assert min(u.c_U, u.c_A, u.c_R) >= 0


def test_round_trip(fixtures_dir):
    for name in ("six_villages.json", "arbitrage_2slot.json", "grid_only.json"):
        s = read_scenario(fixtures_dir / name)
        again = load_scenario(dump_scenario(s))
        assert again == s
        assert dump_scenario(again) == dump_scenario(s)


def test_round_trip_with_curve_and_traffic():
    doc = minimal(costs={"ap_cost_curve": [[0.1, 500], [0.3, 900]]},
                  mbs_sites=[[30, 0]],
                  energy={"c_g": [1, 2], "load": [1, 1], "traffic": [5, 0], "grid_available": [True, False],
                          "rho": 0.9, "phi": 0.8, "gamma": 0.2, "c_p": 1, "c_b": 1, "e_b0": 0.5})
    s = load_scenario(json.dumps(doc))
    assert load_scenario(dump_scenario(s)) == s


def test_energy_scenario_direct_construction_validates():
    with pytest.raises(ScenarioError, match="length must equal"):
        EnergyScenario(c_g=(1.0, 2.0), sigma=(0.0,), load=(1.0, 1.0), rho=1, phi=1, gamma=1, c_p=1, c_b=1)
