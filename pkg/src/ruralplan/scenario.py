"""Scenario data model: villages, radio parameters, cost catalog and energy profiles.

A scenario is a single JSON document (schema in ``schema/scenario.schema.json``).
Structure and unknown keys are checked with JSON Schema; numeric invariants are
checked here so that error messages name the offending path.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field, replace
from functools import lru_cache
from importlib import resources
from typing import Any, Sequence

import jsonschema

Point = tuple[float, float]

UHF_RADIUS_RANGE_KM = (10.0, 30.0)
WIFI_RADIUS_BOUNDS_KM = (0.05, 0.45)

# Default catalog line items; the UHF transmitter uses the midpoint of its 2000-3000 range.
DEFAULT_COSTS = {
    "uhf_transmitter": 2500.0,
    "platform_mast": 800.0,
    "spectrum_db_manager": 1000.0,
    "wifi_transceiver": 1000.0,
    "uhf_receiver": 100.0,
    "tvws_device": 650.0,
    "fiber_per_km": 15000.0,
}
DEFAULT_UBS_ITEMS = ("uhf_transmitter", "spectrum_db_manager")
DEFAULT_AP_ITEMS = ("wifi_transceiver", "uhf_receiver", "platform_mast")
_LINE_ITEMS = ("uhf_transmitter", "platform_mast", "spectrum_db_manager",
               "wifi_transceiver", "uhf_receiver", "tvws_device")


class ScenarioError(ValueError):
    """Raised when a scenario document is malformed or violates an invariant."""

    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}" if path else message)


@dataclass(frozen=True)
class Village:
    id: str
    position: Point
    population: int


@dataclass(frozen=True)
class RadioParams:
    uhf_radius_km: float = UHF_RADIUS_RANGE_KM[0]
    wifi_radius_bounds_km: tuple[float, float] = WIFI_RADIUS_BOUNDS_KM
    wifi_throughput_mbps: float = 600.0
    uhf_throughput_mbps: float = 45.0


@dataclass(frozen=True)
class CostCatalog:
    uhf_transmitter: float = DEFAULT_COSTS["uhf_transmitter"]
    platform_mast: float = DEFAULT_COSTS["platform_mast"]
    spectrum_db_manager: float = DEFAULT_COSTS["spectrum_db_manager"]
    wifi_transceiver: float = DEFAULT_COSTS["wifi_transceiver"]
    uhf_receiver: float = DEFAULT_COSTS["uhf_receiver"]
    tvws_device: float = DEFAULT_COSTS["tvws_device"]
    fiber_per_km: float = DEFAULT_COSTS["fiber_per_km"]
    # (radius_km, cost_usd) breakpoints for a radius-dependent access point price
    ap_cost_curve: tuple[tuple[float, float], ...] | None = None
    ubs_items: tuple[str, ...] = DEFAULT_UBS_ITEMS
    ap_items: tuple[str, ...] = DEFAULT_AP_ITEMS


@dataclass(frozen=True)
class UnitCosts:
    """Per-node costs. ``c_A`` is the scalar access point price; when a cost curve
    is present, ``ap_cost_at`` gives the radius-dependent value."""

    c_U: float
    c_A: float
    c_R: float
    ap_curve: tuple[tuple[float, float], ...] | None = None

    def ap_cost_at(self, radius_km: float) -> float:
        if self.ap_curve is None:
            return self.c_A
        return interpolate_curve(self.ap_curve, radius_km)

    def relay_cost_at(self, radius_km: float) -> float:
        return self.ap_cost_at(radius_km) + self.c_U


@dataclass(frozen=True)
class DemographicParams:
    N: int
    lam: float

    @property
    def A(self) -> float:
        return effective_area(self.N, self.lam)


@dataclass(frozen=True)
class EnergyScenario:
    c_g: tuple[float, ...]
    sigma: tuple[float, ...]
    load: tuple[float, ...]
    rho: float
    phi: float
    gamma: float
    c_p: float
    c_b: float
    e_b0: float = 0.0
    slot_hours: float = 1.0
    traffic: tuple[float, ...] | None = None
    idle_floor: float = 0.0
    grid_available: tuple[bool, ...] | None = None

    @property
    def T(self) -> int:
        return len(self.c_g)

    def __post_init__(self):
        _validate_energy(self, "energy")


@dataclass(frozen=True)
class Scenario:
    villages: tuple[Village, ...]
    ubs_position: Point
    demographics: DemographicParams
    radio: RadioParams = field(default_factory=RadioParams)
    costs: CostCatalog = field(default_factory=CostCatalog)
    energy: EnergyScenario | None = None
    mbs_sites: tuple[Point, ...] = ()


def effective_area(N: float, lam: float) -> float:
    """Service area in km² holding ``N`` users at density ``lam`` users/km²."""
    if not N > 0:
        raise ValueError("N must be positive")
    if not lam > 0:
        raise ValueError("lambda must be positive")
    return N / lam


def interpolate_curve(curve: Sequence[tuple[float, float]], radius_km: float) -> float:
    """Piecewise-linear interpolation, clamped at the end breakpoints."""
    radii = [r for r, _ in curve]
    costs = [c for _, c in curve]
    if radius_km <= radii[0]:
        return float(costs[0])
    if radius_km >= radii[-1]:
        return float(costs[-1])
    for i in range(1, len(radii)):
        if radius_km <= radii[i]:
            r0, r1 = radii[i - 1], radii[i]
            w = (radius_km - r0) / (r1 - r0)
            return costs[i - 1] + w * (costs[i] - costs[i - 1])
    return float(costs[-1])  # pragma: no cover


def derive_unit_costs(catalog: CostCatalog, wifi_upper_km: float = WIFI_RADIUS_BOUNDS_KM[1]) -> UnitCosts:
    """Compose node costs from catalog line items.

    The UBS excludes its platform (already paid by the MBS rollout); an access
    point carries its own mast. A relay point is both, so ``c_R = c_A + c_U``.
    """
    c_U = float(sum(getattr(catalog, item) for item in catalog.ubs_items))
    if catalog.ap_cost_curve:
        c_A = interpolate_curve(catalog.ap_cost_curve, wifi_upper_km)
    else:
        c_A = float(sum(getattr(catalog, item) for item in catalog.ap_items))
    return UnitCosts(c_U=c_U, c_A=c_A, c_R=c_A + c_U, ap_curve=catalog.ap_cost_curve)


# -- parsing ----------------------------------------------------------------

@lru_cache(maxsize=None)
def scenario_schema(strict: bool = True) -> dict:
    text = resources.files("ruralplan").joinpath("schema/scenario.schema.json").read_text("utf-8")
    schema = json.loads(text)
    if not strict:
        _relax(schema)
    return schema


def _relax(node: Any) -> None:
    if isinstance(node, dict):
        if node.get("additionalProperties") is False:
            node["additionalProperties"] = True
        for value in node.values():
            _relax(value)
    elif isinstance(node, list):
        for value in node:
            _relax(value)


def _json_path(parts) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out


def _require(cond: bool, path: str, message: str) -> None:
    if not cond:
        raise ScenarioError(path, message)


def _finite(values, path: str, nonneg: bool = False) -> None:
    for i, v in enumerate(values):
        _require(math.isfinite(v), f"{path}[{i}]", "value must be finite")
        if nonneg:
            _require(v >= 0, f"{path}[{i}]", "value must be nonnegative")


def _validate_energy(e: EnergyScenario, path: str) -> None:
    T = len(e.c_g)
    _require(T > 0, f"{path}.c_g", "at least one time slot required")
    for name in ("sigma", "load"):
        _require(len(getattr(e, name)) == T, f"{path}.{name}", f"length must equal T={T}")
    for name in ("c_g", "sigma", "load"):
        _finite(getattr(e, name), f"{path}.{name}", nonneg=True)
    for name in ("rho", "phi", "gamma"):
        v = getattr(e, name)
        _require(math.isfinite(v) and 0 < v <= 1, f"{path}.{name}", f"{name} must lie in (0, 1]")
    for name in ("c_p", "c_b", "e_b0", "idle_floor"):
        v = getattr(e, name)
        _require(math.isfinite(v) and v >= 0, f"{path}.{name}", f"{name} must be nonnegative")
    _require(math.isfinite(e.slot_hours) and e.slot_hours > 0, f"{path}.slot_hours",
             "slot_hours must be positive")
    if e.traffic is not None:
        _require(len(e.traffic) == T, f"{path}.traffic", f"length must equal T={T}")
        _finite(e.traffic, f"{path}.traffic", nonneg=True)
    if e.grid_available is not None:
        _require(len(e.grid_available) == T, f"{path}.grid_available", f"length must equal T={T}")


def _point(values, path: str) -> Point:
    _finite(values, path)
    return (float(values[0]), float(values[1]))


def _parse_costs(raw: dict) -> CostCatalog:
    kwargs: dict[str, Any] = {}
    for name in (*_LINE_ITEMS, "fiber_per_km"):
        if name in raw:
            v = float(raw[name])
            _require(math.isfinite(v) and v >= 0, f"costs.{name}", f"{name} must be nonnegative")
            kwargs[name] = v
    for name in ("ubs_items", "ap_items"):
        if name in raw:
            items = tuple(raw[name])
            for i, item in enumerate(items):
                _require(item in _LINE_ITEMS, f"costs.{name}[{i}]", f"unknown line item {item!r}")
            kwargs[name] = items
    if raw.get("ap_cost_curve") is not None:
        curve = tuple((float(r), float(c)) for r, c in raw["ap_cost_curve"])
        _require(len(curve) >= 1, "costs.ap_cost_curve", "curve needs at least one breakpoint")
        for i, (r, c) in enumerate(curve):
            p = f"costs.ap_cost_curve[{i}]"
            _require(math.isfinite(r) and r > 0, p, "radius must be positive")
            _require(math.isfinite(c) and c >= 0, p, "cost must be nonnegative")
            if i:
                _require(r > curve[i - 1][0], p, "radii strictly increasing")
                _require(c >= curve[i - 1][1], p, "costs nondecreasing")
        kwargs["ap_cost_curve"] = curve
    return CostCatalog(**kwargs)


def _parse_radio(raw: dict) -> RadioParams:
    kwargs: dict[str, Any] = {}
    if "uhf_radius_km" in raw:
        v = float(raw["uhf_radius_km"])
        _require(math.isfinite(v) and v > 0, "radio.uhf_radius_km", "uhf_radius_km must be positive")
        lo, hi = UHF_RADIUS_RANGE_KM
        if not lo <= v <= hi:
            warnings.warn(f"radio.uhf_radius_km={v} outside the typical TVWS range [{lo}, {hi}] km",
                          stacklevel=3)
        kwargs["uhf_radius_km"] = v
    if "wifi_radius_bounds_km" in raw:
        lo, hi = (float(x) for x in raw["wifi_radius_bounds_km"])
        _require(math.isfinite(lo) and lo > 0, "radio.wifi_radius_bounds_km[0]",
                 "wifi lower bound must be positive")
        _require(math.isfinite(hi) and hi >= lo, "radio.wifi_radius_bounds_km[1]",
                 "wifi upper bound must be >= lower bound")
        kwargs["wifi_radius_bounds_km"] = (lo, hi)
    for name in ("wifi_throughput_mbps", "uhf_throughput_mbps"):
        if name in raw:
            kwargs[name] = float(raw[name])
    return RadioParams(**kwargs)


def _parse_energy(raw: dict) -> EnergyScenario:
    slot_hours = float(raw.get("slot_hours", 1.0))
    _require(math.isfinite(slot_hours) and slot_hours > 0, "energy.slot_hours", "slot_hours must be positive")
    c_g = tuple(float(v) for v in raw["c_g"])
    _require("sigma" not in raw or "irradiance_kw_m2" not in raw, "energy",
             "give either sigma or irradiance_kw_m2, not both")
    if "irradiance_kw_m2" in raw:
        # average power per slot -> energy per slot, so the LP itself is duration-free
        sigma = tuple(float(v) * slot_hours for v in raw["irradiance_kw_m2"])
    elif "sigma" in raw:
        sigma = tuple(float(v) for v in raw["sigma"])
    else:
        sigma = (0.0,) * len(c_g)
    if "T" in raw:
        _require(raw["T"] == len(c_g), "energy.T", f"T={raw['T']} does not match series length {len(c_g)}")
    traffic = tuple(float(v) for v in raw["traffic"]) if raw.get("traffic") is not None else None
    grid = tuple(bool(v) for v in raw["grid_available"]) if raw.get("grid_available") is not None else None
    return EnergyScenario(
        c_g=c_g, sigma=sigma, load=tuple(float(v) for v in raw["load"]),
        rho=float(raw["rho"]), phi=float(raw["phi"]), gamma=float(raw["gamma"]),
        c_p=float(raw["c_p"]), c_b=float(raw["c_b"]), e_b0=float(raw.get("e_b0", 0.0)),
        slot_hours=slot_hours, traffic=traffic, idle_floor=float(raw.get("idle_floor", 0.0)),
        grid_available=grid,
    )


def scenario_from_dict(doc: Any, strict: bool = True) -> Scenario:
    validator = jsonschema.Draft7Validator(scenario_schema(strict))
    errors = sorted(validator.iter_errors(doc), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if errors:
        err = errors[0]
        raise ScenarioError(_json_path(err.absolute_path) or "$", err.message)

    villages = []
    seen = set()
    for i, v in enumerate(doc["villages"]):
        p = f"villages[{i}]"
        _require(v["id"] not in seen, f"{p}.id", f"duplicate village id {v['id']!r}")
        seen.add(v["id"])
        _require(v["population"] >= 0, f"{p}.population", "population must be nonnegative")
        villages.append(Village(v["id"], _point(v["position"], f"{p}.position"), int(v["population"])))
    _require(len(villages) > 0, "villages", "at least one village required")

    demo = doc["demographics"]
    _require(demo["N"] > 0, "demographics.N", "N must be positive")
    _require(math.isfinite(demo["lambda"]) and demo["lambda"] > 0, "demographics.lambda",
             "lambda must be positive")

    try:
        energy = _parse_energy(doc["energy"]) if doc.get("energy") is not None else None
    except KeyError as exc:  # pragma: no cover - schema enforces required keys
        raise ScenarioError("energy", f"missing key {exc}") from None

    return Scenario(
        villages=tuple(villages),
        ubs_position=_point(doc["ubs_position"], "ubs_position"),
        demographics=DemographicParams(N=int(demo["N"]), lam=float(demo["lambda"])),
        radio=_parse_radio(doc.get("radio", {})),
        costs=_parse_costs(doc.get("costs", {})),
        energy=energy,
        mbs_sites=tuple(_point(p, f"mbs_sites[{i}]") for i, p in enumerate(doc.get("mbs_sites", []))),
    )


def load_scenario(document: str, strict: bool = True) -> Scenario:
    """Parse and validate a scenario JSON document."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ScenarioError("$", f"malformed JSON: {exc}") from None
    return scenario_from_dict(doc, strict=strict)


def read_scenario(path, strict: bool = True) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return load_scenario(fh.read(), strict=strict)


def scenario_to_dict(s: Scenario) -> dict:
    costs = s.costs
    out: dict[str, Any] = {
        "villages": [{"id": v.id, "position": list(v.position), "population": v.population}
                     for v in s.villages],
        "ubs_position": list(s.ubs_position),
        "demographics": {"N": s.demographics.N, "lambda": s.demographics.lam},
        "radio": {
            "uhf_radius_km": s.radio.uhf_radius_km,
            "wifi_radius_bounds_km": list(s.radio.wifi_radius_bounds_km),
            "wifi_throughput_mbps": s.radio.wifi_throughput_mbps,
            "uhf_throughput_mbps": s.radio.uhf_throughput_mbps,
        },
        "costs": {name: getattr(costs, name) for name in (*_LINE_ITEMS, "fiber_per_km")},
    }
    out["costs"]["ubs_items"] = list(costs.ubs_items)
    out["costs"]["ap_items"] = list(costs.ap_items)
    if costs.ap_cost_curve is not None:
        out["costs"]["ap_cost_curve"] = [list(p) for p in costs.ap_cost_curve]
    if s.mbs_sites:
        out["mbs_sites"] = [list(p) for p in s.mbs_sites]
    if s.energy is not None:
        e = s.energy
        out["energy"] = {
            "slot_hours": e.slot_hours, "c_g": list(e.c_g), "sigma": list(e.sigma),
            "load": list(e.load), "rho": e.rho, "phi": e.phi, "gamma": e.gamma,
            "c_p": e.c_p, "c_b": e.c_b, "e_b0": e.e_b0, "idle_floor": e.idle_floor,
        }
        if e.traffic is not None:
            out["energy"]["traffic"] = list(e.traffic)
        if e.grid_available is not None:
            out["energy"]["grid_available"] = list(e.grid_available)
    return out


def dump_scenario(s: Scenario) -> str:
    return json.dumps(scenario_to_dict(s), indent=2, sort_keys=True)


def replace_energy(s: Scenario, **changes) -> Scenario:
    """Copy of ``s`` with selected energy fields replaced."""
    if s.energy is None:
        raise ScenarioError("energy", "energy section required")
    return replace(s, energy=replace(s.energy, **changes))


__all__ = [
    "CostCatalog", "DemographicParams", "EnergyScenario", "RadioParams", "Scenario",
    "ScenarioError", "UnitCosts", "Village", "derive_unit_costs", "dump_scenario",
    "effective_area", "interpolate_curve", "load_scenario", "read_scenario",
    "scenario_from_dict", "scenario_to_dict",
]
