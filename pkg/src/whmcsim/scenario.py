"""Scenario configuration: who controls, over which links, for how long.

A Scenario is the complete, serializable description of one run; together
with a master seed it determines every byte of the result.  Named presets
cover the case study and the two figure-reproduction experiments; JSON
documents mirror the dataclass tree field-for-field, reject unknown keys
with path-qualified errors, and fill every omitted field from a preset
baseline (default: the case study).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace

from .control import HOLD_LAST, LOSS_POLICY_KINDS
from .dynamics import ATTACH_WEIGHT, DisturbanceEvent, InvalidStateError, PlantParams, PlantState
from .human import HumanParams
from .wireless import LinkConfig

MACHINE_ONLY = "machine_only"
HUMAN_ONLY = "human_only"
WHMC = "whmc"
DECISION_MAKERS = (MACHINE_ONLY, HUMAN_ONLY, WHMC)

MACHINE_DOMINATED = "machine_dominated"
SYMBIOSIS = "symbiosis"
HUMAN_DOMINATED = "human_dominated"
TOPOLOGIES = (MACHINE_DOMINATED, SYMBIOSIS, HUMAN_DOMINATED)

IGNORANCE = "ignorance"
AWARENESS = "awareness"
TRUSTWORTHINESS = "trustworthiness"
INFO_STRUCTURES = (IGNORANCE, AWARENESS, TRUSTWORTHINESS)

UPLINK = "sensor_uplink"
DOWNLINK = "actuator_downlink"
HUMAN_LINK = "human_link"
LINK_SLOTS = (UPLINK, DOWNLINK, HUMAN_LINK)


class ConfigurationError(ValueError):
    """A scenario document or object violates the configuration contract."""


@dataclass(frozen=True)
class Links:
    """The three links of the collaboration loop."""

    sensor_uplink: LinkConfig = field(default_factory=lambda: LinkConfig(name=UPLINK))
    actuator_downlink: LinkConfig = field(default_factory=lambda: LinkConfig(name=DOWNLINK))
    human_link: LinkConfig = field(default_factory=lambda: LinkConfig(name=HUMAN_LINK))

    def by_slot(self, slot: str) -> LinkConfig:
        return getattr(self, slot)


@dataclass(frozen=True)
class Metadata:
    """Taxonomy tags recorded with results; no behavioral effect."""

    agent_multiplicity: str = "single_machine_single_operator"
    agent_geography: str = "remote_over_wireless"


@dataclass(frozen=True)
class Scenario:
    name: str = "custom"
    decision_maker: str = WHMC
    topology: str = MACHINE_DOMINATED
    info_structure: str = IGNORANCE
    plant: PlantParams = field(default_factory=PlantParams)
    initial_state: PlantState = field(default_factory=lambda: PlantState(theta=math.pi / 6))
    links: Links = field(default_factory=Links)
    human: HumanParams = field(default_factory=HumanParams)
    disturbances: tuple[DisturbanceEvent, ...] = (DisturbanceEvent(5.0, ATTACH_WEIGHT),)
    duration: float = 30.0
    control_period: float = 0.01
    physics_substep: float = 0.001
    master_seed: int = 0
    controller_loss_policy: str = HOLD_LAST
    actuator_loss_policy: str = HOLD_LAST
    metadata: Metadata = field(default_factory=Metadata)

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        if self.decision_maker not in DECISION_MAKERS:
            raise ConfigurationError(
                f"decision_maker must be one of {DECISION_MAKERS}, got {self.decision_maker!r}"
            )
        if self.topology not in TOPOLOGIES:
            raise ConfigurationError(f"topology must be one of {TOPOLOGIES}, got {self.topology!r}")
        if self.info_structure not in INFO_STRUCTURES:
            raise ConfigurationError(
                f"info_structure must be one of {INFO_STRUCTURES}, got {self.info_structure!r}"
            )
        for policy_name in ("controller_loss_policy", "actuator_loss_policy"):
            value = getattr(self, policy_name)
            if value not in LOSS_POLICY_KINDS:
                raise ConfigurationError(
                    f"{policy_name} must be one of {LOSS_POLICY_KINDS}, got {value!r}"
                )
        if not (math.isfinite(self.duration) and self.duration > 0):
            raise ConfigurationError(f"duration must be finite and > 0, got {self.duration!r}")
        for name in ("control_period", "physics_substep"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigurationError(f"{name} must be finite and > 0, got {value!r}")
        ratio = self.control_period / self.physics_substep
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ConfigurationError(
                "control_period must be an integer multiple of physics_substep, "
                f"got {self.control_period} / {self.physics_substep}"
            )
        n_periods = self.duration / self.control_period
        if abs(n_periods - round(n_periods)) > 1e-9 or round(n_periods) < 1:
            raise ConfigurationError(
                "duration must be an integer number of control periods, "
                f"got {self.duration} / {self.control_period}"
            )
        if not (isinstance(self.master_seed, int) and not isinstance(self.master_seed, bool)):
            raise ConfigurationError(f"master_seed must be an integer, got {self.master_seed!r}")
        if not (0 <= self.master_seed < 2**64):
            raise ConfigurationError(f"master_seed must fit in 64 bits, got {self.master_seed}")
        if abs(self.initial_state.theta) >= math.pi / 2:
            raise ConfigurationError(
                f"initial_state.theta must satisfy |theta| < pi/2, got {self.initial_state.theta}"
            )

    @property
    def periods(self) -> int:
        return round(self.duration / self.control_period)

    @property
    def substeps_per_period(self) -> int:
        return round(self.control_period / self.physics_substep)

    def fingerprint(self) -> str:
        """SHA-256 over the canonical JSON form; stable across processes."""
        canonical = json.dumps(serialize_scenario(self), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _case_study(name: str, **overrides) -> Scenario:
    return replace(Scenario(name=name), **overrides)


def _presets() -> dict[str, Scenario]:
    return {
        "case-study-whmc": _case_study("case-study-whmc"),
        "fig5a": _case_study("fig5a"),
        "fig5b-engaged": _case_study(
            "fig5b-engaged", human=HumanParams(attention_mode="always_engaged")
        ),
        "fig5b-distracted": _case_study(
            "fig5b-distracted", human=HumanParams(attention_mode="always_distracted")
        ),
    }


PRESET_DESCRIPTIONS = {
    "case-study-whmc": "Collaborative run: LQR machine loop, engaged operator, weight at 5 s",
    "fig5a": "Base scenario for the machine-only / human-only / collaboration comparison",
    "fig5b-engaged": "Power-sweep base with a permanently engaged operator",
    "fig5b-distracted": "Power-sweep base with a permanently distracted operator",
}


def preset_names() -> tuple[str, ...]:
    return tuple(_presets())


def preset(name: str) -> Scenario:
    presets = _presets()
    if name not in presets:
        raise ConfigurationError(f"unknown preset {name!r}; available: {', '.join(presets)}")
    return presets[name]


# ---------------------------------------------------------------------------
# JSON (de)serialization.  Keys mirror the dataclass fields exactly.

_PLANT_KEYS = ("cart_mass", "pole_mass", "pole_length", "weight_mass", "gravity", "force_limit")
_STATE_KEYS = ("x", "x_dot", "theta", "theta_dot", "weight_present")
_LINK_KEYS = (
    "transmit_power_dbm",
    "noise_power_dbm",
    "carrier_frequency_hz",
    "distance_m",
    "antenna_gain",
    "path_loss_exponent",
    "code_rate",
    "packet_length_symbols",
    "symbol_rate_hz",
    "min_transmit_power_dbm",
)
_HUMAN_KEYS = (
    "attention_mode",
    "p_engaged_to_distracted",
    "p_distracted_to_engaged",
    "reaction_delay",
    "reaction_jitter",
    "human_control_period",
    "human_force_level",
    "angle_deadband",
)
_EVENT_KEYS = ("time", "kind")
_METADATA_KEYS = ("agent_multiplicity", "agent_geography")
_TOP_KEYS = (
    "preset",
    "name",
    "decision_maker",
    "topology",
    "info_structure",
    "plant",
    "initial_state",
    "links",
    "human",
    "disturbances",
    "duration",
    "control_period",
    "physics_substep",
    "master_seed",
    "controller_loss_policy",
    "actuator_loss_policy",
    "metadata",
)


def serialize_scenario(s: Scenario) -> dict:
    """Full dict form; parse_scenario of the JSON text round-trips exactly."""
    return {
        "name": s.name,
        "decision_maker": s.decision_maker,
        "topology": s.topology,
        "info_structure": s.info_structure,
        "plant": {k: getattr(s.plant, k) for k in _PLANT_KEYS},
        "initial_state": {k: getattr(s.initial_state, k) for k in _STATE_KEYS},
        "links": {
            slot: {k: getattr(s.links.by_slot(slot), k) for k in _LINK_KEYS} for slot in LINK_SLOTS
        },
        "human": {k: getattr(s.human, k) for k in _HUMAN_KEYS},
        "disturbances": [{"time": e.time, "kind": e.kind} for e in s.disturbances],
        "duration": s.duration,
        "control_period": s.control_period,
        "physics_substep": s.physics_substep,
        "master_seed": s.master_seed,
        "controller_loss_policy": s.controller_loss_policy,
        "actuator_loss_policy": s.actuator_loss_policy,
        "metadata": {k: getattr(s.metadata, k) for k in _METADATA_KEYS},
    }


def _require_object(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigurationError(f"{path}: expected an object, got {type(value).__name__}")
    return value


def _check_keys(doc: dict, allowed, path: str) -> None:
    unknown = set(doc) - set(allowed)
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigurationError(f"{path}{key}: unknown key")


def _number(doc: dict, key: str, default, path: str):
    value = doc.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{path}{key}: expected a number, got {value!r}")
    return float(value)


def _integer(doc: dict, key: str, default, path: str) -> int:
    value = doc.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigurationError(f"{path}{key}: expected an integer, got {value!r}")
    return value


def _boolean(doc: dict, key: str, default, path: str) -> bool:
    value = doc.get(key, default)
    if not isinstance(value, bool):
        raise ConfigurationError(f"{path}{key}: expected true/false, got {value!r}")
    return value


def _string(doc: dict, key: str, default, path: str) -> str:
    value = doc.get(key, default)
    if not isinstance(value, str):
        raise ConfigurationError(f"{path}{key}: expected a string, got {value!r}")
    return value


def _parse_section(doc: dict, key: str, keys, base, builder, path: str):
    if key not in doc:
        return base
    section = _require_object(doc[key], f"{path}{key}")
    sub_path = f"{path}{key}."
    _check_keys(section, keys, sub_path)
    return builder(section, sub_path)


def parse_scenario(document: dict, defaults: Scenario | None = None) -> Scenario:
    """Build a validated Scenario from a (possibly partial) dict document.

    Omitted fields fall back to ``defaults`` (the case-study preset when not
    given) or to the document's own top-level "preset" baseline.  Unknown
    keys and invariant violations raise ConfigurationError with the offending
    path, e.g. ``plant.cart_mass``.
    """
    doc = _require_object(document, "scenario")
    _check_keys(doc, _TOP_KEYS, "")

    base = defaults
    if "preset" in doc:
        preset_name = _string(doc, "preset", None, "")
        base = preset(preset_name)
    if base is None:
        base = preset("case-study-whmc")

    def build_plant(section: dict, path: str) -> PlantParams:
        try:
            return PlantParams(**{
                k: _number(section, k, getattr(base.plant, k), path) for k in _PLANT_KEYS
            })
        except InvalidStateError as err:
            raise ConfigurationError(f"{path[:-1]}: {err}") from err

    def build_state(section: dict, path: str) -> PlantState:
        kwargs = {k: _number(section, k, getattr(base.initial_state, k), path) for k in _STATE_KEYS[:-1]}
        kwargs["weight_present"] = _boolean(
            section, "weight_present", base.initial_state.weight_present, path
        )
        return PlantState(**kwargs)

    def build_link(slot: str):
        def build(section: dict, path: str) -> LinkConfig:
            base_link = base.links.by_slot(slot)
            kwargs = {}
            for k in _LINK_KEYS:
                if k == "packet_length_symbols":
                    kwargs[k] = _integer(section, k, getattr(base_link, k), path)
                else:
                    kwargs[k] = _number(section, k, getattr(base_link, k), path)
            try:
                return LinkConfig(name=slot, **kwargs)
            except ValueError as err:
                raise ConfigurationError(f"{path[:-1]}: {err}") from err

        return build

    def build_links(section: dict, path: str) -> Links:
        parsed = {}
        for slot in LINK_SLOTS:
            parsed[slot] = _parse_section(
                section, slot, _LINK_KEYS, base.links.by_slot(slot), build_link(slot), path
            )
        return Links(**parsed)

    def build_human(section: dict, path: str) -> HumanParams:
        kwargs = {"attention_mode": _string(section, "attention_mode", base.human.attention_mode, path)}
        for k in _HUMAN_KEYS[1:]:
            kwargs[k] = _number(section, k, getattr(base.human, k), path)
        try:
            return HumanParams(**kwargs)
        except ValueError as err:
            raise ConfigurationError(f"{path[:-1]}: {err}") from err

    def build_metadata(section: dict, path: str) -> Metadata:
        return Metadata(**{k: _string(section, k, getattr(base.metadata, k), path) for k in _METADATA_KEYS})

    plant = _parse_section(doc, "plant", _PLANT_KEYS, base.plant, build_plant, "")
    initial_state = _parse_section(doc, "initial_state", _STATE_KEYS, base.initial_state, build_state, "")
    links = _parse_section(doc, "links", LINK_SLOTS, base.links, build_links, "")
    human = _parse_section(doc, "human", _HUMAN_KEYS, base.human, build_human, "")
    metadata = _parse_section(doc, "metadata", _METADATA_KEYS, base.metadata, build_metadata, "")

    disturbances = base.disturbances
    if "disturbances" in doc:
        raw = doc["disturbances"]
        if not isinstance(raw, list):
            raise ConfigurationError(f"disturbances: expected a list, got {type(raw).__name__}")
        events = []
        for i, item in enumerate(raw):
            path = f"disturbances[{i}]."
            entry = _require_object(item, path[:-1])
            _check_keys(entry, _EVENT_KEYS, path)
            time = _number(entry, "time", None, path) if "time" in entry else None
            kind = _string(entry, "kind", None, path) if "kind" in entry else None
            if time is None or kind is None:
                raise ConfigurationError(f"{path[:-1]}: needs both 'time' and 'kind'")
            try:
                events.append(DisturbanceEvent(time, kind))
            except InvalidStateError as err:
                raise ConfigurationError(f"{path[:-1]}: {err}") from err
        disturbances = tuple(events)

    try:
        return Scenario(
            name=_string(doc, "name", base.name, ""),
            decision_maker=_string(doc, "decision_maker", base.decision_maker, ""),
            topology=_string(doc, "topology", base.topology, ""),
            info_structure=_string(doc, "info_structure", base.info_structure, ""),
            plant=plant,
            initial_state=initial_state,
            links=links,
            human=human,
            disturbances=disturbances,
            duration=_number(doc, "duration", base.duration, ""),
            control_period=_number(doc, "control_period", base.control_period, ""),
            physics_substep=_number(doc, "physics_substep", base.physics_substep, ""),
            master_seed=_integer(doc, "master_seed", base.master_seed, ""),
            controller_loss_policy=_string(doc, "controller_loss_policy", base.controller_loss_policy, ""),
            actuator_loss_policy=_string(doc, "actuator_loss_policy", base.actuator_loss_policy, ""),
            metadata=metadata,
        )
    except ConfigurationError:
        raise
    except ValueError as err:
        raise ConfigurationError(str(err)) from err


def load_scenario(path_or_preset: str) -> Scenario:
    """Resolve a CLI-style scenario reference: preset name or JSON file path."""
    if path_or_preset in preset_names():
        return preset(path_or_preset)
    try:
        with open(path_or_preset, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as err:
        raise ConfigurationError(
            f"{path_or_preset!r} is neither a preset ({', '.join(preset_names())}) "
            f"nor a readable file: {err}"
        ) from err
    try:
        document = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigurationError(f"{path_or_preset}: invalid JSON: {err}") from err
    return parse_scenario(document)
