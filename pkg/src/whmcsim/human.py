"""Modeled human operator: attention, noticing, interventions, coarse force.

The operator watches an HMI that shows the most recently delivered plant
view, makes decisions on a slow grid (one instant every ``decision_period``),
and acts through the same lossy link that carries the view.  Attention gates
everything: a distracted operator neither notices the attached weight nor
issues any action.

Noticing is display based: the weight counts as noticed at the first instant
the operator is engaged while the *displayed* (last delivered) view shows
it.  A remove-weight intervention is issued exactly once per attachment, at
the first decision instant at least ``reaction_delay`` (plus optional
jitter) after noticing.  If that packet is lost the chance is gone until a
delivered view shows the weight absent and a new attachment re-arms it.

Force commands, when the collaboration mode grants the operator force
authority, are bang-bang on the displayed pole angle: +/-force_level outside
``angle_deadband``, zero inside.  They change at most once per decision
period; the actuator holds the last delivered command between instants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

ENGAGED = "engaged"
DISTRACTED = "distracted"

ALWAYS_ENGAGED = "always_engaged"
ALWAYS_DISTRACTED = "always_distracted"
MARKOV = "markov"
ATTENTION_MODES = (ALWAYS_ENGAGED, ALWAYS_DISTRACTED, MARKOV)

ACTION_NONE = "none"
ACTION_REMOVE_WEIGHT = "remove_weight"
ACTION_FORCE = "force_command"
ACTION_KINDS = (ACTION_NONE, ACTION_REMOVE_WEIGHT, ACTION_FORCE)


class ProtocolError(ValueError):
    """A live input message is malformed or not recognized."""


@dataclass(frozen=True)
class HumanParams:
    """Operator model parameters.

    ``p_engaged_to_distracted`` and ``p_distracted_to_engaged`` are the
    markov mode's per-second switching probabilities, applied as rates: over
    a step dt the flip probability is 1 - exp(-p * dt).  The angle deadband
    is a perception threshold: displayed tilts smaller than it look upright
    to the operator.
    """

    attention_mode: str = ALWAYS_ENGAGED
    p_engaged_to_distracted: float = 0.1
    p_distracted_to_engaged: float = 0.3
    reaction_delay: float = 0.25
    reaction_jitter: float = 0.0
    human_control_period: float = 0.3
    human_force_level: float = 60.0
    angle_deadband: float = 0.05

    def __post_init__(self) -> None:
        if self.attention_mode not in ATTENTION_MODES:
            raise ValueError(
                f"attention_mode must be one of {ATTENTION_MODES}, got {self.attention_mode!r}"
            )
        for name in ("p_engaged_to_distracted", "p_distracted_to_engaged"):
            value = getattr(self, name)
            if not (math.isfinite(value) and 0.0 <= value <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
        for name in ("reaction_delay", "reaction_jitter", "angle_deadband"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")
        for name in ("human_control_period", "human_force_level"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and > 0, got {value!r}")


@dataclass(frozen=True)
class HumanObservation:
    """One delivered HMI frame: plant view plus whatever the info structure adds."""

    time: float
    x: float
    x_dot: float
    theta: float
    theta_dot: float
    weight_present: bool
    machine_recommendation: float | None = None


@dataclass(frozen=True)
class HumanAction:
    """Single operator action; ``force`` is meaningful only for force commands."""

    kind: str = ACTION_NONE
    force: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ACTION_KINDS:
            raise ValueError(f"unknown action kind {self.kind!r}")


NO_ACTION = HumanAction()


@dataclass
class HumanState:
    """Mutable operator memory carried across control periods."""

    attention: str = ENGAGED
    weight_noticed_at: float | None = None
    intervention_sent: bool = False
    last_decision_time: float = -math.inf
    pending_delay: float = 0.0
    last_observation: HumanObservation | None = None


def initial_human_state(params: HumanParams) -> HumanState:
    attention = DISTRACTED if params.attention_mode == ALWAYS_DISTRACTED else ENGAGED
    return HumanState(attention=attention, pending_delay=params.reaction_delay)


def attention_transition(
    state: HumanState, params: HumanParams, dt: float, rng: np.random.Generator
) -> str:
    """Advance attention by dt and return the new value.

    Pinned modes consume no randomness; the markov mode draws one uniform
    per call.
    """
    if params.attention_mode == ALWAYS_ENGAGED:
        state.attention = ENGAGED
    elif params.attention_mode == ALWAYS_DISTRACTED:
        state.attention = DISTRACTED
    else:
        rate = (
            params.p_engaged_to_distracted
            if state.attention == ENGAGED
            else params.p_distracted_to_engaged
        )
        if rng.random() < -math.expm1(-rate * dt):
            state.attention = DISTRACTED if state.attention == ENGAGED else ENGAGED
    return state.attention


def observe(state: HumanState, params: HumanParams, observation: HumanObservation | None) -> None:
    """Update the HMI with a delivered frame (None means the packet was lost).

    A frame showing the weight absent re-arms the intervention for a future
    attachment.
    """
    if observation is None:
        return
    state.last_observation = observation
    if not observation.weight_present and state.intervention_sent:
        state.intervention_sent = False
        state.weight_noticed_at = None
        state.pending_delay = params.reaction_delay


def human_step(
    state: HumanState,
    params: HumanParams,
    t: float,
    rng: np.random.Generator,
    force_authority: bool,
) -> HumanAction:
    """One control-period tick of the operator; returns the emitted action.

    Call after ``attention_transition`` and ``observe`` for the period.
    Decisions happen only at instants spaced ``human_control_period`` apart;
    other calls return no action and leave the decision clock untouched.
    """
    view = state.last_observation

    # Display-based noticing happens continuously, not only at decision
    # instants: the weight sits on the screen until removed.
    if (
        state.attention == ENGAGED
        and view is not None
        and view.weight_present
        and state.weight_noticed_at is None
        and not state.intervention_sent
    ):
        state.weight_noticed_at = t
        jitter = params.reaction_jitter
        offset = jitter * (2.0 * rng.random() - 1.0) if jitter > 0 else 0.0
        state.pending_delay = max(0.0, params.reaction_delay + offset)

    if t < state.last_decision_time + params.human_control_period - 1e-9:
        return NO_ACTION
    state.last_decision_time = t

    if state.attention != ENGAGED:
        return NO_ACTION

    if (
        state.weight_noticed_at is not None
        and not state.intervention_sent
        and t >= state.weight_noticed_at + state.pending_delay - 1e-9
    ):
        state.intervention_sent = True
        return HumanAction(ACTION_REMOVE_WEIGHT)

    if force_authority and view is not None:
        if view.theta > params.angle_deadband:
            return HumanAction(ACTION_FORCE, -params.human_force_level)
        if view.theta < -params.angle_deadband:
            return HumanAction(ACTION_FORCE, params.human_force_level)
        return HumanAction(ACTION_FORCE, 0.0)

    return NO_ACTION


def live_input_adapter(message: dict, force_level: float) -> HumanAction:
    """Translate a live console input payload into a validated HumanAction.

    Accepts {"action": "remove_weight"} or {"action": "force", "value": v};
    the force value is clamped to the operator's +/-force_level authority.
    """
    if not isinstance(message, dict):
        raise ProtocolError(f"input payload must be an object, got {type(message).__name__}")
    action = message.get("action")
    if action == "remove_weight":
        return HumanAction(ACTION_REMOVE_WEIGHT)
    if action == "force":
        value = message.get("value")
        if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
            raise ProtocolError(f"force input needs a finite numeric 'value', got {value!r}")
        clamped = max(-force_level, min(force_level, float(value)))
        return HumanAction(ACTION_FORCE, clamped)
    raise ProtocolError(f"unknown input action {action!r}; expected 'remove_weight' or 'force'")


@dataclass(frozen=True)
class LoggedInput:
    """One externally injected action, stamped with the period that applied it."""

    period: int
    kind: str
    force: float = 0.0

    def action(self) -> HumanAction:
        return HumanAction(self.kind, self.force)


def replay_schedule(log: list[LoggedInput]) -> dict[int, list[HumanAction]]:
    """Group a recorded input log by period for offline replay."""
    schedule: dict[int, list[HumanAction]] = {}
    for item in log:
        schedule.setdefault(item.period, []).append(item.action())
    return schedule
