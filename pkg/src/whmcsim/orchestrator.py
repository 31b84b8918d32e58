"""Closed-loop engine: machine LQR, modeled or live operator, lossy links.

Loop order within one control period (sense-to-actuate latency of one
period, all three links transmitting once):

  1. the sensor samples the true state and transmits on the sensor uplink;
     the controller refreshes its estimate or applies its loss policy;
  2. the controller computes the saturated LQR force (whmc / machine_only)
     and transmits it on the actuator downlink; a loss applies the actuator
     loss policy;
  3. the operator's HMI frame travels the human link (filtered per the
     information structure); the operator decides; any action travels back
     on the human link in the same slot, gated by the same block fade;
  4. arbitration per the collaboration topology resolves the applied force
     and any plant event;
  5. physics integrates one control period in fixed RK4 substeps, applying
     due disturbance events at the first substep at or past their time;
  6. the quadratic pole-angle cost of the end-of-period state accrues.

Human force commands act through a zero-order-hold register on the actuator
side: each delivered force command replaces the register value, which keeps
acting until replaced.  A fallen pole (|theta| > pi/2) freezes the plant at
the clamped pose, so every later period accrues the saturated cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import scenario as sc
from .control import HOLD_LAST, LossPolicy, LqrDesign, design_lqr, machine_command
from .dynamics import (
    ATTACH_WEIGHT,
    REMOVE_WEIGHT,
    DisturbanceEvent,
    PlantState,
    rk4_raw,
)
from .human import (
    ACTION_FORCE,
    ACTION_NONE,
    ACTION_REMOVE_WEIGHT,
    ENGAGED,
    HumanAction,
    HumanObservation,
    HumanParams,
    HumanState,
    LoggedInput,
    NO_ACTION,
    attention_transition,
    human_step,
    initial_human_state,
    observe,
    replay_schedule,
)
from .streams import (
    DOWNLINK_STREAM,
    HUMAN_LINK_STREAM,
    HUMAN_STREAM,
    UPLINK_STREAM,
    make_stream,
)
from .wireless import LinkChannel, PacketOutcome, mean_snr, to_db

FAILURE_ANGLE = math.pi / 2
STABLE_ANGLE = 0.01
STABLE_HOLD_SECONDS = 1.0

_ACTION_CODES = {ACTION_NONE: 0, ACTION_REMOVE_WEIGHT: 1, ACTION_FORCE: 2}
_ACTION_NAMES = {v: k for k, v in _ACTION_CODES.items()}


def step_cost(state: PlantState) -> float:
    """Quadratic pole-angle deviation cost; theta is frozen at +/-pi/2 after
    a failure, so the saturated rate falls out of the same formula."""
    return state.theta * state.theta


def arbitrate(
    topology: str,
    machine_force: float,
    human_action: HumanAction,
    force_limit: float = math.inf,
    event_time: float = 0.0,
) -> tuple[float, DisturbanceEvent | None]:
    """Resolve the applied force and any plant event for one period.

    machine_dominated applies only the machine force; symbiosis applies the
    saturated sum; human_dominated applies only the human force (the machine
    force reaches the operator solely as a recommendation).  A remove_weight
    action maps to a plant event under every topology and contributes no
    force.
    """
    event = None
    if human_action.kind == ACTION_REMOVE_WEIGHT:
        event = DisturbanceEvent(event_time, REMOVE_WEIGHT)
    human_force = human_action.force if human_action.kind == ACTION_FORCE else 0.0
    if topology == sc.MACHINE_DOMINATED:
        applied = machine_force
    elif topology == sc.SYMBIOSIS:
        applied = machine_force + human_force
    elif topology == sc.HUMAN_DOMINATED:
        applied = human_force
    else:
        raise ValueError(f"unknown topology {topology!r}")
    applied = max(-force_limit, min(force_limit, applied))
    return applied, event


@dataclass(frozen=True)
class MachineObservation:
    """What the machine agent may see: its own estimate plus, with wider
    information structures, the operator's liveness and last action."""

    estimate: tuple[float, float, float, float]
    counterpart_attention: str | None = None
    counterpart_action: HumanAction | None = None


@dataclass(frozen=True)
class AgentObservations:
    machine: MachineObservation
    human: HumanObservation | None


@dataclass(frozen=True)
class FullViews:
    """Everything observable this period, before information filtering."""

    time: float
    plant_view: tuple[float, float, float, float, bool] | None
    estimate: tuple[float, float, float, float]
    machine_recommendation: float | None
    human_attention: str
    human_last_action: HumanAction


def observation_filter(info_structure: str, views: FullViews) -> AgentObservations:
    """Widen each agent's observation per the information structure.

    ignorance: own-link plant state only.  awareness: plus the counterpart's
    engagement flag.  trustworthiness: plus the counterpart's last applied
    action (the machine recommendation, on the human side).
    """
    aware = info_structure in (sc.AWARENESS, sc.TRUSTWORTHINESS)
    trusting = info_structure == sc.TRUSTWORTHINESS
    machine = MachineObservation(
        estimate=views.estimate,
        counterpart_attention=views.human_attention if aware else None,
        counterpart_action=views.human_last_action if trusting else None,
    )
    human = None
    if views.plant_view is not None:
        x, x_dot, theta, theta_dot, weight = views.plant_view
        human = HumanObservation(
            time=views.time,
            x=x,
            x_dot=x_dot,
            theta=theta,
            theta_dot=theta_dot,
            weight_present=weight,
            machine_recommendation=views.machine_recommendation if trusting else None,
        )
    return AgentObservations(machine=machine, human=human)


@dataclass(frozen=True)
class LinkQoC:
    delivery_ratio: float
    mean_consecutive_losses: float
    max_consecutive_losses: int
    mean_snr_db: float | None  # None when the run sent no packets

    def to_dict(self) -> dict:
        return {
            "delivery_ratio": self.delivery_ratio,
            "mean_consecutive_losses": self.mean_consecutive_losses,
            "max_consecutive_losses": self.max_consecutive_losses,
            "mean_snr_db": self.mean_snr_db,
        }


@dataclass(frozen=True)
class QoCReport:
    """Quality of collaboration across the three coupled layers."""

    final_accumulated_cost: float
    failed: bool
    failure_time: float | None
    time_to_stabilize: float | None
    links: dict[str, LinkQoC]
    attention_duty_cycle: float | None
    intervention_count: int
    mean_intervention_latency: float | None

    def scalar_summary(self, task_weight=1.0, network_weight=0.0, human_weight=0.0) -> float:
        """Optional weighted scalar: cost, mean loss ratio, inattention.

        The layers are deliberately reported separately; this convenience
        combination exists for callers who insist on one number.
        """
        loss = 1.0 - float(np.mean([q.delivery_ratio for q in self.links.values()]))
        inattention = 1.0 - (self.attention_duty_cycle if self.attention_duty_cycle is not None else 1.0)
        return (
            task_weight * self.final_accumulated_cost
            + network_weight * loss
            + human_weight * inattention
        )

    def to_dict(self) -> dict:
        return {
            "task": {
                "final_accumulated_cost": self.final_accumulated_cost,
                "failed": self.failed,
                "failure_time": self.failure_time,
                "time_to_stabilize": self.time_to_stabilize,
            },
            "network": {slot: q.to_dict() for slot, q in self.links.items()},
            "human": {
                "attention_duty_cycle": self.attention_duty_cycle,
                "intervention_count": self.intervention_count,
                "mean_intervention_latency": self.mean_intervention_latency,
            },
        }


@dataclass(frozen=True)
class StepRecord:
    """One control period of the trace, materialized from the result arrays."""

    t: float
    true_state: PlantState
    controller_estimate: tuple[float, float, float, float]
    machine_force: float
    human_action: HumanAction
    applied_force: float
    uplink: PacketOutcome
    downlink: PacketOutcome
    humanlink: PacketOutcome
    step_cost: float
    accumulated_cost: float


@dataclass(frozen=True)
class RunResult:
    """Complete deterministic trace of one run plus its QoC report.

    Array rows are per control period; row k holds the state at the period's
    start (what the sensor sampled), the forces and link outcomes of that
    period, and the cost accrued by its end.
    """

    scenario: sc.Scenario
    master_seed: int
    fingerprint: str
    t: np.ndarray
    x: np.ndarray
    x_dot: np.ndarray
    theta: np.ndarray
    theta_dot: np.ndarray
    weight_present: np.ndarray
    estimate: np.ndarray
    machine_force: np.ndarray
    applied_force: np.ndarray
    human_action_kind: np.ndarray
    human_action_force: np.ndarray
    uplink_delivered: np.ndarray
    downlink_delivered: np.ndarray
    humanlink_delivered: np.ndarray
    uplink_snr: np.ndarray
    downlink_snr: np.ndarray
    humanlink_snr: np.ndarray
    step_cost: np.ndarray
    accumulated_cost: np.ndarray
    attention_engaged: np.ndarray
    failure_time: float | None
    aborted: bool
    input_log: tuple[LoggedInput, ...]
    qoc: QoCReport | None = None

    @property
    def final_cost(self) -> float:
        if self.accumulated_cost.size == 0:
            return 0.0
        return float(self.accumulated_cost[-1])

    def records(self):
        """Iterate StepRecord views over the trace."""
        snrs = (self.uplink_snr, self.downlink_snr, self.humanlink_snr)
        flags = (self.uplink_delivered, self.downlink_delivered, self.humanlink_delivered)
        gammas = [mean_snr(self.scenario.links.by_slot(slot)) for slot in sc.LINK_SLOTS]
        for k in range(self.t.size):
            outcomes = [
                PacketOutcome(
                    slot=k,
                    fading_power=snrs[i][k] / gammas[i],
                    instantaneous_snr=snrs[i][k],
                    delivered=bool(flags[i][k]),
                )
                for i in range(3)
            ]
            yield StepRecord(
                t=float(self.t[k]),
                true_state=PlantState(
                    x=float(self.x[k]),
                    x_dot=float(self.x_dot[k]),
                    theta=float(self.theta[k]),
                    theta_dot=float(self.theta_dot[k]),
                    weight_present=bool(self.weight_present[k]),
                ),
                controller_estimate=tuple(float(v) for v in self.estimate[k]),
                machine_force=float(self.machine_force[k]),
                human_action=HumanAction(
                    _ACTION_NAMES[int(self.human_action_kind[k])],
                    float(self.human_action_force[k]),
                ),
                applied_force=float(self.applied_force[k]),
                uplink=outcomes[0],
                downlink=outcomes[1],
                humanlink=outcomes[2],
                step_cost=float(self.step_cost[k]),
                accumulated_cost=float(self.accumulated_cost[k]),
            )


def _consecutive_loss_runs(delivered: np.ndarray) -> tuple[float, int]:
    """(mean, max) length of maximal loss runs; zeros when nothing was lost."""
    runs = []
    current = 0
    for ok in delivered:
        if ok:
            if current:
                runs.append(current)
            current = 0
        else:
            current += 1
    if current:
        runs.append(current)
    if not runs:
        return 0.0, 0
    return float(np.mean(runs)), int(max(runs))


def qoc_report(result: RunResult) -> QoCReport:
    """Recompute the three-layer report directly from the trace arrays."""
    s = result.scenario
    if result.t.size == 0:
        # session ended before its first period: vacuous report
        empty = LinkQoC(1.0, 0.0, 0, None)
        return QoCReport(
            final_accumulated_cost=0.0,
            failed=False,
            failure_time=None,
            time_to_stabilize=None,
            links={slot: empty for slot in sc.LINK_SLOTS},
            attention_duty_cycle=None,
            intervention_count=0,
            mean_intervention_latency=None,
        )
    links = {}
    for slot, delivered, snr in (
        (sc.UPLINK, result.uplink_delivered, result.uplink_snr),
        (sc.DOWNLINK, result.downlink_delivered, result.downlink_snr),
        (sc.HUMAN_LINK, result.humanlink_delivered, result.humanlink_snr),
    ):
        mean_loss, max_loss = _consecutive_loss_runs(delivered)
        links[slot] = LinkQoC(
            delivery_ratio=float(np.mean(delivered)),
            mean_consecutive_losses=mean_loss,
            max_consecutive_losses=max_loss,
            mean_snr_db=to_db(float(np.mean(snr))) if np.mean(snr) > 0 else -math.inf,
        )

    hold = round(STABLE_HOLD_SECONDS / s.control_period)
    stable = np.abs(result.theta) < STABLE_ANGLE
    time_to_stabilize = None
    if stable.size >= hold and hold > 0:
        window = np.convolve(stable.astype(int), np.ones(hold, dtype=int), mode="valid")
        hits = np.nonzero(window == hold)[0]
        if hits.size:
            time_to_stabilize = float(result.t[hits[0]])

    delivered_removes = (result.human_action_kind == _ACTION_CODES[ACTION_REMOVE_WEIGHT]) & (
        result.humanlink_delivered
    )
    intervention_count = int(np.count_nonzero(delivered_removes))

    # Latency from each applied attachment to the next delivered remove.
    latencies = []
    weight = result.weight_present.astype(bool)
    attach_periods = [k for k in range(1, weight.size) if weight[k] and not weight[k - 1]]
    if weight.size and weight[0]:
        attach_periods.insert(0, 0)
    remove_periods = list(np.nonzero(delivered_removes)[0])
    for attach in attach_periods:
        later = [r for r in remove_periods if r >= attach]
        if later:
            latencies.append(float(result.t[later[0]] - result.t[attach]))
            remove_periods = [r for r in remove_periods if r != later[0]]
    mean_latency = float(np.mean(latencies)) if latencies else None

    duty = None
    if result.attention_engaged.size:
        duty = float(np.mean(result.attention_engaged))

    return QoCReport(
        final_accumulated_cost=result.final_cost,
        failed=result.failure_time is not None,
        failure_time=result.failure_time,
        time_to_stabilize=time_to_stabilize,
        links=links,
        attention_duty_cycle=duty,
        intervention_count=intervention_count,
        mean_intervention_latency=mean_latency,
    )


class Simulation:
    """Incremental per-period stepper shared by batch runs and live sessions.

    With ``external_mode`` the scripted operator is disabled and human
    actions come only from ``step(external_actions=...)`` or the preloaded
    ``external_inputs`` schedule; either way they traverse the human link.
    """

    def __init__(
        self,
        scen: sc.Scenario,
        design: LqrDesign | None = None,
        external_inputs: dict[int, list[HumanAction]] | None = None,
        external_mode: bool = False,
    ):
        scen.validate()
        self.scenario = scen
        self.design = design if design is not None else design_lqr(scen.plant, scen.control_period)
        self.external_mode = external_mode or external_inputs is not None
        self.external_schedule = external_inputs or {}

        self.uplink = LinkChannel(scen.links.sensor_uplink, make_stream(scen.master_seed, UPLINK_STREAM))
        self.downlink = LinkChannel(
            scen.links.actuator_downlink, make_stream(scen.master_seed, DOWNLINK_STREAM)
        )
        self.humanlink = LinkChannel(scen.links.human_link, make_stream(scen.master_seed, HUMAN_LINK_STREAM))
        self.human_rng = make_stream(scen.master_seed, HUMAN_STREAM)

        init = scen.initial_state
        self._x, self._x_dot = init.x, init.x_dot
        self._theta, self._theta_dot = init.theta, init.theta_dot
        self._weight = init.weight_present

        self.human_active = scen.decision_maker != sc.MACHINE_ONLY
        self.machine_active = scen.decision_maker != sc.HUMAN_ONLY
        if scen.decision_maker == sc.MACHINE_ONLY:
            self.effective_topology = sc.MACHINE_DOMINATED
        elif scen.decision_maker == sc.HUMAN_ONLY:
            self.effective_topology = sc.HUMAN_DOMINATED
        else:
            self.effective_topology = scen.topology
        self.force_authority = scen.decision_maker == sc.HUMAN_ONLY or (
            scen.decision_maker == sc.WHMC
            and scen.topology in (sc.SYMBIOSIS, sc.HUMAN_DOMINATED)
        )

        self.estimate = [0.0, 0.0, 0.0, 0.0]
        self.controller_policy_hold = scen.controller_loss_policy == HOLD_LAST
        self.actuator_policy = LossPolicy(scen.actuator_loss_policy)
        self.human_state: HumanState = initial_human_state(scen.human)
        self.human_force_register: float | None = None
        self.last_human_action = NO_ACTION

        self.period = 0
        self.accumulated = 0.0
        self.failure_time: float | None = None
        self.aborted = False
        self.input_log: list[LoggedInput] = []
        self.last_outcomes: dict[str, PacketOutcome] | None = None

        # Scheduled events resolved to global substep indices: an event at
        # time T applies at the first substep whose start time >= T.
        self._substep = scen.physics_substep
        self._spp = scen.substeps_per_period
        self._events: dict[int, list[str]] = {}
        for event in sorted(scen.disturbances, key=lambda e: e.time):
            index = max(0, math.ceil(event.time / self._substep - 1e-9))
            self._events.setdefault(index, []).append(event.kind)

        k = self.design.k
        self._k0, self._k1, self._k2, self._k3 = (float(v) for v in k)
        self._force_limit = scen.plant.force_limit
        self._records: dict[str, list] = {
            name: []
            for name in (
                "t x x_dot theta theta_dot weight est0 est1 est2 est3 machine applied "
                "hkind hforce updel downdel hldel upsnr downsnr hlsnr cost acc engaged"
            ).split()
        }

    # -- public live-session surface ---------------------------------------

    def current_time(self) -> float:
        return self.period * self.scenario.control_period

    @property
    def current_accumulated_cost(self) -> float:
        acc = self._records["acc"]
        return acc[-1] if acc else 0.0

    def current_state(self) -> PlantState:
        return PlantState(
            x=self._x,
            x_dot=self._x_dot,
            theta=self._theta,
            theta_dot=self._theta_dot,
            weight_present=self._weight,
        )

    @property
    def finished(self) -> bool:
        return self.aborted or self.period >= self.scenario.periods

    # -- engine core --------------------------------------------------------

    def step(self, external_actions: tuple[HumanAction, ...] = ()) -> None:
        """Advance exactly one control period."""
        if self.finished:
            raise RuntimeError("simulation already finished")
        scen = self.scenario
        k = self.period
        t = k * scen.control_period
        rec = self._records

        # 1. Sensor uplink.
        up = self.uplink.transmit(k)
        if up.delivered:
            self.estimate[0] = self._x
            self.estimate[1] = self._x_dot
            self.estimate[2] = self._theta
            self.estimate[3] = self._theta_dot
        elif not self.controller_policy_hold:
            self.estimate[0] = self.estimate[1] = self.estimate[2] = self.estimate[3] = 0.0

        # 2. Machine command and actuator downlink.
        if self.machine_active:
            e = self.estimate
            u = -(self._k0 * e[0] + self._k1 * e[1] + self._k2 * e[2] + self._k3 * e[3])
            limit = self._force_limit
            machine_force = limit if u > limit else (-limit if u < -limit else u)
        else:
            machine_force = 0.0
        down = self.downlink.transmit(k)
        if down.delivered:
            actuator_machine = machine_force
            self.actuator_policy.record(machine_force)
        else:
            actuator_machine = self.actuator_policy.on_loss()

        # 3. Human link, observation filtering, operator decision.
        hl = self.humanlink.transmit(k)
        fresh_actions: list[HumanAction] = []
        engaged_now = False
        if self.human_active:
            if not self.external_mode:
                attention_transition(self.human_state, scen.human, scen.control_period, self.human_rng)
                engaged_now = self.human_state.attention == ENGAGED
                views = FullViews(
                    time=t,
                    plant_view=(
                        (self._x, self._x_dot, self._theta, self._theta_dot, self._weight)
                        if hl.delivered
                        else None
                    ),
                    estimate=tuple(self.estimate),
                    machine_recommendation=machine_force if self.machine_active else None,
                    human_attention=self.human_state.attention,
                    human_last_action=self.last_human_action,
                )
                filtered = observation_filter(scen.info_structure, views)
                observe(self.human_state, scen.human, filtered.human)
                action = human_step(
                    self.human_state, scen.human, t, self.human_rng, self.force_authority
                )
                if action.kind != ACTION_NONE and hl.delivered:
                    fresh_actions.append(action)
                if action.kind != ACTION_NONE:
                    self.last_human_action = action
                emitted = action
            else:
                scheduled = list(self.external_schedule.get(k, ())) + list(external_actions)
                emitted = NO_ACTION
                for action in scheduled:
                    self.input_log.append(LoggedInput(k, action.kind, action.force))
                    emitted = action
                    if hl.delivered:
                        fresh_actions.append(action)
                        self.last_human_action = action
        else:
            emitted = NO_ACTION

        # 4. Arbitration with the ZOH force register.
        pending_event = False
        for action in fresh_actions:
            if action.kind == ACTION_FORCE:
                self.human_force_register = action.force
            elif action.kind == ACTION_REMOVE_WEIGHT:
                pending_event = True
        if fresh_actions and fresh_actions[-1].kind == ACTION_REMOVE_WEIGHT:
            actuation_action = fresh_actions[-1]
        elif self.human_force_register is not None:
            actuation_action = HumanAction(ACTION_FORCE, self.human_force_register)
        else:
            actuation_action = NO_ACTION
        applied, event = arbitrate(
            self.effective_topology,
            actuator_machine,
            actuation_action,
            self._force_limit,
            event_time=t,
        )
        if pending_event and event is None:
            event = DisturbanceEvent(t, REMOVE_WEIGHT)

        # 5. Integrate substeps, applying due events exactly once.
        params = scen.plant
        base_index = k * self._spp
        human_event_kind = event.kind if event is not None else None
        x, x_dot, theta, theta_dot = self._x, self._x_dot, self._theta, self._theta_dot
        weight = self._weight
        total = params.effective_cart_mass(weight) + params.pole_mass
        failed = self.failure_time is not None
        for j in range(self._spp):
            index = base_index + j
            kinds = self._events.pop(index, None)
            if j == 0 and human_event_kind is not None:
                kinds = (kinds or []) + [human_event_kind]
            if kinds:
                for kind in kinds:
                    weight = kind == ATTACH_WEIGHT
                total = params.effective_cart_mass(weight) + params.pole_mass
            if failed:
                continue
            try:
                x, x_dot, theta, theta_dot = rk4_raw(
                    x,
                    x_dot,
                    theta,
                    theta_dot,
                    applied,
                    self._substep,
                    total,
                    params.pole_mass,
                    params.half_length,
                    params.gravity,
                )
            except (ValueError, OverflowError):
                # sin/cos of an overflowed angle; treated as a numerical abort
                self.aborted = True
                break
            if theta > FAILURE_ANGLE or theta < -FAILURE_ANGLE:
                theta = FAILURE_ANGLE if theta > 0 else -FAILURE_ANGLE
                x_dot = 0.0
                theta_dot = 0.0
                failed = True
                self.failure_time = t + (j + 1) * self._substep

        # Pathological parameters can overflow before the failure clamp is
        # reached; flag the run instead of propagating non-finite values.
        if not (
            math.isfinite(x)
            and math.isfinite(x_dot)
            and math.isfinite(theta)
            and math.isfinite(theta_dot)
        ):
            self.aborted = True
            x, x_dot = self._x, self._x_dot
            theta, theta_dot = self._theta, self._theta_dot

        # 6. Cost on the end-of-period state.
        cost = theta * theta
        self.accumulated += cost

        rec["t"].append(t)
        rec["x"].append(self._x)
        rec["x_dot"].append(self._x_dot)
        rec["theta"].append(self._theta)
        rec["theta_dot"].append(self._theta_dot)
        rec["weight"].append(self._weight)
        rec["est0"].append(self.estimate[0])
        rec["est1"].append(self.estimate[1])
        rec["est2"].append(self.estimate[2])
        rec["est3"].append(self.estimate[3])
        rec["machine"].append(machine_force)
        rec["applied"].append(applied)
        rec["hkind"].append(_ACTION_CODES[emitted.kind])
        rec["hforce"].append(emitted.force)
        rec["updel"].append(up.delivered)
        rec["downdel"].append(down.delivered)
        rec["hldel"].append(hl.delivered)
        rec["upsnr"].append(up.instantaneous_snr)
        rec["downsnr"].append(down.instantaneous_snr)
        rec["hlsnr"].append(hl.instantaneous_snr)
        rec["cost"].append(cost)
        rec["acc"].append(self.accumulated)
        rec["engaged"].append(engaged_now)

        self._x, self._x_dot, self._theta, self._theta_dot = x, x_dot, theta, theta_dot
        self._weight = weight
        self.last_outcomes = {sc.UPLINK: up, sc.DOWNLINK: down, sc.HUMAN_LINK: hl}
        self.period += 1

    def run(self) -> RunResult:
        while not self.finished:
            self.step()
        return self.finalize()

    def finalize(self) -> RunResult:
        rec = self._records
        scen = self.scenario
        estimate = np.column_stack(
            [np.asarray(rec["est0"]), np.asarray(rec["est1"]), np.asarray(rec["est2"]), np.asarray(rec["est3"])]
        )
        result = RunResult(
            scenario=scen,
            master_seed=scen.master_seed,
            fingerprint=scen.fingerprint(),
            t=np.asarray(rec["t"]),
            x=np.asarray(rec["x"]),
            x_dot=np.asarray(rec["x_dot"]),
            theta=np.asarray(rec["theta"]),
            theta_dot=np.asarray(rec["theta_dot"]),
            weight_present=np.asarray(rec["weight"], dtype=bool),
            estimate=estimate,
            machine_force=np.asarray(rec["machine"]),
            applied_force=np.asarray(rec["applied"]),
            human_action_kind=np.asarray(rec["hkind"], dtype=np.int8),
            human_action_force=np.asarray(rec["hforce"]),
            uplink_delivered=np.asarray(rec["updel"], dtype=bool),
            downlink_delivered=np.asarray(rec["downdel"], dtype=bool),
            humanlink_delivered=np.asarray(rec["hldel"], dtype=bool),
            uplink_snr=np.asarray(rec["upsnr"]),
            downlink_snr=np.asarray(rec["downsnr"]),
            humanlink_snr=np.asarray(rec["hlsnr"]),
            step_cost=np.asarray(rec["cost"]),
            accumulated_cost=np.asarray(rec["acc"]),
            attention_engaged=(
                np.asarray(rec["engaged"], dtype=bool)
                if self.human_active and not self.external_mode
                else np.zeros(0, dtype=bool)
            ),
            failure_time=self.failure_time,
            aborted=self.aborted,
            input_log=tuple(self.input_log),
        )
        return replace(result, qoc=qoc_report(result))


def run_scenario(
    scen: sc.Scenario,
    design: LqrDesign | None = None,
    external_inputs: dict[int, list[HumanAction]] | None = None,
) -> RunResult:
    """Execute a scenario to completion; pure in (scenario, master_seed)."""
    return Simulation(scen, design=design, external_inputs=external_inputs).run()


def replay_from_log(scen: sc.Scenario, log, design: LqrDesign | None = None) -> RunResult:
    """Re-run a live session offline from its recorded input log."""
    return run_scenario(scen, design=design, external_inputs=replay_schedule(list(log)))


@dataclass(frozen=True)
class ComparisonResult:
    """Per-seed accumulated-cost trajectories of the three decision makers."""

    base: sc.Scenario
    seeds: tuple[int, ...]
    times: np.ndarray
    costs: dict[str, np.ndarray]  # variant -> (n_seeds, n_periods)

    def mean_trajectory(self, variant: str) -> np.ndarray:
        return self.costs[variant].mean(axis=0)

    def final_costs(self, variant: str) -> np.ndarray:
        return self.costs[variant][:, -1]

    def rows(self):
        """Long-form (variant, seed, t, accumulated_cost) rows."""
        for variant in DECISION_VARIANTS:
            for i, seed in enumerate(self.seeds):
                trajectory = self.costs[variant][i]
                for j in range(self.times.size):
                    yield variant, seed, float(self.times[j]), float(trajectory[j])

    def mean_rows(self):
        """Long-form (variant, t, mean accumulated_cost) rows."""
        for variant in DECISION_VARIANTS:
            mean = self.mean_trajectory(variant)
            for j in range(self.times.size):
                yield variant, float(self.times[j]), float(mean[j])


DECISION_VARIANTS = (sc.MACHINE_ONLY, sc.HUMAN_ONLY, sc.WHMC)


def compare_decision_makers(base: sc.Scenario, seeds) -> ComparisonResult:
    """Run the three decision-maker variants per seed over shared streams.

    Channel streams derive from (seed, link name) only, so a given seed
    sees identical fading across the three variants (common random
    numbers); the human stream likewise.
    """
    seeds = tuple(int(s) for s in seeds)
    if not seeds:
        raise ValueError("need at least one seed")
    design = design_lqr(base.plant, base.control_period)
    times = None
    costs = {variant: [] for variant in DECISION_VARIANTS}
    for seed in seeds:
        for variant in DECISION_VARIANTS:
            scen = replace(base, decision_maker=variant, master_seed=seed)
            result = run_scenario(scen, design=design)
            costs[variant].append(result.accumulated_cost)
            if times is None:
                times = result.t
    return ComparisonResult(
        base=base,
        seeds=seeds,
        times=times,
        costs={variant: np.vstack(series) for variant, series in costs.items()},
    )


@dataclass(frozen=True)
class SweepPoint:
    attention: str
    power_dbm: float
    final_costs: np.ndarray
    delivery_ratios: dict[str, float]

    @property
    def mean_final_cost(self) -> float:
        return float(self.final_costs.mean())

    @property
    def std_final_cost(self) -> float:
        return float(self.final_costs.std(ddof=1)) if self.final_costs.size > 1 else 0.0


@dataclass(frozen=True)
class SweepResult:
    """Final costs and delivery ratios over the transmit-power grid."""

    base: sc.Scenario
    powers_dbm: tuple[float, ...]
    seeds: tuple[int, ...]
    points: tuple[SweepPoint, ...]

    def point(self, attention: str, power_dbm: float) -> SweepPoint:
        for p in self.points:
            if p.attention == attention and p.power_dbm == power_dbm:
                return p
        raise KeyError((attention, power_dbm))

    def rows(self):
        for p in self.points:
            yield (
                p.attention,
                p.power_dbm,
                p.mean_final_cost,
                p.std_final_cost,
                len(self.seeds),
                p.delivery_ratios[sc.UPLINK],
                p.delivery_ratios[sc.DOWNLINK],
                p.delivery_ratios[sc.HUMAN_LINK],
            )


SWEEP_ATTENTIONS = ("always_engaged", "always_distracted")


def snr_sweep(base: sc.Scenario, powers_dbm, seeds) -> SweepResult:
    """Sweep transmit power on all three links for the engaged and
    distracted presets, recording final costs and delivery ratios."""
    powers = tuple(float(p) for p in powers_dbm)
    seeds = tuple(int(s) for s in seeds)
    if not powers or not seeds:
        raise ValueError("need at least one power and one seed")
    floor = base.links.sensor_uplink.min_transmit_power_dbm
    below = [p for p in powers if p < floor]
    if below:
        raise ValueError(f"powers {below} fall below the {floor} dBm radio floor")
    design = design_lqr(base.plant, base.control_period)
    points = []
    for attention in SWEEP_ATTENTIONS:
        human = replace(base.human, attention_mode=attention)
        for power in powers:
            links = sc.Links(
                **{
                    slot: replace(base.links.by_slot(slot), transmit_power_dbm=power)
                    for slot in sc.LINK_SLOTS
                }
            )
            finals = []
            ratios = {slot: [] for slot in sc.LINK_SLOTS}
            for seed in seeds:
                scen = replace(
                    base,
                    decision_maker=sc.WHMC,
                    human=human,
                    links=links,
                    master_seed=seed,
                )
                result = run_scenario(scen, design=design)
                finals.append(result.final_cost)
                ratios[sc.UPLINK].append(float(np.mean(result.uplink_delivered)))
                ratios[sc.DOWNLINK].append(float(np.mean(result.downlink_delivered)))
                ratios[sc.HUMAN_LINK].append(float(np.mean(result.humanlink_delivered)))
            points.append(
                SweepPoint(
                    attention=attention,
                    power_dbm=power,
                    final_costs=np.asarray(finals),
                    delivery_ratios={slot: float(np.mean(r)) for slot, r in ratios.items()},
                )
            )
    return SweepResult(base=base, powers_dbm=powers, seeds=seeds, points=tuple(points))
