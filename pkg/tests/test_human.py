"""Operator model tests: attention chain statistics, noticing, interventions."""

import math

import numpy as np
import pytest

from whmcsim.human import (
    ACTION_FORCE,
    ACTION_NONE,
    ACTION_REMOVE_WEIGHT,
    ALWAYS_DISTRACTED,
    ALWAYS_ENGAGED,
    DISTRACTED,
    ENGAGED,
    MARKOV,
    HumanAction,
    HumanObservation,
    HumanParams,
    LoggedInput,
    ProtocolError,
    attention_transition,
    human_step,
    initial_human_state,
    live_input_adapter,
    observe,
    replay_schedule,
)

DT = 0.01


def view(t, theta=0.0, weight=False, reco=None):
    return HumanObservation(
        time=t, x=0.0, x_dot=0.0, theta=theta, theta_dot=0.0,
        weight_present=weight, machine_recommendation=reco,
    )


def test_pinned_attention_modes():
    rng = np.random.default_rng(0)
    engaged = initial_human_state(HumanParams(attention_mode=ALWAYS_ENGAGED))
    distracted = initial_human_state(HumanParams(attention_mode=ALWAYS_DISTRACTED))
    assert engaged.attention == ENGAGED
    assert distracted.attention == DISTRACTED
    for _ in range(100):
        assert attention_transition(engaged, HumanParams(), DT, rng) == ENGAGED
        assert (
            attention_transition(distracted, HumanParams(attention_mode=ALWAYS_DISTRACTED), DT, rng)
            == DISTRACTED
        )


def test_markov_zero_rates_are_absorbing():
    params = HumanParams(
        attention_mode=MARKOV, p_engaged_to_distracted=0.0, p_distracted_to_engaged=0.0
    )
    state = initial_human_state(params)
    rng = np.random.default_rng(1)
    for _ in range(1000):
        attention_transition(state, params, DT, rng)
    assert state.attention == ENGAGED


def test_markov_long_run_occupancy():
    # Stationary engaged fraction of the two-state chain is
    # p_de / (p_ed + p_de) independent of dt.
    params = HumanParams(
        attention_mode=MARKOV, p_engaged_to_distracted=0.2, p_distracted_to_engaged=0.6
    )
    state = initial_human_state(params)
    rng = np.random.default_rng(42)
    n = 1_000_000
    engaged_count = 0
    for _ in range(n):
        engaged_count += attention_transition(state, params, DT, rng) == ENGAGED
    target = 0.6 / 0.8
    # Samples are correlated: the chain's integrated autocorrelation time is
    # about 2/(flip_sum) steps with flip_sum ~ (0.2 + 0.6) * dt, inflating
    # the binomial variance accordingly.
    tau = 2.0 / (0.8 * DT)
    sigma = math.sqrt(target * (1 - target) * tau / n)
    assert abs(engaged_count / n - target) < 3 * sigma


def test_flip_probability_matches_rate():
    # Empirical one-step flip frequency from engaged equals 1 - exp(-rate dt).
    params = HumanParams(attention_mode=MARKOV, p_engaged_to_distracted=1.0)
    rng = np.random.default_rng(3)
    n = 100_000
    flips = 0
    for _ in range(n):
        state = initial_human_state(params)
        flips += attention_transition(state, params, DT, rng) == DISTRACTED
    p = -math.expm1(-1.0 * DT)
    assert abs(flips / n - p) < 4 * math.sqrt(p * (1 - p) / n)


def drive(params, frames, force_authority=False, seed=0):
    """Run the operator over (t, observation-or-None) pairs; return actions."""
    state = initial_human_state(params)
    rng = np.random.default_rng(seed)
    actions = []
    for t, frame in frames:
        attention_transition(state, params, DT, rng)
        observe(state, params, frame)
        actions.append((t, human_step(state, params, t, rng, force_authority)))
    return state, actions


def periods(duration):
    return [round(k * DT, 10) for k in range(int(duration / DT))]


def test_intervention_timing_on_a_clean_link():
    # Weight visible from t = 5.0; reaction delay 0.25 and decision grid 0.3
    # put the remove at the first instant >= 5.25, which is 5.4.
    params = HumanParams()
    frames = [(t, view(t, weight=(t >= 5.0))) for t in periods(8.0)]
    _, actions = drive(params, frames)
    removes = [(t, a) for t, a in actions if a.kind == ACTION_REMOVE_WEIGHT]
    assert len(removes) == 1
    assert removes[0][0] == pytest.approx(5.4)


def test_intervention_fires_exactly_once_per_attachment():
    params = HumanParams()
    # Weight stays visible long after the remove is sent; no re-fire.
    frames = [(t, view(t, weight=(t >= 1.0))) for t in periods(20.0)]
    _, actions = drive(params, frames)
    assert sum(a.kind == ACTION_REMOVE_WEIGHT for _, a in actions) == 1


def test_rearm_after_weight_disappears():
    params = HumanParams()
    # First attachment, removal confirmed on the display, second attachment.
    frames = []
    for t in periods(12.0):
        weight = (1.0 <= t < 3.0) or (t >= 8.0)
        frames.append((t, view(t, weight=weight)))
    _, actions = drive(params, frames)
    removes = [t for t, a in actions if a.kind == ACTION_REMOVE_WEIGHT]
    assert len(removes) == 2
    assert removes[0] < 3.0 <= 8.0 < removes[1]


def test_distracted_operator_never_acts():
    params = HumanParams(attention_mode=ALWAYS_DISTRACTED)
    frames = [(t, view(t, theta=0.5, weight=True)) for t in periods(10.0)]
    state, actions = drive(params, frames, force_authority=True)
    assert all(a.kind == ACTION_NONE for _, a in actions)
    assert state.weight_noticed_at is None
    assert not state.intervention_sent


def test_lost_frames_delay_noticing():
    # Nothing delivered until t = 6.0 even though the weight attached at 5.0;
    # the decision grid then puts the remove at 6.3.
    params = HumanParams()
    frames = [(t, view(t, weight=True) if t >= 6.0 else None) for t in periods(8.0)]
    state, actions = drive(params, frames)
    removes = [t for t, a in actions if a.kind == ACTION_REMOVE_WEIGHT]
    assert removes == [pytest.approx(6.3)]
    assert state.weight_noticed_at == pytest.approx(6.0)


def test_force_commands_follow_displayed_angle_with_deadband():
    params = HumanParams()
    cases = [
        (0.2, -params.human_force_level),
        (-0.2, params.human_force_level),
        (0.01, 0.0),
        (-0.04, 0.0),
    ]
    for theta, expected in cases:
        frames = [(t, view(t, theta=theta)) for t in periods(0.5)]
        _, actions = drive(params, frames, force_authority=True)
        forces = [a for _, a in actions if a.kind == ACTION_FORCE]
        assert forces, f"no force decision for theta={theta}"
        assert all(a.force == expected for a in forces)


def test_force_decisions_happen_once_per_decision_period():
    params = HumanParams()
    frames = [(t, view(t, theta=0.3)) for t in periods(3.0)]
    _, actions = drive(params, frames, force_authority=True)
    decision_times = [t for t, a in actions if a.kind != ACTION_NONE]
    assert decision_times == pytest.approx([0.3 * i for i in range(len(decision_times))])
    gaps = np.diff(decision_times)
    assert np.all(gaps > params.human_control_period - 1e-9)


def test_no_force_before_first_delivered_view():
    params = HumanParams()
    frames = [(t, None) for t in periods(2.0)]
    _, actions = drive(params, frames, force_authority=True)
    assert all(a.kind == ACTION_NONE for _, a in actions)


def test_intervention_beats_force_decision_then_force_resumes():
    params = HumanParams()
    frames = [(t, view(t, theta=0.4, weight=(t >= 0.0))) for t in periods(2.0)]
    _, actions = drive(params, frames, force_authority=True)
    kinds = [a.kind for _, a in actions if a.kind != ACTION_NONE]
    # Weight visible at t=0, noticed at 0: remove eligible at >= 0.25, so the
    # t=0 decision is a force command and the t=0.3 one the intervention.
    assert kinds[0] == ACTION_FORCE
    assert kinds[1] == ACTION_REMOVE_WEIGHT
    assert all(k == ACTION_FORCE for k in kinds[2:])


def test_reaction_jitter_is_deterministic_per_seed():
    params = HumanParams(reaction_jitter=0.2)
    frames = [(t, view(t, weight=(t >= 1.0))) for t in periods(4.0)]
    _, a1 = drive(params, frames, seed=9)
    _, a2 = drive(params, frames, seed=9)
    assert [(t, a.kind) for t, a in a1] == [(t, a.kind) for t, a in a2]
    times1 = [t for t, a in a1 if a.kind == ACTION_REMOVE_WEIGHT]
    assert len(times1) == 1
    # Jitter is symmetric around the base delay.
    assert times1[0] >= 1.0 + params.reaction_delay - params.reaction_jitter - 1e-9


def test_live_input_adapter():
    assert live_input_adapter({"action": "remove_weight"}, 60.0).kind == ACTION_REMOVE_WEIGHT
    force = live_input_adapter({"action": "force", "value": -500.0}, 60.0)
    assert force.kind == ACTION_FORCE and force.force == -60.0
    inside = live_input_adapter({"action": "force", "value": 12.5}, 60.0)
    assert inside.force == 12.5
    for bad in (
        {"action": "detonate"},
        {"action": "force"},
        {"action": "force", "value": "big"},
        {"action": "force", "value": math.nan},
        {"action": "force", "value": True},
        "remove_weight",
    ):
        with pytest.raises(ProtocolError):
            live_input_adapter(bad, 60.0)


def test_replay_schedule_groups_by_period():
    log = [
        LoggedInput(period=12, kind=ACTION_REMOVE_WEIGHT),
        LoggedInput(period=12, kind=ACTION_FORCE, force=30.0),
        LoggedInput(period=40, kind=ACTION_FORCE, force=-60.0),
    ]
    schedule = replay_schedule(log)
    assert set(schedule) == {12, 40}
    assert [a.kind for a in schedule[12]] == [ACTION_REMOVE_WEIGHT, ACTION_FORCE]
    assert schedule[40][0].force == -60.0


def test_params_validation():
    with pytest.raises(ValueError):
        HumanParams(attention_mode="sometimes")
    with pytest.raises(ValueError):
        HumanParams(human_control_period=0.0)
    with pytest.raises(ValueError):
        HumanParams(reaction_delay=-0.1)
    with pytest.raises(ValueError):
        HumanAction("wave")
