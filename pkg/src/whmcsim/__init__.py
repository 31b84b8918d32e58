"""Deterministic cart-pole testbed for wireless human-machine collaboration.

A machine LQR loop and a modeled (or live) human operator share control of a
cart-pole plant across three lossy wireless links.  Every run is a pure
function of (scenario, master seed); results carry per-layer quality-of-
collaboration metrics.

Batch entry points live here; ``whmcsim.cli`` adds the command-line front
end and ``whmcsim.service`` the live WebSocket session server.
"""

from .control import (
    HOLD_LAST,
    LOSS_POLICY_KINDS,
    ZERO_INPUT,
    LinearModel,
    LossPolicy,
    LqrDesign,
    NumericsError,
    dare_residual,
    design_lqr,
    discretize_zoh,
    linearize_upright,
    lqr_gain,
    machine_command,
    solve_dare,
)
from .dynamics import (
    ATTACH_WEIGHT,
    REMOVE_WEIGHT,
    DisturbanceEvent,
    InvalidStateError,
    PlantParams,
    PlantState,
    apply_event,
    derivative,
    rk4_step,
    total_energy,
)
from .human import (
    ACTION_FORCE,
    ACTION_NONE,
    ACTION_REMOVE_WEIGHT,
    NO_ACTION,
    HumanAction,
    HumanObservation,
    HumanParams,
    HumanState,
    LoggedInput,
    ProtocolError,
    attention_transition,
    human_step,
    initial_human_state,
    live_input_adapter,
    observe,
    replay_schedule,
)
from .orchestrator import (
    AgentObservations,
    ComparisonResult,
    FullViews,
    LinkQoC,
    MachineObservation,
    QoCReport,
    RunResult,
    Simulation,
    StepRecord,
    SweepPoint,
    SweepResult,
    arbitrate,
    compare_decision_makers,
    observation_filter,
    qoc_report,
    replay_from_log,
    run_scenario,
    snr_sweep,
    step_cost,
)
from .scenario import (
    DECISION_MAKERS,
    DOWNLINK,
    HUMAN_DOMINATED,
    HUMAN_LINK,
    HUMAN_ONLY,
    INFO_STRUCTURES,
    LINK_SLOTS,
    MACHINE_DOMINATED,
    MACHINE_ONLY,
    PRESET_DESCRIPTIONS,
    SYMBIOSIS,
    TOPOLOGIES,
    UPLINK,
    WHMC,
    ConfigurationError,
    Links,
    Scenario,
    load_scenario,
    parse_scenario,
    preset,
    preset_names,
    serialize_scenario,
)
from .streams import derive_seed, make_stream
from .tables import (
    COMPARE_COLUMNS,
    COMPARE_MEAN_COLUMNS,
    RUN_COLUMNS,
    SWEEP_COLUMNS,
    validate_table,
    write_comparison_tables,
    write_run_table,
    write_sweep_table,
)
from .wireless import (
    LinkChannel,
    LinkConfig,
    PacketOutcome,
    analytic_outage,
    average_gain,
    fading_sample,
    fading_samples,
    is_delivered,
    mean_snr,
    snr_threshold,
    to_db,
    transmit,
)

__all__ = [
    # plant
    "ATTACH_WEIGHT",
    "REMOVE_WEIGHT",
    "DisturbanceEvent",
    "InvalidStateError",
    "PlantParams",
    "PlantState",
    "apply_event",
    "derivative",
    "rk4_step",
    "total_energy",
    # control
    "HOLD_LAST",
    "LOSS_POLICY_KINDS",
    "ZERO_INPUT",
    "LinearModel",
    "LossPolicy",
    "LqrDesign",
    "NumericsError",
    "dare_residual",
    "design_lqr",
    "discretize_zoh",
    "linearize_upright",
    "lqr_gain",
    "machine_command",
    "solve_dare",
    # wireless
    "LinkChannel",
    "LinkConfig",
    "PacketOutcome",
    "analytic_outage",
    "average_gain",
    "fading_sample",
    "fading_samples",
    "is_delivered",
    "mean_snr",
    "snr_threshold",
    "to_db",
    "transmit",
    # rng streams
    "derive_seed",
    "make_stream",
    # human operator
    "ACTION_FORCE",
    "ACTION_NONE",
    "ACTION_REMOVE_WEIGHT",
    "NO_ACTION",
    "HumanAction",
    "HumanObservation",
    "HumanParams",
    "HumanState",
    "LoggedInput",
    "ProtocolError",
    "attention_transition",
    "human_step",
    "initial_human_state",
    "live_input_adapter",
    "observe",
    "replay_schedule",
    # scenarios
    "DECISION_MAKERS",
    "DOWNLINK",
    "HUMAN_DOMINATED",
    "HUMAN_LINK",
    "HUMAN_ONLY",
    "INFO_STRUCTURES",
    "LINK_SLOTS",
    "MACHINE_DOMINATED",
    "MACHINE_ONLY",
    "PRESET_DESCRIPTIONS",
    "SYMBIOSIS",
    "TOPOLOGIES",
    "UPLINK",
    "WHMC",
    "ConfigurationError",
    "Links",
    "Scenario",
    "load_scenario",
    "parse_scenario",
    "preset",
    "preset_names",
    "serialize_scenario",
    # engine
    "AgentObservations",
    "ComparisonResult",
    "FullViews",
    "LinkQoC",
    "MachineObservation",
    "QoCReport",
    "RunResult",
    "Simulation",
    "StepRecord",
    "SweepPoint",
    "SweepResult",
    "arbitrate",
    "compare_decision_makers",
    "observation_filter",
    "qoc_report",
    "replay_from_log",
    "run_scenario",
    "snr_sweep",
    "step_cost",
    # tables
    "COMPARE_COLUMNS",
    "COMPARE_MEAN_COLUMNS",
    "RUN_COLUMNS",
    "SWEEP_COLUMNS",
    "validate_table",
    "write_comparison_tables",
    "write_run_table",
    "write_sweep_table",
]

__version__ = "0.1.0"
