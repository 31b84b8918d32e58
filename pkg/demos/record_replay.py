"""
Every run is a replayable record
================================

Inject operator inputs from outside the scripted model (the same path a
live WebSocket session uses), capture the engine's input log, and replay
it.  The replay reproduces the final cost bit for bit, which is the
property that makes live sessions auditable offline.

Note the force command here is deliberately lost sometimes: external
inputs cross the simulated human link, so whether a command survives
depends on the same fading stream the scripted operator faces.
"""

from whmcsim import HumanAction, preset, replay_from_log, run_scenario
from whmcsim.human import ACTION_FORCE, ACTION_REMOVE_WEIGHT

# an impatient external operator: push left early, then clear the weight
# shortly after it lands (period 520 = t 5.2 s)
schedule = {
    100: [HumanAction(ACTION_FORCE, -40.0)],
    520: [HumanAction(ACTION_REMOVE_WEIGHT)],
    540: [HumanAction(ACTION_REMOVE_WEIGHT)],  # retry in case the first is lost
}

scenario = preset("case-study-whmc")
live = run_scenario(scenario, external_inputs=schedule)

print(f"live run: final cost {live.final_cost:.6f}")
print("engine input log (what actually reached the plant side):")
for item in live.input_log:
    label = f"{item.kind} {item.force:+.1f} N" if item.kind == ACTION_FORCE else item.kind
    delivered = bool(live.humanlink_delivered[item.period])
    print(f"  period {item.period:4d}  {label:24s} link {'ok' if delivered else 'LOST'}")

replayed = replay_from_log(scenario, list(live.input_log))
print(f"replayed:  final cost {replayed.final_cost:.6f}")
match = replayed.final_cost == live.final_cost
print("bit-exact match" if match else "MISMATCH (this should never print)")
