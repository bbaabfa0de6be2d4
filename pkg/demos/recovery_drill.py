"""
Recovering from lost state
--------------------------

Wipe the HSS copy of the current pseudonym halfway through a run.  The next
attach is not recognised, the UE falls back to its anchor pseudonym and both
sides rebuild the chain from a fresh SQN.
"""

from vkpseudo import sim
from vkpseudo.scenario import parse_scenario

scenario = parse_scenario("""
scheme: variable
rounds: 20
pool: 20
seed: 3
faults:
  - {round: 8, fault: hss-loss}
  - {round: 14, fault: ue-mismatch}
""")

(row,), ((result,),) = sim.run_scenario(scenario, keep_results=True)
print("auth success rate:", row["auth_success_rate"])
print("recoveries       :", row["recovery_count"])
print("failures         :", result.failures)
print("anchors on wire  :", [hex(p.msin) for p in result.wire_anchors])
