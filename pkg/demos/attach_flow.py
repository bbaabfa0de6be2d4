"""
One attach on the wire
----------------------

Run a single UE through the UE -> MME -> HSS exchange on the discrete-event
network and dump the transcript.  The first attach sends the IMSI hidden in a
self-generated k-set; the second already uses a shared pseudonym.
"""

import numpy as np

from vkpseudo import sim

world = sim.make_world("variable", subscribers=1, k=4, pool=10, marked_fraction=0.0,
                       seed_seq=np.random.SeedSequence(7))
world.run_round(0)
world.run_round(1)

for entry in world.net.transcript:
    line = entry.format()
    print(line[:110] + ("..." if len(line) > 110 else ""))

print()
for t, members in world.result.log.records:
    print(f"t={t:>4.0f}", [hex(m.msin) for m in members])
print("live identities:", [(p.kind.value, hex(p.msin)) for p in world.result.truth])
