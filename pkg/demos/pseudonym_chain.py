"""
Shared pseudonyms
-----------------

A UE and its HSS each hold the same key and SQN.  Both sides derive the same
sequence of shared pseudonyms without exchanging anything, and only the MSIN
part of the identity changes.
"""

import numpy as np

from vkpseudo.identity import Imsi, PseudonymChain

rng = np.random.default_rng(1)
key = rng.bytes(16)
imsi = Imsi("460", "001", 0x0123456789)

ue = PseudonymChain(key=key, imsi=imsi, sqn_imsi=42)
hss = PseudonymChain(key=key, imsi=imsi, sqn_imsi=42)

print("IMSI   ", imsi.as_pseudonym())
ue.activate()
hss.activate()
print("anchor ", ue.anchor)
for i in range(5):
    print(f"P{ue.index}     ", ue.current, "same on HSS:", ue.current == hss.current)
    ue.next_pseudonym()
    hss.next_pseudonym()

# persisting and restoring a chain replays the keystream to the same point
restored = PseudonymChain.from_record(ue.to_record())
print("restored next matches:", restored.next_pseudonym() == ue.next_pseudonym())
