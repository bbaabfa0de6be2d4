"""
Brute force at toy scale
------------------------

Shrink the MSIN to 8 bits.  Without the key, every one of the 256 MSINs is
consistent with an observed pseudonym, and observed pseudonyms of one MSIN
are spread evenly over all 256 values.
"""

import numpy as np

from vkpseudo.adversary import brute_force_candidates, toy_observations

obs = toy_observations(msin=0x5A, bits=8, n=4096, seed=0)
counts = np.bincount(obs, minlength=256)
print("min/max count per value:", counts.min(), counts.max(), "(mean 16)")
print("candidates for first observation:", len(brute_force_candidates(int(obs[0]), 8)))
