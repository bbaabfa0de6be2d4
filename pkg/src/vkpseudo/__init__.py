"""Variable k-pseudonym anonymous access authentication.

Shared pseudonyms derived from a ZUC keystream let a UE and its HSS rotate
the identity sent at attach time without exchanging it, so a k-anonymity set
cannot be narrowed by linking successive attaches.
"""

from .adversary import (
    CandidateSet,
    MarkedPool,
    ObservationLog,
    estimate_success,
    intersection_attack,
    mark_attack,
    observe,
)
from .crypto import hash, hmac, hmac40, milenage, prng_expand
from .identity import (
    IdentityKind,
    Imsi,
    Pseudonym,
    PseudonymChain,
    anchor_pseudonym,
    decode_identity,
    derive_iv,
    encode_identity,
)
from .kset import AssistantPool, KSet, build_set, hss_assign_assistants, self_generate_assistants
from .scenario import Scenario, load_scenario
from .sim import emit_metrics, emit_transcript, run_scenario
from .zuc import ZucState, zuc_init, zuc_keystream, zuc_next_word

__version__ = "0.1.0"
