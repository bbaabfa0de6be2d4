"""Passive eavesdropper: intersection and mark attacks on observed k-sets.

The adversary is granted oracle linkage: every set in an
:class:`ObservationLog` is known to come from the same target UE.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .identity import IdentityKind, Imsi, MSIN_MASK, Pseudonym, PseudonymChain
from .kset import KSet

SCHEMES = ("static-baseline", "variable")
ATTACKS = ("intersection", "mark")

CSV_FIELDS = (
    "scheme",
    "attack",
    "k",
    "pool",
    "marked_fraction",
    "rounds",
    "trials",
    "success_rate",
    "ci_low",
    "ci_high",
    "mean_candidate_size",
)


@dataclass
class ObservationLog:
    records: list[tuple[float, tuple[Pseudonym, ...]]] = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def sets(self) -> list[frozenset]:
        return [frozenset(members) for _, members in self.records]


@dataclass
class MarkedPool:
    marked: set[Pseudonym] = field(default_factory=set)


@dataclass(frozen=True)
class CandidateSet:
    candidates: frozenset
    round: tuple[int, ...] = ()

    def __len__(self):
        return len(self.candidates)

    def __contains__(self, item):
        return item in self.candidates


def observe(log: ObservationLog, kset: KSet | bytes, t: float) -> ObservationLog:
    if isinstance(kset, (bytes, bytearray)):
        kset = KSet.from_wire(bytes(kset))
    # strip builder-side tags: the wire carries no kind
    members = tuple(m.with_kind(IdentityKind.ASSISTANT) for m in kset.members)
    log.records.append((t, members))
    return log


def intersection_attack(log: ObservationLog) -> CandidateSet:
    if not log.records:
        raise ValueError("intersection attack needs at least one observation")
    sets = log.sets()
    common = frozenset.intersection(*sets)
    return CandidateSet(common, tuple(range(len(sets))))


def mark_attack(observed: KSet | frozenset | tuple, pool: MarkedPool) -> CandidateSet:
    members = observed.members if isinstance(observed, KSet) else observed
    return CandidateSet(frozenset(members) - pool.marked)


def linked_candidates(log: ObservationLog) -> CandidateSet:
    """The adversary's working hypothesis for the identity in the latest set.

    The intersection of every linked set is used when it still overlaps the
    latest set; once it no longer does (the identity was renewed) the linkage
    carries no information and only the latest set remains.
    """
    inter = intersection_attack(log)
    latest = frozenset(log.records[-1][1])
    narrowed = inter.candidates & latest
    if narrowed:
        return CandidateSet(narrowed, inter.round)
    return CandidateSet(latest, (len(log) - 1,))


def guess_probability(candidates: CandidateSet, live: Pseudonym) -> float:
    """Chance that a uniform guess over ``candidates`` names ``live``."""
    if live not in candidates or not candidates.candidates:
        return 0.0
    return 1.0 / len(candidates)


def wilson_interval(successes: int, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    p = successes / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass
class AttackEstimate:
    scheme: str
    attack: str
    k: int
    pool: int
    marked_fraction: float
    rounds: int
    trials: int
    successes: np.ndarray  # (rounds,) correct-guess counts per round
    uniques: np.ndarray  # (rounds,) singleton-candidate-equals-live counts per round
    candidate_sizes: np.ndarray  # (trials, rounds)

    @property
    def success_rate(self) -> float:
        return float(self.successes[-1] / self.trials)

    @property
    def ci(self) -> tuple[float, float]:
        return wilson_interval(int(self.successes[-1]), self.trials)

    @property
    def per_round_success(self) -> np.ndarray:
        return self.successes / self.trials

    @property
    def per_round_unique(self) -> np.ndarray:
        return self.uniques / self.trials

    @property
    def mean_candidate_size(self) -> float:
        return float(self.candidate_sizes[:, -1].mean())

    def to_row(self) -> dict:
        lo, hi = self.ci
        return {
            "scheme": self.scheme,
            "attack": self.attack,
            "k": self.k,
            "pool": self.pool,
            "marked_fraction": self.marked_fraction,
            "rounds": self.rounds,
            "trials": self.trials,
            "success_rate": self.success_rate,
            "ci_low": lo,
            "ci_high": hi,
            "mean_candidate_size": self.mean_candidate_size,
        }


_MCC, _MNC = "460", "000"


def _random_identity(rng: np.random.Generator) -> Pseudonym:
    return Pseudonym(_MCC, _MNC, int(rng.integers(0, MSIN_MASK + 1)), IdentityKind.ASSISTANT)


def _pick_assistants(rng, pool: int, n_marked: int, k: int, marked_in_set: int | None) -> np.ndarray:
    if marked_in_set is None:
        return rng.choice(pool, size=k - 1, replace=False)
    marked = rng.choice(n_marked, size=marked_in_set, replace=False)
    clean = n_marked + rng.choice(pool - n_marked, size=k - 1 - marked_in_set, replace=False)
    return np.concatenate([marked, clean])


def _target_identities(scheme: str, rounds: int, rng: np.random.Generator) -> list[Pseudonym]:
    imsi = Imsi(_MCC, _MNC, int(rng.integers(0, MSIN_MASK + 1)))
    if scheme == "static-baseline":
        return [imsi.as_pseudonym()] * rounds
    lives = [imsi.as_pseudonym()]
    if rounds > 1:
        chain = PseudonymChain(key=rng.bytes(16), imsi=imsi, sqn_imsi=int(rng.integers(1, 1 << 32)))
        lives.append(chain.activate())
        while len(lives) < rounds:
            lives.append(chain.next_pseudonym())
    return lives


def estimate_success(
    scheme: str,
    attack: str,
    k: int,
    pool: int,
    marked_fraction: float,
    rounds: int,
    trials: int,
    seed: int,
    marked_in_set: int | None = None,
) -> AttackEstimate:
    """Monte Carlo estimate of the adversary's identification rate.

    Each trial follows one target UE for ``rounds`` attaches.  Under
    ``static-baseline`` the target always sends its IMSI and the assistant
    directory is a fixed set of ``pool`` identities.  Under ``variable`` the
    target moves along its real pseudonym chain and the directory holds other
    users' shared pseudonyms, which are renewed every round.  ``marked_fraction``
    of the directory is recognizable to the adversary; ``marked_in_set`` forces
    exactly that many marked assistants into every set.

    Per round the adversary forms its candidate set (linked intersection for
    ``intersection``, set minus marked for ``mark``) and guesses uniformly
    within it.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    if attack not in ATTACKS:
        raise ValueError(f"unknown attack {attack!r}")
    if trials < 1 or rounds < 1 or k < 1:
        raise ValueError("trials, rounds and k must be >= 1")
    if pool < k - 1:
        raise ValueError("pool smaller than k - 1")
    n_marked = int(round(marked_fraction * pool))
    if marked_in_set is not None:
        if not 0 <= marked_in_set <= k - 1:
            raise ValueError("marked_in_set must lie in [0, k-1]")
        if marked_in_set > n_marked or k - 1 - marked_in_set > pool - n_marked:
            raise ValueError("pool cannot supply the requested marked/unmarked split")

    children = np.random.SeedSequence(seed).spawn(trials)
    successes = np.zeros(rounds, dtype=np.int64)
    uniques = np.zeros(rounds, dtype=np.int64)
    sizes = np.zeros((trials, rounds), dtype=np.int64)

    for t, child in enumerate(children):
        rng = np.random.default_rng(child)
        lives = _target_identities(scheme, rounds, rng)
        directory: dict[int, Pseudonym] = {}
        log = ObservationLog()
        for r in range(rounds):
            if scheme == "variable":
                directory = {}  # other users renewed their pseudonyms
            picks = _pick_assistants(rng, pool, n_marked, k, marked_in_set)
            members = []
            marked = MarkedPool()
            for j in picks:
                j = int(j)
                if j not in directory:
                    directory[j] = _random_identity(rng)
                members.append(directory[j])
                if j < n_marked:
                    marked.marked.add(directory[j])
            members.insert(int(rng.integers(0, k)), lives[r])
            observe(log, KSet(tuple(members)), float(r))

            if attack == "intersection":
                cand = linked_candidates(log)
            else:
                cand = mark_attack(tuple(members), marked)
            p = guess_probability(cand, lives[r])
            sizes[t, r] = len(cand)
            successes[r] += rng.random() < p
            uniques[r] += p == 1.0
    return AttackEstimate(scheme, attack, k, pool, marked_fraction, rounds, trials, successes, uniques, sizes)


def two_proportion_z(successes_a: int, successes_b: int, n: int) -> float:
    """z statistic for rate_a - rate_b with equal sample sizes (pooled variance)."""
    p = (successes_a + successes_b) / (2 * n)
    se = math.sqrt(2 * p * (1 - p) / n)
    if se == 0:
        return 0.0
    return (successes_a - successes_b) / n / se


def toy_observations(msin: int, bits: int, n: int, seed: int) -> np.ndarray:
    """Observed ``bits``-wide toy pseudonyms of one MSIN under ``n`` unknown keys.

    Each observation comes from an independent chain (fresh random key and
    SQN); the toy keystream is the top ``bits`` of the 40-bit expansion.
    """
    rng = np.random.default_rng(seed)
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        chain = PseudonymChain(key=rng.bytes(16), imsi=Imsi(_MCC, _MNC, 0), sqn_imsi=int(rng.integers(0, 1 << 47)))
        chain.sqn_p0 = chain.sqn_imsi
        chain.start_epoch()
        ks = chain.expand_keystream_40() >> (40 - bits)
        out[i] = msin ^ ks
    return out


def brute_force_candidates(observed: int, bits: int) -> list[int]:
    """All toy MSINs consistent with one observed pseudonym when the key is unknown.

    A candidate MSIN m is consistent iff some keystream value maps it onto the
    observation; every keystream value is reachable, so the search keeps each m.
    """
    keystreams = range(1 << bits)
    return sorted({observed ^ ks for ks in keystreams})
