"""Seeded end-to-end simulations and metrics output."""

from __future__ import annotations

import csv
import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from . import adversary as adv
from . import baseline
from . import protocol as P
from .errors import FailureCause, VkpError
from .identity import IdentityKind, Imsi, MSIN_MASK, Pseudonym, PseudonymChain
from .kset import AssistantPool, PoolSource, build_set
from .network import HssNode, MmeNode, Network, TranscriptEntry, UeNode
from .scenario import Scenario

log = logging.getLogger(__name__)

MCC, MNC = "460", "001"
HSS_ID, SN_ID = "hss-1", "sn-1"
MAX_ATTEMPTS = 4
TARGET = "ue-0"

METRIC_FIELDS = adv.CSV_FIELDS + ("auth_success_rate", "recovery_count", "imsi_exposure_count", "status")


@dataclass
class TrialResult:
    rounds_ok: int = 0
    rounds_total: int = 0
    recoveries: int = 0
    imsi_exposures: int = 0
    failures: dict[str, int] = field(default_factory=dict)
    log: adv.ObservationLog = field(default_factory=adv.ObservationLog)
    truth: list[Pseudonym] = field(default_factory=list)
    marked: adv.MarkedPool = field(default_factory=adv.MarkedPool)
    transcript: list[TranscriptEntry] = field(default_factory=list)
    wire_anchors: list[Pseudonym] = field(default_factory=list)

    def count_failure(self, cause) -> None:
        name = cause.name.lower() if isinstance(cause, FailureCause) else str(cause)
        self.failures[name] = self.failures.get(name, 0) + 1


def _provision(rng: np.random.Generator, taken: set) -> tuple[bytes, Imsi, int]:
    while True:
        imsi = Imsi(MCC, MNC, int(rng.integers(0, MSIN_MASK + 1)))
        if imsi not in taken:
            taken.add(imsi)
            return rng.bytes(16), imsi, int(rng.integers(1, 1 << 32))


class VariableWorld:
    """Subscribers attaching through one MME to one HSS with shared pseudonyms.

    Besides the ``subscribers`` simulated UEs, the HSS holds ``pool`` background
    subscribers that re-authenticate off-stage once per round; they supply the
    assistant identities.  The first ``round(marked_fraction * pool)`` of them
    belong to the adversary, who therefore recognises their pseudonyms.
    """

    def __init__(self, subscribers: int, k: int, pool: int, marked_fraction: float, seed_seq: np.random.SeedSequence):
        s_prov, s_hss, s_adv, *s_ues = seed_seq.spawn(3 + subscribers)
        prov = np.random.default_rng(s_prov)
        self.k = k
        self.adv_rng = np.random.default_rng(s_adv)
        self.net = Network()
        self.hss = P.HssState(HSS_ID, known_sn_ids={SN_ID})
        self.hss_node = HssNode(HSS_ID, self.hss, self.net, np.random.default_rng(s_hss), pool)
        self.mme_node = MmeNode(SN_ID, P.MmeState(SN_ID, hss_ids={HSS_ID}), HSS_ID, self.net)
        taken: set = set()
        self.ues: list[UeNode] = []
        for i in range(subscribers):
            key, imsi, sqn = _provision(prov, taken)
            ue_state, _ = P.new_subscriber(i, key, imsi, sqn, self.hss, HSS_ID)
            ue_state.sn_id = SN_ID
            self.ues.append(UeNode(f"ue-{i}", ue_state, SN_ID, self.net, np.random.default_rng(s_ues[i])))
        self.background: list[int] = []
        for j in range(pool):
            key, imsi, sqn = _provision(prov, taken)
            sub_id = subscribers + j
            sub = self.hss.register(sub_id, PseudonymChain(key=key, imsi=imsi, sqn_imsi=sqn))
            sub.chain.activate()
            self.hss.reindex(sub_id)
            self.background.append(sub_id)
        self.adversary_ids = self.background[: int(round(marked_fraction * pool))]
        self.imsis = {im.as_pseudonym() for im in taken}

        self.result = TrialResult()
        self._txn = itertools.count(1)
        self._captured: P.AuthChallenge | None = None
        self._replay_armed = False
        self._tamper_armed = False
        self._mark_adversary_identities()
        self.net.taps.append(self._tap)
        self.net.interceptors.append(self._intercept)

    def _mark_adversary_identities(self) -> None:
        for sid in self.adversary_ids:
            self.result.marked.marked.add(self.hss.subscribers[sid].chain.current)

    def _tap(self, env) -> None:
        msg = env.msg
        if isinstance(msg, P.AttachRequest):
            if any(m in self.imsis for m in msg.kset.members):
                self.result.imsi_exposures += 1
            if env.src == TARGET:
                adv.observe(self.result.log, msg.kset.to_wire(), env.time)
                live = msg.kset.live
                self.result.truth.append(live)
                if live.kind is IdentityKind.ANCHOR:
                    self.result.wire_anchors.append(live)
                if self._replay_armed and self._captured is not None:
                    self._replay_armed = False
                    old = self._captured
                    forged = P.AuthChallenge(msg.txn, old.rand, old.auth, old.ksi_asme)
                    self.net.send("adversary", TARGET, forged, delay=1)
        elif isinstance(msg, P.AuthChallenge) and env.dst == TARGET and env.src != "adversary":
            self._captured = msg

    def _intercept(self, env):
        msg = env.msg
        if self._tamper_armed and env.dst == TARGET and isinstance(msg, P.AuthChallenge):
            self._tamper_armed = False
            mac = bytes([msg.auth.mac[0] ^ 0x01]) + msg.auth.mac[1:]
            return P.AuthChallenge(msg.txn, msg.rand, P.AuthToken(msg.auth.concealed_sqn, msg.auth.amf, mac), msg.ksi_asme)
        return msg

    def inject_fault(self, fault: str) -> None:
        target = self.ues[0].state
        if fault == "hss-loss":
            self.hss.lose_pseudonym(0)
        elif fault == "ue-mismatch":
            cur = target.chain.current
            if cur is not None:
                target.chain.current = Pseudonym(cur.mcc, cur.mnc, cur.msin ^ 1, IdentityKind.SHARED)
        elif fault == "replay":
            self._replay_armed = True
        elif fault == "tamper":
            self._tamper_armed = True
        else:
            raise ValueError(f"unknown fault {fault!r}")

    def attach(self, i: int) -> bool:
        node = self.ues[i]
        for _ in range(MAX_ATTEMPTS):
            via_anchor = node.state.recovery_mode
            node.start_attach(self.k, next(self._txn))
            self.net.run()
            if node.outcome == "success":
                if via_anchor:
                    self.result.recoveries += 1
                return True
            self.result.count_failure(node.outcome)
            if node.outcome is FailureCause.ANCHOR_MISMATCH:
                return False
        return False

    def run_round(self, r: int, faults=()) -> None:
        for f in faults:
            self.inject_fault(f)
        for i in range(len(self.ues)):
            ok = self.attach(i)
            self.result.rounds_total += 1
            self.result.rounds_ok += ok
        for sid in self.background:
            self.hss.subscribers[sid].chain.next_pseudonym()
            self.hss.reindex(sid)
        self._mark_adversary_identities()
        self.net.advance_to(self.net.now + 10)

    def in_sync(self) -> bool:
        for i, node in enumerate(self.ues):
            ue_chain = node.state.chain
            hss_chain = self.hss.subscribers[i].chain
            if ue_chain.current != hss_chain.current or ue_chain.index != hss_chain.index:
                return False
            if ue_chain.sqn_imsi != hss_chain.sqn_imsi or ue_chain.sqn_p0 != hss_chain.sqn_p0:
                return False
            if ue_chain.active and self.hss.lookup(ue_chain.current) is None:
                return False
        return True


class BaselineWorld:
    """The basic scheme: each UE always sends its IMSI, hidden among other subscribers' IMSIs."""

    def __init__(self, subscribers: int, k: int, pool: int, marked_fraction: float, seed_seq: np.random.SeedSequence):
        s_prov, s_srv, *s_ues = seed_seq.spawn(2 + subscribers)
        prov = np.random.default_rng(s_prov)
        self.k = k
        self.pool = pool
        self.srv_rng = np.random.default_rng(s_srv)
        self.ue_rngs = [np.random.default_rng(s) for s in s_ues]
        taken: set = set()
        self.users = []
        self.key_db: dict[Pseudonym, bytes] = {}
        for _ in range(subscribers + pool):
            key, imsi, _sqn = _provision(prov, taken)
            ident = imsi.as_pseudonym()
            self.key_db[ident] = key
            self.users.append((ident, key))
        self.ues = self.users[:subscribers]
        self.directory = [ident for ident, _ in self.users[subscribers:]]
        n_marked = int(round(marked_fraction * pool))
        self.result = TrialResult()
        self.result.marked.marked.update(self.directory[:n_marked])
        self.now = 0

    def _record(self, src, dst, kind, payload: bytes) -> None:
        self.result.transcript.append(TranscriptEntry(self.now, src, dst, kind, payload))
        self.now += 1

    def attach(self, i: int) -> bool:
        ident, key = self.ues[i]
        others = [p for p in self.directory + [u for u, _ in self.ues] if p != ident]
        rng = self.ue_rngs[i]
        picks = rng.choice(len(others), size=min(self.pool, len(others)), replace=False)
        pool = AssistantPool([others[int(j)] for j in picks], PoolSource.HSS)
        kset = build_set(ident, pool, self.k, rng)
        name = f"ue-{i}"
        self.result.imsi_exposures += 1
        if name == TARGET:
            adv.observe(self.result.log, kset.to_wire(), self.now)
            self.result.truth.append(ident)
        try:
            s = baseline.run_session(ident, key, kset, self.key_db, rng)
        except VkpError as exc:
            self.result.count_failure(getattr(exc, "cause", type(exc).__name__))
            return False
        self._record(name, "server", "BaselineRequest", b"")
        self._record("server", name, "BaselineChallenge", s.n1)
        self._record(name, "server", "BaselineResponse", kset.to_wire() + s.n2 + s.m1)
        self._record("server", name, "BaselineConfirm", s.m2)
        return True

    def run_round(self, r: int, faults=()) -> None:
        for i in range(len(self.ues)):
            ok = self.attach(i)
            self.result.rounds_total += 1
            self.result.rounds_ok += ok


def make_world(scheme: str, subscribers: int, k: int, pool: int, marked_fraction: float, seed_seq):
    cls = VariableWorld if scheme == "variable" else BaselineWorld
    return cls(subscribers, k, pool, marked_fraction, seed_seq)


def run_trial(s: Scenario, seed_seq: np.random.SeedSequence) -> TrialResult:
    """One simulation of a single-valued scenario (see :meth:`Scenario.expand`)."""
    world = make_world(s.scheme, s.subscribers, s.k[0], s.pool, s.marked_fraction[0], seed_seq)
    by_round: dict[int, list[str]] = {}
    for f in s.faults:
        by_round.setdefault(f.round, []).append(f.fault)
    for r in range(s.rounds):
        world.run_round(r, by_round.get(r, ()))
    res = world.result
    if isinstance(world, VariableWorld):
        res.transcript = world.net.transcript
    return res


def _attack_outcome(res: TrialResult, attack: str, rng: np.random.Generator) -> tuple[bool, int]:
    if not res.log.records:
        return False, 0
    if attack == "intersection":
        cand = adv.linked_candidates(res.log)
    else:
        cand = adv.mark_attack(res.log.records[-1][1], res.marked)
    p = adv.guess_probability(cand, res.truth[-1])
    return bool(rng.random() < p), len(cand)


def _fmt_count(x: float):
    return int(x) if float(x).is_integer() else x


def run_combination(s: Scenario, seed_seq: np.random.SeedSequence) -> tuple[dict, list[TrialResult]]:
    trial_seeds = seed_seq.spawn(s.trials)
    guess_rng = np.random.default_rng(seed_seq.spawn(1)[0])
    results, wins, sizes = [], 0, []
    for ts in trial_seeds:
        res = run_trial(s, ts)
        results.append(res)
        win, size = _attack_outcome(res, s.attack, guess_rng)
        wins += win
        sizes.append(size)
    lo, hi = adv.wilson_interval(wins, s.trials)
    total = sum(r.rounds_total for r in results)
    row = {
        "scheme": s.scheme,
        "attack": s.attack,
        "k": s.k[0],
        "pool": s.pool,
        "marked_fraction": s.marked_fraction[0],
        "rounds": s.rounds,
        "trials": s.trials,
        "success_rate": wins / s.trials,
        "ci_low": lo,
        "ci_high": hi,
        "mean_candidate_size": float(np.mean(sizes)),
        "auth_success_rate": sum(r.rounds_ok for r in results) / total,
        "recovery_count": _fmt_count(sum(r.recoveries for r in results) / s.trials),
        "imsi_exposure_count": _fmt_count(sum(r.imsi_exposures for r in results) / s.trials),
        "status": "ok",
    }
    return row, results


def _failed_row(s: Scenario, exc: Exception) -> dict:
    row = {name: "" for name in METRIC_FIELDS}
    row.update(scheme=s.scheme, attack=s.attack, k=s.k[0], pool=s.pool, marked_fraction=s.marked_fraction[0],
               rounds=s.rounds, trials=s.trials, status=f"error: {type(exc).__name__}: {exc}")
    return row


def run_scenario(s: Scenario, keep_results: bool = False):
    """Metrics rows, one per (k, marked_fraction) combination.

    Seeds split as scenario seed -> combination -> trial -> actor.  A module
    error aborts only its own combination and is reported in ``status``.
    With ``keep_results`` the per-trial results are returned as well.
    """
    combos = s.expand()
    seeds = np.random.SeedSequence(s.seed).spawn(len(combos))
    rows, kept = [], []
    for combo, seq in zip(combos, seeds):
        try:
            row, results = run_combination(combo, seq)
        except VkpError as exc:
            log.warning("combination k=%s marked=%s failed: %s", combo.k, combo.marked_fraction, exc)
            row, results = _failed_row(combo, exc), []
        rows.append(row)
        kept.append(results)
    return (rows, kept) if keep_results else rows


def emit_metrics(rows, path, fields=METRIC_FIELDS) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(fields))
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def read_metrics(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def emit_transcript(transcript, path) -> None:
    with open(path, "w") as fh:
        for entry in transcript:
            fh.write(entry.format() + "\n")


def estimate_rows(scheme: str, attack: str, ks, marked, pool: int, rounds: int, trials: int, seed: int) -> list[dict]:
    rows = []
    seqs = iter(np.random.SeedSequence(seed).spawn(len(ks) * len(marked)))
    for k, m in itertools.product(ks, marked):
        sub_seed = int(next(seqs).generate_state(1, np.uint64)[0])
        est = adv.estimate_success(scheme, attack, k, pool, m, rounds, trials, sub_seed)
        rows.append(est.to_row())
    return rows


