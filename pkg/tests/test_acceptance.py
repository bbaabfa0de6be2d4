"""Acceptance criteria 1-10, each at its stated tolerance.

Every test reports one PASS/FAIL line (also repeated in the terminal summary)
and then asserts, so a failing criterion also fails the run.
"""

import time

import numpy as np
from scipy import stats

from vkpseudo import baseline, crypto, sim
from vkpseudo import protocol as P
from vkpseudo.adversary import (
    MarkedPool,
    ObservationLog,
    brute_force_candidates,
    estimate_success,
    intersection_attack,
    mark_attack,
    observe,
    toy_observations,
    two_proportion_z,
)
from vkpseudo.errors import AuthenticationError, FailureCause
from vkpseudo.identity import IdentityKind, Imsi, Pseudonym
from vkpseudo.kset import AssistantPool, KSet, build_set
from vkpseudo.scenario import Fault, Scenario
from vkpseudo.vectors import run_all

from test_protocol import world as protocol_world

Z95 = stats.norm.ppf(0.95)


def named(*names):
    return tuple(Pseudonym("460", "001", 0 if n == "IMSI" else ord(n)) for n in names)


def test_criterion_01_conformance(report):
    results, elapsed = run_all()
    failed = [r.name for r in results if not r.passed]
    ok = not failed and elapsed < 1.0
    report(1, ok, f"{len(results) - len(failed)}/{len(results)} vectors in {elapsed:.3f}s (limit 1s)")
    assert ok, failed


def test_criterion_02_intersection_example(report):
    log = ObservationLog()
    observe(log, KSet(named("IMSI", "B", "C", "D")), 1.0)
    observe(log, KSet(named("IMSI", "B", "E", "F")), 2.0)
    two = intersection_attack(log).candidates
    observe(log, KSet(named("IMSI", "D", "G", "H")), 3.0)
    three = intersection_attack(log).candidates
    ok = two == frozenset(named("IMSI", "B")) and three == frozenset(named("IMSI"))
    report(2, ok, f"two sets -> {len(two)} candidates, three sets -> {len(three)}")
    assert ok


def test_criterion_03_mark_example(report):
    pool = [Pseudonym("460", "001", ord(c)) for c in "BCDEFGHIJKLMNOPQRSTU"]
    pool += [Pseudonym("460", "001", 1000 + i) for i in range(80)]
    assert len(pool) == 100
    observed = KSet(named("IMSI", "B", "C", "D"))
    # 20 of the 100 are marked: first with B, C but not D, then with all three
    bc = mark_attack(observed, MarkedPool(set(pool[:2] + pool[3:21])))
    bcd = mark_attack(observed, MarkedPool(set(pool[:20])))
    ok = bc.candidates == frozenset(named("IMSI", "D")) and bcd.candidates == frozenset(named("IMSI"))
    report(3, ok, f"B,C marked -> {len(bc)} candidates, B,C,D marked -> {len(bcd)}")
    assert ok


def test_criterion_04_synchrony(report):
    t0 = time.perf_counter()
    w = sim.make_world("variable", 10, 4, 100, 0.0, np.random.SeedSequence(404))
    divergences = 0
    for r in range(100):
        w.run_round(r)
        divergences += not w.in_sync()
    elapsed = time.perf_counter() - t0
    res = w.result
    ok = res.rounds_total == 1000 and res.rounds_ok == 1000 and not res.failures and divergences == 0 and elapsed < 30
    report(4, ok, f"{res.rounds_ok}/{res.rounds_total} auths, {divergences} divergences, "
                  f"failures={res.failures or 0}, {elapsed:.1f}s (limit 30s)")
    assert ok


def _recovery_run(fault: str, rounds_at):
    s = Scenario("variable", rounds=12, pool=20, seed=505,
                 faults=tuple(Fault(r, fault) for r in rounds_at))
    (row,), ((res,),) = sim.run_scenario(s, keep_results=True)
    return row, res


def test_criterion_05_recovery(report):
    details, ok = [], True
    for fault in ("hss-loss", "ue-mismatch"):
        row, res = _recovery_run(fault, [5])
        good = res.failures == {"identification": 1} and res.recoveries == 1 and row["auth_success_rate"] == 1.0
        ok &= good
        details.append(f"{fault}: failures={res.failures} recoveries={res.recoveries}")
    row, res = _recovery_run("hss-loss", [3, 7])
    anchors = res.wire_anchors
    distinct = len(anchors) == 2 and anchors[0] != anchors[1]
    ok &= distinct and res.recoveries == 2
    details.append(f"two recoveries -> {len(set(anchors))} distinct P0 on the wire")
    report(5, ok, "; ".join(details))
    assert ok


def test_criterion_06_attack_statistics(report):
    static = estimate_success("static-baseline", "intersection", 4, 100, 0.0, 10, 1000, seed=606)
    unique = static.per_round_unique[-1]
    var = estimate_success("variable", "intersection", 4, 100, 0.0, 10, 10_000, seed=607)
    rates = var.per_round_success
    worst = float(np.max(np.abs(rates - 0.25)))
    z = two_proportion_z(int(var.successes[-1]), int(var.successes[0]), var.trials)
    ok = unique >= 0.95 and worst <= 0.02 and z <= Z95
    report(6, ok, f"static unique@10={unique:.3f} (>=0.95); variable max|rate-1/4|={worst:.4f} (<=0.02), "
                  f"z(round10 vs round1)={z:.2f} (<= {Z95:.2f})")
    assert ok


def test_criterion_07_mark_bound(report):
    parts, ok = [], True
    for m in range(4):
        est = estimate_success("static-baseline", "mark", 4, 100, 0.2, 1, 10_000, seed=700 + m, marked_in_set=m)
        target = 1 / (4 - m)
        ok &= abs(est.success_rate - target) <= 0.02
        parts.append(f"m={m}: {est.success_rate:.4f} vs {target:.4f}")
    report(7, ok, ", ".join(parts))
    assert ok


def test_criterion_08_toy_anonymity(report):
    obs = toy_observations(0x5A, 8, 10_000, seed=808)
    counts = np.bincount(obs, minlength=256)
    p = stats.chisquare(counts).pvalue
    cands = brute_force_candidates(int(obs[0]), 8)
    ok = p > 0.01 and cands == list(range(256))
    report(8, ok, f"chi-square p={p:.3f} (>0.01), brute force keeps {len(cands)}/256 MSINs")
    assert ok


def _attach(ue, mme, hss, rng, txn, tamper=None):
    req = P.ue_initiate(ue, 2, rng, txn)
    fwd = P.mme_forward(mme, req)
    av = P.hss_generate_av(hss, *P.hss_identify(hss, fwd.kset, fwd.h0), fwd.sn_id, rng, txn)
    ch = P.mme_challenge(mme, txn, av)
    sent = tamper(ch) if tamper else ch
    try:
        res = P.ue_verify_challenge(ue, sent)
    except AuthenticationError as exc:
        hss.pending.pop(txn)
        mme.pending.pop(txn)
        return exc.cause, ch
    assert P.mme_verify_res(mme, txn, res)
    P.post_auth_update(ue, hss, txn)
    return "ok", ch


def test_criterion_09_replay_and_tamper(report):
    rng = np.random.default_rng(909)
    hss, mme, (ue,) = protocol_world(rng)
    n = 10_000
    replay_rejected = tamper_rejected = 0
    txn = 0
    for _ in range(n):
        txn += 1
        outcome, captured = _attach(ue, mme, hss, rng, txn)
        assert outcome == "ok"
        txn += 1
        outcome, _ = _attach(ue, mme, hss, rng, txn, tamper=lambda ch: captured)
        replay_rejected += outcome is FailureCause.SQN
        txn += 1
        bit = int(rng.integers(0, 64))

        def flip(ch, bit=bit):
            mac = bytearray(ch.auth.mac)
            mac[bit // 8] ^= 1 << (bit % 8)
            return P.AuthChallenge(ch.txn, ch.rand, P.AuthToken(ch.auth.concealed_sqn, ch.auth.amf, bytes(mac)), ch.ksi_asme)

        outcome, _ = _attach(ue, mme, hss, rng, txn, tamper=flip)
        tamper_rejected += outcome is FailureCause.MAC
    ok = replay_rejected == n and tamper_rejected == n
    report(9, ok, f"replays rejected {replay_rejected}/{n}, tampered MACs rejected {tamper_rejected}/{n}")
    assert ok


def test_criterion_10_baseline(report):
    rng = np.random.default_rng(1010)
    ids = [Pseudonym("460", "001", i, IdentityKind.REAL_IMSI) for i in range(100)]
    db = {p: rng.bytes(16) for p in ids}
    pool = AssistantPool([p.with_kind(IdentityKind.ASSISTANT) for p in ids])
    sessions = 1000
    complete = 0
    for i in range(sessions):
        user = ids[i % len(ids)]
        s = baseline.run_session(user, db[user], build_set(user, pool, 4, rng), db, rng)
        complete += s.sk == baseline.session_key(db[user], s.n1, s.n2)
    forgeries = 100_000
    forged = 0
    for _ in range(forgeries):
        victim = ids[int(rng.integers(0, len(ids)))]
        kset = build_set(victim, pool, 4, rng)
        n1, n2 = rng.bytes(16), rng.bytes(16)
        m1 = baseline.compute_m1(n1, n2, victim, rng.bytes(16), kset)  # adversary guesses the key
        forged += baseline.server_find_identity(n1, n2, kset, m1, db) is not None
    ok = complete == sessions and forged == 0
    report(10, ok, f"completeness {complete}/{sessions}, forgeries accepted {forged}/{forgeries}")
    assert ok
