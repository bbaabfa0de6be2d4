"""Deterministic discrete-event channel and the UE / MME / HSS actors.

Every message takes one tick per hop.  Deliveries are ordered by (time,
send order), so each channel is FIFO and a run is fully reproducible from the
actors' seeded random streams.
"""

from __future__ import annotations

import heapq
import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import protocol as P
from .errors import AuthenticationError, FailureCause, ProtocolStateError, UnknownHssError
from .kset import AssistantPool, PoolSource

log = logging.getLogger(__name__)


@dataclass(order=True)
class Envelope:
    time: int
    seq: int
    src: str = field(compare=False)
    dst: str = field(compare=False)
    msg: object = field(compare=False)


@dataclass(frozen=True)
class TranscriptEntry:
    time: int
    src: str
    dst: str
    kind: str
    payload: bytes

    def format(self) -> str:
        return f"{self.time:>8d} {self.src}->{self.dst} {self.kind} {self.payload.hex()}"


class Network:
    def __init__(self, latency: int = 1):
        self.latency = latency
        self.now = 0
        self._queue: list[Envelope] = []
        self._seq = itertools.count()
        self.handlers: dict[str, Callable[[Envelope], None]] = {}
        self.taps: list[Callable[[Envelope], None]] = []
        # interceptors may rewrite a message in flight or drop it (return None)
        self.interceptors: list[Callable[[Envelope], object | None]] = []
        self.transcript: list[TranscriptEntry] = []

    def register(self, name: str, handler: Callable[[Envelope], None]) -> None:
        self.handlers[name] = handler

    def send(self, src: str, dst: str, msg, delay: int | None = None) -> None:
        t = self.now + (self.latency if delay is None else delay)
        heapq.heappush(self._queue, Envelope(t, next(self._seq), src, dst, msg))

    def record(self, src: str, dst: str, msg) -> None:
        self.transcript.append(TranscriptEntry(self.now, src, dst, type(msg).__name__, msg.to_bytes()))

    def run(self) -> int:
        """Deliver until the queue drains; returns the number of deliveries."""
        delivered = 0
        while self._queue:
            env = heapq.heappop(self._queue)
            self.now = env.time
            for intercept in self.interceptors:
                msg = intercept(env)
                if msg is None:
                    break
                env.msg = msg
            else:
                self.record(env.src, env.dst, env.msg)
                for tap in self.taps:
                    tap(env)
                self.handlers[env.dst](env)
                delivered += 1
        return delivered

    def advance_to(self, t: int) -> None:
        self.now = max(self.now, t)


class UeNode:
    def __init__(self, name: str, state: P.UeState, mme: str, net: Network, rng: np.random.Generator):
        self.name = name
        self.state = state
        self.mme = mme
        self.net = net
        self.rng = rng
        self.outcome: FailureCause | str | None = None
        net.register(name, self.handle)

    def start_attach(self, k: int, txn: int) -> P.AttachRequest:
        self.outcome = None
        if self.state.recovery_mode:
            req = P.recover(self.state, k, self.rng, txn)
        else:
            req = P.ue_initiate(self.state, k, self.rng, txn)
        self.net.send(self.name, self.mme, req, delay=0)
        return req

    def handle(self, env: Envelope) -> None:
        msg, ue = env.msg, self.state
        if isinstance(msg, P.AssistantDelivery):
            ue.pool = AssistantPool(list(msg.entries), PoolSource.HSS)
            return
        if msg.txn != ue.pending_txn:
            log.debug("%s: dropping %s for stale transaction %d", self.name, type(msg).__name__, msg.txn)
            return
        if isinstance(msg, P.AuthChallenge):
            try:
                res = P.ue_verify_challenge(ue, msg)
            except ProtocolStateError:
                return
            except AuthenticationError as exc:
                self.outcome = exc.cause
                ue.pending_txn = None
                self.net.send(self.name, self.mme, P.AuthFailure(msg.txn, exc.cause))
                return
            self.net.send(self.name, self.mme, P.AuthResponse(msg.txn, res))
        elif isinstance(msg, P.AuthAccept):
            P.ue_complete(ue)
            self.outcome = "success"
        elif isinstance(msg, P.Reject):
            self.outcome = msg.cause
            ue.pending_txn = None
            try:
                P.ue_failed(ue, msg.cause)
            except AuthenticationError as exc:
                self.outcome = exc.cause


class MmeNode:
    def __init__(self, name: str, state: P.MmeState, hss: str, net: Network):
        self.name = name
        self.state = state
        self.hss = hss
        self.net = net
        self.routes: dict[int, str] = {}
        self.aborted: set[int] = set()
        net.register(name, self.handle)

    def handle(self, env: Envelope) -> None:
        msg, mme = env.msg, self.state
        if isinstance(msg, P.AttachRequest):
            self.routes[msg.txn] = env.src
            try:
                fwd = P.mme_forward(mme, msg)
            except UnknownHssError:
                self.net.send(self.name, env.src, P.Reject(msg.txn, FailureCause.IDENTIFICATION))
                return
            self.net.send(self.name, self.hss, fwd)
        elif isinstance(msg, P.AvResponse):
            if msg.txn in self.aborted:
                self.net.send(self.name, self.hss, P.AuthConfirm(msg.txn, False))
                return
            self.net.send(self.name, self.routes[msg.txn], P.mme_challenge(mme, msg.txn, msg.av))
        elif isinstance(msg, P.AuthResponse):
            ok = P.mme_verify_res(mme, msg.txn, msg.res)
            ue = self.routes[msg.txn]
            if ok:
                self.net.send(self.name, ue, P.AuthAccept(msg.txn))
            else:
                self.net.send(self.name, ue, P.Reject(msg.txn, FailureCause.RES_MISMATCH))
            self.net.send(self.name, self.hss, P.AuthConfirm(msg.txn, ok))
        elif isinstance(msg, P.AuthFailure):
            if mme.pending.pop(msg.txn, None) is not None:
                self.net.send(self.name, self.hss, P.AuthConfirm(msg.txn, False))
            else:
                self.aborted.add(msg.txn)
        elif isinstance(msg, P.Reject):
            self.net.send(self.name, self.routes[msg.txn], msg)
        elif isinstance(msg, P.AssistantDelivery):
            self.net.send(self.name, self.routes[msg.txn], msg)


class HssNode:
    def __init__(self, name: str, state: P.HssState, net: Network, rng: np.random.Generator, pool_size: int):
        self.name = name
        self.state = state
        self.net = net
        self.rng = rng
        self.pool_size = pool_size
        self.identification_failures = 0
        net.register(name, self.handle)

    def handle(self, env: Envelope) -> None:
        msg, hss = env.msg, self.state
        if isinstance(msg, P.ForwardedRequest):
            if msg.sn_id not in hss.known_sn_ids:
                self.net.send(self.name, env.src, P.Reject(msg.txn, FailureCause.IDENTIFICATION))
                return
            hit = P.hss_identify(hss, msg.kset, msg.h0)
            if hit is None:
                self.identification_failures += 1
                self.net.send(self.name, env.src, P.Reject(msg.txn, FailureCause.IDENTIFICATION))
                return
            sub, kind = hit
            av = P.hss_generate_av(hss, sub, kind, msg.sn_id, self.rng, msg.txn)
            self.net.send(self.name, env.src, P.AvResponse(msg.txn, av))
        elif isinstance(msg, P.AuthConfirm):
            if not msg.ok:
                hss.pending.pop(msg.txn, None)
                return
            sub = P.hss_complete(hss, msg.txn)
            pool = P.hss_deliver_assistants(hss, sub.sub_id, self.pool_size, self.rng)
            if pool is not None:
                self.net.send(self.name, env.src, P.AssistantDelivery(msg.txn, tuple(pool.entries)))
