"""Consumer and provider agents exchanging discovery messages over a logical-time bus.

Delivery is batch-synchronous: every message queued when a step begins is
delivered in send order, and messages produced during the step are stamped
and queued afterwards in that same order. Handlers of different recipients
may therefore run on a thread pool without changing the transcript.
"""

from __future__ import annotations

import enum
import itertools
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Mapping, Sequence

from .errors import ProtocolError, RatingError
from .matchmaking import functional_sim
from .ontology import Ontology
from .profiles import Request, ServiceProfile
from .qos import MeasurementLog, filter_candidates, qos_scores
from .reputation import MINMAX, RatingRecord, RatingStore, reputation_scores

CONSUMER_SCOPE = "consumer"
PROVIDER_SCOPE = "provider"
QOS_SCOPES = (CONSUMER_SCOPE, PROVIDER_SCOPE)

DEFAULT_STALENESS_HORIZON = 1000


@dataclass(frozen=True)
class CandidateRow:
    service: str
    provider: str
    functional: float
    qos: float
    reputation: float
    overall: float
    profile: ServiceProfile | None = field(default=None, compare=False, repr=False)

    @classmethod
    def build(cls, profile: ServiceProfile, provider: str, functional: float, qos: float, reputation: float):
        return cls(profile.id, provider, functional, qos, reputation, functional + qos + reputation, profile)

    def to_dict(self) -> dict:
        return {
            "service": self.service,
            "provider": self.provider,
            "functional": self.functional,
            "qos": self.qos,
            "reputation": self.reputation,
            "overall": self.overall,
        }


def rank(rows: Iterable[CandidateRow]) -> list[CandidateRow]:
    return sorted(rows, key=lambda r: (-r.overall, r.service))


class MessageKind(str, enum.Enum):
    DISCOVER_REQUEST = "DiscoverRequest"
    DISCOVER_RESPONSE = "DiscoverResponse"
    CHANGE_NOTIFICATION = "ChangeNotification"


@dataclass(frozen=True)
class Message:
    kind: MessageKind
    sender: str
    recipient: str
    conversation: str
    payload: Mapping[str, Any]
    time: int = 0

    def to_dict(self) -> dict:
        if self.kind is MessageKind.DISCOVER_REQUEST:
            request = self.payload["request"]
            payload = {"request": request.name, "threshold": self.payload["threshold"], "weights": dict(request.weights)}
        elif self.kind is MessageKind.DISCOVER_RESPONSE:
            payload = {"provider": self.payload["provider"], "rows": [r.to_dict() for r in self.payload["rows"]]}
        else:
            payload = dict(self.payload)
        return {
            "time": self.time,
            "kind": self.kind.value,
            "sender": self.sender,
            "recipient": self.recipient,
            "conversation": self.conversation,
            "payload": payload,
        }


class Bus:
    """Reliable, exactly-once, FIFO message delivery with a logical clock."""

    def __init__(self, parallel: bool = False, max_workers: int | None = None):
        self.parallel = parallel
        self.max_workers = max_workers
        self.clock = 0
        self.transcript: list[Message] = []
        self._agents: dict[str, Any] = {}
        self._queue: deque[Message] = deque()

    def register(self, agent) -> None:
        if agent.name in self._agents:
            raise ProtocolError(f"duplicate agent name {agent.name!r}")
        self._agents[agent.name] = agent

    def tick(self) -> int:
        self.clock += 1
        return self.clock

    def send(self, msg: Message) -> Message:
        if msg.recipient not in self._agents:
            raise ProtocolError(f"no agent named {msg.recipient!r}")
        stamped = replace(msg, time=self.tick())
        self._queue.append(stamped)
        self.transcript.append(stamped)
        return stamped

    def pending(self) -> int:
        return len(self._queue)

    def _deliver(self, batch: list[Message]) -> list[Message]:
        by_recipient: dict[str, list[Message]] = {}
        for msg in batch:
            by_recipient.setdefault(msg.recipient, []).append(msg)

        def work(name):
            agent = self._agents[name]
            return [out for msg in by_recipient[name] for out in agent.handle(msg)]

        names = list(by_recipient)
        if self.parallel and len(names) > 1:
            with ThreadPoolExecutor(max_workers=self.max_workers or len(names)) as pool:
                produced = list(pool.map(work, names))
        else:
            produced = [work(n) for n in names]
        # commit in first-delivery order of recipients, independent of completion order
        return [out for group in produced for out in group]

    def run(self) -> None:
        while self._queue:
            batch = list(self._queue)
            self._queue.clear()
            for out in self._deliver(batch):
                self.send(out)


class ProviderAgent:
    """Matches requests against its register depository."""

    def __init__(
        self,
        name: str,
        ontology: Ontology,
        profiles: Sequence[ServiceProfile],
        qos_scope: str = CONSUMER_SCOPE,
        log: MeasurementLog | None = None,
    ):
        if qos_scope not in QOS_SCOPES:
            raise ProtocolError(f"unknown qos scope {qos_scope!r}")
        self.name = name
        self.ontology = ontology
        self.qos_scope = qos_scope
        self.log = log if log is not None else MeasurementLog()
        self.subscribers: list[str] = []
        self._profiles = {p.id: p for p in sorted(profiles, key=lambda p: p.id)}

    @property
    def profiles(self) -> list[ServiceProfile]:
        return list(self._profiles.values())

    def profile(self, service_id: str) -> ServiceProfile:
        return self._profiles[service_id]

    def handle_request(self, request: Request, threshold: float) -> list[CandidateRow]:
        current = [self.log.snapshot(p) for p in self._profiles.values()]
        functional = {}
        for p in current:
            f = functional_sim(self.ontology, request, p).functional
            if f >= threshold:
                functional[p.id] = f
        survivors = filter_candidates([p for p in current if p.id in functional], request.constraints)
        if self.qos_scope == PROVIDER_SCOPE:
            qos = qos_scores(survivors, request.weights)
        else:
            qos = {p.id: 0.0 for p in survivors}
        return [CandidateRow.build(p, self.name, functional[p.id], qos[p.id], 0.0) for p in survivors]

    def handle(self, msg: Message) -> list[Message]:
        if msg.kind is not MessageKind.DISCOVER_REQUEST:
            raise ProtocolError(f"provider {self.name} cannot handle {msg.kind.value}")
        rows = self.handle_request(msg.payload["request"], msg.payload["threshold"])
        payload = {"provider": self.name, "rows": tuple(rows)}
        return [Message(MessageKind.DISCOVER_RESPONSE, self.name, msg.sender, msg.conversation, payload)]

    def record_invocation(self, service_id: str, name: str, value: float) -> None:
        self.log.record(self._profiles[service_id], name, value)

    def change_service(self, profile: ServiceProfile) -> list[Message]:
        """Replace a service description and build change notices for subscribers."""
        if profile.id not in self._profiles:
            raise ProtocolError(f"provider {self.name} does not host {profile.id!r}")
        self._profiles[profile.id] = profile
        return [
            Message(MessageKind.CHANGE_NOTIFICATION, self.name, c, f"change:{profile.id}", {"service": profile.id})
            for c in self.subscribers
        ]


@dataclass
class Discovery:
    request_id: str
    path: str  # "cache" or "broadcast"
    rows: list[CandidateRow]
    responders: list[str] = field(default_factory=list)


@dataclass
class _Pending:
    request: Request
    sent_at: int
    awaiting: set[str]
    responses: dict[str, tuple[CandidateRow, ...]] = field(default_factory=dict)


class ConsumerAgent:
    """Holds the rating database, which doubles as a cache of satisfying services."""

    def __init__(
        self,
        name: str,
        ontology: Ontology,
        providers: Sequence[str],
        store: RatingStore | None = None,
        qos_scope: str = CONSUMER_SCOPE,
        reputation_mode: str = MINMAX,
        known_profiles: Iterable[ServiceProfile] = (),
        timeout: int | None = None,
    ):
        if qos_scope not in QOS_SCOPES:
            raise ProtocolError(f"unknown qos scope {qos_scope!r}")
        self.name = name
        self.ontology = ontology
        self.providers = list(providers)
        self.store = store if store is not None else RatingStore()
        self.qos_scope = qos_scope
        self.reputation_mode = reputation_mode
        self.timeout = timeout
        self.profiles: dict[str, ServiceProfile] = {p.id: p for p in known_profiles}
        self.results: dict[str, Discovery] = {}
        self._pending: dict[str, _Pending] = {}

    # -- scoring -------------------------------------------------------------

    def _reputation(self, request: Request, cohort: Sequence[str]) -> dict[str, float]:
        return reputation_scores(self.store, request.weights, cohort, self.reputation_mode)

    def score(self, request: Request, candidates: Sequence[tuple[ServiceProfile, str, float]]) -> list[CandidateRow]:
        """Filter, QoS-score over the given cohort, add reputation and rank.

        ``candidates`` holds (profile, provider, functional) triples that already
        cleared the functional threshold.
        """
        functional = {p.id: (prov, f) for p, prov, f in candidates}
        survivors = filter_candidates([p for p, _, _ in candidates], request.constraints)
        qos = qos_scores(survivors, request.weights)
        rep = self._reputation(request, [p.id for p in survivors])
        return rank(
            CandidateRow.build(p, functional[p.id][0], functional[p.id][1], qos[p.id], rep[p.id]) for p in survivors
        )

    def cached_services(self) -> list[ServiceProfile]:
        return [self.profiles[s] for s in self.store.services() if s in self.profiles]

    def lookup_cache(self, request: Request) -> list[CandidateRow]:
        candidates = []
        for p in self.cached_services():
            f = functional_sim(self.ontology, request, p).functional
            if f >= request.threshold:
                candidates.append((p, p.provider, f))
        return self.score(request, candidates)

    def merge_responses(self, request: Request, responses: Mapping[str, Sequence[CandidateRow]]) -> list[CandidateRow]:
        rows: dict[str, CandidateRow] = {}
        for provider in sorted(responses):
            for row in responses[provider]:
                if row.service in rows:
                    raise ProtocolError(f"service id {row.service!r} returned by several providers")
                rows[row.service] = row
        ordered = [rows[k] for k in sorted(rows)]
        for row in ordered:
            if row.profile is not None:
                self.profiles[row.service] = row.profile
        if self.qos_scope == CONSUMER_SCOPE:
            return self.score(request, [(r.profile, r.provider, r.functional) for r in ordered])
        rep = self._reputation(request, [r.service for r in ordered])
        return rank(
            CandidateRow(r.service, r.provider, r.functional, r.qos, rep[r.service], r.functional + r.qos + rep[r.service], r.profile)
            for r in ordered
        )

    # -- protocol ------------------------------------------------------------

    def handle_request(self, request: Request, request_id: str, now: int = 0, use_cache: bool = True):
        """Answer from the cache when possible, otherwise return broadcast messages.

        Returns ``(rows, [])`` on a cache hit and ``(None, messages)`` otherwise.
        """
        if use_cache:
            rows = self.lookup_cache(request)
            if rows:
                self.results[request_id] = Discovery(request_id, "cache", rows)
                return rows, []
        self._pending[request_id] = _Pending(request, now, set(self.providers))
        payload = {"request": request, "threshold": request.threshold}
        return None, [
            Message(MessageKind.DISCOVER_REQUEST, self.name, p, request_id, payload) for p in self.providers
        ]

    def handle(self, msg: Message) -> list[Message]:
        if msg.kind is MessageKind.DISCOVER_RESPONSE:
            pending = self._pending.get(msg.conversation)
            if pending is None:
                return []
            if self.timeout is not None and msg.time - pending.sent_at > self.timeout:
                return []
            provider = msg.payload["provider"]
            if provider in pending.responses:
                raise ProtocolError(f"second response from {provider} for {msg.conversation}")
            pending.responses[provider] = msg.payload["rows"]
            pending.awaiting.discard(provider)
            if not pending.awaiting:
                self._complete(msg.conversation)
            return []
        if msg.kind is MessageKind.CHANGE_NOTIFICATION:
            self.handle_change_notification(msg.payload["service"])
            return []
        raise ProtocolError(f"consumer {self.name} cannot handle {msg.kind.value}")

    def _complete(self, request_id: str) -> None:
        pending = self._pending.pop(request_id)
        rows = self.merge_responses(pending.request, pending.responses)
        self.results[request_id] = Discovery(request_id, "broadcast", rows, sorted(pending.responses))

    def finalize(self) -> None:
        """Merge whatever arrived for requests still waiting on silent providers."""
        for request_id in sorted(self._pending):
            self._complete(request_id)

    def submit_feedback(
        self, request: Request, service: str, scores: Mapping[str, int], now: int, consumer: str | None = None
    ) -> RatingRecord:
        """Store an end user's rating; ``consumer`` defaults to this agent's name."""
        profile = self.profiles.get(service)
        if profile is None:
            raise RatingError(f"unknown service {service!r}")
        record = RatingRecord(consumer or self.name, request.name, profile.provider, service, dict(scores), now)
        self.store.add(record)
        return record

    def handle_change_notification(self, service: str) -> None:
        self.store.evict(changed=[service])
        self.profiles.pop(service, None)

    def evict_stale(self, horizon: int, now: int) -> None:
        self.store.evict(horizon=horizon, now=now)


class DiscoverySystem:
    """One consumer agent wired to a set of provider agents on a shared bus."""

    def __init__(
        self,
        ontology: Ontology,
        registry: Mapping[str, Sequence[ServiceProfile]],
        store: RatingStore | None = None,
        qos_scope: str = CONSUMER_SCOPE,
        reputation_mode: str = MINMAX,
        parallel: bool = False,
        consumer_name: str = "consumer",
        staleness_horizon: int | None = DEFAULT_STALENESS_HORIZON,
        timeout: int | None = None,
        logs: Mapping[str, MeasurementLog] | None = None,
    ):
        self.bus = Bus(parallel=parallel)
        self.staleness_horizon = staleness_horizon
        self.providers = {}
        for name in sorted(registry):
            log = (logs or {}).get(name)
            agent = ProviderAgent(name, ontology, registry[name], qos_scope, log)
            agent.subscribers.append(consumer_name)
            self.providers[name] = agent
            self.bus.register(agent)
        known = [p for profiles in registry.values() for p in profiles]
        self.consumer = ConsumerAgent(
            consumer_name, ontology, list(self.providers), store, qos_scope, reputation_mode, known_profiles=(), timeout=timeout
        )
        self._all_profiles = {p.id: p for p in known}
        self.bus.register(self.consumer)
        self._ids = itertools.count(1)

    @classmethod
    def from_profiles(cls, ontology: Ontology, profiles: Iterable[ServiceProfile], **kwargs) -> "DiscoverySystem":
        registry: dict[str, list[ServiceProfile]] = {}
        for p in profiles:
            registry.setdefault(p.provider, []).append(p)
        return cls(ontology, registry, **kwargs)

    def prime_cache(self) -> None:
        """Let the consumer know the descriptions of services it already rated."""
        for sid in self.consumer.store.services():
            if sid in self._all_profiles:
                self.consumer.profiles.setdefault(sid, self._all_profiles[sid])

    def discover(self, request: Request, use_cache: bool = True) -> Discovery:
        request_id = f"R{next(self._ids)}"
        if self.staleness_horizon is not None:
            self.consumer.evict_stale(self.staleness_horizon, self.bus.clock)
        rows, messages = self.consumer.handle_request(request, request_id, self.bus.clock, use_cache)
        if rows is None:
            for msg in messages:
                self.bus.send(msg)
            self.bus.run()
            self.consumer.finalize()
        return self.consumer.results.pop(request_id)

    def feedback(self, request: Request, service: str, scores: Mapping[str, int], consumer: str | None = None) -> RatingRecord:
        return self.consumer.submit_feedback(request, service, scores, self.bus.tick(), consumer)

    def change_service(self, profile: ServiceProfile) -> None:
        provider = self.providers[profile.provider]
        for msg in provider.change_service(profile):
            self.bus.send(msg)
        self.bus.run()
