"""Consumer ratings and reputation scoring.

The store keeps at most one record per (consumer, service); a newer rating
replaces the older one. Per-attribute reputation is the mean score,
min-max normalized across the candidate cohort as an increasing criterion.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import RatingError
from .qos import normalize

MAX_SCORE = 5

MINMAX = "minmax"
SCALE = "scale"


@dataclass(frozen=True)
class RatingRecord:
    consumer: str
    request: str
    provider: str
    service: str
    scores: Mapping[str, int] = field(default_factory=dict)
    timestamp: int = 0

    def __post_init__(self):
        for name, score in self.scores.items():
            if isinstance(score, bool) or not isinstance(score, int):
                raise RatingError(f"score for {name!r} must be an integer, got {score!r}")
            if not 0 <= score <= MAX_SCORE:
                raise RatingError(f"score for {name!r} is {score}, outside 0..{MAX_SCORE}")
        if isinstance(self.timestamp, bool) or not isinstance(self.timestamp, int):
            raise RatingError("timestamp must be an integer")

    def to_dict(self) -> dict:
        return {
            "consumer": self.consumer,
            "request": self.request,
            "provider": self.provider,
            "service": self.service,
            "scores": dict(sorted(self.scores.items())),
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, raw) -> "RatingRecord":
        if not isinstance(raw, dict):
            raise RatingError("rating record must be an object")
        expected = {"consumer", "request", "provider", "service", "scores", "timestamp"}
        if set(raw) != expected:
            raise RatingError(f"rating record fields must be exactly {sorted(expected)}")
        for key in ("consumer", "request", "provider", "service"):
            if not isinstance(raw[key], str):
                raise RatingError(f"{key} must be a string")
        if not isinstance(raw["scores"], dict):
            raise RatingError("scores must be an object")
        return cls(
            raw["consumer"], raw["request"], raw["provider"], raw["service"], dict(raw["scores"]), raw["timestamp"]
        )


class RatingStore:
    """Rating database of one consumer agent; single writer, many readers."""

    def __init__(self, records: Iterable[RatingRecord] = ()):
        self._records: dict[tuple[str, str], RatingRecord] = {}
        self._lock = threading.Lock()
        for r in records:
            self.add(r)

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self):
        return iter(self.records())

    def records(self) -> list[RatingRecord]:
        with self._lock:
            return sorted(self._records.values(), key=lambda r: (r.service, r.consumer))

    def add(self, record: RatingRecord) -> "RatingStore":
        with self._lock:
            self._records.pop((record.consumer, record.service), None)
            self._records[(record.consumer, record.service)] = record
        return self

    def for_service(self, service: str) -> list[RatingRecord]:
        return [r for r in self.records() if r.service == service]

    def services(self) -> list[str]:
        return sorted({r.service for r in self.records()})

    def latest_timestamp(self) -> int:
        return max((r.timestamp for r in self.records()), default=0)

    def evict(self, changed: Iterable[str] = (), horizon: int | None = None, now: int | None = None) -> "RatingStore":
        """Drop records of changed services and records older than ``horizon`` ticks."""
        changed = set(changed)
        with self._lock:
            for key, r in list(self._records.items()):
                stale = horizon is not None and now is not None and now - r.timestamp > horizon
                if r.service in changed or stale:
                    del self._records[key]
        return self

    def snapshot(self) -> "RatingStore":
        return RatingStore(self.records())

    def save(self, path) -> None:
        """Write surviving records as JSON lines, replacing the file atomically."""
        path = Path(path)
        tmp = path.with_name(path.name + ".tmp")
        lines = [json.dumps(r.to_dict(), sort_keys=True) for r in self.records()]
        tmp.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
        os.replace(tmp, path)

    @classmethod
    def load(cls, path) -> "RatingStore":
        store = cls()
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
            if not line.strip():
                continue
            try:
                store.add(RatingRecord.from_dict(json.loads(line)))
            except json.JSONDecodeError as exc:
                raise RatingError(f"{path}:{lineno}: {exc.msg}") from None
            except RatingError as exc:
                raise RatingError(f"{path}:{lineno}: {exc}") from None
        return store


def add_rating(store: RatingStore, record: RatingRecord) -> RatingStore:
    return store.add(record)


def evict(store: RatingStore, changed: Iterable[str] = (), horizon: int | None = None, now: int | None = None) -> RatingStore:
    return store.evict(changed, horizon, now)


def raw_rate(store: RatingStore, service: str, name: str) -> float:
    scores = [r.scores[name] for r in store.for_service(service) if name in r.scores]
    return sum(scores) / len(scores) if scores else 0.0


def rates(store: RatingStore, name: str, cohort: Sequence[str], mode: str = MINMAX) -> dict[str, float]:
    """Normalized reputation on one attribute for every service in the cohort."""
    if not cohort:
        return {}
    raws = [raw_rate(store, sid, name) for sid in cohort]
    if mode == SCALE:
        return {sid: raw / MAX_SCORE for sid, raw in zip(cohort, raws)}
    if mode != MINMAX:
        raise RatingError(f"unknown reputation normalization {mode!r}")
    return dict(zip(cohort, normalize(raws, "increase")))


def rate(store: RatingStore, service: str, name: str, cohort: Sequence[str], mode: str = MINMAX) -> float:
    if service not in cohort:
        raise RatingError(f"service {service!r} is not part of the cohort")
    return rates(store, name, cohort, mode)[service]


def reputation_scores(
    store: RatingStore,
    weights: Mapping[str, int],
    cohort: Sequence[str],
    mode: str = MINMAX,
) -> dict[str, float]:
    active = {k: w for k, w in weights.items() if w > 0}
    total = sum(active.values())
    if total == 0:
        return {sid: 0.0 for sid in cohort}
    acc = {sid: 0.0 for sid in cohort}
    for name in sorted(active):
        for sid, v in rates(store, name, cohort, mode).items():
            acc[sid] += v * active[name]
    return {sid: v / total for sid, v in acc.items()}


def reputation_score(
    store: RatingStore,
    service: str,
    weights: Mapping[str, int],
    cohort: Sequence[str],
    mode: str = MINMAX,
) -> float:
    if service not in cohort:
        raise RatingError(f"service {service!r} is not part of the cohort")
    return reputation_scores(store, weights, cohort, mode)[service]
