"""QoS filtering, min-max normalization, weighted scoring and dynamic-value monitoring."""

from __future__ import annotations

import json
import math
import threading
from collections import defaultdict
from dataclasses import replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import QoSError
from .profiles import Monotony, QoSConstraint, QoSKind, QoSProperty, ServiceProfile


class MeasurementLog:
    """Observed values of dynamic attributes, keyed by (service id, attribute)."""

    def __init__(self):
        self._obs: dict[tuple[str, str], list[float]] = defaultdict(list)
        self._lock = threading.Lock()

    def record(self, service: ServiceProfile, name: str, value: float) -> None:
        prop = service.qos_property(name)
        if prop is None:
            raise QoSError(f"service {service.id!r} has no QoS attribute {name!r}")
        if prop.kind is not QoSKind.DYNAMIC:
            raise QoSError(f"{service.id}.{name} is static; only dynamic attributes are measured")
        value = float(value)
        if not math.isfinite(value):
            raise QoSError("measurement must be finite")
        with self._lock:
            self._obs[(service.id, name)].append(value)

    def observations(self, service_id: str, name: str) -> list[float]:
        with self._lock:
            return list(self._obs.get((service_id, name), ()))

    def effective_value(self, service: ServiceProfile, prop: QoSProperty) -> float:
        """Mean of observations for dynamic attributes, else the advertised value."""
        if prop.kind is QoSKind.STATIC:
            return prop.value
        obs = self.observations(service.id, prop.name)
        return sum(obs) / len(obs) if obs else prop.value

    def snapshot(self, service: ServiceProfile) -> ServiceProfile:
        """Copy of ``service`` with every attribute replaced by its effective value."""
        return replace(service, qos=tuple(replace(q, value=self.effective_value(service, q)) for q in service.qos))

    def to_records(self) -> list[dict]:
        with self._lock:
            return [
                {"service": sid, "name": name, "value": v}
                for (sid, name), values in sorted(self._obs.items())
                for v in values
            ]


def record_measurement(log: MeasurementLog, service: ServiceProfile, name: str, value: float) -> None:
    log.record(service, name, value)


def effective_value(log: MeasurementLog | None, service: ServiceProfile, prop: QoSProperty) -> float:
    return prop.value if log is None else log.effective_value(service, prop)


def load_measurements(path, profiles: Mapping[str, ServiceProfile], log: MeasurementLog | None = None) -> MeasurementLog:
    """Read ``{"service","name","value"}`` JSON lines into a log."""
    log = log if log is not None else MeasurementLog()
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            service = profiles[rec["service"]]
            log.record(service, rec["name"], rec["value"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise QoSError(f"{path}:{lineno}: bad measurement ({exc})") from None
    return log


def filter_candidates(
    candidates: Sequence[ServiceProfile],
    constraints: Iterable[QoSConstraint],
    log: MeasurementLog | None = None,
) -> list[ServiceProfile]:
    """Drop services that miss a hard constraint; survivors keep their order.

    An increasing attribute must reach the threshold, a decreasing one must not
    exceed it. A service without a constrained attribute is dropped.
    """
    constraints = list(constraints)
    kept = []
    for s in candidates:
        for c in constraints:
            prop = s.qos_property(c.name)
            if prop is None:
                break
            v = effective_value(log, s, prop)
            if prop.monotony is Monotony.INCREASE and v < c.threshold:
                break
            if prop.monotony is Monotony.DECREASE and v > c.threshold:
                break
        else:
            kept.append(s)
    return kept


def normalize(values: Sequence[float], monotony: Monotony | str) -> list[float]:
    if not values:
        raise QoSError("cannot normalize an empty cohort")
    monotony = Monotony(monotony)
    hi, lo = max(values), min(values)
    if hi == lo:
        return [1.0] * len(values)
    span = hi - lo
    if monotony is Monotony.INCREASE:
        return [(v - lo) / span for v in values]
    return [(hi - v) / span for v in values]


def normalization_bounds(cohort: Sequence[ServiceProfile], name: str, log: MeasurementLog | None = None):
    """(min, max) of an attribute's effective values over the cohort, or None."""
    values = [effective_value(log, s, p) for s in cohort if (p := s.qos_property(name)) is not None]
    if not values:
        return None
    return min(values), max(values)


def normalized_attribute(cohort: Sequence[ServiceProfile], name: str, log: MeasurementLog | None = None) -> dict[str, float]:
    """Normalized value of ``name`` for every cohort member that advertises it."""
    members = [(s, p) for s in cohort if (p := s.qos_property(name)) is not None]
    if not members:
        return {}
    values = [effective_value(log, s, p) for s, p in members]
    # each service's own declaration decides direction; a cohort should agree
    result = {}
    for monotony in Monotony:
        idx = [i for i, (_, p) in enumerate(members) if p.monotony is monotony]
        if not idx:
            continue
        normed = normalize(values, monotony)
        for i in idx:
            result[members[i][0].id] = normed[i]
    return result


def qos_scores(
    cohort: Sequence[ServiceProfile],
    weights: Mapping[str, int],
    log: MeasurementLog | None = None,
) -> dict[str, float]:
    """Weighted mean of normalized attribute values for every cohort member."""
    active = {k: w for k, w in weights.items() if w > 0}
    total = sum(active.values())
    if total == 0:
        return {s.id: 0.0 for s in cohort}
    acc = {s.id: 0.0 for s in cohort}
    for name in sorted(active):
        for sid, v in normalized_attribute(cohort, name, log).items():
            acc[sid] += v * active[name]
    return {sid: v / total for sid, v in acc.items()}


def qos_score(
    service: ServiceProfile,
    cohort: Sequence[ServiceProfile],
    weights: Mapping[str, int],
    log: MeasurementLog | None = None,
) -> float:
    if all(s.id != service.id for s in cohort):
        raise QoSError(f"service {service.id!r} is not part of the scoring cohort")
    return qos_scores(cohort, weights, log)[service.id]
