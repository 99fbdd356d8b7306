"""Seeded consumer/provider simulation.

Every run issues the same functional request with freshly drawn QoS weights,
lets the agents discover candidates, picks the top-ranked service and feeds
back ratings derived from the quality that service actually delivered.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any

from . import jsonio
from .agents import CONSUMER_SCOPE, DEFAULT_STALENESS_HORIZON, QOS_SCOPES, DiscoverySystem
from .errors import ConfigError, DiscoveryError
from .ontology import Ontology, parse_ontology
from .profiles import (
    Monotony,
    QoSKind,
    QoSProperty,
    Request,
    ServiceProfile,
    profile_from_dict,
    request_from_dict,
)
from .qos import MeasurementLog
from .reputation import MAX_SCORE, MINMAX, SCALE, RatingRecord, RatingStore


def bundled_ontology() -> Ontology:
    text = resources.files("wsdiscovery").joinpath("data/university.ontology.json").read_text(encoding="utf-8")
    return parse_ontology(text)


@dataclass(frozen=True)
class AttributeSpec:
    name: str
    unit: str
    monotony: Monotony
    kind: QoSKind
    low: float
    high: float

    def quality(self, value: float) -> float:
        """Position of ``value`` on the attribute's range, 1 being best."""
        span = self.high - self.low
        q = (value - self.low) / span if self.monotony is Monotony.INCREASE else (self.high - value) / span
        return min(1.0, max(0.0, q))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "unit": self.unit,
            "monotony": self.monotony.value,
            "kind": self.kind.value,
            "low": self.low,
            "high": self.high,
        }


DEFAULT_ATTRIBUTES = (
    AttributeSpec("ResponseTime", "millisecond", Monotony.DECREASE, QoSKind.DYNAMIC, 100.0, 1000.0),
    AttributeSpec("ExecutionPrice", "unit", Monotony.DECREASE, QoSKind.STATIC, 10.0, 200.0),
    AttributeSpec("Reliability", "ratio", Monotony.INCREASE, QoSKind.STATIC, 0.8, 1.0),
    AttributeSpec("Availability", "ratio", Monotony.INCREASE, QoSKind.DYNAMIC, 0.9, 1.0),
)

DEFAULT_REQUEST = {
    "name": "FindAlgUniversity",
    "description": "find an algerian university near a location for a phd student",
    "inputs": ["PhdStudent"],
    "outputs": ["Location", "AlgUniversity"],
    "constraints": [],
}

SERVICE_NAMES = (
    "FindAlgUniversity",
    "FindAlgerianUniversity",
    "FindUniversity",
    "UniversityLocator",
    "SearchUniversity",
    "LocateAlgUniversity",
    "StudentUniversityFinder",
    "GetUniversityLocation",
)

SERVICE_DESCRIPTIONS = (
    "find an algerian university near a location for a phd student",
    "locate universities and their position for a student",
    "returns a university and its location for a given person",
    "search for an algerian university",
    "geographic lookup of university campuses",
)

SIGNATURES = (
    (("PhdStudent",), ("Location", "AlgUniversity")),
    (("Person",), ("Location", "University")),
    (("Student",), ("Location", "AlgUniversity")),
    (("Person",), ("GeographicArea", "AlgUniversity")),
    (("Location", "PhdStudent"), ("AlgUniversity",)),
    (("Employer",), ("Location", "University")),
    (("Person",), ("University",)),
    (("Student",), ("Location", "University")),
)

FEEDBACK_RULES = ("delivered-quality", "none")

_CONFIG_KEYS = {
    "seed",
    "providers",
    "services_per_provider",
    "runs",
    "qos_scope",
    "reputation_mode",
    "threshold",
    "use_cache",
    "staleness_horizon",
    "timeout",
    "ontology",
    "attributes",
    "request",
    "weights",
    "feedback",
    "services",
    "initial_ratings",
    "prior_ratings",
    "consumers",
    "measurements",
}


@dataclass(frozen=True)
class SimService:
    profile: ServiceProfile
    delivered: dict[str, float]


@dataclass
class SimulationConfig:
    seed: int = 0
    providers: int = 4
    services_per_provider: int = 5
    runs: int = 100
    qos_scope: str = CONSUMER_SCOPE
    reputation_mode: str = MINMAX
    threshold: float | None = None
    use_cache: bool = False
    staleness_horizon: int | None = DEFAULT_STALENESS_HORIZON
    timeout: int | None = None
    ontology: Any = None
    attributes: tuple[AttributeSpec, ...] = DEFAULT_ATTRIBUTES
    request: dict = field(default_factory=lambda: dict(DEFAULT_REQUEST))
    weight_min: int = 0
    weight_max: int = 5
    feedback: str = "delivered-quality"
    services: list[dict] | None = None
    initial_ratings: list[dict] = field(default_factory=list)
    # earlier consumers who each rated every service once before the first run
    prior_ratings: int = 1
    consumers: int = 10
    measurements: list[dict] = field(default_factory=list)
    base_dir: Path | None = None

    @classmethod
    def from_dict(cls, raw: dict, base_dir=None) -> "SimulationConfig":
        if not isinstance(raw, dict):
            raise ConfigError("simulation config must be a JSON object")
        unknown = set(raw) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config fields {sorted(unknown)}")
        cfg = cls(base_dir=Path(base_dir) if base_dir is not None else None)
        for key in ("seed", "providers", "services_per_provider", "runs", "prior_ratings", "consumers"):
            if key in raw:
                v = raw[key]
                if isinstance(v, bool) or not isinstance(v, int):
                    raise ConfigError(f"{key} must be an integer")
                setattr(cfg, key, v)
        for key in ("qos_scope", "reputation_mode", "threshold", "use_cache", "staleness_horizon", "timeout", "ontology"):
            if key in raw:
                setattr(cfg, key, raw[key])
        if "attributes" in raw:
            try:
                cfg.attributes = tuple(
                    AttributeSpec(a["name"], a.get("unit", ""), Monotony(a["monotony"]), QoSKind(a.get("kind", "static")), float(a["low"]), float(a["high"]))
                    for a in raw["attributes"]
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"bad attribute spec: {exc}") from None
        if "request" in raw:
            cfg.request = dict(raw["request"])
        if "weights" in raw:
            w = raw["weights"]
            if not isinstance(w, dict) or set(w) - {"min", "max"}:
                raise ConfigError("weights must be an object with 'min' and 'max'")
            cfg.weight_min = w.get("min", 0)
            cfg.weight_max = w.get("max", 5)
        if "feedback" in raw:
            fb = raw["feedback"]
            if not isinstance(fb, dict) or set(fb) != {"rule"}:
                raise ConfigError("feedback must be an object with a 'rule'")
            cfg.feedback = fb["rule"]
        if "services" in raw:
            cfg.services = raw["services"]
        if "initial_ratings" in raw:
            cfg.initial_ratings = list(raw["initial_ratings"])
        if "measurements" in raw:
            cfg.measurements = list(raw["measurements"])
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "SimulationConfig":
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc.msg} (line {exc.lineno})") from None
        return cls.from_dict(raw, base_dir=path.parent)

    def validate(self) -> None:
        if self.services is None and (self.providers < 1 or self.services_per_provider < 1):
            raise ConfigError("providers and services_per_provider must be positive")
        if self.runs < 0:
            raise ConfigError("runs must be non-negative")
        if self.prior_ratings < 0:
            raise ConfigError("prior_ratings must be non-negative")
        if self.consumers < 1:
            raise ConfigError("consumers must be positive")
        if self.qos_scope not in QOS_SCOPES:
            raise ConfigError(f"qos_scope must be one of {QOS_SCOPES}")
        if self.reputation_mode not in (MINMAX, SCALE):
            raise ConfigError(f"reputation_mode must be {MINMAX!r} or {SCALE!r}")
        if self.feedback not in FEEDBACK_RULES:
            raise ConfigError(f"feedback rule must be one of {FEEDBACK_RULES}")
        if not (isinstance(self.weight_min, int) and isinstance(self.weight_max, int) and 0 <= self.weight_min <= self.weight_max <= 5):
            raise ConfigError("weights must satisfy 0 <= min <= max <= 5")
        if not isinstance(self.use_cache, bool):
            raise ConfigError("use_cache must be a boolean")
        for key in ("staleness_horizon", "timeout"):
            v = getattr(self, key)
            if v is not None and (isinstance(v, bool) or not isinstance(v, int) or v < 0):
                raise ConfigError(f"{key} must be a non-negative integer or null")
        if self.threshold is not None and (isinstance(self.threshold, bool) or not isinstance(self.threshold, (int, float))):
            raise ConfigError("threshold must be a number")
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise ConfigError("attribute names must be unique")
        for a in self.attributes:
            if not a.low < a.high:
                raise ConfigError(f"attribute {a.name}: low must be below high")
        try:
            self.base_request()
        except DiscoveryError as exc:
            raise ConfigError(f"request: {exc}") from None

    def base_request(self) -> Request:
        request = request_from_dict({**self.request, "weights": {}})
        if self.threshold is not None:
            request = replace(request, threshold=float(self.threshold))
        return request

    def load_ontology(self) -> Ontology:
        if self.ontology is None:
            return bundled_ontology()
        if isinstance(self.ontology, dict):
            return parse_ontology(json.dumps(self.ontology))
        path = Path(self.ontology)
        if not path.is_absolute() and self.base_dir is not None:
            path = self.base_dir / path
        return parse_ontology(path.read_text(encoding="utf-8"))

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "providers": self.providers,
            "services_per_provider": self.services_per_provider,
            "runs": self.runs,
            "qos_scope": self.qos_scope,
            "reputation_mode": self.reputation_mode,
            "threshold": self.threshold,
            "use_cache": self.use_cache,
            "staleness_horizon": self.staleness_horizon,
            "timeout": self.timeout,
            "attributes": [a.to_dict() for a in self.attributes],
            "request": self.request,
            "weights": {"min": self.weight_min, "max": self.weight_max},
            "feedback": {"rule": self.feedback},
            "prior_ratings": self.prior_ratings,
            "consumers": self.consumers,
        }


def generate_services(config: SimulationConfig, rng: random.Random) -> list[SimService]:
    """Population of providers x services with advertised and delivered QoS."""
    if config.services is not None:
        out = []
        for i, raw in enumerate(config.services):
            if not isinstance(raw, dict) or "profile" not in raw or set(raw) - {"profile", "delivered"}:
                raise ConfigError(f"services[{i}] must be an object with 'profile' and optional 'delivered'")
            try:
                profile = profile_from_dict(raw["profile"])
            except DiscoveryError as exc:
                raise ConfigError(f"services[{i}].profile: {exc}") from None
            delivered = {q.name: q.value for q in profile.qos}
            delivered.update({k: float(v) for k, v in raw.get("delivered", {}).items()})
            out.append(SimService(profile, delivered))
        ids = [s.profile.id for s in out]
        if len(set(ids)) != len(ids):
            raise ConfigError("explicit services must have unique ids")
        return out

    out = []
    for p in range(1, config.providers + 1):
        provider = f"P{p}"
        for k in range(1, config.services_per_provider + 1):
            inputs, outputs = rng.choice(SIGNATURES)
            qos, delivered = [], {}
            for a in config.attributes:
                advertised = round(rng.uniform(a.low, a.high), 3)
                # providers may over- or under-state what they deliver
                actual = round(min(a.high, max(a.low, advertised * rng.uniform(0.7, 1.3))), 3)
                qos.append(QoSProperty(a.name, advertised, a.unit, a.monotony, a.kind))
                delivered[a.name] = actual
            profile = ServiceProfile(
                id=f"{provider}-S{k}",
                name=rng.choice(SERVICE_NAMES),
                description=rng.choice(SERVICE_DESCRIPTIONS),
                inputs=inputs,
                outputs=outputs,
                provider=provider,
                qos=tuple(qos),
            )
            out.append(SimService(profile, delivered))
    return out


def feedback_scores(attributes, service: SimService) -> dict[str, int]:
    scores = {}
    for a in attributes:
        if a.name in service.delivered and service.profile.qos_property(a.name) is not None:
            scores[a.name] = min(MAX_SCORE, max(0, round(MAX_SCORE * a.quality(service.delivered[a.name]))))
    return scores


@dataclass
class SimulationReport:
    config: dict
    services: list[dict]
    selection_counts: dict[str, int]
    runs: list[dict]
    trajectories: dict[str, list[dict]]
    ratings: list[dict]
    transcript: list[dict]
    clock: int

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "services": self.services,
            "selection_counts": self.selection_counts,
            "runs": self.runs,
            "trajectories": self.trajectories,
            "ratings": self.ratings,
            "transcript": self.transcript,
            "clock": self.clock,
        }

    def to_json(self) -> str:
        return jsonio.dumps(self.to_dict())


def run_simulation(config: SimulationConfig, parallel: bool = False) -> SimulationReport:
    config.validate()
    rng = random.Random(config.seed)
    ontology = config.load_ontology()
    population = generate_services(config, rng)
    by_id = {s.profile.id: s for s in population}

    registry: dict[str, list[ServiceProfile]] = {}
    for s in population:
        registry.setdefault(s.profile.provider, []).append(s.profile)
    logs = {name: MeasurementLog() for name in registry}
    for i, m in enumerate(config.measurements):
        try:
            service = by_id[m["service"]].profile
            logs[service.provider].record(service, m["name"], m["value"])
        except (KeyError, TypeError, DiscoveryError) as exc:
            raise ConfigError(f"measurements[{i}]: {exc}") from None

    try:
        store = RatingStore(RatingRecord.from_dict(r) for r in config.initial_ratings)
    except DiscoveryError as exc:
        raise ConfigError(f"initial_ratings: {exc}") from None

    system = DiscoverySystem(
        ontology,
        registry,
        store=store,
        qos_scope=config.qos_scope,
        reputation_mode=config.reputation_mode,
        parallel=parallel,
        staleness_horizon=config.staleness_horizon,
        timeout=config.timeout,
        logs=logs,
    )
    base = config.base_request()
    if config.feedback == "delivered-quality":
        for k in range(1, config.prior_ratings + 1):
            for s in population:
                scores = feedback_scores(config.attributes, s)
                store.add(RatingRecord(f"prior-{k}", base.name, s.profile.provider, s.profile.id, scores, 0))
    system.prime_cache()
    names = [a.name for a in config.attributes]

    counts = {s.profile.id: 0 for s in population}
    trajectories: dict[str, list[dict]] = {s.profile.id: [] for s in population}
    runs = []
    for run in range(1, config.runs + 1):
        weights = {n: rng.randint(config.weight_min, config.weight_max) for n in names}
        request = replace(base, weights=weights)
        user = f"C{rng.randint(1, config.consumers)}"
        found = system.discover(request, use_cache=config.use_cache)
        for row in found.rows:
            trajectories[row.service].append({"run": run, **{k: v for k, v in row.to_dict().items() if k not in ("service", "provider")}})
        selected = found.rows[0].service if found.rows else None
        rating = None
        if selected is not None:
            counts[selected] += 1
            chosen = by_id[selected]
            provider = system.providers[chosen.profile.provider]
            for q in chosen.profile.qos:
                if q.kind is QoSKind.DYNAMIC and q.name in chosen.delivered:
                    provider.record_invocation(selected, q.name, chosen.delivered[q.name])
            if config.feedback == "delivered-quality":
                scores = feedback_scores(config.attributes, chosen)
                rating = system.feedback(request, selected, scores, consumer=user).to_dict()
        runs.append(
            {
                "run": run,
                "consumer": user,
                "weights": weights,
                "path": found.path,
                "candidates": len(found.rows),
                "selected": selected,
                "top": [r.to_dict() for r in found.rows[:3]],
                "rating": rating,
            }
        )

    return SimulationReport(
        config=config.to_dict(),
        services=[{"id": s.profile.id, "provider": s.profile.provider} for s in population],
        selection_counts=counts,
        runs=runs,
        trajectories=trajectories,
        ratings=[r.to_dict() for r in system.consumer.store.records()],
        transcript=[m.to_dict() for m in system.bus.transcript],
        clock=system.bus.clock,
    )
