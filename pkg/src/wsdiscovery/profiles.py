"""Service profiles, requests and the folder-per-service register depository."""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

from .errors import RegistryError, ValidationError
from .ontology import Ontology


class Monotony(str, enum.Enum):
    INCREASE = "increase"
    DECREASE = "decrease"


class QoSKind(str, enum.Enum):
    STATIC = "static"
    DYNAMIC = "dynamic"


class Predicate(str, enum.Enum):
    LESS = "less"
    GREATER = "greater"
    EQUAL = "equal"


@dataclass(frozen=True)
class QoSProperty:
    name: str
    value: float
    unit: str
    monotony: Monotony
    kind: QoSKind = QoSKind.STATIC
    # recorded only; filtering direction comes from monotony
    predicate: Predicate | None = None

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "value": self.value,
            "unit": self.unit,
            "monotony": self.monotony.value,
            "kind": self.kind.value,
        }
        if self.predicate is not None:
            d["predicate"] = self.predicate.value
        return d


@dataclass(frozen=True)
class ServiceProfile:
    id: str
    name: str
    description: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    provider: str
    qos: tuple[QoSProperty, ...] = ()

    def qos_property(self, name: str) -> QoSProperty | None:
        for q in self.qos:
            if q.name == name:
                return q
        return None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "description": self.description,
            "inputs": list(self.inputs),
            "outputs": list(self.outputs),
            "provider": self.provider,
            "qos": [q.to_dict() for q in self.qos],
        }


@dataclass(frozen=True)
class QoSConstraint:
    name: str
    threshold: float

    def to_dict(self) -> dict:
        return {"name": self.name, "threshold": self.threshold}


@dataclass(frozen=True)
class Request:
    name: str
    description: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    weights: dict[str, int] = field(default_factory=dict)
    constraints: tuple[QoSConstraint, ...] = ()
    w1: float = 0.5
    w2: float = 0.5
    threshold: float = 0.5

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "inputs": list(self.inputs),
            "outputs": list(self.outputs),
            "weights": dict(sorted(self.weights.items())),
            "constraints": [c.to_dict() for c in self.constraints],
            "w1": self.w1,
            "w2": self.w2,
            "threshold": self.threshold,
        }


# -- parsing -------------------------------------------------------------------


def _obj(raw, path, required, optional=()):
    if not isinstance(raw, dict):
        raise ValidationError(path, "expected an object")
    unknown = set(raw) - set(required) - set(optional)
    if unknown:
        raise ValidationError(path, f"unknown fields {sorted(unknown)}")
    for key in required:
        if key not in raw:
            raise ValidationError(_join(path, key), "missing")
    return raw


def _join(path, key):
    return f"{path}.{key}" if path else key


def _str(raw, path, nonempty=False) -> str:
    if not isinstance(raw, str) or (nonempty and not raw):
        raise ValidationError(path, "expected a nonempty string" if nonempty else "expected a string")
    return raw


def _num(raw, path) -> float:
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ValidationError(path, "expected a number")
    if not math.isfinite(raw):
        raise ValidationError(path, "must be finite")
    return float(raw)


def _concepts(raw, path) -> tuple[str, ...]:
    if not isinstance(raw, list):
        raise ValidationError(path, "expected a list of concept names")
    seen = set()
    for i, item in enumerate(raw):
        _str(item, f"{path}[{i}]", nonempty=True)
        if item in seen:
            raise ValidationError(f"{path}[{i}]", f"duplicate concept {item!r}")
        seen.add(item)
    return tuple(raw)


def _enum(cls, raw, path):
    try:
        return cls(raw)
    except ValueError:
        allowed = ", ".join(m.value for m in cls)
        raise ValidationError(path, f"expected one of {allowed}, got {raw!r}") from None


def _load_json(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError("", f"syntax error: {exc.msg} (line {exc.lineno}, column {exc.colno})") from None


def profile_from_dict(raw) -> ServiceProfile:
    _obj(raw, "", ("id", "name", "description", "inputs", "outputs", "provider", "qos"))
    qos_raw = raw["qos"]
    if not isinstance(qos_raw, list):
        raise ValidationError("qos", "expected a list")
    qos = []
    names = set()
    for i, q in enumerate(qos_raw):
        path = f"qos[{i}]"
        _obj(q, path, ("name", "value", "unit", "monotony"), ("kind", "predicate"))
        name = _str(q["name"], f"{path}.name", nonempty=True)
        if name in names:
            raise ValidationError(f"{path}.name", f"duplicate QoS attribute {name!r}")
        names.add(name)
        qos.append(
            QoSProperty(
                name=name,
                value=_num(q["value"], f"{path}.value"),
                unit=_str(q["unit"], f"{path}.unit"),
                monotony=_enum(Monotony, q["monotony"], f"{path}.monotony"),
                kind=_enum(QoSKind, q.get("kind", "static"), f"{path}.kind"),
                predicate=None if q.get("predicate") is None else _enum(Predicate, q["predicate"], f"{path}.predicate"),
            )
        )
    return ServiceProfile(
        id=_str(raw["id"], "id", nonempty=True),
        name=_str(raw["name"], "name"),
        description=_str(raw["description"], "description"),
        inputs=_concepts(raw["inputs"], "inputs"),
        outputs=_concepts(raw["outputs"], "outputs"),
        provider=_str(raw["provider"], "provider", nonempty=True),
        qos=tuple(qos),
    )


def request_from_dict(raw) -> Request:
    _obj(
        raw,
        "",
        ("name", "description", "inputs", "outputs"),
        ("weights", "constraints", "w1", "w2", "threshold"),
    )
    weights_raw = raw.get("weights", {})
    if not isinstance(weights_raw, dict):
        raise ValidationError("weights", "expected an object")
    weights = {}
    for k, v in weights_raw.items():
        if isinstance(v, bool) or not isinstance(v, int):
            raise ValidationError(f"weights.{k}", "expected an integer")
        if not 0 <= v <= 5:
            raise ValidationError(f"weights.{k}", f"weight {v} outside 0..5")
        weights[k] = v

    cons_raw = raw.get("constraints", [])
    if not isinstance(cons_raw, list):
        raise ValidationError("constraints", "expected a list")
    constraints = []
    for i, c in enumerate(cons_raw):
        path = f"constraints[{i}]"
        _obj(c, path, ("name", "threshold"))
        constraints.append(QoSConstraint(_str(c["name"], f"{path}.name", nonempty=True), _num(c["threshold"], f"{path}.threshold")))

    w1, w2 = resolve_weights(
        None if raw.get("w1") is None else _num(raw["w1"], "w1"),
        None if raw.get("w2") is None else _num(raw["w2"], "w2"),
    )
    threshold = _num(raw.get("threshold", 0.5), "threshold")
    if not 0.0 <= threshold <= 1.0:
        raise ValidationError("threshold", "must lie in [0, 1]")

    return Request(
        name=_str(raw["name"], "name"),
        description=_str(raw["description"], "description"),
        inputs=_concepts(raw["inputs"], "inputs"),
        outputs=_concepts(raw["outputs"], "outputs"),
        weights=weights,
        constraints=tuple(constraints),
        w1=w1,
        w2=w2,
        threshold=threshold,
    )


def resolve_weights(w1: float | None, w2: float | None) -> tuple[float, float]:
    """Fill in missing syntactic/semantic weights and check they sum to 1."""
    if w1 is None and w2 is None:
        w1 = w2 = 0.5
    elif w1 is None:
        w1 = 1.0 - w2
    elif w2 is None:
        w2 = 1.0 - w1
    for key, w in (("w1", w1), ("w2", w2)):
        if not 0.0 <= w <= 1.0:
            raise ValidationError(key, "must lie in [0, 1]")
    if abs(w1 + w2 - 1.0) > 1e-9:
        raise ValidationError("w1", f"w1 + w2 must equal 1, got {w1 + w2}")
    return w1, w2


def parse_profile(text: str) -> ServiceProfile:
    return profile_from_dict(_load_json(text))


def parse_request(text: str) -> Request:
    return request_from_dict(_load_json(text))


def dump_profile(profile: ServiceProfile) -> str:
    return json.dumps(profile.to_dict(), indent=2, ensure_ascii=False) + "\n"


def dump_request(request: Request) -> str:
    return json.dumps(request.to_dict(), indent=2, ensure_ascii=False) + "\n"


def load_profile(path) -> ServiceProfile:
    return parse_profile(Path(path).read_text(encoding="utf-8"))


def load_request(path) -> Request:
    return parse_request(Path(path).read_text(encoding="utf-8"))


# -- register depository ----------------------------------------------------------


def load_registry(directory) -> list[ServiceProfile]:
    """Read ``<directory>/<service>/profile.json`` for every service folder.

    All malformed folders are collected into one RegistryError.
    """
    root = Path(directory)
    if not root.is_dir():
        raise RegistryError([f"{root}: not a readable directory"])
    profiles, problems = [], []
    for folder in sorted(p for p in root.iterdir() if p.is_dir() and not p.name.startswith(".")):
        path = folder / "profile.json"
        try:
            profiles.append(load_profile(path))
        except FileNotFoundError:
            problems.append(f"{folder.name}: missing profile.json")
        except ValidationError as exc:
            problems.append(f"{folder.name}: {exc}")
    seen: dict[str, str] = {}
    for p in profiles:
        if p.id in seen:
            problems.append(f"duplicate service id {p.id!r}")
        seen[p.id] = p.provider
    if problems:
        raise RegistryError(problems)
    return sorted(profiles, key=lambda p: p.id)


def save_registry(directory, profiles) -> None:
    root = Path(directory)
    for p in profiles:
        folder = root / p.id
        folder.mkdir(parents=True, exist_ok=True)
        (folder / "profile.json").write_text(dump_profile(p), encoding="utf-8")


@dataclass(frozen=True)
class Violation:
    path: str
    concept: str

    @property
    def message(self) -> str:
        return f"{self.path}: concept {self.concept!r} is not declared in the ontology"

    def to_dict(self) -> dict:
        return {"path": self.path, "concept": self.concept, "message": self.message}


def validate_against_ontology(item: Union[ServiceProfile, Request], ont: Ontology) -> list[Violation]:
    violations = []
    for field_name in ("inputs", "outputs"):
        for i, concept in enumerate(getattr(item, field_name)):
            if concept not in ont:
                violations.append(Violation(f"{field_name}[{i}]", concept))
    return violations
