"""Domain ontology: named concepts, parent/equivalence links and restriction clauses.

Concepts form a DAG over equivalence classes. Each concept carries the
restriction conjuncts written in its own definition (``∀hasX.Y`` and ``=n hasX``);
the properties of a concept are its own clauses plus those of every ancestor,
counted with multiplicity.
"""

from __future__ import annotations

import enum
import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import OntologyError, UnknownConceptError


class ClauseKind(str, enum.Enum):
    UNIVERSAL = "all"
    EXACT = "exact"


@dataclass(frozen=True)
class RestrictionClause:
    kind: ClauseKind
    property: str
    range: str | None = None
    cardinality: int | None = None

    def __post_init__(self):
        if self.kind is ClauseKind.UNIVERSAL:
            if self.range is None or self.cardinality is not None:
                raise OntologyError("universal clause needs a range and no cardinality")
        elif self.kind is ClauseKind.EXACT:
            if self.cardinality is None or self.range is not None:
                raise OntologyError("exact clause needs a cardinality and no range")
            if self.cardinality < 0:
                raise OntologyError("cardinality must be non-negative")
        else:
            raise OntologyError(f"unknown clause kind {self.kind!r}")

    @classmethod
    def universal(cls, prop: str, range_: str) -> "RestrictionClause":
        return cls(ClauseKind.UNIVERSAL, prop, range=range_)

    @classmethod
    def exact(cls, prop: str, n: int) -> "RestrictionClause":
        return cls(ClauseKind.EXACT, prop, cardinality=n)

    def to_dict(self) -> dict:
        if self.kind is ClauseKind.UNIVERSAL:
            return {"kind": "all", "property": self.property, "range": self.range}
        return {"kind": "exact", "property": self.property, "n": self.cardinality}

    def __str__(self):
        if self.kind is ClauseKind.UNIVERSAL:
            return f"∀{self.property}.{self.range}"
        return f"={self.cardinality} {self.property}"


@dataclass(frozen=True)
class ConceptDef:
    name: str
    parents: tuple[str, ...] = ()
    equivalents: tuple[str, ...] = ()
    clauses: tuple[RestrictionClause, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "parents": list(self.parents),
            "equivalents": list(self.equivalents),
            "clauses": [c.to_dict() for c in self.clauses],
        }


class Ontology:
    """Immutable, validated set of concepts with precomputed subsumption data."""

    def __init__(self, concepts: Iterable[ConceptDef]):
        self._concepts: dict[str, ConceptDef] = {}
        for c in concepts:
            if not c.name:
                raise OntologyError("concept name must be nonempty")
            if c.name in self._concepts:
                raise OntologyError(f"duplicate concept {c.name!r}")
            self._concepts[c.name] = c
        for c in self._concepts.values():
            for ref in (*c.parents, *c.equivalents):
                if ref not in self._concepts:
                    raise OntologyError(f"concept {c.name!r} references undeclared concept {ref!r}")

        self._node = self._equivalence_nodes()
        self._members: dict[str, list[str]] = {}
        for name, node in self._node.items():
            self._members.setdefault(node, []).append(name)

        node_parents: dict[str, set[str]] = {n: set() for n in self._members}
        for c in self._concepts.values():
            node_parents[self._node[c.name]].update(self._node[p] for p in c.parents)
        self._ancestor_nodes = self._close(node_parents)

        self._bags: dict[str, Counter] = {}
        for name, c in self._concepts.items():
            bag = Counter(c.clauses)
            for anc in self.strict_ancestors(name):
                bag.update(self._concepts[anc].clauses)
            self._bags[name] = bag

    def _equivalence_nodes(self) -> dict[str, str]:
        parent = {name: name for name in self._concepts}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for c in self._concepts.values():
            for e in c.equivalents:
                a, b = find(c.name), find(e)
                if a != b:
                    # smallest name represents the class so node ids are stable
                    lo, hi = sorted((a, b))
                    parent[hi] = lo
        return {name: find(name) for name in self._concepts}

    @staticmethod
    def _close(node_parents: Mapping[str, set[str]]) -> dict[str, frozenset[str]]:
        closed: dict[str, frozenset[str]] = {}
        state: dict[str, int] = {}

        def visit(n, trail):
            if state.get(n) == 2:
                return closed[n]
            if state.get(n) == 1:
                cycle = trail[trail.index(n):] + [n]
                raise OntologyError("cycle in parent graph: " + " -> ".join(cycle))
            state[n] = 1
            acc: set[str] = set()
            for p in sorted(node_parents[n]):
                acc.add(p)
                acc |= visit(p, trail + [n])
            state[n] = 2
            closed[n] = frozenset(acc)
            return closed[n]

        for n in sorted(node_parents):
            visit(n, [])
        return closed

    # -- queries ---------------------------------------------------------------

    def __contains__(self, name: object) -> bool:
        return name in self._concepts

    def __len__(self) -> int:
        return len(self._concepts)

    def __iter__(self):
        return iter(self._concepts)

    @property
    def concepts(self) -> Mapping[str, ConceptDef]:
        return dict(self._concepts)

    def concept(self, name: str) -> ConceptDef:
        self._check(name)
        return self._concepts[name]

    def _check(self, *names: str) -> None:
        for n in names:
            if n not in self._concepts:
                raise UnknownConceptError(n)

    def strict_ancestors(self, name: str) -> frozenset[str]:
        """Declared concepts strictly above ``name`` (equivalence classes flattened)."""
        self._check(name)
        return frozenset(m for node in self._ancestor_nodes[self._node[name]] for m in self._members[node])

    def are_same_node(self, x: str, y: str) -> bool:
        self._check(x, y)
        return self._node[x] == self._node[y]

    def is_strict_subclass(self, x: str, y: str) -> bool:
        self._check(x, y)
        return self._node[y] in self._ancestor_nodes[self._node[x]]

    def clause_bag(self, name: str) -> Counter:
        self._check(name)
        return Counter(self._bags[name])

    def nbprop(self, name: str) -> int:
        self._check(name)
        return sum(self._bags[name].values())

    def has_common_ancestor(self, x: str, y: str) -> bool:
        """True iff some declared concept is a strict ancestor of both.

        Only meaningful once equality and both subclass directions are ruled out.
        """
        self._check(x, y)
        return bool(self._ancestor_nodes[self._node[x]] & self._ancestor_nodes[self._node[y]])

    def to_dict(self) -> dict:
        return {"concepts": [c.to_dict() for c in self._concepts.values()]}


# -- file format -----------------------------------------------------------------

_CONCEPT_KEYS = {"name", "parents", "equivalents", "clauses"}


def _str_list(value, path) -> tuple[str, ...]:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise OntologyError(f"{path}: expected a list of strings")
    return tuple(value)


def _parse_clause(raw, path) -> RestrictionClause:
    if not isinstance(raw, dict):
        raise OntologyError(f"{path}: expected an object")
    kind = raw.get("kind")
    if kind == "all":
        extra = set(raw) - {"kind", "property", "range"}
        if extra or not isinstance(raw.get("property"), str) or not isinstance(raw.get("range"), str):
            raise OntologyError(f"{path}: universal clause needs string 'property' and 'range' only")
        return RestrictionClause.universal(raw["property"], raw["range"])
    if kind == "exact":
        extra = set(raw) - {"kind", "property", "n"}
        n = raw.get("n")
        if extra or not isinstance(raw.get("property"), str) or not isinstance(n, int) or isinstance(n, bool):
            raise OntologyError(f"{path}: exact clause needs string 'property' and integer 'n' only")
        if n < 0:
            raise OntologyError(f"{path}.n: cardinality must be non-negative")
        return RestrictionClause.exact(raw["property"], n)
    raise OntologyError(f"{path}.kind: expected 'all' or 'exact', got {kind!r}")


def parse_ontology(text: str) -> Ontology:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise OntologyError(f"syntax error: {exc.msg}", exc.lineno, exc.colno) from None
    if not isinstance(doc, dict) or set(doc) != {"concepts"}:
        raise OntologyError("top level must be an object with exactly the key 'concepts'")
    if not isinstance(doc["concepts"], list):
        raise OntologyError("concepts: expected a list")

    defs = []
    for i, raw in enumerate(doc["concepts"]):
        path = f"concepts[{i}]"
        if not isinstance(raw, dict):
            raise OntologyError(f"{path}: expected an object")
        unknown = set(raw) - _CONCEPT_KEYS
        if unknown:
            raise OntologyError(f"{path}: unknown fields {sorted(unknown)}")
        name = raw.get("name")
        if not isinstance(name, str) or not name:
            raise OntologyError(f"{path}.name: expected a nonempty string")
        clauses = raw.get("clauses", [])
        if not isinstance(clauses, list):
            raise OntologyError(f"{path}.clauses: expected a list")
        defs.append(
            ConceptDef(
                name=name,
                parents=_str_list(raw.get("parents", []), f"{path}.parents"),
                equivalents=_str_list(raw.get("equivalents", []), f"{path}.equivalents"),
                clauses=tuple(_parse_clause(c, f"{path}.clauses[{j}]") for j, c in enumerate(clauses)),
            )
        )
    return Ontology(defs)


def dump_ontology(ont: Ontology) -> str:
    return json.dumps(ont.to_dict(), indent=2, ensure_ascii=False) + "\n"


def load_ontology(path) -> Ontology:
    with open(path, encoding="utf-8") as fh:
        return parse_ontology(fh.read())
