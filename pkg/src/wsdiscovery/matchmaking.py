"""Functional matching: 3-gram text similarity plus ontology-based I/O similarity."""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, asdict
from typing import Iterable, Sequence

from .ontology import Ontology

Q = 3


class Role(str, enum.Enum):
    INPUT = "input"
    OUTPUT = "output"


def qgram_bag(s: str) -> Counter:
    folded = s.strip().lower()
    return Counter(folded[i : i + Q] for i in range(len(folded) - Q + 1))


def syntactic_sim(a: str, b: str) -> float:
    """Dice coefficient over 3-gram multisets."""
    ga, gb = qgram_bag(a), qgram_bag(b)
    total = sum(ga.values()) + sum(gb.values())
    if total == 0:
        return 1.0 if a.strip().lower() == b.strip().lower() else 0.0
    return 2 * sum((ga & gb).values()) / total


@dataclass(frozen=True)
class ConceptMatch:
    request_concept: str
    service_concept: str
    role: Role
    case: int
    value: float
    numerator: int | None = None
    denominator: int | None = None


def concept_match(ont: Ontology, x: str, y: str, role: Role) -> ConceptMatch:
    """Similarity of request concept ``x`` to service concept ``y`` with the rule used.

    Cases, first match wins: 1 same node; 2/3 inputs with x below / above y;
    4/5 outputs with x below / above y; 6 siblings under a common ancestor;
    7 unrelated.
    """
    role = Role(role)

    def ratio(case, num, den, empty):
        value = num / den if den else empty
        return ConceptMatch(x, y, role, case, value, num, den)

    if ont.are_same_node(x, y):
        return ConceptMatch(x, y, role, 1, 1.0)
    x_below = ont.is_strict_subclass(x, y)
    y_below = ont.is_strict_subclass(y, x)
    if role is Role.INPUT:
        if x_below:
            return ConceptMatch(x, y, role, 2, 1.0)
        if y_below:
            return ratio(3, ont.nbprop(x), ont.nbprop(y), 1.0)
    else:
        if x_below:
            return ratio(4, ont.nbprop(y), ont.nbprop(x), 1.0)
        if y_below:
            return ConceptMatch(x, y, role, 5, 1.0)
    if ont.has_common_ancestor(x, y):
        bx, by = ont.clause_bag(x), ont.clause_bag(y)
        return ratio(6, sum((bx & by).values()), sum((bx | by).values()), 0.0)
    return ConceptMatch(x, y, role, 7, 0.0)


def concept_sim(ont: Ontology, x: str, y: str, role: Role) -> float:
    return concept_match(ont, x, y, role).value


@dataclass
class SetMatch:
    """Trace of one inputs/outputs aggregation."""

    role: Role
    best: list[float]
    sorted_best: list[float]
    m: int
    value: float
    pairs: list[ConceptMatch]


def _set_match(ont: Ontology, request: Sequence[str], service: Sequence[str], role: Role) -> SetMatch:
    r, s = list(request), list(service)
    pairs = [concept_match(ont, a, b, role) for a in r for b in s]
    best = [max((p.value for p in pairs if p.request_concept == a), default=0.0) for a in r]
    ordered = sorted(best, reverse=True)
    m = len(r) - len(s)

    if not r and not s:
        value = 1.0
    elif not r:
        value = 1.0 / (len(s) + 1)
    elif not s:
        value = 0.0
    elif role is Role.INPUT:
        # extra service inputs the request cannot supply are penalised
        if m < 0:
            value = sum(ordered) / len(r) / (-m + 1)
        else:
            value = sum(ordered[: len(s)]) / len(s)
    else:
        # requested outputs the service does not produce are penalised
        if m > 0:
            value = sum(ordered[: len(s)]) / len(s) / (m + 1)
        else:
            value = sum(ordered) / len(r)
    return SetMatch(role, best, ordered, m, value, pairs)


def inputs_match(ont: Ontology, r_inputs: Iterable[str], s_inputs: Iterable[str]) -> SetMatch:
    return _set_match(ont, tuple(r_inputs), tuple(s_inputs), Role.INPUT)


def outputs_match(ont: Ontology, r_outputs: Iterable[str], s_outputs: Iterable[str]) -> SetMatch:
    return _set_match(ont, tuple(r_outputs), tuple(s_outputs), Role.OUTPUT)


def inputs_sim(ont: Ontology, r_inputs: Iterable[str], s_inputs: Iterable[str]) -> float:
    return inputs_match(ont, r_inputs, s_inputs).value


def outputs_sim(ont: Ontology, r_outputs: Iterable[str], s_outputs: Iterable[str]) -> float:
    return outputs_match(ont, r_outputs, s_outputs).value


def semantic_sim(ont: Ontology, request, profile) -> float:
    return (inputs_sim(ont, request.inputs, profile.inputs) + outputs_sim(ont, request.outputs, profile.outputs)) / 2


@dataclass(frozen=True)
class SimilarityBreakdown:
    nsim: float
    tdsim: float
    ntdsim: float
    isim: float
    osim: float
    iosim: float
    functional: float

    def to_dict(self) -> dict:
        return asdict(self)


def functional_sim(ont: Ontology, request, profile, w1: float | None = None, w2: float | None = None) -> SimilarityBreakdown:
    """Weighted blend of text similarity and I/O similarity.

    ``w1``/``w2`` default to the request's own weights.
    """
    w1 = request.w1 if w1 is None else w1
    w2 = request.w2 if w2 is None else w2
    nsim = syntactic_sim(request.name, profile.name)
    tdsim = syntactic_sim(request.description, profile.description)
    ntdsim = (nsim + tdsim) / 2
    isim = inputs_sim(ont, request.inputs, profile.inputs)
    osim = outputs_sim(ont, request.outputs, profile.outputs)
    iosim = (isim + osim) / 2
    return SimilarityBreakdown(nsim, tdsim, ntdsim, isim, osim, iosim, w1 * ntdsim + w2 * iosim)
