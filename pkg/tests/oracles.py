"""Brute-force reference implementations used as test oracles.

None of these import the matching code under test; subsumption is recomputed
with a Warshall closure over parent and equivalence edges, and the I/O
aggregation enumerates every subset instead of sorting.
"""

import itertools
import random
from collections import Counter
from fractions import Fraction

from wsdiscovery.ontology import ConceptDef, Ontology, RestrictionClause
from wsdiscovery.errors import OntologyError


class OracleOntology:
    def __init__(self, defs):
        self.defs = {d.name: d for d in defs}
        names = list(self.defs)
        reach = {a: {b: a == b for b in names} for a in names}
        for d in defs:
            for p in d.parents:
                reach[d.name][p] = True
            for e in d.equivalents:
                reach[d.name][e] = True
                reach[e][d.name] = True
        for k in names:
            for i in names:
                if reach[i][k]:
                    for j in names:
                        if reach[k][j]:
                            reach[i][j] = True
        self.le = reach

    def same(self, x, y):
        return self.le[x][y] and self.le[y][x]

    def strict_sub(self, x, y):
        return self.le[x][y] and not self.same(x, y)

    def strict_ancestors(self, x):
        return {z for z in self.defs if self.strict_sub(x, z)}

    def bag(self, x):
        b = Counter(self.defs[x].clauses)
        for z in self.strict_ancestors(x):
            b.update(self.defs[z].clauses)
        return b

    def nbprop(self, x):
        return sum(self.bag(x).values())

    def concept_sim(self, x, y, role):
        if self.same(x, y):
            return 1.0
        if role == "input":
            if self.strict_sub(x, y):
                return 1.0
            if self.strict_sub(y, x):
                return self.nbprop(x) / self.nbprop(y) if self.nbprop(y) else 1.0
        else:
            if self.strict_sub(x, y):
                return self.nbprop(y) / self.nbprop(x) if self.nbprop(x) else 1.0
            if self.strict_sub(y, x):
                return 1.0
        if self.strict_ancestors(x) & self.strict_ancestors(y):
            bx, by = self.bag(x), self.bag(y)
            inter = sum((bx & by).values())
            union = sum((bx | by).values())
            return inter / union if union else 0.0
        return 0.0


def _best_subset_mean(values, k):
    """Float mean of the k-subset with the largest exact sum."""
    best = max(itertools.combinations(values, k), key=lambda c: sum(Fraction(v) for v in c))
    total = 0.0
    for v in sorted(best, reverse=True):
        total += v
    return total / k


def _sum_desc(values):
    total = 0.0
    for v in sorted(values, reverse=True):
        total += v
    return total


def set_sim(oracle, request, service, role):
    r, s = list(request), list(service)
    if not r and not s:
        return 1.0
    if not r:
        return 1.0 / (len(s) + 1)
    if not s:
        return 0.0
    best = [max(oracle.concept_sim(a, b, role) for b in s) for a in r]
    m = len(r) - len(s)
    if role == "input":
        if m < 0:
            return _sum_desc(best) / len(r) / (abs(m) + 1)
        return _best_subset_mean(best, len(s))
    if m > 0:
        return _best_subset_mean(best, len(s)) / (m + 1)
    return _sum_desc(best) / len(r)


CLAUSE_POOL = [
    RestrictionClause.universal("hasA", "A"),
    RestrictionClause.exact("hasA", 1),
    RestrictionClause.universal("hasB", "B"),
    RestrictionClause.exact("hasB", 1),
    RestrictionClause.universal("hasC", "C"),
    RestrictionClause.exact("hasC", 2),
]


def random_ontology(rng: random.Random, max_concepts=6, max_clauses=4):
    """Random acyclic ontology; retries until the generated links are consistent."""
    while True:
        n = rng.randint(1, max_concepts)
        names = [f"C{i}" for i in range(n)]
        defs = []
        for i, name in enumerate(names):
            parents = tuple(sorted(set(rng.sample(names[:i], k=min(i, rng.choice([0, 1, 1, 2]))))))
            equivalents = ()
            if i and rng.random() < 0.15:
                equivalents = (rng.choice(names[:i]),)
            clauses = tuple(rng.choice(CLAUSE_POOL) for _ in range(rng.randint(0, max_clauses)))
            defs.append(ConceptDef(name, parents, equivalents, clauses))
        try:
            return defs, Ontology(defs)
        except OntologyError:
            continue
