import itertools
import random
from collections import Counter
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from wsdiscovery.errors import UnknownConceptError
from wsdiscovery.matchmaking import (
    Role,
    concept_match,
    concept_sim,
    functional_sim,
    inputs_sim,
    outputs_sim,
    qgram_bag,
    semantic_sim,
    syntactic_sim,
)
from wsdiscovery.ontology import ConceptDef, Ontology

from oracles import OracleOntology, random_ontology, set_sim

TABLE1_LEFT = "fin, ind, nda, dal, alg, lgu, gun, uni, niv, ive, ver, ers, rsi, sit, ity".split(", ")
TABLE1_RIGHT = "fin, ind, nda, dal, alg, lge, ger, eri, ria, ian, anu, nun, uni, niv, ive, ver, ers, rsi, sit, ity".split(", ")


def test_qgram_bag_table1():
    assert qgram_bag("FindAlgUniversity") == Counter(TABLE1_LEFT)
    assert qgram_bag("FindAlgerianUniversity") == Counter(TABLE1_RIGHT)


def test_qgram_bag_edges():
    assert qgram_bag("ab") == Counter()
    assert qgram_bag("aaaa") == Counter({"aaa": 2})


def test_syntactic_sim_table1():
    assert syntactic_sim("FindAlgUniversity", "FindAlgerianUniversity") == pytest.approx(26 / 35, abs=1e-12)
    assert round(syntactic_sim("FindAlgUniversity", "FindAlgerianUniversity"), 3) == 0.743


def test_syntactic_sim_edges():
    assert syntactic_sim("abc", "abc") == 1
    assert syntactic_sim("abc", "xyz") == 0
    assert syntactic_sim("ab", "AB") == 1
    assert syntactic_sim("ab", "cd") == 0
    assert syntactic_sim("", "abc") == 0


def test_syntactic_sim_multiset():
    # "aaaa" has aaa twice, "aaa" once: 2*1 / (2+1)
    assert syntactic_sim("aaaa", "aaa") == pytest.approx(2 / 3)


@given(st.text(min_size=3, max_size=30), st.text(max_size=30))
def test_syntactic_sim_properties(a, b):
    assert syntactic_sim(a, a) == 1
    assert syntactic_sim(a, b) == syntactic_sim(b, a)
    assert 0 <= syntactic_sim(a, b) <= 1


@pytest.mark.parametrize(
    "x, y, role, case, expected",
    [
        ("University", "University", "input", 1, 1.0),
        ("PhdStudent", "Person", "input", 2, 1.0),
        ("AlgUniversity", "University", "output", 4, 0.8),
        ("University", "AlgUniversity", "output", 5, 1.0),
        ("Person", "PhdStudent", "input", 3, 0.6),
        ("PhdStudent", "Employer", "input", 6, 0.5),
        ("Person", "University", "input", 7, 0.0),
        ("GeographicArea", "Location", "input", 3, 0.4),
    ],
)
def test_concept_sim_examples(onto, x, y, role, case, expected):
    match = concept_match(onto, x, y, role)
    assert match.case == case
    assert match.value == pytest.approx(expected, abs=1e-9)


def test_case6_counts(onto):
    m = concept_match(onto, "PhdStudent", "Employer", Role.OUTPUT)
    assert (m.numerator, m.denominator) == (6, 12)


def test_concept_sim_role_asymmetry(onto):
    for x, y in itertools.permutations(onto, 2):
        if onto.is_strict_subclass(x, y):
            assert concept_sim(onto, x, y, "input") == 1
            assert concept_sim(onto, y, x, "output") == 1
    for x in onto:
        assert concept_sim(onto, x, x, "input") == concept_sim(onto, x, x, "output") == 1


def test_concept_sim_unknown(onto):
    with pytest.raises(UnknownConceptError):
        concept_sim(onto, "Dragon", "Person", "input")


def test_zero_property_subclass_is_exact():
    ont = Ontology([ConceptDef("A"), ConceptDef("B", parents=("A",))])
    assert concept_sim(ont, "A", "B", "input") == 1
    assert concept_sim(ont, "B", "A", "output") == 1
    ont = Ontology([ConceptDef("T"), ConceptDef("A", parents=("T",)), ConceptDef("B", parents=("T",))])
    assert concept_sim(ont, "A", "B", "input") == 0


def test_inputs_sim_examples(onto):
    assert inputs_sim(onto, ["PhdStudent"], ["Person"]) == 1
    assert inputs_sim(onto, ["GeographicArea", "Person"], ["Location", "PhdStudent"]) == pytest.approx(0.5, abs=1e-12)
    assert inputs_sim(onto, ["PhdStudent"], ["Person", "Location"]) == pytest.approx(0.5, abs=1e-12)


def test_outputs_sim_examples(onto):
    assert outputs_sim(onto, ["Location", "AlgUniversity"], ["Location", "University"]) == pytest.approx(0.9, abs=1e-12)
    assert outputs_sim(onto, ["University"], ["AlgUniversity"]) == 1
    assert outputs_sim(onto, ["Location", "AlgUniversity"], ["Location"]) == pytest.approx(0.5, abs=1e-12)


def test_degenerate_sets(onto):
    assert inputs_sim(onto, [], []) == 1
    assert inputs_sim(onto, [], ["Person", "Location"]) == pytest.approx(1 / 3)
    assert inputs_sim(onto, ["Person"], []) == 0
    assert outputs_sim(onto, [], []) == 1
    assert outputs_sim(onto, [], ["Person"]) == pytest.approx(1 / 2)
    assert outputs_sim(onto, ["Person"], []) == 0


def test_semantic_sim(onto, req1, wser1):
    assert semantic_sim(onto, req1, wser1) == pytest.approx(0.95, abs=1e-12)
    assert semantic_sim(onto, req1, replace(wser1, inputs=req1.inputs, outputs=req1.outputs)) == 1
    unrelated = replace(wser1, inputs=("University",), outputs=("Person",))
    assert semantic_sim(onto, replace(req1, outputs=("University",), inputs=("Person",)), replace(unrelated, inputs=("Location",), outputs=("Employer",))) == 0


def test_functional_sim(onto, req1, wser1):
    b = functional_sim(onto, req1, wser1, w1=0.0, w2=1.0)
    assert b.functional == b.iosim == pytest.approx(0.95, abs=1e-12)
    assert b.ntdsim == (b.nsim + b.tdsim) / 2
    assert b.iosim == (b.isim + b.osim) / 2
    assert b.nsim == pytest.approx(26 / 35)

    twin = replace(wser1, name=req1.name, description=req1.description, inputs=req1.inputs, outputs=req1.outputs)
    for w1 in (0.0, 0.3, 0.5, 1.0):
        assert functional_sim(onto, req1, twin, w1, 1 - w1).functional == pytest.approx(1.0, abs=1e-12)


def test_functional_uses_request_weights(onto, req1, wser1):
    r = replace(req1, w1=0.25, w2=0.75)
    b = functional_sim(onto, r, wser1)
    assert b.functional == 0.25 * b.ntdsim + 0.75 * b.iosim


concept_sets = st.lists(st.sampled_from(["University", "AlgUniversity", "Person", "Employer", "Student", "PhdStudent", "GeographicArea", "Location", "Institution"]), max_size=4, unique=True)


@given(concept_sets, concept_sets, st.randoms(use_true_random=False))
def test_set_sim_properties(onto, r, s, rnd):
    for fn in (inputs_sim, outputs_sim):
        v = fn(onto, r, s)
        assert 0 <= v <= 1
        r2, s2 = list(r), list(s)
        rnd.shuffle(r2)
        rnd.shuffle(s2)
        assert fn(onto, r2, s2) == v


@given(concept_sets, concept_sets, st.sampled_from(["University", "Person", "Location", "Employer"]))
def test_extra_service_input_never_helps(onto, r, s, extra):
    if extra in s or not r or len(r) > len(s):
        return
    best = [max((concept_sim(onto, a, b, "input") for b in s), default=0.0) for a in r]
    if any(concept_sim(onto, a, extra, "input") > v for a, v in zip(r, best)):
        return  # not an unmatched input
    assert inputs_sim(onto, r, [*s, extra]) <= inputs_sim(onto, r, s) + 1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_oracle_concept_sim(seed):
    defs, ont = random_ontology(random.Random(seed))
    oracle = OracleOntology(defs)
    for x, y in itertools.product(ont, repeat=2):
        for role in ("input", "output"):
            assert concept_sim(ont, x, y, role) == oracle.concept_sim(x, y, role)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_oracle_set_sim(seed):
    rng = random.Random(seed)
    defs, ont = random_ontology(rng)
    oracle = OracleOntology(defs)
    names = list(ont)
    for _ in range(5):
        r = rng.sample(names, rng.randint(0, min(3, len(names))))
        s = rng.sample(names, rng.randint(0, min(3, len(names))))
        assert inputs_sim(ont, r, s) == set_sim(oracle, r, s, "input")
        assert outputs_sim(ont, r, s) == set_sim(oracle, r, s, "output")
