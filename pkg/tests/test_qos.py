import json

import pytest
from hypothesis import given, strategies as st

from wsdiscovery.errors import QoSError
from wsdiscovery.profiles import Monotony, QoSConstraint, QoSKind, QoSProperty, ServiceProfile
from wsdiscovery.qos import (
    MeasurementLog,
    effective_value,
    filter_candidates,
    load_measurements,
    normalization_bounds,
    normalize,
    qos_score,
    qos_scores,
    record_measurement,
)


def svc(sid, **attrs):
    """Service whose attributes are given as name=(value, monotony[, kind])."""
    qos = []
    for name, spec in attrs.items():
        value, monotony, *kind = spec
        qos.append(QoSProperty(name, value, "u", Monotony(monotony), QoSKind(kind[0]) if kind else QoSKind.STATIC))
    return ServiceProfile(sid, sid, "", (), (), "P", tuple(qos))


def test_price_constraint():
    cons = [QoSConstraint("ExecutionPrice", 100)]
    assert filter_candidates([svc("a", ExecutionPrice=(150, "decrease"))], cons) == []
    kept = svc("b", ExecutionPrice=(80, "decrease"))
    assert filter_candidates([kept], cons) == [kept]


def test_reliability_constraint():
    cons = [QoSConstraint("Reliability", 0.9)]
    good, bad = svc("a", Reliability=(0.95, "increase")), svc("b", Reliability=(0.85, "increase"))
    assert filter_candidates([good, bad], cons) == [good]


def test_missing_attribute_eliminated():
    assert filter_candidates([svc("a", Other=(1, "increase"))], [QoSConstraint("Price", 10)]) == []


def test_no_constraints_keeps_everything():
    services = [svc("a"), svc("b")]
    assert filter_candidates(services, []) == services


def test_filter_uses_measurements():
    s = svc("a", ResponseTime=(100, "decrease", "dynamic"))
    log = MeasurementLog()
    log.record(s, "ResponseTime", 900)
    assert filter_candidates([s], [QoSConstraint("ResponseTime", 500)]) == [s]
    assert filter_candidates([s], [QoSConstraint("ResponseTime", 500)], log) == []


def test_normalize_examples():
    assert normalize([200, 600, 1000], "decrease") == [1, 0.5, 0]
    assert normalize([200, 600, 1000], "increase") == [0, 0.5, 1]
    assert normalize([7, 7, 7], "increase") == [1, 1, 1]
    assert normalize([7, 7, 7], "decrease") == [1, 1, 1]


def test_normalize_empty():
    with pytest.raises(QoSError):
        normalize([], "increase")


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=10), st.sampled_from(["increase", "decrease"]))
def test_normalize_bounds(values, monotony):
    normed = normalize(values, monotony)
    assert all(0 <= v <= 1 for v in normed)


def test_qos_score_worked_example():
    # ResponseTime normalizes to 0.5 for "b", ExecutionPrice to 1.0
    cohort = [
        svc("a", ResponseTime=(200, "decrease"), ExecutionPrice=(50, "decrease")),
        svc("b", ResponseTime=(600, "decrease"), ExecutionPrice=(10, "decrease")),
        svc("c", ResponseTime=(1000, "decrease"), ExecutionPrice=(90, "decrease")),
    ]
    weights = {"ResponseTime": 4, "ExecutionPrice": 1}
    assert qos_score(cohort[1], cohort, weights) == pytest.approx(0.6, abs=1e-12)


def test_qos_score_degenerate():
    a = svc("a", ResponseTime=(200, "decrease"))
    assert qos_score(a, [a], {"ResponseTime": 0}) == 0
    assert qos_score(a, [a], {}) == 0
    assert qos_score(a, [a], {"ResponseTime": 3}) == 1


def test_missing_attribute_counts_as_zero():
    a = svc("a", ResponseTime=(200, "decrease"), Price=(5, "decrease"))
    b = svc("b", ResponseTime=(200, "decrease"))
    scores = qos_scores([a, b], {"ResponseTime": 1, "Price": 1})
    assert scores == {"a": 1.0, "b": 0.5}


def test_qos_score_requires_membership():
    a, b = svc("a"), svc("b")
    with pytest.raises(QoSError):
        qos_score(a, [b], {"x": 1})


def _cohort(values):
    return [svc(f"s{i}", RT=(v, "decrease"), Rel=(v / 10, "increase")) for i, v in enumerate(values)]


@given(st.lists(st.integers(1, 1000), min_size=1, max_size=8), st.integers(1, 5), st.integers(0, 5), st.integers(2, 7))
def test_qos_score_scale_invariance(values, w_rt, w_rel, k):
    cohort = _cohort(values)
    base = qos_scores(cohort, {"RT": w_rt, "Rel": w_rel})
    scaled = qos_scores(cohort, {"RT": w_rt * k, "Rel": w_rel * k})
    for sid in base:
        assert scaled[sid] == pytest.approx(base[sid], abs=1e-12)


@given(st.lists(st.integers(1, 1000), min_size=2, max_size=8), st.data())
def test_lowering_decrease_value_never_hurts(values, data):
    i = data.draw(st.integers(0, len(values) - 1))
    drop = data.draw(st.integers(1, 999))
    cohort = [svc(f"s{j}", RT=(v, "decrease")) for j, v in enumerate(values)]
    before = qos_scores(cohort, {"RT": 3})[f"s{i}"]
    lowered = list(values)
    lowered[i] = values[i] - drop
    cohort2 = [svc(f"s{j}", RT=(v, "decrease")) for j, v in enumerate(lowered)]
    assert qos_scores(cohort2, {"RT": 3})[f"s{i}"] >= before


def test_measurements():
    s = svc("a", ResponseTime=(600, "decrease", "dynamic"), ExecutionPrice=(10, "decrease"))
    log = MeasurementLog()
    rt = s.qos_property("ResponseTime")
    assert effective_value(log, s, rt) == 600
    record_measurement(log, s, "ResponseTime", 400)
    record_measurement(log, s, "ResponseTime", 800)
    assert effective_value(log, s, rt) == 600
    record_measurement(log, s, "ResponseTime", 300)
    assert effective_value(log, s, rt) == 500
    with pytest.raises(QoSError, match="static"):
        record_measurement(log, s, "ExecutionPrice", 5)
    with pytest.raises(QoSError):
        record_measurement(log, s, "Nope", 5)
    assert log.snapshot(s).qos_property("ResponseTime").value == 500
    assert normalization_bounds([s], "ResponseTime", log) == (500, 500)


def test_load_measurements(tmp_path):
    s = svc("a", ResponseTime=(600, "decrease", "dynamic"))
    path = tmp_path / "m.jsonl"
    path.write_text("\n".join(json.dumps({"service": "a", "name": "ResponseTime", "value": v}) for v in (100, 300)) + "\n")
    log = load_measurements(path, {"a": s})
    assert log.observations("a", "ResponseTime") == [100, 300]
    path.write_text('{"service": "zzz", "name": "ResponseTime", "value": 1}\n')
    with pytest.raises(QoSError, match=":1"):
        load_measurements(path, {"a": s})
