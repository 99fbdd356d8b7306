"""Command-line entry point.

Exit codes: 0 success, 1 validation failure, 2 usage error (including missing
files), 3 internal error. JSON results go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import jsonio
from .agents import CONSUMER_SCOPE, QOS_SCOPES, DiscoverySystem
from .errors import DiscoveryError, ValidationError
from .matchmaking import functional_sim, inputs_match, outputs_match, qgram_bag, syntactic_sim
from .ontology import load_ontology
from .profiles import (
    load_registry,
    profile_from_dict,
    request_from_dict,
    resolve_weights,
    validate_against_ontology,
)
from .qos import filter_candidates, load_measurements, MeasurementLog, normalization_bounds, normalized_attribute, qos_scores
from .reputation import MINMAX, SCALE, RatingRecord, RatingStore, raw_rate, rates, reputation_scores
from .simulation import SimulationConfig, run_simulation

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _read(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise UsageError(f"no such file: {path}") from None
    except IsADirectoryError:
        raise UsageError(f"expected a file, got a directory: {path}") from None


def _read_json(path):
    try:
        return json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise ValidationError(str(path), f"syntax error: {exc.msg} (line {exc.lineno}, column {exc.colno})") from None


def _ontology(path):
    if not Path(path).exists():
        raise UsageError(f"no such file: {path}")
    return load_ontology(path)


def _request(path):
    return request_from_dict(_read_json(path))


def _profile(path):
    return profile_from_dict(_read_json(path))


def _out(obj) -> None:
    sys.stdout.write(jsonio.dumps(obj))


def _check_concepts(ont, *items) -> None:
    violations = [v.to_dict() for item in items for v in validate_against_ontology(item, ont)]
    if violations:
        _out(violations)
        raise DiscoveryError("unknown concepts in input")


def _override_weights(request, args):
    if args.w1 is None and args.w2 is None:
        return request
    try:
        w1, w2 = resolve_weights(args.w1, args.w2)
    except ValidationError as exc:
        raise UsageError(str(exc)) from None
    return replace(request, w1=w1, w2=w2)


def _load_store(path) -> RatingStore:
    if path is None or not Path(path).exists():
        return RatingStore()
    return RatingStore.load(path)


# -- subcommands ---------------------------------------------------------------


def cmd_validate(args) -> int:
    ont = _ontology(args.ontology)
    violations = []
    for path in args.files:
        raw = _read_json(path)
        try:
            item = profile_from_dict(raw) if isinstance(raw, dict) and "provider" in raw else request_from_dict(raw)
        except ValidationError as exc:
            violations.append({"file": str(path), "path": exc.path, "message": str(exc)})
            continue
        violations.extend({"file": str(path), **v.to_dict()} for v in validate_against_ontology(item, ont))
    _out(violations)
    return EXIT_INVALID if violations else EXIT_OK


def cmd_match(args) -> int:
    ont = _ontology(args.ontology)
    request = _override_weights(_request(args.request), args)
    profile = _profile(args.profile)
    _check_concepts(ont, request, profile)
    _out(functional_sim(ont, request, profile).to_dict())
    return EXIT_OK


def cmd_discover(args) -> int:
    ont = _ontology(args.ontology)
    request = _request(args.request)
    if args.threshold is not None:
        request = replace(request, threshold=args.threshold)
    if not Path(args.registry).is_dir():
        raise UsageError(f"no such directory: {args.registry}")
    profiles = load_registry(args.registry)
    _check_concepts(ont, request, *profiles)

    registry: dict[str, list] = {}
    for p in profiles:
        registry.setdefault(p.provider, []).append(p)
    log = MeasurementLog()
    if args.measurements:
        load_measurements(_existing(args.measurements), {p.id: p for p in profiles}, log)
    logs = {name: log for name in registry}

    system = DiscoverySystem(
        ont,
        registry,
        store=_load_store(args.ratings),
        qos_scope=args.qos_scope,
        reputation_mode=args.reputation_mode,
        staleness_horizon=None,
        logs=logs,
    )
    system.prime_cache()
    found = system.discover(request, use_cache=args.use_cache)
    _out([r.to_dict() for r in found.rows])
    return EXIT_OK


def _existing(path):
    if not Path(path).exists():
        raise UsageError(f"no such file: {path}")
    return path


def _parse_score(text):
    name, sep, value = text.partition("=")
    if not sep or not name:
        raise UsageError(f"--score expects name=int, got {text!r}")
    try:
        return name, int(value)
    except ValueError:
        raise UsageError(f"--score value must be an integer, got {value!r}") from None


def cmd_rate(args) -> int:
    scores = dict(_parse_score(s) for s in args.score)
    store = _load_store(args.ratings)
    record = RatingRecord(
        consumer=args.consumer,
        request=args.request,
        provider=args.provider,
        service=args.service,
        scores=scores,
        timestamp=store.latest_timestamp() + 1,
    )
    store.add(record)
    store.save(args.ratings)
    _out(record.to_dict())
    return EXIT_OK


def cmd_simulate(args) -> int:
    config = SimulationConfig.load(_existing(args.config))
    text = run_simulation(config, parallel=args.parallel).to_json()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _grams(a, b):
    ga, gb = qgram_bag(a), qgram_bag(b)
    return {
        "request": a,
        "service": b,
        "request_grams": sum(ga.values()),
        "service_grams": sum(gb.values()),
        "common": sorted((ga & gb).elements()),
        "value": syntactic_sim(a, b),
    }


def _set_trace(trace):
    return {
        "pairs": [
            {
                "request": p.request_concept,
                "service": p.service_concept,
                "case": p.case,
                "value": p.value,
                "numerator": p.numerator,
                "denominator": p.denominator,
            }
            for p in trace.pairs
        ],
        "best": trace.best,
        "sorted": trace.sorted_best,
        "m": trace.m,
        "value": trace.value,
    }


def cmd_explain(args) -> int:
    ont = _ontology(args.ontology)
    request = _override_weights(_request(args.request), args)
    profile = _profile(args.profile)
    _check_concepts(ont, request, profile)

    cohort = [profile]
    if args.registry:
        cohort += [p for p in load_registry(args.registry) if p.id != profile.id]
    survivors = filter_candidates(cohort, request.constraints)
    survivor_ids = [p.id for p in survivors]
    active = sorted(k for k, w in request.weights.items() if w > 0)

    qos = {"cohort": [p.id for p in cohort], "survivors": survivor_ids, "attributes": {}, "score": None}
    reputation = {"cohort": survivor_ids, "mode": args.reputation_mode, "attributes": {}, "score": None}
    if profile.id in survivor_ids:
        store = _load_store(args.ratings)
        for name in active:
            bounds = normalization_bounds(survivors, name)
            prop = profile.qos_property(name)
            qos["attributes"][name] = {
                "weight": request.weights[name],
                "monotony": None if prop is None else prop.monotony.value,
                "value": None if prop is None else prop.value,
                "min": None if bounds is None else bounds[0],
                "max": None if bounds is None else bounds[1],
                "normalized": normalized_attribute(survivors, name).get(profile.id, 0.0),
            }
            reputation["attributes"][name] = {
                "weight": request.weights[name],
                "raw": raw_rate(store, profile.id, name),
                "cohort_raw": {sid: raw_rate(store, sid, name) for sid in survivor_ids},
                "rate": rates(store, name, survivor_ids, args.reputation_mode)[profile.id],
            }
        qos["score"] = qos_scores(survivors, request.weights)[profile.id]
        reputation["score"] = reputation_scores(store, request.weights, survivor_ids, args.reputation_mode)[profile.id]

    _out(
        {
            "name": _grams(request.name, profile.name),
            "description": _grams(request.description, profile.description),
            "inputs": _set_trace(inputs_match(ont, request.inputs, profile.inputs)),
            "outputs": _set_trace(outputs_match(ont, request.outputs, profile.outputs)),
            "breakdown": functional_sim(ont, request, profile).to_dict(),
            "weights": {"w1": request.w1, "w2": request.w2},
            "qos": qos,
            "reputation": reputation,
        }
    )
    return EXIT_OK


# -- parser --------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wsdiscovery", description="Semantic, QoS- and reputation-aware web service discovery.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="parse files and check their concepts against an ontology")
    p.add_argument("ontology")
    p.add_argument("files", nargs="*", help="profile or request JSON files")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("match", help="functional similarity of one request and one profile")
    p.add_argument("ontology")
    p.add_argument("request")
    p.add_argument("profile")
    p.add_argument("--w1", type=float)
    p.add_argument("--w2", type=float)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("discover", help="rank a registry against a request")
    p.add_argument("--ontology", required=True)
    p.add_argument("--registry", required=True)
    p.add_argument("--request", required=True)
    p.add_argument("--ratings")
    p.add_argument("--threshold", type=float)
    p.add_argument("--qos-scope", choices=QOS_SCOPES, default=CONSUMER_SCOPE)
    p.add_argument("--reputation-mode", choices=(MINMAX, SCALE), default=MINMAX)
    p.add_argument("--measurements", help="JSON lines of observed dynamic QoS values")
    p.add_argument("--use-cache", action="store_true", help="answer from rated services before asking providers")
    p.set_defaults(func=cmd_discover)

    p = sub.add_parser("rate", help="add or replace a consumer rating")
    p.add_argument("--ratings", required=True)
    p.add_argument("--consumer", required=True)
    p.add_argument("--request", required=True)
    p.add_argument("--service", required=True)
    p.add_argument("--provider", required=True)
    p.add_argument("--score", action="append", required=True, metavar="NAME=INT")
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("simulate", help="run the seeded agent simulation")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--parallel", action="store_true", help="run provider matching on a thread pool")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("explain", help="print every intermediate quantity of a match")
    p.add_argument("--ontology", required=True)
    p.add_argument("--request", required=True)
    p.add_argument("--profile", required=True)
    p.add_argument("--registry", help="other services forming the QoS/reputation cohort")
    p.add_argument("--ratings")
    p.add_argument("--reputation-mode", choices=(MINMAX, SCALE), default=MINMAX)
    p.add_argument("--w1", type=float)
    p.add_argument("--w2", type=float)
    p.set_defaults(func=cmd_explain)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DiscoveryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
