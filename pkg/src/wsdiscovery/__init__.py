"""Semantic web-service discovery: functional matching, QoS and reputation ranking, agent simulation."""

from .errors import DiscoveryError
from .matchmaking import SimilarityBreakdown, concept_sim, functional_sim, inputs_sim, outputs_sim, semantic_sim, syntactic_sim
from .ontology import Ontology, load_ontology, parse_ontology
from .profiles import QoSConstraint, QoSProperty, Request, ServiceProfile, load_registry, parse_profile, parse_request

__version__ = "0.1.0"

__all__ = [
    "DiscoveryError",
    "Ontology",
    "QoSConstraint",
    "QoSProperty",
    "Request",
    "ServiceProfile",
    "SimilarityBreakdown",
    "concept_sim",
    "functional_sim",
    "inputs_sim",
    "load_ontology",
    "load_registry",
    "outputs_sim",
    "parse_ontology",
    "parse_profile",
    "parse_request",
    "semantic_sim",
    "syntactic_sim",
]
