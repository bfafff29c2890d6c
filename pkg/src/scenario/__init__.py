"""Scenario description language: model, parser, serializer and the shipped corpus."""

from scenario.corpus import CORPUS_DIR, corpus_names, corpus_path, load_corpus, load_scenario, resolve
from scenario.model import (
    FORMAT_VERSION,
    FailureInjection,
    InjectionKind,
    MitigationKey,
    ScenarioSpec,
    WorkloadDecl,
)
from scenario.parser import Diagnostic, parse_scenario
from scenario.writer import serialize_scenario

__all__ = [
    "CORPUS_DIR", "corpus_names", "corpus_path", "load_corpus", "load_scenario", "resolve",
    "FORMAT_VERSION", "FailureInjection", "InjectionKind", "MitigationKey", "ScenarioSpec", "WorkloadDecl",
    "Diagnostic", "parse_scenario", "serialize_scenario",
]
