"""Per-document, per-topic relevance decisions.

A document is relevant to a risk factor when its concept graph carries at
least one edge into the COVID-19 node (the gate) and some non-COVID
HealthStatus node sits closer to the factor's query phrases than the
factor's cosine-distance threshold (strict less-than).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .corpus import tokenize
from .embeddings import EmbeddingStore, min_distance_to_term
from .ontology import COVID_LABEL, ConceptGraph

DEFAULT_THRESHOLD = 0.5  # config default, a neutral midpoint of the usable range


@dataclass(frozen=True)
class RiskFactorSpec:
    """A named topic: query phrases (term lists) and a distance threshold.

    Listing both an acronym and its expansion as separate phrases lets the
    minimum over phrases absorb acronym lookup failures (e.g. ["copd"] plus
    ["chronic", "obstructive", "pulmonary", "disease"]).
    """

    name: str
    query_terms: tuple[tuple[str, ...], ...]
    threshold: float = DEFAULT_THRESHOLD

    def __post_init__(self):
        if not self.query_terms or any(not phrase for phrase in self.query_terms):
            raise ValueError(f"risk factor {self.name!r}: query phrases must be non-empty")
        if not math.isfinite(self.threshold) or not (0.0 < self.threshold < 2.0):
            raise ValueError(f"risk factor {self.name!r}: threshold must be finite in (0, 2)")


@dataclass(frozen=True)
class RelevanceVerdict:
    doc_id: str
    risk_factor: str
    relevant: bool
    min_distance: float | None
    matched_graph_term: str | None
    has_covid_triple: bool

    def to_json_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "risk_factor": self.risk_factor,
            "relevant": self.relevant,
            "min_distance": self.min_distance,
            "matched_graph_term": self.matched_graph_term,
            "has_covid_triple": self.has_covid_triple,
        }


def load_risk_factor_specs(path: str | Path) -> list[RiskFactorSpec]:
    """Read a risk-factor file: JSON list of {"name", "terms": [[str]], "threshold"}."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, list):
        raise ValueError(f"{path}: risk factor file must be a JSON list")
    specs = []
    for i, item in enumerate(raw):
        if not isinstance(item, dict) or not isinstance(item.get("name"), str):
            raise ValueError(f"{path}: entry {i} must be an object with a 'name'")
        terms = item.get("terms")
        if not isinstance(terms, list) or not all(
            isinstance(p, list) and p and all(isinstance(t, str) and t for t in p)
            for p in terms
        ):
            raise ValueError(f"{path}: entry {i}: 'terms' must be a list of non-empty string lists")
        threshold = item.get("threshold", DEFAULT_THRESHOLD)
        if not isinstance(threshold, (int, float)) or isinstance(threshold, bool):
            raise ValueError(f"{path}: entry {i}: 'threshold' must be a number")
        specs.append(
            RiskFactorSpec(
                name=item["name"],
                query_terms=tuple(tuple(t.casefold() for t in p) for p in terms),
                threshold=float(threshold),
            )
        )
    return specs


def judge(
    graph: ConceptGraph,
    spec: RiskFactorSpec,
    store: EmbeddingStore,
    covid_label: str = COVID_LABEL,
) -> RelevanceVerdict:
    """Decide one (document, risk factor) pair.

    Candidate terms are the token lists of every HealthStatus node except
    the COVID-19 node; the distance is the minimum over all (candidate,
    query phrase) pairs. A fully out-of-vocabulary pairing yields no
    distance and is simply not relevant, never an error.
    """
    has_covid = graph.has_edge_to_label(covid_label)

    candidates: list[tuple[str, tuple[str, ...]]] = []
    for node in graph.health_status_nodes():
        if node.label == covid_label:
            continue
        terms = tuple(t.normalized for t in tokenize(node.label))
        if terms:
            candidates.append((node.label, terms))

    best_distance: float | None = None
    best_label: str | None = None
    candidate_terms = [terms for _, terms in candidates]
    for phrase in spec.query_terms:
        found = min_distance_to_term(store, candidate_terms, phrase)
        if found is None:
            continue
        distance, winning_terms = found
        if best_distance is None or distance < best_distance:
            best_distance = distance
            best_label = next(
                label for label, terms in candidates if list(terms) == winning_terms
            )

    relevant = has_covid and best_distance is not None and best_distance < spec.threshold
    return RelevanceVerdict(
        doc_id=graph.doc_id,
        risk_factor=spec.name,
        relevant=relevant,
        min_distance=best_distance,
        matched_graph_term=best_label,
        has_covid_triple=has_covid,
    )


def judge_corpus(
    graphs: Sequence[ConceptGraph],
    specs: Sequence[RiskFactorSpec],
    store: EmbeddingStore,
    covid_label: str = COVID_LABEL,
) -> list[RelevanceVerdict]:
    """One verdict per (graph, spec) pair, sorted by (risk_factor, doc_id)."""
    verdicts = [
        judge(graph, spec, store, covid_label=covid_label)
        for graph in graphs
        for spec in specs
    ]
    verdicts.sort(key=lambda v: (v.risk_factor, v.doc_id))
    return verdicts
