"""Concept schema, entity extraction, triple formation, and concept graphs.

Two extraction routes feed the same types: a gazetteer matcher driven by a
synonym lexicon (runs with no external service), and a client for a remote
extractor speaking the wire schema below. Either way, a document ends up as
a per-document graph of deduplicated entities joined by typed relations.

Remote extractor wire schema (HTTP, JSON, UTF-8):
    POST {endpoint}/v1/extract
    request  {"doc_id": str, "text": str}
    response {"mentions": [{"concept": str, "label": str, "start": int, "end": int}],
              "triples":  [{"head": int, "relation": str, "tail": int}]}
    where head/tail index into the mentions array and offsets are Unicode
    scalar-value indices into the exact text sent.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import requests

from .corpus import Document, tokenize
from .errors import OatsError

logger = logging.getLogger("oats.ontology")

POPULATION = "Population"
HEALTH_STATUS = "HealthStatus"
IS_MADE_UP_OF = "IsMadeUpOf"
COVID_LABEL = "COVID-19"

GAZETTEER = "gazetteer"
REMOTE_NER = "remote-ner"


class EndpointUnreachable(OatsError):
    """The remote extractor could not be reached."""


class SchemaViolation(OatsError):
    """The remote extractor response as a whole is malformed."""


@dataclass(frozen=True)
class OntologySchema:
    """Declared concepts and typed relations; relations must use declared concepts."""

    concepts: frozenset[str] = frozenset({POPULATION, HEALTH_STATUS})
    relations: frozenset[tuple[str, str, str]] = frozenset(
        {(IS_MADE_UP_OF, POPULATION, HEALTH_STATUS)}
    )

    def __post_init__(self):
        for name, domain, range_ in self.relations:
            if domain not in self.concepts or range_ not in self.concepts:
                raise ValueError(
                    f"relation {name!r} uses undeclared concept ({domain!r}, {range_!r})"
                )

    def relation(self, name: str) -> tuple[str, str, str] | None:
        for rel in self.relations:
            if rel[0] == name:
                return rel
        return None


DEFAULT_SCHEMA = OntologySchema()


@dataclass(frozen=True)
class EntityMention:
    concept: str
    surface: str
    char_range: tuple[int, int]
    sentence_index: int
    source: str  # GAZETTEER or REMOTE_NER
    label: str  # canonical label; "" means none assigned

    @property
    def identity(self) -> str:
        """Canonical label when assigned, else the case-folded surface."""
        return self.label if self.label else self.surface.casefold()


@dataclass(frozen=True)
class Triple:
    head: EntityMention
    relation: str
    tail: EntityMention
    sentence_index: int


@dataclass(frozen=True)
class LexiconEntry:
    concept: str
    phrases: tuple[str, ...]


Lexicon = Mapping[str, LexiconEntry]


def load_lexicon(path: str | Path) -> dict[str, LexiconEntry]:
    """Read a lexicon file: JSON {"label": {"concept": str, "phrases": [str]}}."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: lexicon must be a JSON object")
    lexicon: dict[str, LexiconEntry] = {}
    for label, entry in raw.items():
        if (
            not isinstance(entry, dict)
            or not isinstance(entry.get("concept"), str)
            or not isinstance(entry.get("phrases"), list)
            or not all(isinstance(p, str) and p for p in entry["phrases"])
            or not entry["phrases"]
        ):
            raise ValueError(f"{path}: entry {label!r} must have a concept and non-empty phrases")
        lexicon[label] = LexiconEntry(entry["concept"], tuple(entry["phrases"]))
    return lexicon


def _compile_lexicon(lexicon: Lexicon) -> list[tuple[tuple[str, ...], str, str]]:
    """(normalized phrase tokens, label, concept), longest phrases first.

    Order after length is lexicon insertion order, then phrase order, which
    makes equal-length ties deterministic.
    """
    compiled = []
    for order, (label, entry) in enumerate(lexicon.items()):
        for phrase_order, phrase in enumerate(entry.phrases):
            phrase_tokens = tuple(t.normalized for t in tokenize(phrase))
            if not phrase_tokens:
                raise ValueError(f"lexicon {label!r}: phrase {phrase!r} has no tokens")
            compiled.append((len(phrase_tokens), order, phrase_order, phrase_tokens, label, entry.concept))
    compiled.sort(key=lambda item: (-item[0], item[1], item[2]))
    return [(tokens, label, concept) for _, _, _, tokens, label, concept in compiled]


def gazetteer_extract(doc: Document, lexicon: Lexicon) -> list[EntityMention]:
    """Match lexicon phrases against normalized token runs, longest match first.

    Matches are non-overlapping and scanned left to right within each
    sentence. Each mention carries the lexicon key as its canonical label.
    """
    compiled = _compile_lexicon(lexicon)
    mentions: list[EntityMention] = []
    for sentence in doc.sentences:
        norms = [t.normalized for t in sentence.tokens]
        i = 0
        while i < len(norms):
            hit = None
            for phrase_tokens, label, concept in compiled:
                k = len(phrase_tokens)
                if i + k <= len(norms) and tuple(norms[i : i + k]) == phrase_tokens:
                    hit = (k, label, concept)
                    break  # compiled is longest-first, ties already ordered
            if hit is None:
                i += 1
                continue
            k, label, concept = hit
            start = sentence.tokens[i].char_range[0]
            end = sentence.tokens[i + k - 1].char_range[1]
            mentions.append(
                EntityMention(
                    concept=concept,
                    surface=doc.full_text[start:end],
                    char_range=(start, end),
                    sentence_index=sentence.index,
                    source=GAZETTEER,
                    label=label,
                )
            )
            i += k
    return mentions


@dataclass
class ExtractionResult:
    mentions: list[EntityMention]
    triples: list[Triple]
    diagnostics: list[str] = field(default_factory=list)


def _sentence_index_for_span(doc: Document, start: int, end: int) -> int | None:
    """Index of the single sentence containing [start, end), else None."""
    for sent in doc.sentences:
        s, e = sent.char_range
        if s <= start and end <= e:
            return sent.index
    return None


def remote_extract(
    doc: Document,
    endpoint: str,
    schema: OntologySchema = DEFAULT_SCHEMA,
    timeout_s: float = 30.0,
    session: requests.Session | None = None,
) -> ExtractionResult:
    """Ask a remote extractor for mentions and triples over doc.full_text.

    Items that fail offset or schema validation are dropped with a recorded
    diagnostic; only a malformed response as a whole is fatal.
    """
    url = endpoint.rstrip("/") + "/v1/extract"
    http = session or requests
    try:
        response = http.post(
            url, json={"doc_id": doc.doc_id, "text": doc.full_text}, timeout=timeout_s
        )
    except requests.RequestException as exc:
        raise EndpointUnreachable(f"extractor at {url}: {exc}") from exc
    if response.status_code != 200:
        raise EndpointUnreachable(f"extractor at {url}: HTTP {response.status_code}")
    try:
        payload = response.json()
    except ValueError as exc:
        raise SchemaViolation(f"extractor response is not JSON: {exc}") from exc
    if (
        not isinstance(payload, dict)
        or not isinstance(payload.get("mentions"), list)
        or not isinstance(payload.get("triples"), list)
    ):
        raise SchemaViolation("extractor response must have 'mentions' and 'triples' lists")

    result = ExtractionResult(mentions=[], triples=[])
    text = doc.full_text
    # Mentions that survive validation, indexed by their wire position so
    # triples can still reference them.
    kept: dict[int, EntityMention] = {}
    for i, raw in enumerate(payload["mentions"]):
        problem = _validate_raw_mention(raw, schema, len(text))
        if problem:
            result.diagnostics.append(f"{doc.doc_id}: mention[{i}] dropped: {problem}")
            continue
        start, end = raw["start"], raw["end"]
        sent_idx = _sentence_index_for_span(doc, start, end)
        if sent_idx is None:
            result.diagnostics.append(
                f"{doc.doc_id}: mention[{i}] dropped: span [{start},{end}) crosses sentences or falls in a gap"
            )
            continue
        mention = EntityMention(
            concept=raw["concept"],
            surface=text[start:end],
            char_range=(start, end),
            sentence_index=sent_idx,
            source=REMOTE_NER,
            label=raw.get("label") or "",
        )
        kept[i] = mention
        result.mentions.append(mention)

    for j, raw in enumerate(payload["triples"]):
        if (
            not isinstance(raw, dict)
            or not isinstance(raw.get("head"), int)
            or not isinstance(raw.get("tail"), int)
            or not isinstance(raw.get("relation"), str)
        ):
            result.diagnostics.append(f"{doc.doc_id}: triple[{j}] dropped: malformed")
            continue
        rel = schema.relation(raw["relation"])
        head = kept.get(raw["head"])
        tail = kept.get(raw["tail"])
        if rel is None:
            result.diagnostics.append(
                f"{doc.doc_id}: triple[{j}] dropped: unknown relation {raw['relation']!r}"
            )
            continue
        if head is None or tail is None:
            result.diagnostics.append(
                f"{doc.doc_id}: triple[{j}] dropped: references missing/invalid mention"
            )
            continue
        if head.concept != rel[1] or tail.concept != rel[2]:
            result.diagnostics.append(
                f"{doc.doc_id}: triple[{j}] dropped: concepts do not fit relation {rel[0]}"
            )
            continue
        if head.sentence_index != tail.sentence_index:
            result.diagnostics.append(
                f"{doc.doc_id}: triple[{j}] dropped: endpoints in different sentences"
            )
            continue
        result.triples.append(
            Triple(head=head, relation=rel[0], tail=tail, sentence_index=head.sentence_index)
        )
    for diag in result.diagnostics:
        logger.warning("%s", diag)
    return result


def _validate_raw_mention(raw: object, schema: OntologySchema, text_len: int) -> str | None:
    if not isinstance(raw, dict):
        return "not an object"
    if not isinstance(raw.get("concept"), str) or raw["concept"] not in schema.concepts:
        return f"unknown concept {raw.get('concept')!r}"
    start, end = raw.get("start"), raw.get("end")
    if not isinstance(start, int) or not isinstance(end, int) or isinstance(start, bool) or isinstance(end, bool):
        return "offsets must be integers"
    if not (0 <= start < end <= text_len):
        return f"span [{start},{end}) outside document of length {text_len}"
    if raw.get("label") is not None and not isinstance(raw.get("label"), str):
        return "label must be a string"
    return None


def remote_extract_corpus(
    docs: Sequence[Document],
    endpoint: str,
    schema: OntologySchema = DEFAULT_SCHEMA,
    timeout_s: float = 30.0,
    max_inflight: int = 4,
) -> dict[str, ExtractionResult]:
    """Extract many documents with a bounded number of in-flight requests."""
    results: dict[str, ExtractionResult] = {}
    with ThreadPoolExecutor(max_workers=max(1, max_inflight)) as pool:
        futures = {
            doc.doc_id: pool.submit(remote_extract, doc, endpoint, schema, timeout_s)
            for doc in docs
        }
        for doc_id, future in futures.items():
            results[doc_id] = future.result()
    return results


def form_cooccurrence_triples(
    mentions: Sequence[EntityMention],
    relation: str = IS_MADE_UP_OF,
    covid_label: str = COVID_LABEL,
    pair_all_gazetteer_health: bool = False,
) -> list[Triple]:
    """Auto-connect co-occurring Population and HealthStatus mentions.

    By default only HealthStatus mentions labeled ``covid_label`` are paired
    (the synonym-list route for a term no trained model knows). With
    ``pair_all_gazetteer_health`` every gazetteer-sourced HealthStatus
    mention pairs too, which is what a build without a remote extractor
    needs in order to get risk-factor edges into the graph.

    Output order is (sentence, head offset, tail offset).
    """
    by_sentence: dict[int, list[EntityMention]] = {}
    for mention in mentions:
        by_sentence.setdefault(mention.sentence_index, []).append(mention)

    triples: list[Triple] = []
    for sent_idx in sorted(by_sentence):
        group = by_sentence[sent_idx]
        heads = sorted(
            (m for m in group if m.concept == POPULATION), key=lambda m: m.char_range
        )
        if pair_all_gazetteer_health:
            tails = [m for m in group if m.concept == HEALTH_STATUS and m.source == GAZETTEER]
        else:
            tails = [m for m in group if m.concept == HEALTH_STATUS and m.label == covid_label]
        tails.sort(key=lambda m: m.char_range)
        for head in heads:
            for tail in tails:
                triples.append(
                    Triple(head=head, relation=relation, tail=tail, sentence_index=sent_idx)
                )
    return triples


@dataclass(frozen=True)
class GraphNode:
    concept: str
    label: str  # canonical label, or case-folded surface when none was assigned


@dataclass(frozen=True)
class GraphEdge:
    head: GraphNode
    relation: str
    tail: GraphNode
    # (sentence_index, head char_range, tail char_range) per contributing triple
    provenance: tuple[tuple[int, tuple[int, int], tuple[int, int]], ...]


@dataclass(frozen=True)
class ConceptGraph:
    doc_id: str
    nodes: frozenset[GraphNode]
    edges: frozenset[GraphEdge]

    def health_status_nodes(self) -> list[GraphNode]:
        return sorted(
            (n for n in self.nodes if n.concept == HEALTH_STATUS), key=lambda n: n.label
        )

    def has_edge_to_label(self, label: str) -> bool:
        return any(edge.tail.label == label for edge in self.edges)


def build_graph(doc_id: str, triples: Sequence[Triple]) -> ConceptGraph:
    """Aggregate triples into a graph with deduplicated nodes and edges.

    Node identity is (concept, canonical label | case-folded surface), so
    every synonym hit for one label collapses to a single node. Identical
    edges merge, keeping one provenance record per distinct origin. The
    result is independent of input order.
    """
    nodes: set[GraphNode] = set()
    provenance: dict[tuple[GraphNode, str, GraphNode], set] = {}
    for triple in triples:
        head = GraphNode(concept=triple.head.concept, label=triple.head.identity)
        tail = GraphNode(concept=triple.tail.concept, label=triple.tail.identity)
        nodes.add(head)
        nodes.add(tail)
        key = (head, triple.relation, tail)
        provenance.setdefault(key, set()).add(
            (triple.sentence_index, triple.head.char_range, triple.tail.char_range)
        )
    edges = frozenset(
        GraphEdge(head=h, relation=rel, tail=t, provenance=tuple(sorted(prov)))
        for (h, rel, t), prov in provenance.items()
    )
    return ConceptGraph(doc_id=doc_id, nodes=frozenset(nodes), edges=edges)
