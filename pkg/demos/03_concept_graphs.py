"""Walk-through: gazetteer extraction, co-occurrence triples, concept graphs.

A synonym lexicon finds entity mentions sentence by sentence; Population
and HealthStatus mentions that share a sentence are joined into IsMadeUpOf
triples; triples aggregate into one deduplicated graph per document.
"""

from oats.corpus import build_document
from oats.ontology import (
    HEALTH_STATUS,
    POPULATION,
    LexiconEntry,
    build_graph,
    form_cooccurrence_triples,
    gazetteer_extract,
)

LEXICON = {
    "COVID-19": LexiconEntry(HEALTH_STATUS, ("covid-19", "sars-cov-2", "novel coronavirus")),
    "Population": LexiconEntry(POPULATION, ("patients", "adults")),
    "hypertension": LexiconEntry(HEALTH_STATUS, ("hypertension", "high blood pressure")),
    "COPD": LexiconEntry(HEALTH_STATUS, ("copd", "chronic obstructive pulmonary disease")),
}


def main():
    doc = build_document(
        "demo-graph",
        "Comorbidity profile of a hospital cohort",
        "Patients with SARS-CoV-2 infection and hypertension were admitted. "
        "Adults with chronic obstructive pulmonary disease and COVID-19 were monitored. "
        "High blood pressure was recorded in many patients.",
    )

    mentions = gazetteer_extract(doc, LEXICON)
    print("mentions:")
    for mention in mentions:
        print(
            f"  s{mention.sentence_index} {mention.concept:<12} label={mention.label:<12}"
            f" surface={mention.surface!r}"
        )

    triples = form_cooccurrence_triples(mentions, pair_all_gazetteer_health=True)
    print("\ntriples (head IsMadeUpOf tail):")
    for triple in triples:
        print(f"  s{triple.sentence_index}: {triple.head.label} -> {triple.tail.label}")

    graph = build_graph(doc.doc_id, triples)
    print(f"\ngraph: {len(graph.nodes)} nodes, {len(graph.edges)} edges")
    for edge in sorted(graph.edges, key=lambda e: (e.head.label, e.tail.label)):
        print(f"  {edge.head.label} -> {edge.tail.label} ({len(edge.provenance)} provenance records)")
    # All COVID-19 synonyms collapsed into a single node:
    assert sum(1 for n in graph.nodes if n.label == "COVID-19") == 1


if __name__ == "__main__":
    main()
