"""Walk-through: judging document relevance per risk factor.

A document counts as relevant to a factor when (1) its graph links some
population to COVID-19 and (2) a non-COVID health-status node lies within
the factor's cosine-distance threshold. The demo plants three documents:
an exact match, a near-synonym match, and a gated-out document that names
the factor but never co-mentions COVID-19 with a population.
"""

import math

from oats.corpus import build_document
from oats.embeddings import EmbeddingStore
from oats.ontology import (
    HEALTH_STATUS,
    POPULATION,
    LexiconEntry,
    build_graph,
    form_cooccurrence_triples,
    gazetteer_extract,
)
from oats.topicid import RiskFactorSpec, judge_corpus

LEXICON = {
    "COVID-19": LexiconEntry(HEALTH_STATUS, ("covid-19", "sars-cov-2")),
    "Population": LexiconEntry(POPULATION, ("patients", "adults")),
    "hypertension": LexiconEntry(HEALTH_STATUS, ("hypertension",)),
    "hypertensive": LexiconEntry(HEALTH_STATUS, ("hypertensive",)),
    "diabetes": LexiconEntry(HEALTH_STATUS, ("diabetes",)),
}


def unit(angle_deg):
    rad = math.radians(angle_deg)
    return [math.cos(rad), math.sin(rad)]


def main():
    store = EmbeddingStore.from_pairs(
        [
            ("hypertension", unit(0)),
            ("hypertensive", unit(10)),  # distance 1 - cos(10 deg) ~= 0.015
            ("diabetes", unit(90)),  # distance 1.0 from hypertension
        ]
    )
    texts = {
        "exact-hit": "Patients with COVID-19 and hypertension were enrolled.",
        "near-hit": "Adults with SARS-CoV-2 who were hypertensive were followed.",
        "gated-out": "Patients with hypertension were enrolled. COVID-19 was discussed separately.",
        "off-topic": "Patients with COVID-19 and diabetes were enrolled.",
    }
    graphs = []
    for doc_id, text in texts.items():
        doc = build_document(doc_id, f"Study {doc_id}", text)
        mentions = gazetteer_extract(doc, LEXICON)
        triples = form_cooccurrence_triples(mentions, pair_all_gazetteer_health=True)
        graphs.append(build_graph(doc_id, triples))

    spec = RiskFactorSpec("hypertension", (("hypertension",),), threshold=0.3)
    for verdict in judge_corpus(graphs, [spec], store):
        distance = "None" if verdict.min_distance is None else f"{verdict.min_distance:.4f}"
        print(
            f"{verdict.doc_id:<10} relevant={str(verdict.relevant):<5}"
            f" covid_triple={str(verdict.has_covid_triple):<5}"
            f" min_distance={distance:<7} matched={verdict.matched_graph_term}"
        )


if __name__ == "__main__":
    main()
