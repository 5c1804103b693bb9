"""oats: ontology-guided document triage and question-driven extractive summarization.

The library is organized as independent stages that share a small set of
immutable data types:

- ``corpus``      ingestion, sentence segmentation, tokenization
- ``embeddings``  word2vec file parsing, phrase vectors, cosine distance
- ``ontology``    gazetteer/remote entity extraction, triples, concept graphs
- ``topicid``     per-document, per-topic relevance decisions
- ``qa``          question answering backends (stub and remote) and clients
- ``summarizer``  TF sentence scoring and answer-driven summary assembly
- ``evalkit``     precision/recall and rubric-score aggregation
- ``cli``         the ``oats`` command wiring all stages together
"""

__version__ = "0.1.0"
