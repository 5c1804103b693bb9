import json
import math
import random
from pathlib import Path

import pytest


def _unit(angle_deg: float) -> list[float]:
    rad = math.radians(angle_deg)
    return [math.cos(rad), math.sin(rad), 0.0]


FIXTURE_EMBEDDINGS = {
    # Risk-factor geometry: distance between terms is 1 - cos(angle delta).
    "hypertension": _unit(0),
    "hypertensive": _unit(10),
    "prehypertension": _unit(20),
    "diabetes": _unit(90),
    "diabetic": _unit(80),
    "prediabetes": _unit(70),
    "obesity": _unit(140),
    "covid-19": _unit(180),
    "patients": [0.0, 0.0, 1.0],
    "adults": [0.0, 0.1, 1.0],
}

FIXTURE_LEXICON = {
    "COVID-19": {
        "concept": "HealthStatus",
        "phrases": ["covid-19", "sars-cov-2", "2019-ncov", "novel coronavirus"],
    },
    "Population": {
        "concept": "Population",
        "phrases": ["patients", "adults", "females", "participants"],
    },
    "hypertension": {"concept": "HealthStatus", "phrases": ["hypertension", "hypertensive"]},
    "diabetes": {"concept": "HealthStatus", "phrases": ["diabetes", "diabetic"]},
    "prehypertension": {"concept": "HealthStatus", "phrases": ["prehypertension"]},
    "prediabetes": {"concept": "HealthStatus", "phrases": ["prediabetes"]},
    "obesity": {"concept": "HealthStatus", "phrases": ["obesity", "obese"]},
}

FIXTURE_FACTORS = [
    {"name": "hypertension", "terms": [["hypertension"]], "threshold": 0.3},
    {"name": "diabetes", "terms": [["diabetes"]], "threshold": 0.3},
]

FIXTURE_QUESTIONS = [
    {"id": "q1", "text": "Are patients with hypertension?", "order": 1},
    {"id": "q5", "text": "How many patients are in this study?", "order": 5},
]

FIXTURE_RULES = [
    {"question": "hypertension", "pattern": "hypertension"},
    {"question": "How many patients", "pattern": "[0-9]+ patients"},
]


def write_embeddings_text(path: Path, vectors: dict[str, list[float]]) -> None:
    dim = len(next(iter(vectors.values())))
    lines = [f"{len(vectors)} {dim}"]
    for term, vec in vectors.items():
        lines.append(term + " " + " ".join(str(float(c)) for c in vec))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def plant_corpus(rng: random.Random, n_docs: int):
    """Synthetic corpus where relevance is known by construction.

    Every document mentions COVID-19 next to a population term except the
    planted irrelevant ones; relevant documents additionally carry the
    factor term in that same sentence.
    """
    records, truth = [], {"hypertension": set(), "diabetes": set()}
    fillers = [
        "Imaging findings were reviewed by two readers.",
        "Laboratory values were collected at admission.",
        "Follow-up continued for four weeks.",
    ]
    for i in range(n_docs):
        doc_id = f"doc{i:03d}"
        mode = rng.choice(["hypertension", "diabetes", "both", "none", "no-covid"])
        lead = "Patients with COVID-19 were enrolled"
        if mode == "hypertension":
            lead = "Patients with COVID-19 and hypertension were enrolled"
            truth["hypertension"].add(doc_id)
        elif mode == "diabetes":
            lead = "Patients with COVID-19 and diabetes were enrolled"
            truth["diabetes"].add(doc_id)
        elif mode == "both":
            lead = "Patients with COVID-19 and hypertension and diabetes were enrolled"
            truth["hypertension"].add(doc_id)
            truth["diabetes"].add(doc_id)
        elif mode == "no-covid":
            # Factor present but the gate must reject: no COVID triple.
            lead = "Patients with hypertension were enrolled"
        abstract = lead + ". " + rng.choice(fillers)
        records.append(
            {"doc_id": doc_id, "title": f"Study {i:03d}", "abstract": abstract, "body": []}
        )
    return records, truth


@pytest.fixture
def pipeline_workspace(tmp_path):
    """A complete, runnable pipeline config rooted in tmp_path.

    Returns (config_path, workspace_dir); individual inputs can be rewritten
    by tests before invoking the CLI.
    """

    def build(records=None, backend=None, factors=None, questions=None, rules=None):
        workspace = tmp_path / "ws"
        workspace.mkdir(exist_ok=True)
        if records is None:
            records, _ = plant_corpus(random.Random(7), 10)
        (workspace / "corpus.jsonl").write_text(
            "\n".join(json.dumps(r) for r in records) + "\n", encoding="utf-8"
        )
        write_embeddings_text(workspace / "embeddings.txt", FIXTURE_EMBEDDINGS)
        (workspace / "lexicon.json").write_text(json.dumps(FIXTURE_LEXICON), encoding="utf-8")
        (workspace / "factors.json").write_text(
            json.dumps(factors if factors is not None else FIXTURE_FACTORS), encoding="utf-8"
        )
        (workspace / "questions.json").write_text(
            json.dumps(questions if questions is not None else FIXTURE_QUESTIONS),
            encoding="utf-8",
        )
        (workspace / "rules.json").write_text(
            json.dumps(rules if rules is not None else FIXTURE_RULES), encoding="utf-8"
        )
        config = {
            "corpus": {"path": str(workspace / "corpus.jsonl"), "format": "jsonl"},
            "embeddings": {"path": str(workspace / "embeddings.txt"), "format": "text"},
            "lexicons": str(workspace / "lexicon.json"),
            "risk_factors": str(workspace / "factors.json"),
            "questions": str(workspace / "questions.json"),
            "qa_backend": backend or {"stub": {"rules": str(workspace / "rules.json")}},
            "output_dir": str(workspace / "out"),
        }
        config_path = workspace / "config.json"
        config_path.write_text(json.dumps(config, indent=2), encoding="utf-8")
        return config_path, workspace

    return build
