"""Walk-through: the full pipeline through the ``oats`` CLI.

Builds a tiny self-contained workspace (corpus, embeddings, lexicon,
factors, questions, stub rules, config), then runs identify -> summarize ->
eval exactly as a shell user would.
"""

import json
import math
import tempfile
from pathlib import Path

from oats.cli import main as oats_main


def unit(angle_deg):
    rad = math.radians(angle_deg)
    return [math.cos(rad), math.sin(rad), 0.0]


def build_workspace(root: Path) -> Path:
    records = [
        {"doc_id": "d1", "title": "Cohort A",
         "abstract": "Patients with COVID-19 and hypertension were enrolled. 645 patients were imaged."},
        {"doc_id": "d2", "title": "Cohort B",
         "abstract": "Patients with COVID-19 and diabetes were enrolled. 245 patients were followed."},
        {"doc_id": "d3", "title": "Cohort C",
         "abstract": "Patients with hypertension were enrolled."},  # no COVID triple
    ]
    (root / "corpus.jsonl").write_text(
        "\n".join(json.dumps(r) for r in records) + "\n", encoding="utf-8"
    )

    vectors = {"hypertension": unit(0), "diabetes": unit(90), "covid-19": unit(180)}
    lines = [f"{len(vectors)} 3"] + [
        term + " " + " ".join(str(c) for c in vec) for term, vec in vectors.items()
    ]
    (root / "embeddings.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")

    (root / "lexicon.json").write_text(json.dumps({
        "COVID-19": {"concept": "HealthStatus", "phrases": ["covid-19"]},
        "Population": {"concept": "Population", "phrases": ["patients"]},
        "hypertension": {"concept": "HealthStatus", "phrases": ["hypertension"]},
        "diabetes": {"concept": "HealthStatus", "phrases": ["diabetes"]},
    }), encoding="utf-8")

    (root / "factors.json").write_text(json.dumps([
        {"name": "hypertension", "terms": [["hypertension"]], "threshold": 0.3},
        {"name": "diabetes", "terms": [["diabetes"]], "threshold": 0.3},
    ]), encoding="utf-8")

    (root / "questions.json").write_text(json.dumps([
        {"id": "q1", "text": "Are patients with hypertension?", "order": 1},
        {"id": "q5", "text": "How many patients are in this study?", "order": 5},
    ]), encoding="utf-8")

    (root / "rules.json").write_text(json.dumps([
        {"question": "hypertension", "pattern": "hypertension"},
        {"question": "How many patients", "pattern": "[0-9]+ patients"},
    ]), encoding="utf-8")

    (root / "gold.json").write_text(json.dumps({
        "hypertension": ["d1"], "diabetes": ["d2"],
    }), encoding="utf-8")

    config = {
        "corpus": {"path": str(root / "corpus.jsonl"), "format": "jsonl"},
        "embeddings": {"path": str(root / "embeddings.txt"), "format": "text"},
        "lexicons": str(root / "lexicon.json"),
        "risk_factors": str(root / "factors.json"),
        "questions": str(root / "questions.json"),
        "qa_backend": {"stub": {"rules": str(root / "rules.json")}},
        "output_dir": str(root / "out"),
    }
    config_path = root / "config.json"
    config_path.write_text(json.dumps(config, indent=2), encoding="utf-8")
    return config_path


def main():
    with tempfile.TemporaryDirectory() as tmp:
        root = Path(tmp)
        config_path = build_workspace(root)

        print("$ oats identify --config config.json")
        assert oats_main(["identify", "--config", str(config_path)]) == 0
        for line in (root / "out" / "verdicts.jsonl").read_text().splitlines():
            verdict = json.loads(line)
            print(f"  {verdict['risk_factor']:<13} {verdict['doc_id']} relevant={verdict['relevant']}")

        print("\n$ oats summarize --config config.json --filter out/verdicts.jsonl")
        assert oats_main([
            "summarize", "--config", str(config_path),
            "--filter", str(root / "out" / "verdicts.jsonl"),
        ]) == 0
        for line in (root / "out" / "summaries.jsonl").read_text().splitlines():
            summary = json.loads(line)
            print(f"  {summary['doc_id']}: {summary['rendered']}")

        print("\n$ oats eval --pred out/verdicts.jsonl --gold gold.json")
        assert oats_main([
            "eval",
            "--pred", str(root / "out" / "verdicts.jsonl"),
            "--gold", str(root / "gold.json"),
            "--out", str(root / "report.json"),
        ]) == 0
        print(json.dumps(json.loads((root / "report.json").read_text()), indent=2))


if __name__ == "__main__":
    main()
