"""Evaluation harness: topic-identification precision/recall and rubric
aggregation for human-scored QA output.

Precision and recall with an empty denominator are Undefined (None), not
zero and not an error, so reports can distinguish "made no predictions"
from "every prediction wrong". Rubric scores are human-supplied input; the
harness aggregates and never judges answers itself.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .errors import OatsError


class UnresolvedDisagreement(OatsError):
    """Raters disagree on a cell and no consensus score was recorded."""


class MalformedSheet(OatsError):
    """A rubric sheet cell is missing or out of range."""


@dataclass(frozen=True)
class PRResult:
    risk_factor: str
    precision: float | None
    recall: float | None
    tp: int
    fp: int
    fn: int

    def to_json_dict(self) -> dict:
        return {
            "risk_factor": self.risk_factor,
            "precision": self.precision,
            "recall": self.recall,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
        }


def precision_recall(
    predicted: Iterable[str], gold: Iterable[str], risk_factor: str = ""
) -> PRResult:
    """Set-arithmetic precision and recall over doc_id sets."""
    predicted = set(predicted)
    gold = set(gold)
    tp = len(predicted & gold)
    fp = len(predicted - gold)
    fn = len(gold - predicted)
    precision = tp / (tp + fp) if tp + fp > 0 else None
    recall = tp / (tp + fn) if tp + fn > 0 else None
    return PRResult(
        risk_factor=risk_factor, precision=precision, recall=recall, tp=tp, fp=fp, fn=fn
    )


def load_gold_labels(path: str | Path) -> dict[str, set[str]]:
    """Gold label file: JSON {"risk_factor": [doc_ids]}."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, dict) or not all(
        isinstance(k, str) and isinstance(v, list) and all(isinstance(d, str) for d in v)
        for k, v in raw.items()
    ):
        raise ValueError(f"{path}: gold labels must map risk factor to a list of doc ids")
    return {factor: set(doc_ids) for factor, doc_ids in raw.items()}


@dataclass(frozen=True)
class RubricRow:
    doc_id: str
    question_id: str
    rater1: int
    rater2: int
    consensus: int | None  # required only when raters disagree
    summary_score: int | None  # per-document; may appear on any of its rows


@dataclass(frozen=True)
class RubricSheet:
    rows: tuple[RubricRow, ...]


@dataclass(frozen=True)
class RubricReport:
    per_question: tuple[tuple[str, float], ...]  # (question_id, accuracy)
    summary_accuracy: float | None
    agreement_rate: float
    n_documents: int

    def to_json_dict(self) -> dict:
        return {
            "per_question": [
                {"question_id": qid, "accuracy": acc} for qid, acc in self.per_question
            ],
            "summary_accuracy": self.summary_accuracy,
            "agreement_rate": self.agreement_rate,
            "n_documents": self.n_documents,
        }


def _parse_binary(value: str, where: str) -> int:
    if value not in ("0", "1"):
        raise MalformedSheet(f"{where}: score must be 0 or 1, got {value!r}")
    return int(value)


def load_rubric_csv(path: str | Path) -> RubricSheet:
    """Rubric CSV columns: doc_id, question_id, rater1, rater2, consensus, summary_score.

    ``consensus`` may be empty when raters agree; ``summary_score`` may be
    empty on any row but must be consistent within a document.
    """
    rows: list[RubricRow] = []
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        required = {"doc_id", "question_id", "rater1", "rater2", "consensus", "summary_score"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise MalformedSheet(f"{path}: header must contain {sorted(required)}")
        for lineno, record in enumerate(reader, start=2):
            where = f"{path}:{lineno}"
            doc_id = (record["doc_id"] or "").strip()
            question_id = (record["question_id"] or "").strip()
            if not doc_id or not question_id:
                raise MalformedSheet(f"{where}: doc_id and question_id are required")
            rater1 = _parse_binary(record["rater1"].strip(), where)
            rater2 = _parse_binary(record["rater2"].strip(), where)
            consensus_raw = (record["consensus"] or "").strip()
            consensus = _parse_binary(consensus_raw, where) if consensus_raw else None
            summary_raw = (record["summary_score"] or "").strip()
            summary = _parse_binary(summary_raw, where) if summary_raw else None
            rows.append(RubricRow(doc_id, question_id, rater1, rater2, consensus, summary))
    return RubricSheet(rows=tuple(rows))


def aggregate_rubric(sheet: RubricSheet) -> RubricReport:
    """Per-question accuracy, overall summary accuracy, and agreement rate.

    Accuracy for a question is the mean consensus score across documents;
    a cell where raters disagree must carry an explicit consensus or the
    whole aggregation fails, naming every offending cell.
    """
    unresolved = [
        (row.doc_id, row.question_id)
        for row in sheet.rows
        if row.rater1 != row.rater2 and row.consensus is None
    ]
    if unresolved:
        raise UnresolvedDisagreement(f"cells without consensus: {unresolved}")

    by_question: dict[str, list[int]] = {}
    summary_by_doc: dict[str, int] = {}
    agreements = 0
    for row in sheet.rows:
        final = row.consensus if row.consensus is not None else row.rater1
        by_question.setdefault(row.question_id, []).append(final)
        if row.rater1 == row.rater2:
            agreements += 1
        if row.summary_score is not None:
            previous = summary_by_doc.get(row.doc_id)
            if previous is not None and previous != row.summary_score:
                raise MalformedSheet(
                    f"document {row.doc_id}: conflicting summary scores"
                )
            summary_by_doc[row.doc_id] = row.summary_score

    per_question = tuple(
        (qid, sum(scores) / len(scores)) for qid, scores in sorted(by_question.items())
    )
    summary_accuracy = (
        sum(summary_by_doc.values()) / len(summary_by_doc) if summary_by_doc else None
    )
    agreement_rate = agreements / len(sheet.rows) if sheet.rows else 1.0
    n_documents = len({row.doc_id for row in sheet.rows})
    return RubricReport(
        per_question=per_question,
        summary_accuracy=summary_accuracy,
        agreement_rate=agreement_rate,
        n_documents=n_documents,
    )


def evaluate_verdicts(
    predicted_by_factor: Mapping[str, set[str]],
    gold_by_factor: Mapping[str, set[str]],
) -> list[PRResult]:
    """One PRResult per risk factor (union of predicted and gold factors)."""
    factors = sorted(set(predicted_by_factor) | set(gold_by_factor))
    return [
        precision_recall(
            predicted_by_factor.get(factor, set()),
            gold_by_factor.get(factor, set()),
            risk_factor=factor,
        )
        for factor in factors
    ]
