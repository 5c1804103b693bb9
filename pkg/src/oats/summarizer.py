"""Answer-driven extractive summaries.

Sentences are scored by summed document-level term frequency of their
non-stopword tokens (common words are filtered instead of IDF-normalized,
so scores are plain integer counts). Each answered question selects the
highest-scoring sentence containing its answer; items are assembled in
question order and rendered with the answer emphasized in place. Sentences
are always emitted verbatim.
"""

from __future__ import annotations

import importlib.resources
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .corpus import Document
from .qa import AnswerSpan, QuestionSpec

DEFAULT_MARKERS = ("**", "**")


def default_stopwords() -> frozenset[str]:
    """The shipped English stopword list (normalized terms)."""
    text = (
        importlib.resources.files("oats.data").joinpath("stopwords.txt").read_text("utf-8")
    )
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


def load_stopwords(path: str | Path) -> frozenset[str]:
    """One normalized term per line; blank lines ignored."""
    text = Path(path).read_text(encoding="utf-8")
    return frozenset(line.strip().casefold() for line in text.splitlines() if line.strip())


@dataclass(frozen=True)
class SentenceScore:
    sentence_index: int
    score: int


@dataclass(frozen=True)
class SummaryItem:
    question_id: str
    sentence_index: int
    sentence_text: str
    answer: AnswerSpan
    score: int


@dataclass(frozen=True)
class Summary:
    doc_id: str
    items: tuple[SummaryItem, ...]
    rendered: str

    def to_json_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "items": [
                {
                    "question_id": item.question_id,
                    "sentence_index": item.sentence_index,
                    "sentence": item.sentence_text,
                    "answer": item.answer.text,
                    "answer_range": list(item.answer.char_range),
                    "score": item.score,
                }
                for item in self.items
            ],
            "rendered": self.rendered,
        }


def score_sentences(doc: Document, stopwords: frozenset[str]) -> list[SentenceScore]:
    """Sum of document-wide term frequencies over each sentence's tokens.

    TF is counted across the whole document, so sentences repeating the
    document's key terms rank highest. Stopword occurrences contribute
    nothing.
    """
    tf = Counter(
        token.normalized for sentence in doc.sentences for token in sentence.tokens
    )
    scores = []
    for sentence in doc.sentences:
        total = sum(
            tf[token.normalized]
            for token in sentence.tokens
            if token.normalized not in stopwords
        )
        scores.append(SentenceScore(sentence_index=sentence.index, score=total))
    return scores


def map_answer_to_sentence(
    doc: Document,
    answer: AnswerSpan,
    scores: Sequence[SentenceScore],
) -> int | None:
    """Sentence carrying the answer; ambiguity resolved by highest score.

    Candidates are every sentence overlapping the answer's range plus every
    sentence containing the answer text verbatim somewhere else in the
    document. Ties go to the lowest sentence index. Returns None only for a
    span that fails validation against the document.
    """
    if not answer.answered or answer.char_range is None:
        return None
    start, end = answer.char_range
    if not (0 <= start < end <= len(doc.full_text)):
        return None
    if doc.full_text[start:end] != answer.text:
        return None

    score_by_index = {s.sentence_index: s.score for s in scores}
    candidates: set[int] = set()
    for sentence in doc.sentences:
        s, e = sentence.char_range
        if s < end and start < e:
            candidates.add(sentence.index)
        elif answer.text in sentence.text:
            candidates.add(sentence.index)
    if not candidates:
        return None
    return min(candidates, key=lambda idx: (-score_by_index.get(idx, 0), idx))


def _render_sentence(sentence_text: str, sentence_range: tuple[int, int], answer: AnswerSpan, markers: tuple[str, str]) -> str:
    """Wrap the answer occurrence inside the sentence with emphasis markers.

    Prefers the actual span position when it overlaps this sentence;
    otherwise the first verbatim occurrence of the answer text. A sentence
    sharing no text with the answer is returned unmarked.
    """
    open_m, close_m = markers
    s0, s1 = sentence_range
    if answer.char_range is not None:
        a0, a1 = answer.char_range
        if a0 < s1 and s0 < a1:
            rel0, rel1 = max(a0, s0) - s0, min(a1, s1) - s0
            return (
                sentence_text[:rel0]
                + open_m
                + sentence_text[rel0:rel1]
                + close_m
                + sentence_text[rel1:]
            )
    pos = sentence_text.find(answer.text) if answer.text else -1
    if pos < 0:
        return sentence_text
    return (
        sentence_text[:pos]
        + open_m
        + sentence_text[pos : pos + len(answer.text)]
        + close_m
        + sentence_text[pos + len(answer.text) :]
    )


def build_summary(
    doc: Document,
    questions: Sequence[QuestionSpec],
    answers: Sequence[AnswerSpan],
    scores: Sequence[SentenceScore],
    max_items: int | None = None,
    markers: tuple[str, str] = DEFAULT_MARKERS,
) -> Summary:
    """Assemble the per-document summary from QA answers.

    Unanswered questions contribute nothing. Answers mapping to the same
    sentence collapse into one item credited to the lowest-order question.
    When more items remain than ``max_items`` (default: the number of
    questions), the highest-scoring ones survive, ties favoring lower
    question order. Final items are sorted by question order.
    """
    order_by_id = {q.id: q.order for q in questions}
    unknown = [a.question_id for a in answers if a.question_id not in order_by_id]
    if unknown:
        raise ValueError(f"answers reference unknown question ids: {unknown}")
    if max_items is None:
        max_items = len(questions)

    by_order = sorted(
        (a for a in answers if a.answered), key=lambda a: order_by_id[a.question_id]
    )
    chosen: dict[int, tuple[int, AnswerSpan]] = {}
    for answer in by_order:
        idx = map_answer_to_sentence(doc, answer, scores)
        if idx is None or idx in chosen:
            continue  # duplicate sentences stay with the lowest-order question
        chosen[idx] = (order_by_id[answer.question_id], answer)

    score_by_index = {s.sentence_index: s.score for s in scores}
    items = [
        SummaryItem(
            question_id=answer.question_id,
            sentence_index=idx,
            sentence_text=doc.sentences[idx].text,
            answer=answer,
            score=score_by_index.get(idx, 0),
        )
        for idx, (order, answer) in chosen.items()
    ]
    if len(items) > max_items:
        items.sort(key=lambda it: (-it.score, order_by_id[it.question_id]))
        items = items[:max_items]
    items.sort(key=lambda it: order_by_id[it.question_id])

    rendered = " ".join(
        _render_sentence(
            item.sentence_text,
            doc.sentences[item.sentence_index].char_range,
            item.answer,
            markers,
        )
        for item in items
    )
    return Summary(doc_id=doc.doc_id, items=tuple(items), rendered=rendered)
