"""Question answering backends and the asking client.

A backend answers (question, context) with either a verbatim span of the
context or an explicit no-answer; the client validates every response
against the context it actually sent and never second-guesses the backend's
no-answer decision.

Wire protocol for remote backends (HTTP, JSON, UTF-8):
    POST {url}/v1/answer
    request  {"question": str, "context": str}
    response {"answered": bool, "answer": str|null, "start": int|null,
              "end": int|null, "score": float, "no_answer_score": float}
    GET {url}/v1/health -> {"status": "ok", "model": str}
Offsets are Unicode scalar-value indices into the exact context string sent.

Contexts longer than a character budget are asked through a sliding window
and the best-scoring answered span wins, with offsets mapped back to the
full text.
"""

from __future__ import annotations

import json
import logging
import re
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

import requests

from .errors import OatsError

logger = logging.getLogger("oats.qa")

DEFAULT_CHAR_BUDGET = 20_000
DEFAULT_WINDOW_CHARS = 4_000
DEFAULT_STRIDE_CHARS = 2_000


class BackendUnreachable(OatsError):
    """The QA backend could not be reached (after one retry)."""


class ProtocolViolation(OatsError):
    """A backend response breaks the answer-span contract."""


class InvalidPattern(OatsError):
    """A stub rule pattern does not compile."""


class DuplicateQuestionId(OatsError):
    """Two questions in one set share an id."""


@dataclass(frozen=True)
class QuestionSpec:
    """A user question: id, text, rendering order, optional rephrasings.

    When variants are present every phrasing is asked and the best-scoring
    answered span wins; wording changes often rescue questions a backend
    declines in one form.
    """

    id: str
    text: str
    order: int
    variants: tuple[str, ...] = ()

    def __post_init__(self):
        if self.order < 0:
            raise ValueError(f"question {self.id!r}: order must be >= 0")
        if not self.text:
            raise ValueError(f"question {self.id!r}: text must be non-empty")

    @property
    def phrasings(self) -> tuple[str, ...]:
        return (self.text,) + self.variants


@dataclass(frozen=True)
class AnswerSpan:
    """A validated backend answer.

    answered implies ``context[char_range] == text`` with a non-empty range;
    not answered implies empty text and no range.
    """

    question_id: str
    answered: bool
    text: str
    char_range: tuple[int, int] | None
    score: float
    no_answer_score: float

    @classmethod
    def no_answer(cls, question_id: str, no_answer_score: float = 1.0) -> "AnswerSpan":
        return cls(
            question_id=question_id,
            answered=False,
            text="",
            char_range=None,
            score=0.0,
            no_answer_score=no_answer_score,
        )


@dataclass(frozen=True)
class RawAnswer:
    """One backend response before validation, offsets relative to the sent text."""

    answered: bool
    text: str
    start: int | None
    end: int | None
    score: float
    no_answer_score: float


class QABackend(Protocol):
    def answer(self, question: str, context: str) -> RawAnswer: ...


def load_questions(path: str | Path) -> list[QuestionSpec]:
    """Read a question file: JSON list of {"id", "text", "order", "variants"?}."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, list):
        raise ValueError(f"{path}: question file must be a JSON list")
    questions = []
    for i, item in enumerate(raw):
        if (
            not isinstance(item, dict)
            or not isinstance(item.get("id"), str)
            or not isinstance(item.get("text"), str)
            or not isinstance(item.get("order"), int)
        ):
            raise ValueError(f"{path}: entry {i} must have id, text, and integer order")
        variants = item.get("variants", [])
        if not isinstance(variants, list) or not all(isinstance(v, str) for v in variants):
            raise ValueError(f"{path}: entry {i}: variants must be a list of strings")
        questions.append(
            QuestionSpec(item["id"], item["text"], item["order"], tuple(variants))
        )
    ids = [q.id for q in questions]
    if len(set(ids)) != len(ids):
        raise DuplicateQuestionId(f"{path}: duplicate question ids")
    orders = [q.order for q in questions]
    if len(set(orders)) != len(orders):
        raise ValueError(f"{path}: question orders must be unique")
    return questions


class StubBackend:
    """Deterministic rule-based backend; the test double for a real model.

    Rules are (question substring, answer pattern) pairs. The first rule
    whose substring occurs in the question is selected; its pattern's first
    match in the context becomes the span (score 1.0). No selected rule or
    no match means an explicit no-answer (no_answer_score 1.0).
    """

    def __init__(self, rules: Sequence[tuple[str, "str | re.Pattern[str]"]]):
        compiled: list[tuple[str, re.Pattern[str]]] = []
        for needle, pattern in rules:
            if isinstance(pattern, re.Pattern):
                compiled.append((needle, pattern))
                continue
            try:
                compiled.append((needle, re.compile(pattern)))
            except re.error as exc:
                raise InvalidPattern(f"rule {needle!r}: {exc}") from exc
        self._rules = tuple(compiled)

    def answer(self, question: str, context: str) -> RawAnswer:
        for needle, pattern in self._rules:
            if needle not in question:
                continue
            match = pattern.search(context)
            if match is None or match.start() == match.end():
                break
            return RawAnswer(
                answered=True,
                text=match.group(0),
                start=match.start(),
                end=match.end(),
                score=1.0,
                no_answer_score=0.0,
            )
        return RawAnswer(
            answered=False, text="", start=None, end=None, score=0.0, no_answer_score=1.0
        )


def stub_backend(rules: Sequence[tuple[str, "str | re.Pattern[str]"]]) -> StubBackend:
    return StubBackend(rules)


def load_stub_rules(path: str | Path) -> list[tuple[str, re.Pattern[str]]]:
    """Read a stub rules file: JSON list of {"question", "pattern", "literal"?}.

    With "literal" true the pattern is matched as plain text instead of a
    regular expression.
    """
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, list):
        raise ValueError(f"{path}: rules file must be a JSON list")
    rules = []
    for i, item in enumerate(raw):
        if (
            not isinstance(item, dict)
            or not isinstance(item.get("question"), str)
            or not isinstance(item.get("pattern"), str)
        ):
            raise ValueError(f"{path}: entry {i} must have 'question' and 'pattern'")
        pattern = item["pattern"]
        if item.get("literal", False):
            pattern = re.escape(pattern)
        try:
            rules.append((item["question"], re.compile(pattern)))
        except re.error as exc:
            raise InvalidPattern(f"{path}: entry {i}: {exc}") from exc
    return rules


class RemoteBackend:
    """Client for the QA wire protocol with bounded concurrent requests.

    Each request gets one retry on transport failure; in-flight requests are
    capped by a semaphore so corpus fan-out cannot stampede the service.
    """

    def __init__(
        self,
        url: str,
        timeout_s: float = 30.0,
        max_inflight: int = 4,
        session: requests.Session | None = None,
    ):
        self.url = url.rstrip("/")
        self.timeout_s = timeout_s
        self._session = session
        self._semaphore = threading.Semaphore(max(1, max_inflight))

    def _post(self, payload: dict) -> requests.Response:
        http = self._session or requests
        last_error: Exception | None = None
        for _ in range(2):  # one retry on transport failure
            try:
                return http.post(
                    self.url + "/v1/answer", json=payload, timeout=self.timeout_s
                )
            except requests.RequestException as exc:
                last_error = exc
        raise BackendUnreachable(f"QA backend at {self.url}: {last_error}")

    def answer(self, question: str, context: str) -> RawAnswer:
        with self._semaphore:
            response = self._post({"question": question, "context": context})
        if response.status_code != 200:
            raise BackendUnreachable(
                f"QA backend at {self.url}: HTTP {response.status_code}"
            )
        try:
            payload = response.json()
        except ValueError as exc:
            raise ProtocolViolation(f"QA backend response is not JSON: {exc}") from exc
        if not isinstance(payload, dict) or not isinstance(payload.get("answered"), bool):
            raise ProtocolViolation("QA response must be an object with boolean 'answered'")
        try:
            return RawAnswer(
                answered=payload["answered"],
                text=payload.get("answer") or "",
                start=payload.get("start"),
                end=payload.get("end"),
                score=float(payload.get("score", 0.0)),
                no_answer_score=float(payload.get("no_answer_score", 0.0)),
            )
        except (TypeError, ValueError) as exc:
            raise ProtocolViolation(f"QA response fields malformed: {exc}") from exc

    def health(self) -> dict:
        http = self._session or requests
        try:
            response = http.get(self.url + "/v1/health", timeout=self.timeout_s)
        except requests.RequestException as exc:
            raise BackendUnreachable(f"QA backend at {self.url}: {exc}") from exc
        if response.status_code != 200:
            raise BackendUnreachable(f"QA backend at {self.url}: HTTP {response.status_code}")
        return response.json()


def _validate_raw(raw: RawAnswer, sent_context: str) -> None:
    if raw.answered:
        if (
            not isinstance(raw.start, int)
            or not isinstance(raw.end, int)
            or isinstance(raw.start, bool)
            or isinstance(raw.end, bool)
        ):
            raise ProtocolViolation("answered span must carry integer offsets")
        if not (0 <= raw.start < raw.end <= len(sent_context)):
            raise ProtocolViolation(
                f"span [{raw.start},{raw.end}) outside context of length {len(sent_context)}"
            )
        if sent_context[raw.start : raw.end] != raw.text or not raw.text:
            raise ProtocolViolation(
                f"span text {raw.text!r} does not equal context slice "
                f"{sent_context[raw.start:raw.end]!r}"
            )
    else:
        if raw.text or raw.start is not None or raw.end is not None:
            raise ProtocolViolation("no-answer response must carry no text and no offsets")


def _iter_windows(context: str, window_chars: int, stride_chars: int):
    start = 0
    n = len(context)
    while True:
        yield start, context[start : start + window_chars]
        if start + window_chars >= n:
            return
        start += stride_chars


def _ask_one_phrasing(
    backend: QABackend,
    question_text: str,
    context: str,
    char_budget: int,
    window_chars: int,
    stride_chars: int,
) -> RawAnswer:
    """Best answered span across windows, offsets mapped to the full context."""
    if len(context) <= char_budget:
        raw = backend.answer(question_text, context)
        _validate_raw(raw, context)
        return raw

    best: RawAnswer | None = None
    max_no_answer = 0.0
    for offset, window in _iter_windows(context, window_chars, stride_chars):
        raw = backend.answer(question_text, window)
        _validate_raw(raw, window)
        if raw.answered:
            mapped = RawAnswer(
                answered=True,
                text=raw.text,
                start=raw.start + offset,
                end=raw.end + offset,
                score=raw.score,
                no_answer_score=raw.no_answer_score,
            )
            if best is None or mapped.score > best.score:
                best = mapped
        else:
            max_no_answer = max(max_no_answer, raw.no_answer_score)
    if best is not None:
        return best
    return RawAnswer(False, "", None, None, 0.0, max_no_answer)


def ask(
    backend: QABackend,
    question: QuestionSpec,
    context: str,
    char_budget: int = DEFAULT_CHAR_BUDGET,
    window_chars: int = DEFAULT_WINDOW_CHARS,
    stride_chars: int = DEFAULT_STRIDE_CHARS,
) -> AnswerSpan:
    """Ask every phrasing of one question and keep the best answered span.

    No-answer is returned only when every phrasing declines. Every response
    is validated against the context actually sent; violations raise.
    """
    if not context:
        raise ValueError("context must be non-empty")
    best: RawAnswer | None = None
    max_no_answer = 0.0
    for phrasing in question.phrasings:
        raw = _ask_one_phrasing(
            backend, phrasing, context, char_budget, window_chars, stride_chars
        )
        if raw.answered:
            if best is None or raw.score > best.score:
                best = raw
        else:
            max_no_answer = max(max_no_answer, raw.no_answer_score)
    if best is None:
        return AnswerSpan.no_answer(question.id, no_answer_score=max_no_answer)
    return AnswerSpan(
        question_id=question.id,
        answered=True,
        text=best.text,
        char_range=(best.start, best.end),
        score=best.score,
        no_answer_score=best.no_answer_score,
    )


def ask_all(
    backend: QABackend,
    questions: Sequence[QuestionSpec],
    context: str,
    char_budget: int = DEFAULT_CHAR_BUDGET,
    window_chars: int = DEFAULT_WINDOW_CHARS,
    stride_chars: int = DEFAULT_STRIDE_CHARS,
    failures: "list[tuple[str, OatsError]] | None" = None,
) -> list[AnswerSpan]:
    """One AnswerSpan per question, in question-list order.

    A failure on one question is logged and surfaces as not answered; it
    never aborts the rest. Callers that need to distinguish "backend said
    no-answer" from "request failed" can pass a ``failures`` list, which
    collects (question_id, error) pairs.
    """
    ids = [q.id for q in questions]
    if len(set(ids)) != len(ids):
        raise DuplicateQuestionId("question ids must be unique")
    spans: list[AnswerSpan] = []
    for question in questions:
        try:
            spans.append(
                ask(backend, question, context, char_budget, window_chars, stride_chars)
            )
        except OatsError as exc:
            logger.warning("question %s failed: %s", question.id, exc)
            if failures is not None:
                failures.append((question.id, exc))
            spans.append(AnswerSpan.no_answer(question.id, no_answer_score=0.0))
    return spans
