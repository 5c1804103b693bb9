"""Corpus ingestion, sentence segmentation, and tokenization.

Documents are immutable, offset-indexed views of source text. All character
offsets are Unicode scalar-value indices (plain Python string indices), never
bytes: this keeps offsets stable across encodings and matches the offsets the
QA wire protocol uses.

``full_text`` is the canonical byte layout every downstream stage indexes
into: title, abstract, and body paragraph texts (empty parts dropped) joined
by a single ``"\\n"``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import OatsError


class MalformedRecord(OatsError):
    """A corpus record is missing required fields or is not valid JSON."""


class DuplicateDocId(OatsError):
    """Two corpus records share a doc_id."""


class IoError(OatsError):
    """A corpus file could not be read."""


# Trailing strings that suppress a sentence break at a following period.
# Matched case-sensitively against the text ending at the period.
DEFAULT_ABBREVIATIONS: tuple[str, ...] = (
    "e.g.",
    "i.e.",
    "et al.",
    "Fig.",
    "vs.",
    "Dr.",
    "No.",
)

_SENTENCE_PUNCT = frozenset(".!?")
_OPENERS = frozenset("([{\"'")


@dataclass(frozen=True)
class Token:
    """One whitespace-delimited piece with surrounding punctuation stripped.

    ``char_range`` indexes the text the token was cut from (``full_text``
    once the token lives inside a Document), and always satisfies
    ``text[start:end] == surface``. ``normalized`` is the case-fold of
    ``surface`` and is never empty.
    """

    surface: str
    normalized: str
    char_range: tuple[int, int]


@dataclass(frozen=True)
class Sentence:
    index: int
    char_range: tuple[int, int]
    text: str
    tokens: tuple[Token, ...]


@dataclass(frozen=True)
class Document:
    doc_id: str
    title: str
    abstract: str
    body: tuple[tuple[str, str], ...]
    full_text: str
    sentences: tuple[Sentence, ...] = field(repr=False)

    def sentence_at(self, char_index: int) -> Sentence | None:
        """Sentence whose range contains ``char_index``, or None (gap)."""
        for sent in self.sentences:
            start, end = sent.char_range
            if start <= char_index < end:
                return sent
        return None


def _is_abbreviation(text: str, period_index: int, abbreviations: Sequence[str]) -> bool:
    """True when the period at ``period_index`` ends a protected abbreviation."""
    prefix = text[: period_index + 1]
    for abbr in abbreviations:
        if not prefix.endswith(abbr):
            continue
        before = period_index - len(abbr)
        if before < 0:
            return True
        ch = text[before]
        if ch.isspace() or ch in _OPENERS:
            return True
    return False


def segment_sentences(
    text: str,
    abbreviations: Sequence[str] = DEFAULT_ABBREVIATIONS,
) -> list[tuple[int, int]]:
    """Split ``text`` into sentence ranges, deterministically.

    A sentence ends at '.', '!' or '?' when the punctuation is followed by
    whitespace and then an uppercase letter or a digit, unless the period
    closes one of the configured abbreviations. A newline always ends the
    current sentence (paragraph boundary; ``full_text`` joins title,
    abstract, and paragraphs with '\\n').

    Returned ranges are trimmed of surrounding whitespace, disjoint, and in
    order; together they cover every non-whitespace character exactly once.
    """
    n = len(text)
    breaks: list[int] = []  # end-exclusive cut positions
    i = 0
    while i < n:
        ch = text[i]
        if ch == "\n":
            breaks.append(i)
            i += 1
            continue
        if ch in _SENTENCE_PUNCT:
            j = i + 1
            k = j
            while k < n and text[k].isspace():
                k += 1
            if k > j and k < n and (text[k].isupper() or text[k].isdigit()):
                if not (ch == "." and _is_abbreviation(text, i, abbreviations)):
                    breaks.append(i + 1)
        i += 1

    ranges: list[tuple[int, int]] = []
    start = 0
    for cut in breaks + [n]:
        s, e = start, cut
        while s < e and text[s].isspace():
            s += 1
        while e > s and text[e - 1].isspace():
            e -= 1
        if e > s:
            ranges.append((s, e))
        start = cut
    return ranges


def tokenize(sentence_text: str) -> list[Token]:
    """Split on whitespace and strip edge punctuation from each piece.

    Leading/trailing characters that are neither alphanumeric nor '-' are
    stripped, so hyphenated compounds ("sars-cov-2") and numbers survive
    intact. Pieces that strip to nothing are dropped. Ranges are relative to
    ``sentence_text``; document construction shifts them to full_text.
    """
    tokens: list[Token] = []
    n = len(sentence_text)
    i = 0
    while i < n:
        if sentence_text[i].isspace():
            i += 1
            continue
        j = i
        while j < n and not sentence_text[j].isspace():
            j += 1
        s, e = i, j
        while s < e and not (sentence_text[s].isalnum() or sentence_text[s] == "-"):
            s += 1
        while e > s and not (sentence_text[e - 1].isalnum() or sentence_text[e - 1] == "-"):
            e -= 1
        if e > s:
            surface = sentence_text[s:e]
            tokens.append(Token(surface=surface, normalized=surface.casefold(), char_range=(s, e)))
        i = j
    return tokens


def build_full_text(title: str, abstract: str, body: Sequence[tuple[str, str]]) -> str:
    """Canonical document text: non-empty parts joined by single newlines."""
    parts = [title, abstract] + [text for _, text in body]
    return "\n".join(part for part in parts if part != "")


def build_document(
    doc_id: str,
    title: str,
    abstract: str = "",
    body: Sequence[tuple[str, str]] = (),
    abbreviations: Sequence[str] = DEFAULT_ABBREVIATIONS,
) -> Document:
    """Assemble a fully segmented and tokenized Document."""
    full_text = build_full_text(title, abstract, body)
    sentences = []
    for idx, (start, end) in enumerate(segment_sentences(full_text, abbreviations)):
        sent_text = full_text[start:end]
        toks = tuple(
            Token(t.surface, t.normalized, (t.char_range[0] + start, t.char_range[1] + start))
            for t in tokenize(sent_text)
        )
        sentences.append(Sentence(index=idx, char_range=(start, end), text=sent_text, tokens=toks))
    return Document(
        doc_id=doc_id,
        title=title,
        abstract=abstract,
        body=tuple((name, text) for name, text in body),
        full_text=full_text,
        sentences=tuple(sentences),
    )


def _document_from_record(record: object, where: str) -> Document:
    if not isinstance(record, dict):
        raise MalformedRecord(f"{where}: record is not a JSON object")
    doc_id = record.get("doc_id")
    title = record.get("title")
    if not isinstance(doc_id, str) or not doc_id:
        raise MalformedRecord(f"{where}: missing or invalid 'doc_id'")
    if not isinstance(title, str):
        raise MalformedRecord(f"{where}: missing or invalid 'title'")
    abstract = record.get("abstract", "")
    if not isinstance(abstract, str):
        raise MalformedRecord(f"{where}: 'abstract' must be a string")
    raw_body = record.get("body", [])
    if not isinstance(raw_body, list):
        raise MalformedRecord(f"{where}: 'body' must be a list")
    body: list[tuple[str, str]] = []
    for i, section in enumerate(raw_body):
        if (
            not isinstance(section, dict)
            or not isinstance(section.get("section", ""), str)
            or not isinstance(section.get("text"), str)
        ):
            raise MalformedRecord(f"{where}: body[{i}] must be {{'section': str, 'text': str}}")
        body.append((section.get("section", ""), section["text"]))
    return build_document(doc_id, title, abstract, body)


def _iter_jsonl_records(path: Path) -> Iterable[tuple[object, str]]:
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read corpus file {path}: {exc}") from exc
    for lineno, line in enumerate(raw.split("\n"), start=1):
        if not line.strip():
            continue
        try:
            yield json.loads(line), f"{path}:{lineno}"
        except json.JSONDecodeError as exc:
            raise MalformedRecord(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc


def _iter_json_dir_records(path: Path) -> Iterable[tuple[object, str]]:
    try:
        files = sorted(p for p in path.iterdir() if p.suffix == ".json")
    except OSError as exc:
        raise IoError(f"cannot list corpus directory {path}: {exc}") from exc
    for file in files:
        try:
            raw = file.read_text(encoding="utf-8")
        except OSError as exc:
            raise IoError(f"cannot read corpus file {file}: {exc}") from exc
        try:
            yield json.loads(raw), str(file)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(f"{file}: invalid JSON ({exc.msg})") from exc


def ingest_corpus(path: str | Path, format: str = "jsonl") -> list[Document]:
    """Load a corpus into Documents, preserving record order.

    ``format`` is "jsonl" (one JSON object per line) or "json-dir" (one
    object per .json file, lexicographic filename order).
    """
    path = Path(path)
    if not path.exists():
        raise IoError(f"corpus path does not exist: {path}")
    if format == "jsonl":
        records = _iter_jsonl_records(path)
    elif format == "json-dir":
        records = _iter_json_dir_records(path)
    else:
        raise ValueError(f"unknown corpus format: {format!r}")

    documents: list[Document] = []
    seen: set[str] = set()
    for record, where in records:
        doc = _document_from_record(record, where)
        if doc.doc_id in seen:
            raise DuplicateDocId(f"{where}: duplicate doc_id {doc.doc_id!r}")
        seen.add(doc.doc_id)
        documents.append(doc)
    return documents
