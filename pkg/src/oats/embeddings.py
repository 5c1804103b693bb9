"""Pretrained word2vec loading, phrase vectors, and cosine distance.

Two on-disk layouts are supported:

text    first line "V D"; then V lines of "word c1 c2 ... cD", single-space
        separated, decimal components.
binary  ASCII header "V D\\n"; then V records of word bytes terminated by a
        single space, followed by D little-endian IEEE-754 float32 values and
        an optional trailing "\\n".

Vectors live on disk as float32 and in memory as float64, so comparison math
is stable while the binary layout stays bit-exact. Terms are case-folded on
load, matching corpus tokenization.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import OatsError


class HeaderMismatch(OatsError):
    """Declared vocabulary size or dimension disagrees with file content."""


class ParseError(OatsError):
    """A component or record could not be parsed; message names the spot."""


class DuplicateTerm(OatsError):
    """Two rows normalize to the same term."""


class TruncatedFile(OatsError):
    """A binary file ends in the middle of a record."""


class NonFiniteComponent(OatsError):
    """A loaded component is NaN or infinite."""


class DimensionMismatch(OatsError):
    """Vectors of different lengths were combined."""


class ZeroNorm(OatsError):
    """Cosine distance is undefined for a zero-length vector."""


Phrase = Sequence[str]


class EmbeddingStore:
    """Immutable term -> vector map; safe for unsynchronized shared reads."""

    def __init__(self, dim: int, terms: Sequence[str], matrix: np.ndarray):
        if dim <= 0:
            raise HeaderMismatch(f"dimension must be positive, got {dim}")
        if matrix.shape != (len(terms), dim):
            raise DimensionMismatch(
                f"matrix shape {matrix.shape} does not match {len(terms)} terms x dim {dim}"
            )
        self.dim = dim
        self._terms = tuple(terms)
        self._matrix = np.asarray(matrix, dtype=np.float64)
        self._matrix.setflags(write=False)
        self._index = {term: row for row, term in enumerate(self._terms)}
        if len(self._index) != len(self._terms):
            raise DuplicateTerm("duplicate terms in store construction")

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[str, Sequence[float]]]) -> "EmbeddingStore":
        """Build a store in memory (fixtures, tests). Terms are case-folded."""
        if not pairs:
            raise ValueError("cannot build an empty store without a dimension")
        terms = [term.casefold() for term, _ in pairs]
        matrix = np.asarray([vec for _, vec in pairs], dtype=np.float64)
        return cls(matrix.shape[1], terms, matrix)

    def __len__(self) -> int:
        return len(self._terms)

    def __contains__(self, term: str) -> bool:
        return term.casefold() in self._index

    @property
    def terms(self) -> tuple[str, ...]:
        return self._terms

    def get(self, term: str) -> np.ndarray | None:
        row = self._index.get(term.casefold())
        if row is None:
            return None
        return self._matrix[row]


def load_text_format(path: str | Path) -> EmbeddingStore:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ParseError(f"{path}:1: empty file")
    header = lines[0].split(" ")
    if len(header) != 2:
        raise ParseError(f"{path}:1: header must be 'V D'")
    try:
        count, dim = int(header[0]), int(header[1])
    except ValueError as exc:
        raise ParseError(f"{path}:1: header must be two integers") from exc
    if count < 0 or dim <= 0:
        raise HeaderMismatch(f"{path}:1: invalid header values V={count} D={dim}")
    if len(lines) - 1 != count:
        raise HeaderMismatch(
            f"{path}: header declares {count} rows but file contains {len(lines) - 1}"
        )

    terms: list[str] = []
    matrix = np.empty((count, dim), dtype=np.float64)
    seen: set[str] = set()
    for row, line in enumerate(lines[1:], start=2):
        parts = line.split(" ")
        if len(parts) != dim + 1:
            raise ParseError(
                f"{path}:{row}: expected {dim} components, found {len(parts) - 1}"
            )
        term = parts[0].casefold()
        if term in seen:
            raise DuplicateTerm(f"{path}:{row}: duplicate term {term!r}")
        seen.add(term)
        for col, piece in enumerate(parts[1:]):
            try:
                value = float(piece)
            except ValueError as exc:
                raise ParseError(f"{path}:{row}: non-numeric component {piece!r}") from exc
            if not math.isfinite(value):
                raise ParseError(f"{path}:{row}: non-finite component {piece!r}")
            matrix[row - 2, col] = value
        terms.append(term)
    return EmbeddingStore(dim, terms, matrix)


def load_binary_format(path: str | Path) -> EmbeddingStore:
    path = Path(path)
    data = path.read_bytes()
    newline = data.find(b"\n")
    if newline < 0:
        raise TruncatedFile(f"{path}: no header line")
    header = data[:newline].split(b" ")
    if len(header) != 2:
        raise ParseError(f"{path}: header must be 'V D'")
    try:
        count, dim = int(header[0]), int(header[1])
    except ValueError as exc:
        raise ParseError(f"{path}: header must be two integers") from exc
    if count < 0 or dim <= 0:
        raise HeaderMismatch(f"{path}: invalid header values V={count} D={dim}")

    pos = newline + 1
    record_bytes = 4 * dim
    terms: list[str] = []
    matrix = np.empty((count, dim), dtype=np.float64)
    seen: set[str] = set()
    for row in range(count):
        if pos >= len(data):
            # Clean end exactly at a record boundary: count disagrees.
            raise HeaderMismatch(
                f"{path}: header declares {count} records but file contains {row}"
            )
        space = data.find(b" ", pos)
        if space < 0:
            raise TruncatedFile(f"{path}: record {row}: unterminated word")
        try:
            term = data[pos:space].decode("utf-8").casefold()
        except UnicodeDecodeError as exc:
            raise ParseError(f"{path}: record {row}: word is not valid UTF-8") from exc
        if term in seen:
            raise DuplicateTerm(f"{path}: record {row}: duplicate term {term!r}")
        seen.add(term)
        pos = space + 1
        if pos + record_bytes > len(data):
            raise TruncatedFile(f"{path}: record {row}: vector cut short")
        vec = np.frombuffer(data[pos : pos + record_bytes], dtype="<f4").astype(np.float64)
        if not np.all(np.isfinite(vec)):
            raise NonFiniteComponent(f"{path}: record {row} ({term!r}) has NaN/Inf component")
        matrix[row] = vec
        terms.append(term)
        pos += record_bytes
        if pos < len(data) and data[pos : pos + 1] == b"\n":
            pos += 1
    if pos != len(data):
        raise HeaderMismatch(f"{path}: {len(data) - pos} trailing bytes after {count} records")
    return EmbeddingStore(dim, terms, matrix)


def save_text_format(store: EmbeddingStore, path: str | Path) -> None:
    """Write the store in text layout, components rounded through float32."""
    path = Path(path)
    lines = [f"{len(store)} {store.dim}"]
    for term in store.terms:
        vec = store.get(term)
        assert vec is not None
        comps = " ".join(str(float(np.float32(c))) for c in vec)
        lines.append(f"{term} {comps}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def save_binary_format(store: EmbeddingStore, path: str | Path) -> None:
    path = Path(path)
    chunks = [f"{len(store)} {store.dim}\n".encode("ascii")]
    for term in store.terms:
        vec = store.get(term)
        assert vec is not None
        chunks.append(term.encode("utf-8") + b" ")
        chunks.append(np.asarray(vec, dtype="<f4").tobytes())
        chunks.append(b"\n")
    path.write_bytes(b"".join(chunks))


def cosine_distance(a: Sequence[float] | np.ndarray, b: Sequence[float] | np.ndarray) -> float:
    """1 minus cosine similarity, clamped to [0, 2]. Symmetric by construction."""
    va = np.asarray(a, dtype=np.float64)
    vb = np.asarray(b, dtype=np.float64)
    if va.shape != vb.shape:
        raise DimensionMismatch(f"vector lengths differ: {va.shape} vs {vb.shape}")
    na = float(np.linalg.norm(va))
    nb = float(np.linalg.norm(vb))
    if na == 0.0 or nb == 0.0:
        raise ZeroNorm("cosine distance undefined for zero vector")
    dist = 1.0 - float(np.dot(va, vb)) / (na * nb)
    return min(2.0, max(0.0, dist))


def phrase_vector(store: EmbeddingStore, terms: Phrase) -> np.ndarray | None:
    """Component-wise mean of in-vocabulary term vectors; None if all are OOV."""
    if not terms:
        raise ValueError("phrase must contain at least one term")
    vecs = [v for v in (store.get(t) for t in terms) if v is not None]
    if not vecs:
        return None
    return np.mean(vecs, axis=0)


def min_distance_to_term(
    store: EmbeddingStore,
    candidate_terms: Sequence[Phrase],
    target: Phrase,
) -> tuple[float, list[str]] | None:
    """Closest candidate phrase to the target under cosine distance.

    Candidates (or a target) whose phrase vector cannot be formed are
    excluded; returns None when no pair resolves. Ties keep the earliest
    candidate in list order.
    """
    target_vec = phrase_vector(store, target)
    if target_vec is None:
        return None
    best: tuple[float, list[str]] | None = None
    for candidate in candidate_terms:
        vec = phrase_vector(store, candidate)
        if vec is None:
            continue
        try:
            dist = cosine_distance(target_vec, vec)
        except ZeroNorm:
            continue
        if best is None or dist < best[0]:
            best = (dist, list(candidate))
    return best
