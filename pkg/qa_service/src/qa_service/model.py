"""QA model backends.

Two interchangeable implementations sit behind one tiny interface:

- ``TransformersBackend`` runs any extractive-QA checkpoint (SQuAD-2.0
  style: span prediction plus a no-answer decision at the [CLS] position),
  loaded from a local directory or hub identifier. Long contexts are
  windowed at token level with a stride; the best span across windows wins.
- ``LexicalBackend`` is a dependency-free deterministic fallback: it
  returns the context sentence sharing the most content words with the
  question, or no-answer when they share none. Useful for smoke tests and
  offline pipelines; not a substitute for a trained model.

Every prediction is a verbatim slice of the context string at character
offsets; both backends guarantee ``context[start:end] == text``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass


@dataclass(frozen=True)
class Prediction:
    answered: bool
    text: str
    start: int | None
    end: int | None
    score: float
    no_answer_score: float

    @classmethod
    def no_answer(cls, no_answer_score: float = 1.0, score: float = 0.0) -> "Prediction":
        return cls(False, "", None, None, score, no_answer_score)


_QUESTION_STOPWORDS = frozenset(
    """a an and are did do does for from how in into is it many much of on or
    that the there this to was were what when where which who why with""".split()
)

_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+|\n+")
_WORD = re.compile(r"[0-9a-zA-Z][0-9a-zA-Z-]*")


class LexicalBackend:
    """Word-overlap extractive heuristic with an explicit no-answer."""

    name = "lexical"

    def predict(self, question: str, context: str) -> Prediction:
        content = {
            w.casefold()
            for w in _WORD.findall(question)
            if w.casefold() not in _QUESTION_STOPWORDS
        }
        if not content:
            return Prediction.no_answer()

        best: tuple[float, int, int] | None = None
        position = 0
        for piece in _SENTENCE_SPLIT.split(context):
            if piece:
                start = context.index(piece, position)
                end = start + len(piece)
                position = end
                words = {w.casefold() for w in _WORD.findall(piece)}
                overlap = len(content & words) / len(content)
                if overlap > 0 and (best is None or overlap > best[0]):
                    best = (overlap, start, end)
        if best is None:
            return Prediction.no_answer()
        score, start, end = best
        return Prediction(
            answered=True,
            text=context[start:end],
            start=start,
            end=end,
            score=score,
            no_answer_score=1.0 - score,
        )


class TransformersBackend:
    """Span prediction over a pretrained extractive-QA transformer.

    The no-answer decision follows the SQuAD 2.0 convention: the [CLS]
    (start+end) logit sum is the no-answer score, and a span is emitted
    only when the best span score beats it by at least ``no_answer_margin``.
    """

    def __init__(
        self,
        model_id: str,
        device: str = "cpu",
        max_seq_len: int = 384,
        doc_stride: int = 128,
        max_answer_tokens: int = 64,
        n_best: int = 20,
        no_answer_margin: float = 0.0,
    ):
        import torch
        from transformers import AutoModelForQuestionAnswering, AutoTokenizer

        self._torch = torch
        self.name = model_id
        self.device = device
        self.max_seq_len = max_seq_len
        self.doc_stride = doc_stride
        self.max_answer_tokens = max_answer_tokens
        self.n_best = n_best
        self.no_answer_margin = no_answer_margin
        self.tokenizer = AutoTokenizer.from_pretrained(model_id, use_fast=True)
        self.model = AutoModelForQuestionAnswering.from_pretrained(model_id)
        self.model.to(device)
        self.model.eval()

    def predict(self, question: str, context: str) -> Prediction:
        torch = self._torch
        encoding = self.tokenizer(
            question,
            context,
            return_offsets_mapping=True,
            return_overflowing_tokens=True,
            truncation="only_second",
            stride=self.doc_stride,
            max_length=self.max_seq_len,
            padding=False,
        )

        best_span: tuple[float, int, int] | None = None  # (score, char_start, char_end)
        best_no_answer: float | None = None
        for window in range(len(encoding["input_ids"])):
            input_ids = torch.tensor([encoding["input_ids"][window]], device=self.device)
            attention = torch.tensor([encoding["attention_mask"][window]], device=self.device)
            with torch.no_grad():
                output = self.model(input_ids=input_ids, attention_mask=attention)
            start_logits = output.start_logits[0]
            end_logits = output.end_logits[0]

            no_answer = float(start_logits[0] + end_logits[0])  # [CLS] position
            if best_no_answer is None or no_answer < best_no_answer:
                best_no_answer = no_answer

            sequence_ids = encoding.sequence_ids(window)
            offsets = encoding["offset_mapping"][window]
            context_mask = torch.tensor(
                [
                    seq == 1 and offsets[i][0] != offsets[i][1]
                    for i, seq in enumerate(sequence_ids)
                ],
                device=self.device,
            )
            if not bool(context_mask.any()):
                continue
            neg_inf = torch.finfo(start_logits.dtype).min
            masked_starts = start_logits.masked_fill(~context_mask, neg_inf)
            masked_ends = end_logits.masked_fill(~context_mask, neg_inf)
            k = min(self.n_best, int(context_mask.sum()))
            top_starts = torch.topk(masked_starts, k)
            top_ends = torch.topk(masked_ends, k)
            for si, s_logit in zip(top_starts.indices.tolist(), top_starts.values.tolist()):
                for ej, e_logit in zip(top_ends.indices.tolist(), top_ends.values.tolist()):
                    if ej < si or ej - si + 1 > self.max_answer_tokens:
                        continue
                    score = s_logit + e_logit
                    if best_span is None or score > best_span[0]:
                        best_span = (score, offsets[si][0], offsets[ej][1])

        no_answer_score = best_no_answer if best_no_answer is not None else 0.0
        if best_span is None or best_span[0] <= no_answer_score + self.no_answer_margin:
            return Prediction.no_answer(no_answer_score=no_answer_score)
        score, char_start, char_end = best_span
        if not (0 <= char_start < char_end <= len(context)):
            return Prediction.no_answer(no_answer_score=no_answer_score)
        return Prediction(
            answered=True,
            text=context[char_start:char_end],
            start=char_start,
            end=char_end,
            score=score,
            no_answer_score=no_answer_score,
        )


def load_backend(model_id: str, **kwargs):
    """"lexical" selects the fallback; anything else is a transformers checkpoint."""
    if model_id == "lexical":
        return LexicalBackend()
    return TransformersBackend(model_id, **kwargs)
