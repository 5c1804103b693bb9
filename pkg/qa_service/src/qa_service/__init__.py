"""Extractive QA inference service.

Speaks the wire protocol the summarization pipeline's remote QA client
expects: POST /v1/answer with {"question", "context"}, GET /v1/health.
Answers are verbatim context spans with Unicode scalar-value offsets, or an
explicit no-answer when the model judges the context silent.
"""

__version__ = "0.1.0"
