"""HTTP surface: POST /v1/answer and GET /v1/health.

The model loads exactly once per process; /v1/answer returns 503 until it
is ready and 400 for malformed requests (missing fields, empty context,
context over the advertised cap). Before any answered response leaves the
process, the span is re-sliced from the received context and must equal the
answer text exactly.
"""

from __future__ import annotations

import logging
import threading
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .model import Prediction

logger = logging.getLogger("qa_service")

DEFAULT_MAX_CONTEXT_CHARS = 100_000


class AnswerRequest(BaseModel):
    question: str
    context: str


class OffsetRoundTripError(RuntimeError):
    """A prediction's offsets do not reproduce its text; never ship it."""


def _wire_response(prediction: Prediction) -> dict:
    return {
        "answered": prediction.answered,
        "answer": prediction.text if prediction.answered else None,
        "start": prediction.start,
        "end": prediction.end,
        "score": prediction.score,
        "no_answer_score": prediction.no_answer_score,
    }


def create_app(
    backend=None,
    backend_loader=None,
    max_context_chars: int = DEFAULT_MAX_CONTEXT_CHARS,
) -> FastAPI:
    """Build the service around a backend (or a deferred loader).

    Exactly one of ``backend`` / ``backend_loader`` must be given. With a
    loader, the model is constructed on startup and /v1/answer replies 503
    until it finishes.
    """
    if (backend is None) == (backend_loader is None):
        raise ValueError("pass exactly one of backend or backend_loader")

    state = {"backend": backend}
    inference_lock = threading.Lock()

    @asynccontextmanager
    async def _lifespan(app: FastAPI):
        if state["backend"] is None:
            state["backend"] = backend_loader()
            logger.info("model loaded: %s", state["backend"].name)
        yield

    app = FastAPI(title="qa-service", lifespan=_lifespan)

    @app.exception_handler(RequestValidationError)
    async def _bad_request(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": "malformed request body"})

    @app.get("/v1/health")
    def health():
        loaded = state["backend"] is not None
        return {
            "status": "ok" if loaded else "loading",
            "model": state["backend"].name if loaded else None,
            "max_context_chars": max_context_chars,
        }

    @app.post("/v1/answer")
    def answer(request: AnswerRequest):
        if state["backend"] is None:
            return JSONResponse(status_code=503, content={"error": "model is loading"})
        if not request.context:
            return JSONResponse(status_code=400, content={"error": "context must be non-empty"})
        if not request.question:
            return JSONResponse(status_code=400, content={"error": "question must be non-empty"})
        if len(request.context) > max_context_chars:
            return JSONResponse(
                status_code=400,
                content={"error": f"context exceeds {max_context_chars} characters"},
            )
        # Serialize inference; health stays responsive on other threads.
        with inference_lock:
            prediction = state["backend"].predict(request.question, request.context)
        if prediction.answered:
            sliced = request.context[prediction.start : prediction.end]
            if sliced != prediction.text or not prediction.text:
                raise OffsetRoundTripError(
                    f"span [{prediction.start},{prediction.end}) yields {sliced!r}, "
                    f"prediction text is {prediction.text!r}"
                )
        return _wire_response(prediction)

    return app
