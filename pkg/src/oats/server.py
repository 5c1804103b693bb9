"""Offline QA server: the wire protocol in front of the stub backend.

Lets a full pipeline run take the exact same network path as a run against
a real model service, while staying deterministic and dependency-free.
"""

from __future__ import annotations

import json
import logging
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .qa import StubBackend

logger = logging.getLogger("oats.server")


class _QAHandler(BaseHTTPRequestHandler):
    backend: StubBackend  # set on the handler class by make_server
    model_name = "stub"

    def _send_json(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):  # noqa: N802 (http.server naming)
        if self.path == "/v1/health":
            self._send_json(200, {"status": "ok", "model": self.model_name})
        else:
            self._send_json(404, {"error": "not found"})

    def do_POST(self):  # noqa: N802
        if self.path != "/v1/answer":
            self._send_json(404, {"error": "not found"})
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            payload = json.loads(self.rfile.read(length).decode("utf-8"))
        except (ValueError, UnicodeDecodeError):
            self._send_json(400, {"error": "request body must be JSON"})
            return
        if (
            not isinstance(payload, dict)
            or not isinstance(payload.get("question"), str)
            or not isinstance(payload.get("context"), str)
            or not payload["context"]
        ):
            self._send_json(400, {"error": "request must carry 'question' and non-empty 'context'"})
            return
        raw = self.backend.answer(payload["question"], payload["context"])
        self._send_json(
            200,
            {
                "answered": raw.answered,
                "answer": raw.text if raw.answered else None,
                "start": raw.start,
                "end": raw.end,
                "score": raw.score,
                "no_answer_score": raw.no_answer_score,
            },
        )

    def log_message(self, format, *args):  # quiet by default; route to logging
        logger.debug("%s - %s", self.address_string(), format % args)


def make_server(backend: StubBackend, host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    """Bind a QA server; port 0 picks a free port (see server_address)."""
    handler = type("BoundQAHandler", (_QAHandler,), {"backend": backend})
    return ThreadingHTTPServer((host, port), handler)
