"""Run the service: python -m qa_service --model <id-or-path> --port 8090.

The default model identifier is a public SQuAD-2.0 checkpoint and needs
either network access to the model hub or a local download; pass
``--model lexical`` for the dependency-free fallback backend.
"""

import argparse
import functools

import uvicorn

from .app import DEFAULT_MAX_CONTEXT_CHARS, create_app
from .model import load_backend

DEFAULT_MODEL = "deepset/roberta-base-squad2"


def main() -> int:
    parser = argparse.ArgumentParser(prog="qa-service")
    parser.add_argument("--model", default=DEFAULT_MODEL,
                        help="transformers checkpoint (path or hub id), or 'lexical'")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8090)
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--no-answer-margin", type=float, default=0.0)
    parser.add_argument("--max-context-chars", type=int, default=DEFAULT_MAX_CONTEXT_CHARS)
    args = parser.parse_args()

    if args.model == "lexical":
        loader = functools.partial(load_backend, "lexical")
    else:
        loader = functools.partial(
            load_backend,
            args.model,
            device=args.device,
            no_answer_margin=args.no_answer_margin,
        )
    app = create_app(backend_loader=loader, max_context_chars=args.max_context_chars)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
