"""The ``oats`` command: ingest, identify, summarize, evaluate, stub-serve.

Every run is randomness-free: identical config, corpus, and stub backend
produce byte-identical output files. The identify step writes a manifest
recording a content hash of every input alongside the counts, so golden
runs are traceable to their exact inputs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import embeddings, evalkit, ontology, qa, summarizer, topicid
from .corpus import Document, ingest_corpus
from .errors import OatsError
from .server import make_server

logger = logging.getLogger("oats.cli")

TRIPLE_TAILS_CHOICES = ("any_gazetteer", "covid_only")


class ConfigError(OatsError):
    """The pipeline config file is invalid or references missing paths."""


@dataclass(frozen=True)
class QABackendConfig:
    kind: str  # "stub" | "remote"
    rules_path: Path | None = None
    url: str | None = None
    timeout_s: float = 30.0
    max_inflight: int = 4


@dataclass(frozen=True)
class PipelineConfig:
    corpus_path: Path
    corpus_format: str
    embeddings_path: Path
    embeddings_format: str
    lexicons_path: Path
    risk_factors_path: Path
    questions_path: Path
    stopwords_path: Path | None
    qa_backend: QABackendConfig
    max_items: int | None
    triple_tails: str
    output_dir: Path


def _require(mapping: dict, key: str, where: str):
    if key not in mapping:
        raise ConfigError(f"{where}: missing required key {key!r}")
    return mapping[key]


def _existing_path(raw, where: str) -> Path:
    path = Path(raw)
    if not path.exists():
        raise ConfigError(f"{where}: path does not exist: {path}")
    return path


def load_config(path: str | Path) -> PipelineConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file does not exist: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg})") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a JSON object")

    corpus_cfg = _require(raw, "corpus", str(path))
    embeddings_cfg = _require(raw, "embeddings", str(path))
    corpus_format = corpus_cfg.get("format", "jsonl")
    if corpus_format not in ("jsonl", "json-dir"):
        raise ConfigError(f"{path}: corpus.format must be 'jsonl' or 'json-dir'")
    embeddings_format = embeddings_cfg.get("format", "text")
    if embeddings_format not in ("text", "binary"):
        raise ConfigError(f"{path}: embeddings.format must be 'text' or 'binary'")

    backend_cfg = _require(raw, "qa_backend", str(path))
    if not isinstance(backend_cfg, dict) or len(backend_cfg) != 1:
        raise ConfigError(f"{path}: qa_backend must set exactly one of 'stub' or 'remote'")
    if "stub" in backend_cfg:
        rules = _existing_path(_require(backend_cfg["stub"], "rules", f"{path}: qa_backend.stub"), f"{path}: qa_backend.stub.rules")
        backend = QABackendConfig(kind="stub", rules_path=rules)
    elif "remote" in backend_cfg:
        remote = backend_cfg["remote"]
        backend = QABackendConfig(
            kind="remote",
            url=str(_require(remote, "url", f"{path}: qa_backend.remote")),
            timeout_s=float(remote.get("timeout_s", 30.0)),
            max_inflight=int(remote.get("max_inflight", 4)),
        )
    else:
        raise ConfigError(f"{path}: qa_backend must set exactly one of 'stub' or 'remote'")

    triple_tails = raw.get("triple_tails", "any_gazetteer")
    if triple_tails not in TRIPLE_TAILS_CHOICES:
        raise ConfigError(f"{path}: triple_tails must be one of {TRIPLE_TAILS_CHOICES}")

    stopwords_raw = raw.get("stopwords")
    max_items = raw.get("max_items")
    if max_items is not None and (not isinstance(max_items, int) or max_items < 0):
        raise ConfigError(f"{path}: max_items must be a non-negative integer")

    return PipelineConfig(
        corpus_path=_existing_path(_require(corpus_cfg, "path", f"{path}: corpus"), f"{path}: corpus.path"),
        corpus_format=corpus_format,
        embeddings_path=_existing_path(_require(embeddings_cfg, "path", f"{path}: embeddings"), f"{path}: embeddings.path"),
        embeddings_format=embeddings_format,
        lexicons_path=_existing_path(_require(raw, "lexicons", str(path)), f"{path}: lexicons"),
        risk_factors_path=_existing_path(_require(raw, "risk_factors", str(path)), f"{path}: risk_factors"),
        questions_path=_existing_path(_require(raw, "questions", str(path)), f"{path}: questions"),
        stopwords_path=_existing_path(stopwords_raw, f"{path}: stopwords") if stopwords_raw else None,
        qa_backend=backend,
        max_items=max_items,
        triple_tails=triple_tails,
        output_dir=Path(_require(raw, "output_dir", str(path))),
    )


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _load_embeddings(config: PipelineConfig) -> embeddings.EmbeddingStore:
    if config.embeddings_format == "binary":
        return embeddings.load_binary_format(config.embeddings_path)
    return embeddings.load_text_format(config.embeddings_path)


def _build_graph_for_doc(doc: Document, lexicon, pair_all: bool) -> ontology.ConceptGraph:
    mentions = ontology.gazetteer_extract(doc, lexicon)
    triples = ontology.form_cooccurrence_triples(
        mentions, pair_all_gazetteer_health=pair_all
    )
    return ontology.build_graph(doc.doc_id, triples)


def _fan_out(func, items, jobs: int | None):
    """Apply func to items, possibly in parallel; results keep item order."""
    if jobs is None:
        jobs = os.cpu_count() or 1
    if jobs <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, items))


def cmd_identify(config: PipelineConfig, jobs: int | None = None) -> int:
    docs = ingest_corpus(config.corpus_path, config.corpus_format)
    store = _load_embeddings(config)
    lexicon = ontology.load_lexicon(config.lexicons_path)
    specs = topicid.load_risk_factor_specs(config.risk_factors_path)
    pair_all = config.triple_tails == "any_gazetteer"

    graphs = _fan_out(lambda d: _build_graph_for_doc(d, lexicon, pair_all), docs, jobs)
    verdicts = topicid.judge_corpus(graphs, specs, store)

    config.output_dir.mkdir(parents=True, exist_ok=True)
    verdicts_path = config.output_dir / "verdicts.jsonl"
    with open(verdicts_path, "w", encoding="utf-8") as handle:
        for verdict in verdicts:
            handle.write(json.dumps(verdict.to_json_dict(), ensure_ascii=False) + "\n")

    relevant_fraction = {}
    for spec in sorted(specs, key=lambda s: s.name):
        hits = sum(1 for v in verdicts if v.risk_factor == spec.name and v.relevant)
        relevant_fraction[spec.name] = hits / len(docs) if docs else 0.0
    inputs = {
        "corpus": str(config.corpus_path),
        "embeddings": str(config.embeddings_path),
        "lexicons": str(config.lexicons_path),
        "risk_factors": str(config.risk_factors_path),
    }
    manifest = {
        "input_sha256": {name: _sha256(Path(p)) for name, p in sorted(inputs.items())},
        "documents": len(docs),
        "risk_factors": len(specs),
        "verdicts": len(verdicts),
        "relevant_fraction": relevant_fraction,
    }
    manifest_path = config.output_dir / "identify_manifest.json"
    manifest_path.write_text(
        json.dumps(manifest, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    logger.info("identify: %d docs, %d verdicts -> %s", len(docs), len(verdicts), verdicts_path)
    return 0


def _make_backend(config: PipelineConfig) -> qa.QABackend:
    if config.qa_backend.kind == "stub":
        return qa.stub_backend(qa.load_stub_rules(config.qa_backend.rules_path))
    return qa.RemoteBackend(
        config.qa_backend.url,
        timeout_s=config.qa_backend.timeout_s,
        max_inflight=config.qa_backend.max_inflight,
    )


def _relevant_doc_ids(filter_path: Path) -> set[str]:
    doc_ids = set()
    with open(filter_path, encoding="utf-8") as handle:
        for line in handle:
            if not line.strip():
                continue
            verdict = json.loads(line)
            if verdict.get("relevant"):
                doc_ids.add(verdict["doc_id"])
    return doc_ids


def cmd_summarize(
    config: PipelineConfig,
    relevance_filter: Path | None = None,
    jobs: int | None = None,
) -> int:
    docs = ingest_corpus(config.corpus_path, config.corpus_format)
    if relevance_filter is not None:
        keep = _relevant_doc_ids(relevance_filter)
        docs = [d for d in docs if d.doc_id in keep]
    questions = qa.load_questions(config.questions_path)
    stopwords = (
        summarizer.load_stopwords(config.stopwords_path)
        if config.stopwords_path
        else summarizer.default_stopwords()
    )
    backend = _make_backend(config)
    max_items = config.max_items if config.max_items is not None else len(questions)

    def summarize_one(doc: Document):
        try:
            failures: list[tuple[str, OatsError]] = []
            answers = qa.ask_all(backend, questions, doc.full_text, failures=failures)
            if any(isinstance(exc, qa.BackendUnreachable) for _, exc in failures):
                logger.error("summarize failed for %s: QA backend unreachable", doc.doc_id)
                return None
            scores = summarizer.score_sentences(doc, stopwords)
            return summarizer.build_summary(doc, questions, answers, scores, max_items)
        except Exception as exc:  # per-document isolation
            logger.error("summarize failed for %s: %s", doc.doc_id, exc)
            return None

    summaries = _fan_out(summarize_one, docs, jobs)
    succeeded = [s for s in summaries if s is not None]
    succeeded.sort(key=lambda s: s.doc_id)

    config.output_dir.mkdir(parents=True, exist_ok=True)
    out_path = config.output_dir / "summaries.jsonl"
    with open(out_path, "w", encoding="utf-8") as handle:
        for summary in succeeded:
            handle.write(json.dumps(summary.to_json_dict(), ensure_ascii=False) + "\n")
    logger.info("summarize: %d/%d documents -> %s", len(succeeded), len(docs), out_path)
    if docs and not succeeded:
        return 1
    return 0


def _predicted_by_factor(pred_path: Path) -> dict[str, set[str]]:
    predicted: dict[str, set[str]] = {}
    with open(pred_path, encoding="utf-8") as handle:
        for line in handle:
            if not line.strip():
                continue
            verdict = json.loads(line)
            predicted.setdefault(verdict["risk_factor"], set())
            if verdict.get("relevant"):
                predicted[verdict["risk_factor"]].add(verdict["doc_id"])
    return predicted


def cmd_eval(
    pred_path: Path | None,
    gold_path: Path | None,
    rubric_path: Path | None,
    out_path: Path | None = None,
) -> int:
    if rubric_path is not None:
        report = evalkit.aggregate_rubric(evalkit.load_rubric_csv(rubric_path)).to_json_dict()
    else:
        if pred_path is None or gold_path is None:
            raise ConfigError("eval needs either --rubric or both --pred and --gold")
        results = evalkit.evaluate_verdicts(
            _predicted_by_factor(pred_path), evalkit.load_gold_labels(gold_path)
        )
        report = {"per_factor": [r.to_json_dict() for r in results]}
    text = json.dumps(report, ensure_ascii=False, indent=2, sort_keys=True)
    if out_path is not None:
        out_path.write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return 0


def cmd_stub_serve(rules_path: Path, port: int, host: str = "127.0.0.1") -> int:
    backend = qa.stub_backend(qa.load_stub_rules(rules_path))
    try:
        server = make_server(backend, host=host, port=port)
    except OSError as exc:
        print(f"oats: cannot bind {host}:{port}: {exc}", file=sys.stderr)
        return 1
    bound_port = server.server_address[1]
    print(f"stub QA server listening on http://{host}:{bound_port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oats",
        description="Ontology-guided relevance triage and question-driven extractive summarization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_identify = sub.add_parser("identify", help="judge corpus relevance per risk factor")
    p_identify.add_argument("--config", required=True, type=Path)
    p_identify.add_argument("--jobs", type=int, default=None)

    p_summarize = sub.add_parser("summarize", help="build per-document summaries")
    p_summarize.add_argument("--config", required=True, type=Path)
    p_summarize.add_argument("--filter", type=Path, default=None,
                             help="verdicts file; only documents with a relevant verdict are summarized")
    p_summarize.add_argument("--jobs", type=int, default=None)

    p_eval = sub.add_parser("eval", help="precision/recall or rubric aggregation report")
    p_eval.add_argument("--pred", type=Path, default=None, help="predicted verdicts JSONL")
    p_eval.add_argument("--gold", type=Path, default=None, help="gold labels JSON")
    p_eval.add_argument("--rubric", type=Path, default=None, help="rubric sheet CSV")
    p_eval.add_argument("--out", type=Path, default=None, help="write report here instead of stdout")

    p_serve = sub.add_parser("stub-serve", help="serve the QA wire protocol from stub rules")
    p_serve.add_argument("--rules", required=True, type=Path)
    p_serve.add_argument("--port", required=True, type=int)
    p_serve.add_argument("--host", default="127.0.0.1")

    return parser


def _configure_logging() -> None:
    level_name = os.environ.get("OATS_LOG", "warn").lower()
    level = {
        "error": logging.ERROR,
        "warn": logging.WARNING,
        "info": logging.INFO,
        "debug": logging.DEBUG,
    }.get(level_name, logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "identify":
            return cmd_identify(load_config(args.config), jobs=args.jobs)
        if args.command == "summarize":
            return cmd_summarize(
                load_config(args.config), relevance_filter=args.filter, jobs=args.jobs
            )
        if args.command == "eval":
            return cmd_eval(args.pred, args.gold, args.rubric, args.out)
        if args.command == "stub-serve":
            return cmd_stub_serve(args.rules, args.port, args.host)
    except OatsError as exc:
        print(f"oats: {exc}", file=sys.stderr)
        return 2
    raise AssertionError("unhandled command")


if __name__ == "__main__":
    sys.exit(main())
