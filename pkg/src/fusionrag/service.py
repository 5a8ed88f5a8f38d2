"""HTTP service: chat, ingestion, benchmarking, rubric recording, and
exchange history.

Every successful chat run is persisted as one JSON file per exchange
under the data directory, named by its sortable exchange id, so history
listing is a reverse filename sort.  The chat response body is the full
exchange record, internals included, so a client can show why an answer
cited what it cited.

Concurrency: chat requests run up to a configured limit in parallel;
ingest builds a new index off to the side and swaps it in atomically;
benchmarks are exclusive and a second one gets 409 instead of queueing.
"""

from __future__ import annotations

import logging
import threading
from pathlib import Path

from fastapi import Body, FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

from . import __version__
from .bench import (ORDERS, RubricScore, RubricStore, render_report_table,
                    run_benchmark, write_report)
from .config import ServiceConfig
from .errors import (FusionRagError, NotFoundError, PipelineError,
                     QueryParseError, ValidationError)
from .gateway import LlmGateway
from .ingestion import ChunkingConfig, build_corpus
from .models import (MODE_RAG, MODE_RAG_FUSION, ChatExchange, dump_json,
                     parse_json)
from .pipeline import CorpusHandles, run_pipeline

logger = logging.getLogger(__name__)

MODES = (MODE_RAG, MODE_RAG_FUSION)


class ExchangeStore:
    """One canonical JSON file per exchange, named by exchange id."""

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def _path(self, exchange_id: str) -> Path:
        if not exchange_id or "/" in exchange_id or exchange_id.startswith("."):
            raise NotFoundError(f"unknown exchange {exchange_id!r}")
        return self.root / f"{exchange_id}.json"

    def save(self, exchange: ChatExchange) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        path = self._path(exchange.exchange_id)
        path.write_text(dump_json(exchange), encoding="utf-8")
        return path

    def get(self, exchange_id: str) -> ChatExchange:
        path = self._path(exchange_id)
        if not path.is_file():
            raise NotFoundError(f"unknown exchange {exchange_id!r}")
        return parse_json(path.read_text(encoding="utf-8"))

    def lookup_mode(self, exchange_id: str) -> str | None:
        try:
            return self.get(exchange_id).mode
        except NotFoundError:
            return None

    def list_ids(self, limit: int | None = None) -> list[str]:
        # exchange ids sort by creation time, so reverse name order is
        # newest first
        if not self.root.is_dir():
            return []
        ids = sorted((p.stem for p in self.root.glob("*.json")), reverse=True)
        return ids[:limit] if limit is not None else ids


def _bad_request(message: str) -> HTTPException:
    return HTTPException(status_code=400, detail=message)


def create_app(config: ServiceConfig | None = None,
               gateway: LlmGateway | None = None,
               handles: CorpusHandles | None = None) -> FastAPI:
    """Builds the service.  gateway and handles are injectable for tests;
    by default the gateway comes from config and the index is built from
    config.corpus_dir when one is set (otherwise chat returns 503 until
    an ingest supplies an index)."""
    config = config or ServiceConfig()
    gateway = gateway or config.gateway.build()
    if handles is None and config.corpus_dir is not None:
        handles = _ingest_dir(config, config.corpus_dir,
                              list(config.include_globs), config.chunking)[0]

    app = FastAPI(title="fusionrag", version=__version__)
    if config.cors_origins:
        app.add_middleware(CORSMiddleware,
                           allow_origins=list(config.cors_origins),
                           allow_methods=["*"], allow_headers=["*"])

    data_dir = Path(config.data_dir)
    store = ExchangeStore(data_dir / "exchanges")
    rubric_store = RubricStore(data_dir / "rubric.jsonl",
                               lookup_mode=store.lookup_mode)

    state = app.state
    state.config = config
    state.gateway = gateway
    state.handles = handles
    state.exchange_store = store
    state.rubric_store = rubric_store
    state.chat_slots = threading.BoundedSemaphore(config.max_concurrent_chats)
    state.bench_lock = threading.Lock()
    state.ingest_lock = threading.Lock()

    @app.get("/api/health")
    def health() -> dict:
        ready = state.handles is not None
        return {
            "status": "ok",
            "version": __version__,
            "index_ready": ready,
            "chunk_count": len(state.handles.chunks) if ready else 0,
        }

    @app.post("/api/chat")
    def chat(payload: dict = Body(...)) -> dict:
        query = payload.get("query", "")
        if not isinstance(query, str) or not query.strip():
            raise _bad_request("query must be a non-empty string")
        mode = payload.get("mode", MODE_RAG_FUSION)
        if mode not in MODES:
            raise _bad_request(f"mode must be one of {list(MODES)}")
        current = state.handles
        if current is None:
            raise HTTPException(status_code=503, detail="index not ready")
        pipeline_config = config.pipeline_for(mode)
        overrides = payload.get("config", {})
        if overrides:
            try:
                pipeline_config = pipeline_config.with_overrides(
                    dict(overrides, mode=mode))
            except (TypeError, ValueError) as exc:
                raise _bad_request(f"bad config overrides: {exc}") from exc
        with state.chat_slots:
            try:
                exchange = run_pipeline(query.strip(), current,
                                        state.gateway, pipeline_config)
            except PipelineError as exc:
                raise HTTPException(status_code=502, detail={
                    "error": str(exc), "call_site": exc.call_site,
                }) from exc
            except QueryParseError as exc:
                raise HTTPException(status_code=502, detail={
                    "error": str(exc), "call_site": "query_generation",
                }) from exc
        store.save(exchange)
        return exchange.to_dict()

    @app.post("/api/ingest")
    def ingest(payload: dict = Body(...)) -> dict:
        root_path = payload.get("root_path", "")
        if not isinstance(root_path, str) or not root_path.strip():
            raise _bad_request("root_path must be a non-empty string")
        globs = payload.get("include_globs") or list(config.include_globs)
        chunking = config.chunking
        if payload.get("chunking"):
            try:
                chunking = ChunkingConfig(**payload["chunking"])
            except (TypeError, ValueError) as exc:
                raise _bad_request(f"bad chunking options: {exc}") from exc
        with state.ingest_lock:
            try:
                new_handles, manifest, failures = _ingest_dir(
                    config, root_path, globs, chunking)
            except FusionRagError as exc:
                raise _bad_request(str(exc)) from exc
            state.handles = new_handles
        return {
            "corpus_id": manifest.corpus_id,
            "chunk_count": manifest.chunk_count,
            "document_count": len(manifest.documents),
            "failures": [{"path": f.path, "reason": f.reason}
                         for f in failures],
        }

    @app.post("/api/bench")
    def bench(payload: dict = Body(...)) -> dict:
        query = payload.get("query", "")
        if not isinstance(query, str) or not query.strip():
            raise _bad_request("query must be a non-empty string")
        runs_per_mode = payload.get("runs_per_mode", 10)
        if not isinstance(runs_per_mode, int) or isinstance(runs_per_mode, bool) \
                or runs_per_mode < 1:
            raise _bad_request("runs_per_mode must be an integer >= 1")
        order = payload.get("order", ORDERS[0])
        if order not in ORDERS:
            raise _bad_request(f"order must be one of {list(ORDERS)}")
        current = state.handles
        if current is None:
            raise HTTPException(status_code=503, detail="index not ready")
        if not state.bench_lock.acquire(blocking=False):
            raise HTTPException(status_code=409,
                                detail="a benchmark is already running")
        try:
            report = run_benchmark(query.strip(), runs_per_mode, current,
                                   state.gateway,
                                   config.pipeline_for(MODE_RAG),
                                   config.pipeline_for(MODE_RAG_FUSION),
                                   order=order)
        finally:
            state.bench_lock.release()
        write_report(report, data_dir / "bench_report.json")
        result = report.to_dict()
        result["table"] = render_report_table(report)
        return result

    @app.post("/api/rubric")
    def rubric(payload: dict = Body(...)) -> dict:
        try:
            score = RubricScore.from_dict(payload)
        except KeyError as exc:
            raise _bad_request(f"missing field {exc.args[0]!r}") from exc
        except ValidationError as exc:
            raise _bad_request(str(exc)) from exc
        try:
            stored_id = rubric_store.record(score)
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        record = rubric_store.get(score.exchange_id, score.rater)
        return {"stored_id": stored_id, "revision": record["revision"]}

    @app.get("/api/exchanges/{exchange_id}")
    def get_exchange(exchange_id: str) -> dict:
        try:
            return store.get(exchange_id).to_dict()
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    @app.get("/api/exchanges")
    def list_exchanges(limit: int = 50) -> dict:
        if limit < 1:
            raise _bad_request("limit must be >= 1")
        summaries = []
        for exchange_id in store.list_ids(limit):
            try:
                exchange = store.get(exchange_id)
            except NotFoundError:
                continue
            summaries.append({
                "exchange_id": exchange.exchange_id,
                "mode": exchange.mode,
                "original_query": exchange.original_query,
                "created_at": exchange.created_at,
                "answer": exchange.answer,
            })
        return {"exchanges": summaries}

    return app


def _ingest_dir(config: ServiceConfig, root_path: str, globs: list[str],
                chunking: ChunkingConfig):
    """Loads, chunks, and indexes a directory; returns the new handles
    alongside the manifest and per-file failures."""
    manifest, chunks, failures = build_corpus(root_path, tuple(globs), chunking)
    for failure in failures:
        logger.warning("ingest failure for %s: %s", failure.path, failure.reason)
    handles = CorpusHandles.from_chunks(chunks, config.embedder, config.metric)
    return handles, manifest, failures
