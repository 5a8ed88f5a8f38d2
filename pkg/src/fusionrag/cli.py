"""Command-line interface.

Verbs: ingest, ask, bench, rubric add, serve, fuse.  Exit code 0 on
success, 1 on validation or usage errors, 2 on provider or IO failures.

`ingest` persists the chunked corpus and its index under the data
directory; `ask` and `bench` reuse those artifacts (or build directly
from a configured corpus directory) so repeat questions skip re-chunking.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .bench import (DEFAULT_QUERY_GENERATION_BOUND_MS, ORDER_BLOCKS, ORDERS,
                    RubricScore, RubricStore, render_report_table,
                    run_benchmark, write_report)
from .config import ServiceConfig, load_config
from .errors import (ConfigError, EmptyCorpusError, EmptyDocumentError,
                     FusionRagError, InputIntegrityError, NotFoundError,
                     PipelineError, ProviderError, QueryParseError,
                     ValidationError)
from .fusion import fuse
from .index import build_index, load_index, save_index
from .ingestion import build_corpus, read_corpus, write_corpus
from .models import MODE_RAG, MODE_RAG_FUSION, ChatExchange, RankedRetrieval
from .pipeline import CorpusHandles, run_pipeline
from .service import ExchangeStore

logger = logging.getLogger(__name__)

_MODE_FLAGS = {"rag": MODE_RAG, "rag-fusion": MODE_RAG_FUSION}


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; this CLI reserves 2 for
    provider/IO trouble, so usage errors exit 1 instead."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="fusionrag",
                     description="Multi-query fused retrieval answering "
                                 "with a classic baseline.")
    parser.add_argument("--config", help="path to a JSON config file "
                        "(default: $FUSIONRAG_CONFIG or built-in defaults)")
    verbs = parser.add_subparsers(dest="verb", required=True)

    ingest = verbs.add_parser("ingest", help="chunk and index a corpus "
                              "directory", parents=[])
    ingest.add_argument("directory")
    ingest.set_defaults(func=_cmd_ingest)

    ask = verbs.add_parser("ask", help="answer one query")
    ask.add_argument("query")
    ask.add_argument("--mode", choices=sorted(_MODE_FLAGS),
                     default="rag-fusion")
    ask.add_argument("--show-evidence", action="store_true")
    ask.set_defaults(func=_cmd_ask)

    bench = verbs.add_parser("bench", help="time back-to-back runs of "
                             "both pipelines")
    bench.add_argument("query")
    bench.add_argument("--runs", type=int, default=10)
    bench.add_argument("--order", choices=ORDERS, default=ORDER_BLOCKS)
    bench.set_defaults(func=_cmd_bench)

    rubric = verbs.add_parser("rubric", help="record answer grades")
    rubric_verbs = rubric.add_subparsers(dest="rubric_verb", required=True)
    rubric_add = rubric_verbs.add_parser("add")
    rubric_add.add_argument("exchange_id")
    rubric_add.add_argument("--accuracy", type=int, required=True)
    rubric_add.add_argument("--relevance", type=int, required=True)
    rubric_add.add_argument("--comprehensiveness", type=int, required=True)
    rubric_add.add_argument("--rater", default="cli")
    rubric_add.add_argument("--notes", default="")
    rubric_add.set_defaults(func=_cmd_rubric_add)

    serve = verbs.add_parser("serve", help="run the HTTP service")
    serve.set_defaults(func=_cmd_serve)

    fuse_verb = verbs.add_parser("fuse", help="fuse ranked-list JSON files "
                                 "(debug)")
    fuse_verb.add_argument("--lists", nargs="+", required=True,
                           metavar="FILE")
    fuse_verb.add_argument("--k", type=float, default=60.0)
    fuse_verb.set_defaults(func=_cmd_fuse)

    return parser


def _config(args) -> ServiceConfig:
    return load_config(args.config)


def _corpus_paths(config: ServiceConfig) -> tuple[Path, Path]:
    data_dir = Path(config.data_dir)
    return data_dir / "corpus", data_dir / "index"


def _cmd_ingest(args) -> int:
    config = _config(args)
    manifest, chunks, failures = build_corpus(args.directory,
                                              config.include_globs,
                                              config.chunking)
    corpus_dir, index_dir = _corpus_paths(config)
    write_corpus(corpus_dir, manifest, chunks)
    index = build_index(chunks, config.embedder, config.metric)
    save_index(index, index_dir, config.embedder)
    print(f"corpus {manifest.corpus_id}: {manifest.chunk_count} chunks "
          f"from {len(manifest.documents)} documents")
    for failure in failures:
        print(f"  skipped {failure.path}: {failure.reason}", file=sys.stderr)
    return 0


def _load_handles(config: ServiceConfig) -> CorpusHandles:
    """Previously ingested artifacts if present, else a fresh build from
    the configured corpus directory."""
    corpus_dir, index_dir = _corpus_paths(config)
    if (corpus_dir / "corpus.manifest.json").is_file():
        _, chunks = read_corpus(corpus_dir)
        try:
            index = load_index(index_dir, config.embedder)
        except FusionRagError:
            index = build_index(chunks, config.embedder, config.metric)
        return CorpusHandles(index=index,
                             chunks={c.chunk_id: c for c in chunks},
                             embedder=config.embedder)
    if config.corpus_dir is not None:
        _, chunks, _ = build_corpus(config.corpus_dir, config.include_globs,
                                    config.chunking)
        return CorpusHandles.from_chunks(chunks, config.embedder,
                                         config.metric)
    raise ConfigError("no corpus available: run `fusionrag ingest <dir>` "
                      "or set corpus_dir in the config")


def _print_exchange(exchange: ChatExchange, show_evidence: bool) -> None:
    print(exchange.answer)
    if exchange.generated_queries:
        print("\nGenerated queries:")
        for i, query in enumerate(exchange.generated_queries, start=1):
            print(f"  {i}. {query}")
    if show_evidence:
        print("\nEvidence:")
        if exchange.fusion is not None:
            scores = {e.chunk_id: e.rrf_score for e in exchange.fusion.entries}
            print(f"  {'rrf_score':<12}  chunk_id")
            for chunk_id in exchange.evidence:
                print(f"  {scores[chunk_id]:<12.6f}  {chunk_id}")
        else:
            distances = {hit.chunk_id: hit.distance
                         for hit in exchange.retrievals[0].entries}
            print(f"  {'distance':<12}  chunk_id")
            for chunk_id in exchange.evidence:
                print(f"  {distances[chunk_id]:<12.6f}  {chunk_id}")
        if not exchange.evidence:
            print("  (none)")
    timings = exchange.timings
    print(f"\n[{exchange.mode}] total {timings.total_ms}ms "
          f"(query_generation {timings.query_generation_ms}ms, "
          f"retrieval {timings.retrieval_ms}ms, "
          f"fusion {timings.fusion_ms}ms, "
          f"synthesis {timings.synthesis_ms}ms)  "
          f"exchange {exchange.exchange_id}")


def _cmd_ask(args) -> int:
    config = _config(args)
    handles = _load_handles(config)
    gateway = config.gateway.build()
    mode = _MODE_FLAGS[args.mode]
    pipeline_config = config.pipeline_for(mode)
    exchange = run_pipeline(args.query, handles, gateway, pipeline_config)
    ExchangeStore(Path(config.data_dir) / "exchanges").save(exchange)
    _print_exchange(exchange, args.show_evidence)
    return 0


def _cmd_bench(args) -> int:
    config = _config(args)
    if args.runs < 1:
        raise ValidationError("--runs must be >= 1")
    handles = _load_handles(config)
    gateway = config.gateway.build()
    report = run_benchmark(args.query, args.runs, handles, gateway,
                           config.pipeline_for(MODE_RAG),
                           config.pipeline_for(MODE_RAG_FUSION),
                           order=args.order)
    path = write_report(report, Path(config.data_dir) / "bench_report.json")
    print(render_report_table(report))
    if report.rag_failures or report.fusion_failures:
        print(f"failed runs: {report.rag_failures} rag, "
              f"{report.fusion_failures} fusion", file=sys.stderr)
    for run_index in report.slow_query_generation_runs:
        print(f"run {run_index}: query generation exceeded "
              f"{DEFAULT_QUERY_GENERATION_BOUND_MS}ms", file=sys.stderr)
    print(f"report written to {path}", file=sys.stderr)
    return 0


def _cmd_rubric_add(args) -> int:
    config = _config(args)
    data_dir = Path(config.data_dir)
    store = ExchangeStore(data_dir / "exchanges")
    rubric_store = RubricStore(data_dir / "rubric.jsonl",
                               lookup_mode=store.lookup_mode)
    score = RubricScore(exchange_id=args.exchange_id, rater=args.rater,
                        accuracy=args.accuracy, relevance=args.relevance,
                        comprehensiveness=args.comprehensiveness,
                        notes=args.notes)
    stored_id = rubric_store.record(score)
    record = rubric_store.get(args.exchange_id, args.rater)
    print(f"stored {stored_id} (revision {record['revision']})")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = _config(args)
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port)
    return 0


def _cmd_fuse(args) -> int:
    retrievals = []
    for list_path in args.lists:
        raw = json.loads(Path(list_path).read_text(encoding="utf-8"))
        retrievals.append(RankedRetrieval.from_dict(raw))
    result = fuse(retrievals, args.k)
    print(json.dumps(result.to_dict(), indent=2, sort_keys=True))
    return 0


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return args.func(args)
    except (ValidationError, ConfigError, EmptyCorpusError,
            EmptyDocumentError, InputIntegrityError, NotFoundError,
            ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ProviderError, PipelineError, QueryParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
