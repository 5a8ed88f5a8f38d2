"""The two end-to-end flows: classic retrieval-answering and its
multi-query fused variant.

Classic mode embeds the original query, retrieves once, and makes a
single synthesis call.  Fusion mode first asks the LLM for n search
queries, retrieves per query (optionally also for the original), fuses
the ranked lists by reciprocal rank, and sends the fused evidence plus
all queries to the second LLM call.  Every stage is timed; the two LLM
call latencies are recorded separately because the second call dominates
end-to-end latency.

Failures never silently change shape: a short query-generation parse
fails the run rather than degrading to classic mode, since a silent mode
change would corrupt any benchmark comparison.
"""

from __future__ import annotations

import ast
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone

from .embedding import EmbedderConfig, embed
from .errors import FusionRagError, PipelineError, QueryParseError
from .fusion import fuse, select_evidence
from .gateway import (CALL_ANSWER_SYNTHESIS, CALL_QUERY_GENERATION,
                      LlmGateway, LlmRequest)
from .index import METRIC_COSINE, VectorIndex, build_index, search
from .models import (MODE_RAG, MODE_RAG_FUSION, ChatExchange, DocumentChunk,
                     FusionResult, RankedRetrieval, StageTimings,
                     new_exchange_id)

QUERY_GENERATION_SYSTEM = "You generate search queries."
QUERY_GENERATION_TEMPLATE = (
    "Generate {n} search queries, one per line, numbered, that explore "
    "different aspects of the following question: {original_query}")

SYNTHESIS_SYSTEM = ("Answer using only the provided documents; if they do "
                    "not contain the answer, say so explicitly.")
SYNTHESIS_TEMPLATE = "Original query: {original_query}\n\n{generated_queries}{documents}"

_ENUM_PREFIX = re.compile(r"^(?:[-*•]\s*)?(?:\(?\d+[.):\]]\s*)?")
_QUOTES = "'\"‘’“”"


@dataclass(frozen=True)
class PipelineConfig:
    """Knobs for one pipeline run.

    per_query_top_n is the retrieval depth of each individual search;
    evidence_top_m caps how many fused chunks reach synthesis.  Fusion may
    yield fewer distinct chunks than evidence_top_m; that is fine.
    """

    mode: str = MODE_RAG_FUSION
    num_generated_queries: int = 4
    per_query_top_n: int = 5
    evidence_top_m: int = 8
    include_original_query_retrieval: bool = False
    k: float = 60.0
    retrieval_parallelism: int = 1
    query_generation_system: str = QUERY_GENERATION_SYSTEM
    query_generation_template: str = QUERY_GENERATION_TEMPLATE
    synthesis_system: str = SYNTHESIS_SYSTEM
    synthesis_template: str = SYNTHESIS_TEMPLATE

    def __post_init__(self):
        if self.mode not in (MODE_RAG, MODE_RAG_FUSION):
            raise ValueError(f"unknown mode {self.mode!r}")
        for name in ("num_generated_queries", "per_query_top_n",
                     "evidence_top_m", "retrieval_parallelism"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.k < 0:
            raise ValueError("k must be >= 0")

    def with_overrides(self, overrides: dict) -> "PipelineConfig":
        known = {k: v for k, v in overrides.items()
                 if k in self.__dataclass_fields__}
        unknown = set(overrides) - set(known)
        if unknown:
            raise ValueError(f"unknown pipeline options: {sorted(unknown)}")
        return replace(self, **known)


@dataclass(frozen=True)
class CorpusHandles:
    """Everything a pipeline run needs to retrieve: the built index, the
    chunk texts by id, and the embedder that produced the index."""

    index: VectorIndex
    chunks: dict[str, DocumentChunk] = field(default_factory=dict)
    embedder: EmbedderConfig = field(default_factory=EmbedderConfig)

    @classmethod
    def from_chunks(cls, chunks: list[DocumentChunk],
                    embedder: EmbedderConfig | None = None,
                    metric: str = METRIC_COSINE) -> "CorpusHandles":
        embedder = embedder or EmbedderConfig()
        if chunks:
            index = build_index(chunks, embedder, metric)
        else:
            index = VectorIndex.empty(embedder.dimension, metric)
        return cls(index=index,
                   chunks={c.chunk_id: c for c in chunks},
                   embedder=embedder)


def extract_query_candidates(raw_llm_text: str) -> list[str]:
    """Non-blank query strings with enumeration and quoting stripped.

    Accepts one-query-per-line output as well as a bracketed quoted list
    (some providers emit the latter)."""
    text = raw_llm_text.strip()
    items: list[str]
    if text.startswith("[") and text.endswith("]"):
        try:
            parsed = ast.literal_eval(text)
            items = [str(x) for x in parsed] if isinstance(
                parsed, (list, tuple)) else text.splitlines()
        except (ValueError, SyntaxError):
            items = text.splitlines()
    else:
        items = text.splitlines()

    cleaned = []
    for item in items:
        stripped = item.strip()
        stripped = _ENUM_PREFIX.sub("", stripped).strip()
        while (len(stripped) >= 2 and stripped[0] in _QUOTES
               and stripped[-1] in _QUOTES):
            stripped = stripped[1:-1].strip()
        if stripped:
            cleaned.append(stripped)
    return cleaned


def parse_generated_queries(raw_llm_text: str, expected_n: int) -> list[str]:
    """Exactly expected_n cleaned queries, or QueryParseError.

    Under-generation fails (padding would silently change the pipeline's
    shape); over-generation truncates to the first expected_n — callers
    record a warning for that via extract_query_candidates.
    """
    candidates = extract_query_candidates(raw_llm_text)
    if len(candidates) < expected_n:
        raise QueryParseError(
            f"expected {expected_n} generated queries, parsed "
            f"{len(candidates)}; raw output: {raw_llm_text!r}",
            raw_output=raw_llm_text)
    return candidates[:expected_n]


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


def _elapsed_ms(since: float) -> int:
    return int(round((time.perf_counter() - since) * 1000))


def _document_blocks(chunks: list[DocumentChunk]) -> str:
    return "\n\n".join(
        f"Document {i + 1} ({chunk.chunk_id}): {chunk.text}"
        for i, chunk in enumerate(chunks))


def _synthesis_prompt(config: PipelineConfig, original_query: str,
                      generated_queries: list[str],
                      evidence_chunks: list[DocumentChunk]) -> str:
    generated = ""
    if generated_queries:
        lines = "\n".join(f"{i + 1}. {q}" for i, q in enumerate(generated_queries))
        generated = f"Generated queries:\n{lines}\n\n"
    return config.synthesis_template.format(
        original_query=original_query,
        generated_queries=generated,
        documents=_document_blocks(evidence_chunks))


def _retrieve(handles: CorpusHandles, query: str, top_n: int) -> RankedRetrieval:
    vector = embed(query, handles.embedder)
    return search(handles.index, vector, top_n, query_text=query)


def _retrieve_all(handles: CorpusHandles, queries: list[str], top_n: int,
                  parallelism: int) -> list[RankedRetrieval]:
    if parallelism <= 1 or len(queries) <= 1:
        return [_retrieve(handles, q, top_n) for q in queries]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(lambda q: _retrieve(handles, q, top_n), queries))


def _synthesize(gateway: LlmGateway, config: PipelineConfig, query: str,
                generated_queries: list[str],
                evidence_chunks: list[DocumentChunk]) -> str:
    request = LlmRequest(
        system_prompt=config.synthesis_system,
        user_prompt=_synthesis_prompt(config, query, generated_queries,
                                      evidence_chunks),
        call_site=CALL_ANSWER_SYNTHESIS)
    return gateway.complete(request).text


def run_rag(query: str, handles: CorpusHandles, gateway: LlmGateway,
            config: PipelineConfig) -> ChatExchange:
    """Classic flow: one retrieval for the original query, one LLM call.

    An empty retrieval still completes — the synthesis prompt simply
    carries no documents and the model is instructed to say so.
    """
    started = time.perf_counter()
    created_at = _now_iso()

    stage = time.perf_counter()
    retrieval = _retrieve(handles, query, config.per_query_top_n)
    retrieval_ms = _elapsed_ms(stage)

    evidence = tuple(retrieval.chunk_ids()[:config.evidence_top_m])
    evidence_chunks = [handles.chunks[cid] for cid in evidence]

    stage = time.perf_counter()
    try:
        answer = _synthesize(gateway, config, query, [], evidence_chunks)
    except FusionRagError as exc:
        partial = _exchange(MODE_RAG, query, [], [retrieval], None, "",
                            evidence, created_at,
                            StageTimings(retrieval_ms=retrieval_ms,
                                         total_ms=_elapsed_ms(started)))
        raise PipelineError(f"synthesis call failed: {exc}",
                            partial_exchange=partial,
                            call_site=CALL_ANSWER_SYNTHESIS) from exc
    synthesis_ms = _elapsed_ms(stage)

    timings = StageTimings(retrieval_ms=retrieval_ms,
                           synthesis_ms=synthesis_ms,
                           total_ms=_elapsed_ms(started))
    return _exchange(MODE_RAG, query, [], [retrieval], None, answer,
                     evidence, created_at, timings)


def run_rag_fusion(query: str, handles: CorpusHandles, gateway: LlmGateway,
                   config: PipelineConfig) -> ChatExchange:
    """Fused flow: generate queries, retrieve per query, fuse, synthesize.

    Makes exactly two gateway calls.  When
    include_original_query_retrieval is set, the original query's own
    retrieval joins the fusion as one extra list (appended last).
    """
    started = time.perf_counter()
    created_at = _now_iso()
    n = config.num_generated_queries

    stage = time.perf_counter()
    request = LlmRequest(
        system_prompt=config.query_generation_system,
        user_prompt=config.query_generation_template.format(
            n=n, original_query=query),
        call_site=CALL_QUERY_GENERATION)
    try:
        generation = gateway.complete(request)
    except FusionRagError as exc:
        partial = _exchange(MODE_RAG_FUSION, query, [], [], None, "", (),
                            created_at,
                            StageTimings(total_ms=_elapsed_ms(started)))
        raise PipelineError(f"query generation call failed: {exc}",
                            partial_exchange=partial,
                            call_site=CALL_QUERY_GENERATION) from exc
    generated_queries = parse_generated_queries(generation.text, n)
    warnings = []
    if len(extract_query_candidates(generation.text)) > n:
        warnings.append(
            f"query generator produced more than {n} queries; truncated")
    query_generation_ms = _elapsed_ms(stage)

    stage = time.perf_counter()
    retrieval_queries = list(generated_queries)
    if config.include_original_query_retrieval:
        retrieval_queries.append(query)
    retrievals = _retrieve_all(handles, retrieval_queries,
                               config.per_query_top_n,
                               config.retrieval_parallelism)
    retrieval_ms = _elapsed_ms(stage)

    stage = time.perf_counter()
    fusion = fuse(retrievals, config.k)
    fusion_ms = _elapsed_ms(stage)

    evidence = tuple(select_evidence(fusion, config.evidence_top_m)
                     ) if fusion.entries else ()
    evidence_chunks = [handles.chunks[cid] for cid in evidence]

    stage = time.perf_counter()
    try:
        answer = _synthesize(gateway, config, query, generated_queries,
                             evidence_chunks)
    except FusionRagError as exc:
        partial = _exchange(MODE_RAG_FUSION, query, generated_queries,
                            retrievals, fusion, "", evidence, created_at,
                            StageTimings(
                                query_generation_ms=query_generation_ms,
                                retrieval_ms=retrieval_ms,
                                fusion_ms=fusion_ms,
                                total_ms=_elapsed_ms(started)),
                            warnings)
        raise PipelineError(f"synthesis call failed: {exc}",
                            partial_exchange=partial,
                            call_site=CALL_ANSWER_SYNTHESIS) from exc
    synthesis_ms = _elapsed_ms(stage)

    timings = StageTimings(query_generation_ms=query_generation_ms,
                           retrieval_ms=retrieval_ms,
                           fusion_ms=fusion_ms,
                           synthesis_ms=synthesis_ms,
                           total_ms=_elapsed_ms(started))
    return _exchange(MODE_RAG_FUSION, query, generated_queries, retrievals,
                     fusion, answer, evidence, created_at, timings, warnings)


def run_pipeline(query: str, handles: CorpusHandles, gateway: LlmGateway,
                 config: PipelineConfig) -> ChatExchange:
    if config.mode == MODE_RAG:
        return run_rag(query, handles, gateway, config)
    return run_rag_fusion(query, handles, gateway, config)


def _exchange(mode: str, query: str, generated_queries: list[str],
              retrievals: list[RankedRetrieval], fusion: FusionResult | None,
              answer: str, evidence: tuple[str, ...], created_at: str,
              timings: StageTimings,
              warnings: list[str] | None = None) -> ChatExchange:
    return ChatExchange(
        exchange_id=new_exchange_id(),
        mode=mode,
        original_query=query,
        generated_queries=tuple(generated_queries),
        retrievals=tuple(retrievals),
        fusion=fusion,
        answer=answer,
        evidence=evidence,
        timings=timings,
        created_at=created_at,
        warnings=tuple(warnings or ()),
    )
