"""Multi-query fused retrieval answering with a classic single-query
baseline, an exact vector index, a deterministic offline LLM mock, a
latency benchmark harness, and an HTTP service."""

__version__ = "0.1.0"

from .bench import (BenchReport, BenchRun, RubricScore, RubricStore,
                    load_reference_report, render_report_table,
                    rubric_summary, run_benchmark)
from .embedding import EmbedderConfig, embed
from .errors import (ConfigError, DimensionMismatchError, EmptyCorpusError,
                     EmptyDocumentError, FusionRagError, GatewayTimeoutError,
                     IndexBuildError, IndexMetaMismatchError,
                     InputIntegrityError, NotFoundError, PipelineError,
                     ProviderError, QueryParseError, RetryExhaustedError,
                     ValidationError)
from .fusion import DEFAULT_K, fuse, rrf_score, select_evidence
from .gateway import (HttpGateway, LlmGateway, LlmRequest, LlmResponse,
                      MockConfig, MockGateway, ProviderConfig)
from .index import (METRIC_COSINE, METRIC_EUCLIDEAN, VectorIndex, build_index,
                    load_index, save_index, search)
from .ingestion import (ChunkingConfig, CorpusManifest, build_corpus,
                        chunk_text, load_documents, read_corpus, write_corpus)
from .models import (MODE_RAG, MODE_RAG_FUSION, ChatExchange, Contributor,
                     DocumentChunk, EmbeddingVector, FusedEntry, FusionResult,
                     RankedRetrieval, RetrievalHit, StageTimings, dump_json,
                     new_exchange_id, parse_json, validate_exchange)
from .pipeline import (CorpusHandles, PipelineConfig, parse_generated_queries,
                       run_pipeline, run_rag, run_rag_fusion)

__all__ = [
    "BenchReport", "BenchRun", "ChatExchange", "ChunkingConfig",
    "ConfigError", "Contributor", "CorpusHandles", "CorpusManifest",
    "DEFAULT_K", "DimensionMismatchError", "DocumentChunk", "EmbedderConfig",
    "EmbeddingVector", "EmptyCorpusError", "EmptyDocumentError",
    "FusedEntry", "FusionRagError", "FusionResult", "GatewayTimeoutError",
    "HttpGateway", "IndexBuildError", "IndexMetaMismatchError",
    "InputIntegrityError", "LlmGateway", "LlmRequest", "LlmResponse",
    "METRIC_COSINE", "METRIC_EUCLIDEAN", "MODE_RAG", "MODE_RAG_FUSION",
    "MockConfig", "MockGateway", "NotFoundError", "PipelineConfig",
    "PipelineError", "ProviderConfig", "ProviderError", "QueryParseError",
    "RankedRetrieval", "RetrievalHit", "RetryExhaustedError", "RubricScore",
    "RubricStore", "StageTimings", "ValidationError", "VectorIndex",
    "build_corpus", "build_index", "chunk_text", "dump_json", "embed",
    "fuse", "load_documents", "load_index", "load_reference_report",
    "new_exchange_id", "parse_generated_queries", "parse_json",
    "read_corpus", "render_report_table", "rrf_score", "rubric_summary",
    "run_benchmark", "run_pipeline", "run_rag", "run_rag_fusion",
    "save_index", "search", "select_evidence", "validate_exchange",
    "write_corpus",
]
