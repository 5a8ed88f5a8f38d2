"""Core domain types shared by every other module.

All types are immutable value objects (frozen dataclasses over tuples), so
they can be shared and sent between threads freely.  Each type serializes
to a snake_case JSON dict via ``to_dict`` and back via ``from_dict``;
``dump_json`` / ``parse_json`` give the canonical on-disk form used for
persisted exchanges.

Malformed exchanges are data, not errors: ``validate_exchange`` returns a
list of human-readable violations instead of raising.
"""

from __future__ import annotations

import json
import secrets
import time
from dataclasses import dataclass, field

SCORE_TOLERANCE = 1e-12

MODE_RAG = "rag"
MODE_RAG_FUSION = "rag_fusion"
MODES = (MODE_RAG, MODE_RAG_FUSION)

# Crockford base32, used for sortable exchange ids.
_B32 = "0123456789ABCDEFGHJKMNPQRSTVWXYZ"


def new_exchange_id(now_ms: int | None = None) -> str:
    """Return a 26-char sortable id: 48-bit ms timestamp + 80 random bits."""
    ts = int(time.time() * 1000) if now_ms is None else now_ms
    value = int.from_bytes(ts.to_bytes(6, "big") + secrets.token_bytes(10), "big")
    chars = []
    for shift in range(125, -1, -5):
        chars.append(_B32[(value >> shift) & 31])
    return "".join(chars)


@dataclass(frozen=True)
class DocumentChunk:
    """A retrievable unit of corpus text with source metadata."""

    chunk_id: str
    doc_id: str
    text: str
    position: int
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError(f"chunk {self.chunk_id!r}: text is empty after trimming")
        if self.position < 0:
            raise ValueError(f"chunk {self.chunk_id!r}: position must be >= 0")

    def to_dict(self) -> dict:
        return {
            "chunk_id": self.chunk_id,
            "doc_id": self.doc_id,
            "text": self.text,
            "position": self.position,
            "metadata": dict(self.metadata),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DocumentChunk":
        return cls(
            chunk_id=d["chunk_id"],
            doc_id=d["doc_id"],
            text=d["text"],
            position=int(d["position"]),
            metadata=dict(d.get("metadata", {})),
        )


@dataclass(frozen=True)
class EmbeddingVector:
    """Fixed-dimension numeric representation of a piece of text."""

    values: tuple[float, ...]
    normalized: bool = False

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.normalized:
            norm = sum(v * v for v in self.values) ** 0.5
            if abs(norm - 1.0) > 1e-6:
                raise ValueError(
                    f"vector flagged normalized but L2 norm is {norm:.9f}"
                )

    @property
    def dimension(self) -> int:
        return len(self.values)

    def to_dict(self) -> dict:
        return {"values": list(self.values), "normalized": self.normalized}

    @classmethod
    def from_dict(cls, d: dict) -> "EmbeddingVector":
        return cls(values=tuple(d["values"]), normalized=bool(d["normalized"]))


@dataclass(frozen=True)
class RetrievalHit:
    """One (chunk, distance) entry of a ranked retrieval."""

    chunk_id: str
    distance: float

    def __post_init__(self):
        if self.distance < 0:
            raise ValueError(f"hit {self.chunk_id!r}: distance must be >= 0")

    def to_dict(self) -> dict:
        return {"chunk_id": self.chunk_id, "distance": self.distance}

    @classmethod
    def from_dict(cls, d: dict) -> "RetrievalHit":
        return cls(chunk_id=d["chunk_id"], distance=float(d["distance"]))


@dataclass(frozen=True)
class RankedRetrieval:
    """One query's ordered retrieval result, ascending by distance.

    Ties in distance break ascending by chunk_id; duplicates are invalid.
    Violations surface through ``violations()`` rather than at construction
    so that corrupt inputs can still be inspected.
    """

    query_text: str
    entries: tuple[RetrievalHit, ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))

    def chunk_ids(self) -> list[str]:
        return [hit.chunk_id for hit in self.entries]

    def violations(self) -> list[str]:
        problems = []
        keys = [(hit.distance, hit.chunk_id) for hit in self.entries]
        if keys != sorted(keys):
            problems.append(
                f"retrieval {self.query_text!r}: entries not sorted by (distance, chunk_id)"
            )
        ids = self.chunk_ids()
        if len(ids) != len(set(ids)):
            problems.append(f"retrieval {self.query_text!r}: duplicate chunk_id")
        return problems

    def to_dict(self) -> dict:
        return {
            "query_text": self.query_text,
            "entries": [hit.to_dict() for hit in self.entries],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RankedRetrieval":
        return cls(
            query_text=d["query_text"],
            entries=tuple(RetrievalHit.from_dict(e) for e in d["entries"]),
        )


@dataclass(frozen=True)
class Contributor:
    """A (query, rank) pair that contributed to a fused score."""

    query_text: str
    rank: int

    def to_dict(self) -> dict:
        return {"query_text": self.query_text, "rank": self.rank}

    @classmethod
    def from_dict(cls, d: dict) -> "Contributor":
        return cls(query_text=d["query_text"], rank=int(d["rank"]))


@dataclass(frozen=True)
class FusedEntry:
    """A chunk with its accumulated reciprocal-rank score and provenance."""

    chunk_id: str
    rrf_score: float
    contributors: tuple[Contributor, ...]

    def __post_init__(self):
        object.__setattr__(self, "contributors", tuple(self.contributors))

    def to_dict(self) -> dict:
        return {
            "chunk_id": self.chunk_id,
            "rrf_score": self.rrf_score,
            "contributors": [c.to_dict() for c in self.contributors],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FusedEntry":
        return cls(
            chunk_id=d["chunk_id"],
            rrf_score=float(d["rrf_score"]),
            contributors=tuple(Contributor.from_dict(c) for c in d["contributors"]),
        )


@dataclass(frozen=True)
class FusionResult:
    """Fused, reranked chunk list with per-query provenance."""

    entries: tuple[FusedEntry, ...]
    k_used: float

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))

    def chunk_ids(self) -> list[str]:
        return [e.chunk_id for e in self.entries]

    def violations(self) -> list[str]:
        problems = []
        if self.k_used < 0:
            problems.append(f"fusion: k_used {self.k_used} is negative")
        keys = [(-e.rrf_score, e.chunk_id) for e in self.entries]
        if keys != sorted(keys):
            problems.append("fusion: entries not sorted by (-rrf_score, chunk_id)")
        ids = self.chunk_ids()
        if len(ids) != len(set(ids)):
            problems.append("fusion: duplicate chunk_id")
        for entry in self.entries:
            if not entry.contributors:
                problems.append(f"fusion {entry.chunk_id!r}: no contributors")
                continue
            if any(c.rank < 1 for c in entry.contributors):
                problems.append(f"fusion {entry.chunk_id!r}: contributor rank < 1")
                continue
            expected = sum(1.0 / (c.rank + self.k_used) for c in entry.contributors)
            if abs(entry.rrf_score - expected) > SCORE_TOLERANCE:
                problems.append(
                    f"fusion {entry.chunk_id!r}: score {entry.rrf_score!r} != "
                    f"sum of contributions {expected!r}"
                )
        return problems

    def to_dict(self) -> dict:
        return {
            "entries": [e.to_dict() for e in self.entries],
            "k_used": self.k_used,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FusionResult":
        return cls(
            entries=tuple(FusedEntry.from_dict(e) for e in d["entries"]),
            k_used=float(d["k_used"]),
        )


@dataclass(frozen=True)
class StageTimings:
    """Per-stage wall-clock milliseconds; total is receipt-to-output."""

    query_generation_ms: int = 0
    retrieval_ms: int = 0
    fusion_ms: int = 0
    synthesis_ms: int = 0
    total_ms: int = 0

    def stages(self) -> tuple[int, int, int, int]:
        return (self.query_generation_ms, self.retrieval_ms,
                self.fusion_ms, self.synthesis_ms)

    def violations(self) -> list[str]:
        problems = []
        for name in ("query_generation_ms", "retrieval_ms", "fusion_ms",
                     "synthesis_ms", "total_ms"):
            if getattr(self, name) < 0:
                problems.append(f"timings: {name} is negative")
        if not problems and self.total_ms < max(self.stages()):
            problems.append("timings: total_ms below the largest stage")
        return problems

    def to_dict(self) -> dict:
        return {
            "query_generation_ms": self.query_generation_ms,
            "retrieval_ms": self.retrieval_ms,
            "fusion_ms": self.fusion_ms,
            "synthesis_ms": self.synthesis_ms,
            "total_ms": self.total_ms,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StageTimings":
        return cls(**{k: int(d[k]) for k in (
            "query_generation_ms", "retrieval_ms", "fusion_ms",
            "synthesis_ms", "total_ms")})


@dataclass(frozen=True)
class ChatExchange:
    """Full record of one pipeline run, from original query to answer.

    ``warnings`` records non-fatal anomalies (e.g. the query generator
    over-producing and being truncated); it serializes with the rest.
    """

    exchange_id: str
    mode: str
    original_query: str
    generated_queries: tuple[str, ...]
    retrievals: tuple[RankedRetrieval, ...]
    fusion: FusionResult | None
    answer: str
    evidence: tuple[str, ...]
    timings: StageTimings
    created_at: str
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "generated_queries", tuple(self.generated_queries))
        object.__setattr__(self, "retrievals", tuple(self.retrievals))
        object.__setattr__(self, "evidence", tuple(self.evidence))
        object.__setattr__(self, "warnings", tuple(self.warnings))

    def to_dict(self) -> dict:
        return {
            "exchange_id": self.exchange_id,
            "mode": self.mode,
            "original_query": self.original_query,
            "generated_queries": list(self.generated_queries),
            "retrievals": [r.to_dict() for r in self.retrievals],
            "fusion": self.fusion.to_dict() if self.fusion is not None else None,
            "answer": self.answer,
            "evidence": list(self.evidence),
            "timings": self.timings.to_dict(),
            "created_at": self.created_at,
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ChatExchange":
        fusion = d.get("fusion")
        return cls(
            exchange_id=d["exchange_id"],
            mode=d["mode"],
            original_query=d["original_query"],
            generated_queries=tuple(d["generated_queries"]),
            retrievals=tuple(RankedRetrieval.from_dict(r) for r in d["retrievals"]),
            fusion=FusionResult.from_dict(fusion) if fusion is not None else None,
            answer=d["answer"],
            evidence=tuple(d["evidence"]),
            timings=StageTimings.from_dict(d["timings"]),
            created_at=d["created_at"],
            warnings=tuple(d.get("warnings", ())),
        )


def dump_json(exchange: ChatExchange) -> str:
    """Canonical JSON form used for persistence: stable key order, so a
    load/dump cycle is byte-identical."""
    return json.dumps(exchange.to_dict(), indent=2, sort_keys=True,
                      ensure_ascii=False) + "\n"


def parse_json(text: str) -> ChatExchange:
    return ChatExchange.from_dict(json.loads(text))


def _is_prefix(prefix: tuple[str, ...], full: list[str]) -> bool:
    return len(prefix) <= len(full) and list(prefix) == full[: len(prefix)]


def validate_exchange(exchange: ChatExchange) -> list[str]:
    """Check every ChatExchange invariant; returns [] iff all hold.

    Violations are data, not errors: corrupt exchanges come back with one
    description per problem.
    """
    problems: list[str] = []

    if exchange.mode not in MODES:
        problems.append(f"unknown mode {exchange.mode!r}")
        return problems

    if exchange.mode == MODE_RAG:
        if exchange.generated_queries:
            problems.append("rag mode must have no generated queries")
        if exchange.fusion is not None:
            problems.append("rag mode must have no fusion result")
        if len(exchange.retrievals) != 1:
            problems.append("rag mode must have exactly one retrieval")
    else:
        if not exchange.generated_queries:
            problems.append("rag_fusion mode requires generated queries")
        if exchange.fusion is None:
            problems.append("rag_fusion mode requires a fusion result")

    for retrieval in exchange.retrievals:
        problems.extend(retrieval.violations())

    if exchange.fusion is not None:
        problems.extend(exchange.fusion.violations())

    # Evidence must be a prefix of the fused order (rag_fusion) or of the
    # single retrieval's order (rag).
    if exchange.mode == MODE_RAG_FUSION and exchange.fusion is not None:
        if not _is_prefix(exchange.evidence, exchange.fusion.chunk_ids()):
            problems.append("evidence is not a prefix of the fused chunk order")
    elif exchange.mode == MODE_RAG and len(exchange.retrievals) == 1:
        if not _is_prefix(exchange.evidence, exchange.retrievals[0].chunk_ids()):
            problems.append("evidence is not a prefix of the retrieval order")

    problems.extend(exchange.timings.violations())
    return problems


# JSON schema for the wire/persistence form of ChatExchange.  Kept in sync
# with to_dict(); service tests validate every 200 chat response against it.
_NONNEG_INT = {"type": "integer", "minimum": 0}

CHAT_EXCHANGE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["exchange_id", "mode", "original_query", "generated_queries",
                 "retrievals", "fusion", "answer", "evidence", "timings",
                 "created_at", "warnings"],
    "additionalProperties": False,
    "properties": {
        "exchange_id": {"type": "string", "minLength": 1},
        "mode": {"enum": list(MODES)},
        "original_query": {"type": "string"},
        "generated_queries": {"type": "array", "items": {"type": "string"}},
        "retrievals": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["query_text", "entries"],
                "additionalProperties": False,
                "properties": {
                    "query_text": {"type": "string"},
                    "entries": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["chunk_id", "distance"],
                            "additionalProperties": False,
                            "properties": {
                                "chunk_id": {"type": "string"},
                                "distance": {"type": "number", "minimum": 0},
                            },
                        },
                    },
                },
            },
        },
        "fusion": {
            "oneOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "required": ["entries", "k_used"],
                    "additionalProperties": False,
                    "properties": {
                        "k_used": {"type": "number", "minimum": 0},
                        "entries": {
                            "type": "array",
                            "items": {
                                "type": "object",
                                "required": ["chunk_id", "rrf_score",
                                             "contributors"],
                                "additionalProperties": False,
                                "properties": {
                                    "chunk_id": {"type": "string"},
                                    "rrf_score": {"type": "number",
                                                  "exclusiveMinimum": 0},
                                    "contributors": {
                                        "type": "array",
                                        "items": {
                                            "type": "object",
                                            "required": ["query_text", "rank"],
                                            "additionalProperties": False,
                                            "properties": {
                                                "query_text": {"type": "string"},
                                                "rank": {"type": "integer",
                                                         "minimum": 1},
                                            },
                                        },
                                    },
                                },
                            },
                        },
                    },
                },
            ]
        },
        "answer": {"type": "string"},
        "evidence": {"type": "array", "items": {"type": "string"}},
        "timings": {
            "type": "object",
            "required": ["query_generation_ms", "retrieval_ms", "fusion_ms",
                         "synthesis_ms", "total_ms"],
            "additionalProperties": False,
            "properties": {
                "query_generation_ms": _NONNEG_INT,
                "retrieval_ms": _NONNEG_INT,
                "fusion_ms": _NONNEG_INT,
                "synthesis_ms": _NONNEG_INT,
                "total_ms": _NONNEG_INT,
            },
        },
        "created_at": {"type": "string"},
        "warnings": {"type": "array", "items": {"type": "string"}},
    },
}
