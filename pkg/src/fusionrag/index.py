"""Exact nearest-neighbor search over chunk embeddings.

Deliberately brute force: product-documentation corpora are thousands of
chunks at most, and exact full-scan results are what make the fused
rankings reproducible in golden tests.  Distances are computed per row
(no batched matmul) so a full-scan oracle using the same arithmetic
matches bitwise.

cosine_distance = 1 - dot(unit vectors), clamped at 0; entries for the
cosine metric are stored L2-normalized.  Results order ascending by
(distance, chunk_id) — the tie-break keeps every downstream ordering
deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .embedding import EmbedderConfig, embed, normalize
from .errors import (DimensionMismatchError, IndexBuildError,
                     IndexMetaMismatchError)
from .models import DocumentChunk, EmbeddingVector, RankedRetrieval, RetrievalHit

METRIC_COSINE = "cosine_distance"
METRIC_EUCLIDEAN = "euclidean"
METRICS = (METRIC_COSINE, METRIC_EUCLIDEAN)

INDEX_FILE = "index.bin"
META_FILE = "index.meta.json"


@dataclass(frozen=True)
class VectorIndex:
    """Immutable store of (chunk_id, vector) pairs plus the metric.

    Safe for concurrent searches after build.
    """

    dimension: int
    metric: str
    chunk_ids: tuple[str, ...]
    matrix: np.ndarray  # shape (len(chunk_ids), dimension), float64

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}")
        matrix = np.asarray(self.matrix, dtype=np.float64)
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        if matrix.shape != (len(self.chunk_ids), self.dimension):
            raise ValueError(
                f"matrix shape {matrix.shape} does not match "
                f"{len(self.chunk_ids)} entries x dimension {self.dimension}")

    def __len__(self) -> int:
        return len(self.chunk_ids)

    @classmethod
    def empty(cls, dimension: int, metric: str = METRIC_COSINE) -> "VectorIndex":
        return cls(dimension=dimension, metric=metric, chunk_ids=(),
                   matrix=np.zeros((0, dimension)))


def build_index(chunks: list[DocumentChunk], embedder_config: EmbedderConfig,
                metric: str = METRIC_COSINE) -> VectorIndex:
    """Embed every chunk and assemble the index.

    Requires unique chunk ids; a duplicate fails the build by name.
    Cosine entries are stored normalized.
    """
    if not chunks:
        raise IndexBuildError("cannot build an index from zero chunks")
    seen: set[str] = set()
    for chunk in chunks:
        if chunk.chunk_id in seen:
            raise IndexBuildError(f"duplicate chunk_id {chunk.chunk_id!r}")
        seen.add(chunk.chunk_id)

    rows = []
    for chunk in chunks:
        vector = embed(chunk.text, embedder_config)
        if metric == METRIC_COSINE:
            vector = normalize(vector)
        rows.append(vector.values)
    return VectorIndex(
        dimension=embedder_config.dimension,
        metric=metric,
        chunk_ids=tuple(c.chunk_id for c in chunks),
        matrix=np.array(rows, dtype=np.float64),
    )


def _distance(metric: str, row: np.ndarray, query: np.ndarray) -> float:
    if metric == METRIC_COSINE:
        return max(0.0, 1.0 - float(np.dot(row, query)))
    return float(np.sqrt(np.dot(row - query, row - query)))


def search(index: VectorIndex, query_vector: EmbeddingVector, top_n: int,
           query_text: str = "") -> RankedRetrieval:
    """Exact top-n scan: full sort by (distance, chunk_id), truncated to
    min(top_n, index size).  An empty index yields an empty retrieval."""
    if top_n < 1:
        raise ValueError(f"top_n must be >= 1, got {top_n}")
    if query_vector.dimension != index.dimension:
        raise DimensionMismatchError(
            f"query dimension {query_vector.dimension} != "
            f"index dimension {index.dimension}")
    if len(index) == 0:
        return RankedRetrieval(query_text=query_text, entries=())

    if index.metric == METRIC_COSINE:
        query_vector = normalize(query_vector)
    query = np.asarray(query_vector.values, dtype=np.float64)

    scored = [
        (_distance(index.metric, index.matrix[i], query), index.chunk_ids[i])
        for i in range(len(index))
    ]
    scored.sort()
    return RankedRetrieval(
        query_text=query_text,
        entries=tuple(RetrievalHit(chunk_id=cid, distance=dist)
                      for dist, cid in scored[:top_n]),
    )


def save_index(index: VectorIndex, directory: str | Path,
               embedder_config: EmbedderConfig) -> None:
    """Persist index.bin (json header line + raw float64 rows) and
    index.meta.json (dimension, metric, embedder config hash, count)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    header = json.dumps({"chunk_ids": list(index.chunk_ids)}).encode() + b"\n"
    with (directory / INDEX_FILE).open("wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(index.matrix).tobytes())
    meta = {
        "dimension": index.dimension,
        "metric": index.metric,
        "embedder_config_hash": embedder_config.config_hash(),
        "entry_count": len(index),
    }
    (directory / META_FILE).write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_index(directory: str | Path,
               embedder_config: EmbedderConfig) -> VectorIndex:
    """Load a persisted index, refusing one built under a different
    embedder config."""
    directory = Path(directory)
    meta = json.loads((directory / META_FILE).read_text(encoding="utf-8"))
    if meta["embedder_config_hash"] != embedder_config.config_hash():
        raise IndexMetaMismatchError(
            "persisted index was built with a different embedder config "
            f"(stored hash {meta['embedder_config_hash']})")
    with (directory / INDEX_FILE).open("rb") as fh:
        header = json.loads(fh.readline().decode())
        payload = fh.read()
    chunk_ids = tuple(header["chunk_ids"])
    matrix = np.frombuffer(payload, dtype=np.float64).reshape(
        len(chunk_ids), meta["dimension"]).copy()
    if len(chunk_ids) != meta["entry_count"]:
        raise IndexMetaMismatchError(
            f"index.bin holds {len(chunk_ids)} entries, meta says "
            f"{meta['entry_count']}")
    return VectorIndex(dimension=meta["dimension"], metric=meta["metric"],
                       chunk_ids=chunk_ids, matrix=matrix)
