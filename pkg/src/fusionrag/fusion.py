"""Reciprocal rank scoring, cross-list accumulation, and fused reranking.

Each document in a ranked list earns ``1 / (rank + k)`` where rank is its
1-based position and k is a non-negative smoothing constant; scores for
the same document accumulate across lists, and the fused list is ordered
by total score.  Larger k flattens the gap between adjacent ranks, which
is what makes the fused order k-sensitive.

Everything here is pure and deterministic: ties break ascending by
chunk_id, and per-chunk contributions are summed in a canonical order so
the result is bitwise identical under any permutation of the input lists.
"""

from __future__ import annotations

from .errors import InputIntegrityError
from .models import Contributor, FusedEntry, FusionResult, RankedRetrieval

DEFAULT_K = 60.0


def rrf_score(rank: int, k: float) -> float:
    """Score a single (rank, k) pair: exactly 1 / (rank + k).

    Ranks are 1-based; rank 1 with k=0 scores 1.0.
    """
    if rank < 1:
        raise ValueError(f"rank must be >= 1, got {rank}")
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    return 1.0 / (rank + k)


def fuse(retrievals: list[RankedRetrieval], k: float = DEFAULT_K) -> FusionResult:
    """Accumulate reciprocal-rank scores across lists and rerank.

    For each distinct chunk appearing anywhere, its score is the sum of
    1/(rank + k) over every list containing it; entries come back sorted
    descending by score, ties ascending by chunk_id, with every
    contributing (query, rank) pair recorded.

    An input list that violates its own sort/uniqueness invariants raises
    InputIntegrityError: fusing must not mask upstream retrieval bugs by
    silently re-sorting.
    """
    if not retrievals:
        raise ValueError("fuse requires at least one retrieval")
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")

    for retrieval in retrievals:
        problems = retrieval.violations()
        if problems:
            raise InputIntegrityError("; ".join(problems))

    contributions: dict[str, list[Contributor]] = {}
    for retrieval in retrievals:
        for rank, hit in enumerate(retrieval.entries, start=1):
            contributions.setdefault(hit.chunk_id, []).append(
                Contributor(query_text=retrieval.query_text, rank=rank)
            )

    entries = []
    for chunk_id, contribs in contributions.items():
        # Canonical contributor order makes the float sum (and therefore
        # the whole result) independent of input-list order.
        contribs.sort(key=lambda c: (c.rank, c.query_text))
        score = 0.0
        for c in contribs:
            score += rrf_score(c.rank, k)
        entries.append(FusedEntry(chunk_id=chunk_id, rrf_score=score,
                                  contributors=tuple(contribs)))

    entries.sort(key=lambda e: (-e.rrf_score, e.chunk_id))
    return FusionResult(entries=tuple(entries), k_used=k)


def select_evidence(fusion: FusionResult, top_m: int) -> list[str]:
    """First min(top_m, len) chunk_ids in fused order."""
    if top_m < 1:
        raise ValueError(f"top_m must be >= 1, got {top_m}")
    return fusion.chunk_ids()[:top_m]
