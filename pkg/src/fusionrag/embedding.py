"""Embedders: a deterministic offline default plus an HTTP provider.

The hashed embedder is the test-time default: lowercase, split on
non-alphanumerics, hash each token into one of D buckets (stable blake2b,
never the salted built-in hash), count, L2-normalize.  It needs no
network and is bitwise-deterministic for a fixed config, which is what
makes golden end-to-end tests possible.

The HTTP embedder speaks an embeddings-API JSON shape so the same
pipeline can run against a real embedding service.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass

import httpx

from .errors import EmptyDocumentError, ProviderError
from .models import EmbeddingVector

DEFAULT_DIMENSION = 256

_TOKEN = re.compile(r"[0-9a-z]+")


@dataclass(frozen=True)
class EmbedderConfig:
    """Which embedder to use and its parameters.

    kind "hashed" needs only a dimension; kind "http" additionally needs
    endpoint_url and model.  The config hash is stored with persisted
    indexes so a mismatched embedder is refused at load time.
    """

    kind: str = "hashed"
    dimension: int = DEFAULT_DIMENSION
    endpoint_url: str = ""
    model: str = ""
    timeout_s: float = 30.0

    def __post_init__(self):
        if self.kind not in ("hashed", "http"):
            raise ValueError(f"unknown embedder kind {self.kind!r}")
        if self.dimension < 1:
            raise ValueError("dimension must be positive")
        if self.kind == "http" and not self.endpoint_url:
            raise ValueError("http embedder requires endpoint_url")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "dimension": self.dimension,
                "endpoint_url": self.endpoint_url, "model": self.model,
                "timeout_s": self.timeout_s}

    @classmethod
    def from_dict(cls, d: dict) -> "EmbedderConfig":
        return cls(kind=d.get("kind", "hashed"),
                   dimension=int(d.get("dimension", DEFAULT_DIMENSION)),
                   endpoint_url=d.get("endpoint_url", ""),
                   model=d.get("model", ""),
                   timeout_s=float(d.get("timeout_s", 30.0)))

    def config_hash(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()[:16]


def _bucket(token: str, dimension: int) -> int:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") % dimension


def _hashed_embed(text: str, dimension: int) -> EmbeddingVector:
    counts = [0.0] * dimension
    tokens = _TOKEN.findall(text.lower())
    if not tokens:
        raise EmptyDocumentError("text has no embeddable tokens")
    for token in tokens:
        counts[_bucket(token, dimension)] += 1.0
    norm = math.sqrt(sum(c * c for c in counts))
    return EmbeddingVector(values=tuple(c / norm for c in counts),
                           normalized=True)


def _http_embed(text: str, config: EmbedderConfig,
                client: httpx.Client | None = None) -> EmbeddingVector:
    payload = {"input": text}
    if config.model:
        payload["model"] = config.model
    own_client = client is None
    client = client or httpx.Client(timeout=config.timeout_s)
    try:
        response = client.post(config.endpoint_url, json=payload)
    except httpx.HTTPError as exc:
        raise ProviderError(f"embedding provider unreachable: {exc}") from exc
    finally:
        if own_client:
            client.close()
    if response.status_code != 200:
        raise ProviderError(
            f"embedding provider returned HTTP {response.status_code}",
            status=response.status_code,
            body_excerpt=response.text[:200],
        )
    data = response.json()
    # Accept both {"data": [{"embedding": [...]}]} and {"embedding": [...]}.
    if "data" in data:
        values = data["data"][0]["embedding"]
    else:
        values = data["embedding"]
    if len(values) != config.dimension:
        raise ProviderError(
            f"embedding provider returned dimension {len(values)}, "
            f"expected {config.dimension}")
    return EmbeddingVector(values=tuple(float(v) for v in values),
                           normalized=False)


def embed(text: str, config: EmbedderConfig,
          client: httpx.Client | None = None) -> EmbeddingVector:
    """Embed one text under the given config.

    Deterministic for a fixed config in hashed mode.  Whitespace-only (or
    token-free) text raises EmptyDocumentError; HTTP failures raise
    ProviderError carrying status and a body excerpt.
    """
    if not text.strip():
        raise EmptyDocumentError("cannot embed empty text")
    if config.kind == "hashed":
        return _hashed_embed(text, config.dimension)
    return _http_embed(text, config, client=client)


def normalize(vector: EmbeddingVector) -> EmbeddingVector:
    """Return the unit-length version of a vector; zero vectors are
    forbidden when normalized."""
    if vector.normalized:
        return vector
    norm = math.sqrt(sum(v * v for v in vector.values))
    if norm == 0.0:
        raise ValueError("cannot normalize a zero vector")
    return EmbeddingVector(values=tuple(v / norm for v in vector.values),
                           normalized=True)
