"""Service configuration: a single JSON file selected by --config, the
FUSIONRAG_CONFIG environment variable, or built-in defaults.

Defaults run fully offline: hashed embedder, mock gateway, no corpus.
Paths named in the file are checked up front so a typo fails at startup
with the offending path instead of mid-request.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .embedding import EmbedderConfig
from .errors import ConfigError
from .gateway import (LlmGateway, MockConfig, MockGateway, HttpGateway,
                      ProviderConfig)
from .index import METRIC_COSINE, METRIC_EUCLIDEAN
from .ingestion import DEFAULT_GLOBS, ChunkingConfig
from .models import MODE_RAG, MODE_RAG_FUSION
from .pipeline import PipelineConfig

CONFIG_ENV = "FUSIONRAG_CONFIG"

DEFAULT_HOST = "127.0.0.1"
DEFAULT_PORT = 8642
DEFAULT_DATA_DIR = "data"
DEFAULT_CORS_ORIGINS = ("http://localhost:5173", "http://127.0.0.1:5173")


@dataclass(frozen=True)
class GatewayConfig:
    """Either the deterministic mock (with optional artificial delays)
    or a real HTTP provider."""

    mock: bool = True
    artificial_delay_ms: int = 0
    delays_by_call_site: dict[str, int] = field(default_factory=dict)
    provider: ProviderConfig | None = None

    def build(self) -> LlmGateway:
        if self.mock:
            return MockGateway(MockConfig(
                artificial_delay_ms=self.artificial_delay_ms,
                delays_by_call_site=dict(self.delays_by_call_site)))
        if self.provider is None:
            raise ConfigError("gateway.mock is false but no provider is configured")
        return HttpGateway(self.provider)


@dataclass(frozen=True)
class ServiceConfig:
    corpus_dir: str | None = None
    include_globs: tuple[str, ...] = DEFAULT_GLOBS
    chunking: ChunkingConfig = field(default_factory=ChunkingConfig)
    embedder: EmbedderConfig = field(default_factory=EmbedderConfig)
    metric: str = METRIC_COSINE
    gateway: GatewayConfig = field(default_factory=GatewayConfig)
    rag_pipeline: PipelineConfig = field(
        default_factory=lambda: PipelineConfig(mode=MODE_RAG))
    fusion_pipeline: PipelineConfig = field(
        default_factory=lambda: PipelineConfig(mode=MODE_RAG_FUSION))
    host: str = DEFAULT_HOST
    port: int = DEFAULT_PORT
    data_dir: str = DEFAULT_DATA_DIR
    cors_origins: tuple[str, ...] = DEFAULT_CORS_ORIGINS
    max_concurrent_chats: int = 4

    def pipeline_for(self, mode: str) -> PipelineConfig:
        return self.rag_pipeline if mode == MODE_RAG else self.fusion_pipeline

    def validate_paths(self) -> None:
        """Startup check: every configured input path must exist."""
        if self.corpus_dir is not None and not Path(self.corpus_dir).is_dir():
            raise ConfigError("corpus_dir does not exist",
                              path=self.corpus_dir)
        parent = Path(self.data_dir).parent
        if str(parent) and not parent.exists():
            raise ConfigError("data_dir parent does not exist",
                              path=self.data_dir)


def _pipeline_from(raw: dict, mode: str) -> PipelineConfig:
    base = PipelineConfig(mode=mode)
    if not raw:
        return base
    try:
        return base.with_overrides(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad pipeline options for {mode}: {exc}") from exc


def _gateway_from(raw: dict) -> GatewayConfig:
    if raw.get("mock", True):
        return GatewayConfig(
            mock=True,
            artificial_delay_ms=raw.get("artificial_delay_ms", 0),
            delays_by_call_site=dict(raw.get("delays_by_call_site", {})))
    provider_fields = {k: raw[k] for k in
                       ("endpoint_url", "model", "timeout_s", "max_retries",
                        "max_in_flight", "auth_token_env", "backoff_base_s")
                       if k in raw}
    if "endpoint_url" not in provider_fields:
        raise ConfigError("non-mock gateway requires endpoint_url")
    return GatewayConfig(mock=False, provider=ProviderConfig(**provider_fields))


def config_from_dict(raw: dict) -> ServiceConfig:
    try:
        chunking = ChunkingConfig(**raw.get("chunking", {}))
        embedder = EmbedderConfig(**raw.get("embedder", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    metric = raw.get("metric", METRIC_COSINE)
    if metric not in (METRIC_COSINE, METRIC_EUCLIDEAN):
        raise ConfigError(f"unknown metric {metric!r}")
    pipelines = raw.get("pipelines", {})
    return ServiceConfig(
        corpus_dir=raw.get("corpus_dir"),
        include_globs=tuple(raw.get("include_globs", DEFAULT_GLOBS)),
        chunking=chunking,
        embedder=embedder,
        metric=metric,
        gateway=_gateway_from(raw.get("gateway", {})),
        rag_pipeline=_pipeline_from(pipelines.get("rag", {}), MODE_RAG),
        fusion_pipeline=_pipeline_from(pipelines.get("rag_fusion", {}),
                                       MODE_RAG_FUSION),
        host=raw.get("host", DEFAULT_HOST),
        port=raw.get("port", DEFAULT_PORT),
        data_dir=raw.get("data_dir", DEFAULT_DATA_DIR),
        cors_origins=tuple(raw.get("cors_origins", DEFAULT_CORS_ORIGINS)),
        max_concurrent_chats=raw.get("max_concurrent_chats", 4),
    )


def load_config(path: str | None = None) -> ServiceConfig:
    """Config from an explicit path, else $FUSIONRAG_CONFIG, else defaults."""
    path = path or os.environ.get(CONFIG_ENV)
    if path is None:
        config = ServiceConfig()
    else:
        file_path = Path(path)
        if not file_path.is_file():
            raise ConfigError("config file not found", path=str(file_path))
        try:
            raw = json.loads(file_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}",
                              path=str(file_path)) from exc
        config = config_from_dict(raw)
    config.validate_paths()
    return config
