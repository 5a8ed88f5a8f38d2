"""Configuration loading: defaults, file and env sources, gateway
construction, and startup path validation."""

import json

import pytest

from fusionrag.config import (
    CONFIG_ENV,
    DEFAULT_DATA_DIR,
    DEFAULT_PORT,
    GatewayConfig,
    ServiceConfig,
    config_from_dict,
    load_config,
)
from fusionrag.errors import ConfigError
from fusionrag.gateway import HttpGateway, MockGateway, ProviderConfig
from fusionrag.models import MODE_RAG, MODE_RAG_FUSION


class TestDefaults:
    def test_load_without_sources_gives_offline_defaults(self, monkeypatch):
        monkeypatch.delenv(CONFIG_ENV, raising=False)
        config = load_config()
        assert config.corpus_dir is None
        assert config.gateway.mock is True
        assert config.data_dir == DEFAULT_DATA_DIR
        assert config.port == DEFAULT_PORT
        assert config.embedder.kind == "hashed"

    def test_pipeline_for_selects_mode(self):
        config = ServiceConfig()
        assert config.pipeline_for(MODE_RAG).mode == MODE_RAG
        assert config.pipeline_for(MODE_RAG_FUSION).mode == MODE_RAG_FUSION


class TestConfigFromDict:
    def test_full_document(self, tmp_path, corpus_dir):
        raw = {
            "corpus_dir": str(corpus_dir),
            "include_globs": ["**/*.md"],
            "chunking": {"max_chars": 400, "overlap_chars": 40},
            "embedder": {"dimension": 64},
            "metric": "cosine_distance",
            "gateway": {"mock": True, "artificial_delay_ms": 25,
                        "delays_by_call_site": {"query_generation": 10}},
            "pipelines": {"rag": {"per_query_top_n": 3},
                          "rag_fusion": {"k": 10.0,
                                         "num_generated_queries": 2}},
            "host": "0.0.0.0",
            "port": 9000,
            "data_dir": str(tmp_path / "data"),
            "max_concurrent_chats": 2,
        }
        config = config_from_dict(raw)
        assert config.corpus_dir == str(corpus_dir)
        assert config.include_globs == ("**/*.md",)
        assert config.chunking.max_chars == 400
        assert config.embedder.dimension == 64
        assert config.gateway.artificial_delay_ms == 25
        assert config.rag_pipeline.per_query_top_n == 3
        assert config.rag_pipeline.mode == MODE_RAG
        assert config.fusion_pipeline.k == 10.0
        assert config.fusion_pipeline.num_generated_queries == 2
        assert config.port == 9000
        assert config.max_concurrent_chats == 2

    def test_unknown_metric_rejected(self):
        with pytest.raises(ConfigError, match="metric"):
            config_from_dict({"metric": "manhattan"})

    def test_bad_chunking_rejected(self):
        with pytest.raises(ConfigError):
            config_from_dict({"chunking": {"max_chars": 0}})

    def test_bad_pipeline_option_rejected(self):
        with pytest.raises(ConfigError, match="rag_fusion"):
            config_from_dict({"pipelines": {"rag_fusion": {"bogus": 1}}})

    def test_pipeline_mode_cannot_be_overridden_sideways(self):
        config = config_from_dict({"pipelines": {"rag": {"k": 5.0}}})
        assert config.rag_pipeline.mode == MODE_RAG
        assert config.rag_pipeline.k == 5.0


class TestGatewayConfig:
    def test_default_builds_mock(self):
        gateway = GatewayConfig().build()
        assert isinstance(gateway, MockGateway)
        assert gateway.config.artificial_delay_ms == 0

    def test_mock_delays_carried_through(self):
        gateway = GatewayConfig(
            artificial_delay_ms=40,
            delays_by_call_site={"answer_synthesis": 90}).build()
        assert gateway.config.delay_ms("query_generation") == 40
        assert gateway.config.delay_ms("answer_synthesis") == 90

    def test_real_provider_requires_endpoint(self):
        with pytest.raises(ConfigError, match="endpoint_url"):
            config_from_dict({"gateway": {"mock": False, "model": "m"}})
        with pytest.raises(ConfigError, match="provider"):
            GatewayConfig(mock=False).build()

    def test_real_provider_builds_http_gateway(self):
        raw = {"gateway": {"mock": False,
                           "endpoint_url": "https://llm.invalid/v1/chat",
                           "model": "m", "max_retries": 1}}
        config = config_from_dict(raw)
        assert config.gateway.provider == ProviderConfig(
            endpoint_url="https://llm.invalid/v1/chat", model="m",
            max_retries=1)
        gateway = config.gateway.build()
        assert isinstance(gateway, HttpGateway)
        gateway.close()


class TestValidatePaths:
    def test_missing_corpus_dir_names_the_path(self, tmp_path):
        config = ServiceConfig(corpus_dir=str(tmp_path / "nope"),
                               data_dir=str(tmp_path / "data"))
        with pytest.raises(ConfigError) as excinfo:
            config.validate_paths()
        assert excinfo.value.path == str(tmp_path / "nope")

    def test_missing_data_dir_parent_rejected(self, tmp_path):
        config = ServiceConfig(
            data_dir=str(tmp_path / "missing" / "deeper" / "data"))
        with pytest.raises(ConfigError, match="data_dir"):
            config.validate_paths()

    def test_existing_paths_pass(self, tmp_path, corpus_dir):
        ServiceConfig(corpus_dir=str(corpus_dir),
                      data_dir=str(tmp_path / "data")).validate_paths()


class TestLoadConfig:
    def write(self, tmp_path, raw):
        path = tmp_path / "config.json"
        path.write_text(json.dumps(raw), encoding="utf-8")
        return path

    def test_explicit_path_wins_over_env(self, tmp_path, monkeypatch):
        good = self.write(tmp_path, {"port": 8001,
                                     "data_dir": str(tmp_path / "d")})
        monkeypatch.setenv(CONFIG_ENV, str(tmp_path / "does-not-exist.json"))
        assert load_config(str(good)).port == 8001

    def test_env_var_used_when_no_explicit_path(self, tmp_path, monkeypatch):
        path = self.write(tmp_path, {"port": 8002,
                                     "data_dir": str(tmp_path / "d")})
        monkeypatch.setenv(CONFIG_ENV, str(path))
        assert load_config().port == 8002

    def test_missing_file_is_a_config_error(self, tmp_path):
        with pytest.raises(ConfigError) as excinfo:
            load_config(str(tmp_path / "absent.json"))
        assert excinfo.value.path == str(tmp_path / "absent.json")

    def test_invalid_json_is_a_config_error(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ConfigError, match="valid JSON"):
            load_config(str(path))

    def test_loaded_config_is_path_validated(self, tmp_path):
        path = self.write(tmp_path, {"corpus_dir": str(tmp_path / "gone")})
        with pytest.raises(ConfigError, match="corpus_dir"):
            load_config(str(path))
