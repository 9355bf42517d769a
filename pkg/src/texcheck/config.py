"""Application configuration: YAML file + defaults.

API keys never live in the config file — only the *names* of environment
variables that hold them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .chunking import ChunkingConfig
from .embedding import EmbeddingConfig
from .orchestrator import ModelConfig


@dataclass(frozen=True)
class RetrievalSettings:
    top_k: int = 5


@dataclass(frozen=True)
class ServiceSettings:
    max_upload_bytes: int = 10 * 1024 * 1024
    max_concurrent_jobs: int = 2
    retention_days: float = 7.0


@dataclass
class AppConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    embedding: EmbeddingConfig = field(default_factory=EmbeddingConfig)
    chunking: ChunkingConfig = field(default_factory=ChunkingConfig)
    retrieval: RetrievalSettings = field(default_factory=RetrievalSettings)
    service: ServiceSettings = field(default_factory=ServiceSettings)
    data_root: Path = Path("texcheck-data")
    question_bank: Path | None = None
    stub_llm: bool = False


def load_config(path: str | Path | None = None) -> AppConfig:
    """Build an AppConfig from an optional YAML file; missing keys keep defaults."""
    raw: dict = {}
    if path is not None:
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}

    model_raw = raw.get("model", {})
    embedding_raw = raw.get("embedding", {})
    chunking_raw = raw.get("chunking", {})
    retrieval_raw = raw.get("retrieval", {})
    service_raw = raw.get("service", {})

    config = AppConfig(
        model=ModelConfig(
            provider_base_url=model_raw.get("base_url", ModelConfig.provider_base_url),
            model_id=model_raw.get("id", ModelConfig.model_id),
            temperature=float(model_raw.get("temperature", ModelConfig.temperature)),
            max_context_chars=int(model_raw.get("max_context_chars", ModelConfig.max_context_chars)),
            api_key_env=model_raw.get("api_key_env", ModelConfig.api_key_env),
        ),
        embedding=EmbeddingConfig(
            provider_base_url=embedding_raw.get("base_url", EmbeddingConfig.provider_base_url),
            model_id=embedding_raw.get("model_id", EmbeddingConfig.model_id),
            api_key_env=embedding_raw.get("api_key_env", EmbeddingConfig.api_key_env),
        ),
        chunking=ChunkingConfig(
            breakpoint_percentile=float(chunking_raw.get("breakpoint_percentile",
                                                         ChunkingConfig.breakpoint_percentile)),
            max_parent_chars=int(chunking_raw.get("max_parent_chars",
                                                  ChunkingConfig.max_parent_chars)),
            embed_concurrency=int(chunking_raw.get("embed_concurrency",
                                                   ChunkingConfig.embed_concurrency)),
        ),
        retrieval=RetrievalSettings(top_k=int(retrieval_raw.get("top_k", 5))),
        service=ServiceSettings(
            max_upload_bytes=int(service_raw.get("max_upload_bytes", 10 * 1024 * 1024)),
            max_concurrent_jobs=int(service_raw.get("max_concurrent_jobs", 2)),
            retention_days=float(service_raw.get("retention_days", 7.0)),
        ),
    )
    if raw.get("data_root"):
        config.data_root = Path(raw["data_root"])
    if raw.get("question_bank"):
        config.question_bank = Path(raw["question_bank"])
    config.stub_llm = bool(raw.get("stub_llm", False))
    return config
