"""Configuration management for njr."""

import hashlib
import json
from typing import Literal

from pydantic import BaseModel, Field
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    # LLM endpoint (chat-completions compatible)
    llm_base_url: str = ""
    llm_api_key: str = ""
    model: str = "gpt-4o-mini"
    llm_timeout_seconds: float = 120.0
    llm_max_retries: int = 3
    llm_backoff_seconds: float = 1.0  # doubles after each failed attempt

    # Host limits
    max_call_depth: int = 400  # nested host function calls

    # Session limits
    max_effects: int = 300
    timeout_seconds: float = 1000.0
    max_malformed: int = 3
    max_finalize_retries: int = 1

    # Trace cache
    cache_path: str = ".njrcache"

    # YAML prompt template override; empty uses the packaged template
    prompt_template_path: str = ""

    log_level: str = "WARNING"

    model_config = {"env_prefix": "NJR_", "env_file": ".env", "extra": "ignore"}


settings = Settings()


class RunConfig(BaseModel):
    """Per-run choices. CLI flags override the environment defaults."""

    agent: Literal["scripted", "replay", "llm"] = "scripted"
    mode: Literal["shared", "tools", "isolated"] = "shared"
    max_effects: int = Field(default_factory=lambda: settings.max_effects, ge=1)
    timeout_s: float = Field(default_factory=lambda: settings.timeout_seconds, gt=0)
    eager: bool = True
    cache: bool = False
    script_path: str | None = None
    trace_path: str | None = None
    trace_out: str | None = None
    cache_path: str = Field(default_factory=lambda: settings.cache_path)
    model: str = Field(default_factory=lambda: settings.model)
    stdin_path: str | None = None  # None reads the terminal
    max_malformed: int = Field(default_factory=lambda: settings.max_malformed, ge=0)
    max_finalize_retries: int = Field(default_factory=lambda: settings.max_finalize_retries, ge=0)
    max_call_depth: int = Field(default_factory=lambda: settings.max_call_depth, ge=1)

    # Bench only
    repeats: int = Field(default=5, ge=1)
    parallel: int = Field(default=1, ge=1)
    report_out: str | None = None

    def digest(self) -> str:
        """Digest of the fields that change how a session behaves."""
        semantic = {
            "mode": self.mode,
            "max_effects": self.max_effects,
            "eager": self.eager,
            "max_malformed": self.max_malformed,
            "max_finalize_retries": self.max_finalize_retries,
        }
        return hashlib.sha256(json.dumps(semantic, separators=(",", ":")).encode()).hexdigest()
