"""Uniform client over chat-completion endpoints for generation and judging.

Sampling parameters ride in the config and are transmitted verbatim:
temperature defaults to 0.2, top_p to 1, top_k to -1 (no truncation). In
benchmark mode a transport failure is recorded, never retried — failed
generations are data. Interactive mode retries once for the teacher's sake.

Request construction is a pure function of (prompt, config); transport
outcomes are encoded in the returned record rather than raised, so a run
never aborts because one endpoint misbehaved.
"""

from __future__ import annotations

import os
import threading
import time
from dataclasses import dataclass
from enum import Enum
from urllib.parse import urlparse

import httpx

from . import mock_model
from .canonical import sha256_hex
from .errors import ConfigError
from .parsing import ParsedQuestion
from .prompts import PromptPackage
from .taxonomy import ContextSlice

DEFAULT_TEMPERATURE = 0.2
DEFAULT_TOP_P = 1.0
DEFAULT_TOP_K = -1
# No published output-token budget exists for this protocol; 1024 is an
# artifact default, surfaced in config.
DEFAULT_MAX_OUTPUT_TOKENS = 1024


class TransportStatus(str, Enum):
    ok = "ok"
    timeout = "timeout"
    http_error = "http_error"
    connect_error = "connect_error"


@dataclass(frozen=True)
class ModelConfig:
    model_id: str
    endpoint_url: str
    api_key_ref: str = ""
    temperature: float = DEFAULT_TEMPERATURE
    top_p: float = DEFAULT_TOP_P
    top_k: int = DEFAULT_TOP_K
    timeout: float = 60.0
    max_output_tokens: int = DEFAULT_MAX_OUTPUT_TOKENS
    # Engines that reject top_k get it omitted; -1 is an engine-specific
    # "consider every token" sentinel, not universal.
    top_k_supported: bool = True

    def to_json_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "endpoint_url": self.endpoint_url,
            "api_key_ref": self.api_key_ref,
            "temperature": self.temperature,
            "top_p": self.top_p,
            "top_k": self.top_k,
            "timeout": self.timeout,
            "max_output_tokens": self.max_output_tokens,
            "top_k_supported": self.top_k_supported,
        }


def validate_config(cfg: ModelConfig) -> None:
    if not cfg.model_id:
        raise ConfigError("model_id must be non-empty")
    if not cfg.endpoint_url:
        raise ConfigError("endpoint_url must be non-empty")
    if cfg.temperature < 0:
        raise ConfigError("temperature must be >= 0")
    if not 0 < cfg.top_p <= 1:
        raise ConfigError("top_p must be in (0, 1]")
    if cfg.timeout <= 0:
        raise ConfigError("timeout must be positive")


@dataclass(frozen=True)
class RawGeneration:
    model_id: str
    prompt_digest: str
    raw_text: str | None
    started_at: float
    finished_at: float
    transport_status: TransportStatus
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.transport_status is TransportStatus.ok


@dataclass(frozen=True)
class QuestionBundle:
    """Everything a judge call needs: the question, its grounding slice, and
    the prebuilt rubric prompt."""

    question: ParsedQuestion
    slice: ContextSlice
    rubric_prompt: str


def build_request_body(prompt_text: str, cfg: ModelConfig) -> dict:
    """Chat-completions request body; pure and byte-stable for fixed inputs."""
    body = {
        "model": cfg.model_id,
        "messages": [{"role": "user", "content": prompt_text}],
        "temperature": cfg.temperature,
        "top_p": cfg.top_p,
        "max_tokens": cfg.max_output_tokens,
    }
    if cfg.top_k_supported:
        body["top_k"] = cfg.top_k
    return body


def _mock_behavior(endpoint_url: str) -> str | None:
    parsed = urlparse(endpoint_url)
    if parsed.scheme == "mock":
        return parsed.netloc or "model"
    return None


class Gateway:
    """Shared, thread-safe client with bounded in-flight requests per endpoint."""

    def __init__(self, mode: str = "benchmark", max_in_flight: int = 4):
        if mode not in ("benchmark", "interactive"):
            raise ConfigError(f"unknown gateway mode {mode!r}")
        self.mode = mode
        self.max_in_flight = max_in_flight
        self._semaphores: dict[str, threading.BoundedSemaphore] = {}
        self._lock = threading.Lock()

    def _semaphore(self, endpoint_url: str) -> threading.BoundedSemaphore:
        with self._lock:
            if endpoint_url not in self._semaphores:
                self._semaphores[endpoint_url] = threading.BoundedSemaphore(self.max_in_flight)
            return self._semaphores[endpoint_url]

    def generate(self, pkg: PromptPackage, cfg: ModelConfig) -> RawGeneration:
        return self.complete(pkg.prompt_text, cfg)

    def judge_rate(self, bundle: QuestionBundle, cfg: ModelConfig) -> RawGeneration:
        return self.complete(bundle.rubric_prompt, cfg)

    def complete(self, prompt_text: str, cfg: ModelConfig) -> RawGeneration:
        validate_config(cfg)
        result = self._request_once(prompt_text, cfg)
        if self.mode == "interactive" and not result.ok:
            result = self._request_once(prompt_text, cfg)
        return result

    def _request_once(self, prompt_text: str, cfg: ModelConfig) -> RawGeneration:
        digest = sha256_hex(prompt_text)
        started = time.time()

        def finish(status: TransportStatus, text: str | None = None, detail: str = "") -> RawGeneration:
            return RawGeneration(
                model_id=cfg.model_id,
                prompt_digest=digest,
                raw_text=text,
                started_at=started,
                finished_at=time.time(),
                transport_status=status,
                detail=detail,
            )

        behavior = _mock_behavior(cfg.endpoint_url)
        if behavior is not None:
            try:
                return finish(TransportStatus.ok, mock_model.respond(behavior, prompt_text))
            except KeyError as exc:
                return finish(TransportStatus.connect_error, detail=str(exc))

        body = build_request_body(prompt_text, cfg)
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(cfg.api_key_ref) if cfg.api_key_ref else None
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        semaphore = self._semaphore(cfg.endpoint_url)
        with semaphore:
            try:
                response = httpx.post(cfg.endpoint_url, json=body, headers=headers, timeout=cfg.timeout)
            except httpx.TimeoutException as exc:
                return finish(TransportStatus.timeout, detail=str(exc))
            except httpx.TransportError as exc:
                return finish(TransportStatus.connect_error, detail=str(exc))
        if response.status_code >= 400:
            return finish(TransportStatus.http_error, detail=f"HTTP {response.status_code}")
        try:
            content = response.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError):
            return finish(TransportStatus.http_error, detail="response is not chat-completions shaped")
        if not isinstance(content, str):
            return finish(TransportStatus.http_error, detail="message content is not text")
        return finish(TransportStatus.ok, content)
