"""Application configuration: model and judge registries, run defaults, and
service binding. Canonical format is JSON; API keys are named by environment
variable and read at call time, never stored in the file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError
from .gateway import ModelConfig, validate_config
from .prompts import TelerLevel

MOCK_MODEL = ModelConfig(model_id="mock-model", endpoint_url="mock://model")
MOCK_JUDGES = (
    ModelConfig(model_id="mock-judge-a", endpoint_url="mock://model"),
    ModelConfig(model_id="mock-judge-b", endpoint_url="mock://model"),
    ModelConfig(model_id="mock-judge-c", endpoint_url="mock://model"),
)


@dataclass(frozen=True)
class AppConfig:
    models: tuple[ModelConfig, ...] = (MOCK_MODEL,)
    judges: tuple[ModelConfig, ...] = MOCK_JUDGES
    default_levels: tuple[TelerLevel, ...] = tuple(TelerLevel)
    parallelism: int = 4
    store_root: str = "simqgen-store"
    bind_host: str = "127.0.0.1"
    bind_port: int = 8470
    static_dir: str = "frontend/dist"

    def model(self, model_id: str) -> ModelConfig:
        for cfg in self.models:
            if cfg.model_id == model_id:
                return cfg
        raise ConfigError(f"no model named {model_id!r} in the registry")

    def judge(self, judge_id: str) -> ModelConfig:
        for cfg in self.judges:
            if cfg.model_id == judge_id:
                return cfg
        raise ConfigError(f"no judge named {judge_id!r} in the registry")


def _model_from_doc(doc: dict) -> ModelConfig:
    known = {
        "model_id",
        "endpoint_url",
        "api_key_ref",
        "temperature",
        "top_p",
        "top_k",
        "timeout",
        "max_output_tokens",
        "top_k_supported",
    }
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown model config keys: {', '.join(sorted(unknown))}")
    cfg = ModelConfig(**doc)
    validate_config(cfg)
    return cfg


def load_config(path: str | Path) -> AppConfig:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return config_from_doc(doc)


def config_from_doc(doc: dict) -> AppConfig:
    models = tuple(_model_from_doc(d) for d in doc.get("models", []))
    judges = tuple(_model_from_doc(d) for d in doc.get("judges", []))
    if not models:
        models = (MOCK_MODEL,)
    if not judges:
        judges = MOCK_JUDGES
    if len({m.model_id for m in models}) != len(models):
        raise ConfigError("model registry names must be unique")
    if len({j.model_id for j in judges}) != len(judges):
        raise ConfigError("judge registry names must be unique")
    levels = tuple(TelerLevel(v) for v in doc.get("default_levels", [lv.value for lv in TelerLevel]))
    parallelism = int(doc.get("parallelism", 4))
    if parallelism < 1:
        raise ConfigError("parallelism must be >= 1")
    return AppConfig(
        models=models,
        judges=judges,
        default_levels=levels,
        parallelism=parallelism,
        store_root=str(doc.get("store_root", "simqgen-store")),
        bind_host=str(doc.get("bind_host", "127.0.0.1")),
        bind_port=int(doc.get("bind_port", 8470)),
        static_dir=str(doc.get("static_dir", "frontend/dist")),
    )
