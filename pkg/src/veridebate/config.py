"""Pipeline configuration.

One INI-style file (sections [gateway], [debate], [embedding], [model],
[paths]) holds a full experiment manifest; command-line flags override
file values. Defaults run the hermetic mock stack.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .domain import DebateConfig
from .neural.model import ModelConfig
from .neural.train import TrainConfig


@dataclass
class PipelineConfig:
    # [gateway]
    backend: str = "mock"
    endpoint: str = ""
    model_name: str = "gpt-4o-mini"
    requests_per_minute: float = 0.0  # 0 disables pacing
    max_concurrency: int = 1
    gateway_cache: bool = True

    # [debate]
    agents_per_team: int = 2
    temperature: float = 0.7
    max_tokens: int = 300
    history_char_budget: int = 6000
    language: str = "en"

    # [embedding]
    provider: str = "hash"
    d_h: int = 384
    embed_seed: int = 0
    embedding_endpoint: str = ""
    embedding_model: str = "text-embedding-3-small"

    # [model]
    d_r: int = 16
    gat_hidden: int = 128
    gat_layers: int = 2
    d_p: int = 128
    heads: int = 4
    interaction_mode: str = "nodes"
    lr: float = 5e-3
    epochs: int = 30
    batch_size: int = 32

    # [paths] / run options
    dataset: str = ""
    out: str = ""
    seed: int = 0
    strict: bool = False

    def __post_init__(self):
        if self.backend not in ("mock", "remote"):
            raise ValueError(f"backend must be 'mock' or 'remote', got {self.backend!r}")
        if self.provider not in ("hash", "remote"):
            raise ValueError(f"provider must be 'hash' or 'remote', got {self.provider!r}")
        if self.interaction_mode not in ("nodes", "pooled"):
            raise ValueError(f"interaction_mode must be 'nodes' or 'pooled'")
        if self.language not in ("en", "cn"):
            raise ValueError("language must be 'en' or 'cn'")

    def debate_config(self) -> DebateConfig:
        return DebateConfig(
            agents_per_team=self.agents_per_team,
            temperature=self.temperature,
            max_tokens=self.max_tokens,
            seed=self.seed,
            history_char_budget=self.history_char_budget,
        )

    def model_config(self) -> ModelConfig:
        return ModelConfig(
            d_h=self.d_h,
            d_r=self.d_r,
            gat_hidden=self.gat_hidden,
            gat_layers=self.gat_layers,
            d_p=self.d_p,
            heads=self.heads,
            interaction_mode=self.interaction_mode,
            seed=self.seed,
        )

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            lr=self.lr,
            epochs=self.epochs,
            batch_size=self.batch_size,
            seed=self.seed,
        )


_SECTION_FIELDS = {
    "gateway": (
        "backend", "endpoint", "model_name", "requests_per_minute",
        "max_concurrency", "gateway_cache",
    ),
    "debate": (
        "agents_per_team", "temperature", "max_tokens", "history_char_budget",
        "language",
    ),
    "embedding": (
        "provider", "d_h", "embed_seed", "embedding_endpoint", "embedding_model",
    ),
    "model": (
        "d_r", "gat_hidden", "gat_layers", "d_p", "heads", "interaction_mode",
        "lr", "epochs", "batch_size",
    ),
    "paths": ("dataset", "out", "seed", "strict"),
}


def load_config(path: str | Path | None = None) -> PipelineConfig:
    """Read a config file into a PipelineConfig; absent keys keep their
    defaults. Unknown keys are rejected so typos fail loudly."""
    config = PipelineConfig()
    if path is None:
        return config
    parser = configparser.ConfigParser()
    read = parser.read(str(path))
    if not read:
        raise FileNotFoundError(f"config file not found: {path}")
    types = {f.name: f.type for f in dataclasses.fields(PipelineConfig)}
    for section in parser.sections():
        if section not in _SECTION_FIELDS:
            raise ValueError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SECTION_FIELDS[section]:
                raise ValueError(f"unknown key {key!r} in section [{section}]")
            setattr(config, key, _coerce(raw, types[key]))
    config.__post_init__()
    return config


def _coerce(raw: str, field_type: str):
    if field_type == "int":
        return int(raw)
    if field_type == "float":
        return float(raw)
    if field_type == "bool":
        lowered = raw.strip().lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    return raw
