"""Flat key=value run configuration shared by every CLI subcommand."""

from __future__ import annotations

from dataclasses import dataclass, fields

from .errors import ConfigError
from .model import ModelConfig
from .partition import EDGE_LEVEL, NODE_LEVEL
from .patterns import PatternConfig
from .pipeline import PipelineConfig


@dataclass
class RunConfig:
    # attention patterns
    p: float = 50.0
    lambda1: float = 0.25
    lambda2: float = 0.25
    lambda3: float = 0.25
    lambda4: float = 0.25
    sparsity: float = 0.93
    max_doc_len: int = 2048
    # transmission model
    embed_dim: int = 32
    num_heads: int = 2
    num_blocks: int = 2
    window_size: int = 128
    max_subgraphs: int = 16
    vocab_hash_size: int = 65536
    init_seed: int = 0
    # partition
    partition_mode: str = EDGE_LEVEL
    partition_k: int = 16
    partition_cap: int = 128
    # training
    learning_rate: float = 1e-3
    epochs: int = 1
    batch_groups: int = 1
    neg_ratio: int = 7
    weight_decay: float = 0.01
    # fixture generation
    fixture_queries: int = 100
    fixture_candidates: int = 20
    # data paths (may also come from subcommand flags)
    corpus_path: str = ""
    queries_path: str = ""
    qrels_path: str = ""
    candidates_path: str = ""

    def pattern_config(self) -> PatternConfig:
        return PatternConfig(
            p=self.p,
            lambdas=(self.lambda1, self.lambda2, self.lambda3, self.lambda4),
            sparsity=self.sparsity,
            max_doc_len=self.max_doc_len,
        )

    def model_config(self) -> ModelConfig:
        return ModelConfig(
            embed_dim=self.embed_dim,
            num_heads=self.num_heads,
            num_blocks=self.num_blocks,
            window_size=self.window_size,
            max_subgraphs=self.max_subgraphs,
            vocab_hash_size=self.vocab_hash_size,
            init_seed=self.init_seed,
        )

    def pipeline_config(self) -> PipelineConfig:
        if self.partition_mode not in (NODE_LEVEL, EDGE_LEVEL):
            raise ConfigError(f"unknown partition_mode {self.partition_mode!r}")
        return PipelineConfig(
            pattern=self.pattern_config(),
            model=self.model_config(),
            partition_mode=self.partition_mode,
            partition_k=self.partition_k,
            partition_cap=self.partition_cap,
        )


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _parse_value(name: str, raw: str):
    kind = _FIELD_TYPES[name]
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc


def load_run_config(path) -> RunConfig:
    """Parse a key=value file; unknown keys are rejected, missing keys default."""
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{line_no}: expected key=value, got {line!r}")
            key, raw = line.split("=", 1)
            key = key.strip()
            raw = raw.strip()
            if key not in _FIELD_TYPES:
                raise ConfigError(f"{path}:{line_no}: unknown key {key!r}")
            if key in values:
                raise ConfigError(f"{path}:{line_no}: duplicate key {key!r}")
            values[key] = _parse_value(key, raw)
    try:
        return RunConfig(**values)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def write_run_config(path, config: RunConfig) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for f in fields(RunConfig):
            fh.write(f"{f.name}={getattr(config, f.name)}\n")
