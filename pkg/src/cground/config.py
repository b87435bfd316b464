"""Runtime configuration for the CLI and the session service.

Sources, lowest to highest precedence: built-in defaults, a key-sorted JSON
config file, environment variables with the CGROUND_ prefix.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Mapping, Optional

ENV_PREFIX = "CGROUND_"

_ADAPTER_ROLES = ("generator", "selector", "reader", "annotator", "rewriter", "summarizer")


@dataclass(frozen=True)
class EndpointSpec:
    kind: str  # "subprocess" | "http"
    target: str

    def __post_init__(self) -> None:
        if self.kind not in ("subprocess", "http"):
            raise ValueError(f"endpoint kind must be subprocess or http, got {self.kind!r}")


@dataclass
class AppConfig:
    generator: str = "rule"
    selector: str = "rule"
    reader: str = "lexical"
    annotator: str = "reference"
    setup: str = "cg_full_cg"
    mu: float = 0.5
    index: Optional[str] = None
    dataset: Optional[str] = None
    session_ttl_seconds: float = 1800.0
    max_query_tokens: int = 384
    strict_chunks: bool = False
    adapters: dict[str, EndpointSpec] = field(default_factory=dict)

    def validate(self) -> None:
        if self.generator not in ("oracle", "rule", "external"):
            raise ValueError(f"unknown generator backend {self.generator!r}")
        if self.selector not in ("oracle", "rule", "external"):
            raise ValueError(f"unknown selector backend {self.selector!r}")
        if self.reader not in ("lexical", "external"):
            raise ValueError(f"unknown reader backend {self.reader!r}")
        if self.annotator not in ("reference", "external"):
            raise ValueError(f"unknown annotator backend {self.annotator!r}")
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError("mu must be in [0, 1]")
        if self.session_ttl_seconds <= 0:
            raise ValueError("session_ttl_seconds must be positive")


_FLOAT_FIELDS = {"mu", "session_ttl_seconds"}
_INT_FIELDS = {"max_query_tokens"}
_BOOL_FIELDS = {"strict_chunks"}


def _coerce(name: str, raw: str):
    if name in _FLOAT_FIELDS:
        return float(raw)
    if name in _INT_FIELDS:
        return int(raw)
    if name in _BOOL_FIELDS:
        return raw.strip().lower() in ("1", "true", "yes", "on")
    return raw


def load_config(
    path: Optional[str | Path] = None, env: Optional[Mapping[str, str]] = None
) -> AppConfig:
    env = os.environ if env is None else env
    config = AppConfig()
    if path is not None:
        with Path(path).open("r", encoding="utf-8") as handle:
            data = json.load(handle)
        if not isinstance(data, dict):
            raise ValueError("config file must hold a JSON object")
        adapters = data.pop("adapters", {})
        known = {f.name for f in fields(AppConfig)}
        for key, value in data.items():
            if key not in known:
                raise ValueError(f"unknown config key {key!r}")
            setattr(config, key, value)
        for role, spec in adapters.items():
            if role not in _ADAPTER_ROLES:
                raise ValueError(f"unknown adapter role {role!r}")
            config.adapters[role] = EndpointSpec(kind=spec["kind"], target=spec["target"])
    for f in fields(AppConfig):
        if f.name == "adapters":
            continue
        raw = env.get(ENV_PREFIX + f.name.upper())
        if raw is not None:
            setattr(config, f.name, _coerce(f.name, raw))
    config.validate()
    return config


def build_endpoint(spec: EndpointSpec):
    from .adapter import HttpEndpoint, SubprocessEndpoint

    if spec.kind == "subprocess":
        return SubprocessEndpoint(spec.target)
    return HttpEndpoint(spec.target)
