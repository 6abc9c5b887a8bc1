"""Service configuration: JSON file plus environment-variable overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields as dataclass_fields
from pathlib import Path

from .errors import ScenesmithError

DEFAULT_PORT = 8787

ENV_OVERRIDES = {
    "SCENESMITH_PORT": ("port", int),
    "SCENESMITH_CHAT_URL": ("chat_url", str),
    "SCENESMITH_EMBED_URL": ("embed_url", str),
    "SCENESMITH_MESHGEN_URL": ("meshgen_url", str),
    "SCENESMITH_MODE": ("mode", str),
    "SCENESMITH_ASSETS_DIR": ("assets_dir", str),
    "SCENESMITH_FIXTURES_DIR": ("fixtures_dir", str),
}


class ConfigError(ScenesmithError):
    code = "config"


@dataclass
class ServiceConfig:
    port: int = DEFAULT_PORT
    chat_url: str | None = None
    embed_url: str | None = None
    meshgen_url: str | None = None
    mode: str = "replay"  # live | record | replay
    assets_dir: str | None = None
    fixtures_dir: str | None = None
    #: "external" | "fallback"; None picks external when configured, else fallback.
    default_backend: str | None = None
    cors_origin: str = "*"
    chat_model: str = "default"
    timeout: float = 60.0


def load_config(path: str | Path | None = None, env: dict | None = None) -> ServiceConfig:
    """Build a config from defaults, an optional JSON file, and env overrides."""
    values: dict = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except ValueError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from None
        known = {f.name for f in dataclass_fields(ServiceConfig)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        values.update(data)
    env = os.environ if env is None else env
    for variable, (key, cast) in ENV_OVERRIDES.items():
        if variable in env and env[variable] != "":
            try:
                values[key] = cast(env[variable])
            except ValueError as exc:
                raise ConfigError(f"bad value for {variable}: {exc}") from None
    return ServiceConfig(**values)
