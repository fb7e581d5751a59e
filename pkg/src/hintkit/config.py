"""Run configuration merged from flags, environment, and a config file.

Precedence is flag > environment > file > built-in default.  The config
file is a flat TOML-style ``key = value`` list (strings may be quoted,
booleans are ``true``/``false``); its default location is
``~/.config/hintkit/config.toml``, overridable with ``HINTKIT_CONFIG`` or
``--config``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any

from .registry import default_cache_dir

DEFAULT_CONFIG_PATH = Path.home() / ".config" / "hintkit" / "config.toml"

DEFAULT_METRICS = "relevance/rouge/rougeL,readability/traditional/flesch,answerleakage/lexical/nostop"

# Documented environment variables -> config keys.
_ENV_KEYS = {
    "HINTKIT_CHAT_URL": "chat_url",
    "HINTKIT_CHAT_KEY": "chat_key",
    "HINTKIT_EMBED_URL": "embed_url",
    "HINTKIT_EMBED_KEY": "embed_key",
    "HINTKIT_CACHE_DIR": "cache_dir",
    "HINTKIT_OFFLINE": "offline",
}


@dataclass
class RunConfig:
    chat_url: str = ""
    chat_key: str = ""
    embed_url: str = ""
    embed_key: str = ""
    embed_model: str = ""
    model: str = ""
    registry_url: str = ""
    cache_dir: str = ""
    offline: bool = False
    metrics: str = DEFAULT_METRICS
    n_hints: int = 5
    temperature: float = 0.7
    vectors_path: str = ""
    freq_table_path: str = ""
    linear_scorer_path: str = ""
    specificity_url: str = ""
    regression_url: str = ""
    ner_url: str = ""
    prompt_template_path: str = ""
    workers: int = 4
    window_days: int = 30

    def resolved_cache_dir(self) -> Path:
        return Path(self.cache_dir) if self.cache_dir else default_cache_dir()


def parse_config_text(text: str) -> dict[str, Any]:
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, Any] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"bad config line: {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            out[key] = value[1:-1]
            continue
        if value.lower() in ("true", "false"):
            out[key] = value.lower() == "true"
            continue
        try:
            out[key] = int(value)
            continue
        except ValueError:
            pass
        try:
            out[key] = float(value)
            continue
        except ValueError:
            pass
        out[key] = value
    return out


def _coerce(current_default: Any, value: Any) -> Any:
    if isinstance(current_default, bool):
        if isinstance(value, bool):
            return value
        return str(value).strip().lower() in ("1", "true", "yes")
    if isinstance(current_default, int) and not isinstance(current_default, bool):
        return int(value)
    if isinstance(current_default, float):
        return float(value)
    return str(value)


def load_run_config(flag_values: dict[str, Any] | None = None,
                    config_path: str | Path | None = None,
                    env: dict[str, str] | None = None) -> RunConfig:
    """Merge flags over environment over file over defaults."""
    flag_values = {k: v for k, v in (flag_values or {}).items() if v is not None}
    env = os.environ if env is None else env

    path = Path(config_path) if config_path else Path(env.get("HINTKIT_CONFIG") or DEFAULT_CONFIG_PATH)
    file_values: dict[str, Any] = {}
    if path.exists():
        file_values = parse_config_text(path.read_text(encoding="utf-8"))

    env_values = {key: env[var] for var, key in _ENV_KEYS.items() if env.get(var)}

    cfg = RunConfig()
    valid = {f.name for f in fields(RunConfig)}
    for source in (file_values, env_values, flag_values):
        for key, value in source.items():
            if key not in valid:
                if source is file_values:
                    raise ValueError(f"unknown config key {key!r}")
                continue
            setattr(cfg, key, _coerce(getattr(RunConfig(), key), value))
    return cfg
