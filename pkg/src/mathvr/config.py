"""Run configuration: flags > environment > config file.

The config file is plain ``key = value`` lines (``#`` comments allowed).
Endpoints and auth tokens are accepted only from the environment or the
file, never from flags, to keep secrets out of shell history:

    MATHVR_MODEL_URL / MATHVR_MODEL_KEY   chat endpoint for the solver model
    MATHVR_JUDGE_URL / MATHVR_JUDGE_KEY   chat endpoint for the judge
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

from mathvr.errors import ConfigError

ENV_MODEL_URL = "MATHVR_MODEL_URL"
ENV_MODEL_KEY = "MATHVR_MODEL_KEY"
ENV_JUDGE_URL = "MATHVR_JUDGE_URL"
ENV_JUDGE_KEY = "MATHVR_JUDGE_KEY"


def parse_config_file(path: Path) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {stripped!r}")
        key, _, value = stripped.partition("=")
        values[key.strip()] = value.strip()
    return values


@dataclass
class EndpointConfig:
    url: str = ""
    key: str = ""
    model_id: str = ""

    @property
    def configured(self) -> bool:
        return bool(self.url)


def resolve_endpoints(config_path: Path | None) -> tuple[EndpointConfig, EndpointConfig, dict[str, str]]:
    """(model endpoint, judge endpoint, raw file values)."""
    values = parse_config_file(config_path) if config_path else {}
    model = EndpointConfig(
        url=os.environ.get(ENV_MODEL_URL, values.get("model_url", "")),
        key=os.environ.get(ENV_MODEL_KEY, values.get("model_key", "")),
        model_id=values.get("model_id", ""),
    )
    judge = EndpointConfig(
        url=os.environ.get(ENV_JUDGE_URL, values.get("judge_url", "")),
        key=os.environ.get(ENV_JUDGE_KEY, values.get("judge_key", "")),
        model_id=values.get("judge_id", ""),
    )
    return model, judge, values
