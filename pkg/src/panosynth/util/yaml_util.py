"""YAML helpers for job config files and dry-run plans."""

from pathlib import Path
from typing import Any

import yaml

from panosynth.imaging.models import ConfigError


def to_yaml(data: Any, *, indent: int = 2) -> str:
    """Convert data to a nicely formatted YAML string."""
    return yaml.dump(
        data,
        default_flow_style=False,
        sort_keys=False,
        allow_unicode=True,
        indent=indent,
    ).rstrip()


def from_yaml(text: str) -> Any:
    """Parse a YAML (or JSON) string safely."""
    return yaml.safe_load(text)


def load_config_file(path: str | Path) -> dict[str, Any]:
    """Read a JSON or YAML job config file into a mapping.

    Raises ConfigError if the file is unreadable, malformed or not a mapping.
    """
    path = Path(path)
    try:
        data = from_yaml(path.read_text())
    except OSError as exc:
        raise ConfigError(f"Cannot read config file {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"Malformed config file {path}: {exc}") from exc

    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"Config file {path} must contain a mapping, got {type(data).__name__}")
    return data
