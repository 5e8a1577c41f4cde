"""Flat ``key=value`` configuration files.

Blank lines and ``#`` comments are ignored. A key may repeat to build a list;
repeated values are joined with commas, matching the list syntax on the
command line.
"""

from __future__ import annotations

from collections import OrderedDict
from pathlib import Path
from typing import Dict, List

from ..errors import ConfigurationError


def parse_config(text: str) -> Dict[str, List[str]]:
    entries: Dict[str, List[str]] = OrderedDict()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigurationError(f"line {lineno}: empty key")
        entries.setdefault(key.replace("_", "-"), []).append(value)
    return entries


def load_config(path) -> Dict[str, List[str]]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def config_to_argv(entries: Dict[str, List[str]]) -> List[str]:
    """Render entries as long options so the command line can override them."""
    argv: List[str] = []
    for key, values in entries.items():
        if key in ("config", "out"):
            raise ConfigurationError(f"{key!r} cannot be set from a config file")
        argv += [f"--{key}", ",".join(values)]
    return argv
