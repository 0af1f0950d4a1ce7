"""Flat ``key = value`` configuration.

Grammar: one ``key = value`` pair per line; ``#`` starts a comment; blank
lines are ignored; keys are dotted identifiers; values are integers.
Later lines override earlier ones.  Command-line flags override the file.

Recognized keys::

    seed = <int>
    partitions = <int>
    samples = <int>              # overrides every suite
    samples.<suite> = <int>      # Monte Carlo draws per estimate in one suite
"""

from __future__ import annotations

import re
from importlib import resources

_LINE = re.compile(r"^\s*([A-Za-z_][\w.]*)\s*=\s*([^#]*?)\s*(?:#.*)?$")


class ConfigError(ValueError):
    pass


def parse_config(text: str) -> dict[str, int]:
    out: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        match = _LINE.match(line)
        if not match:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = match.groups()
        try:
            out[key] = int(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: value for {key!r} must be an integer") from exc
    return out


def default_config() -> dict[str, int]:
    text = resources.files("compcos").joinpath("data/defaults.cfg").read_text()
    return parse_config(text)


def load_config(path: str | None = None) -> dict[str, int]:
    cfg = default_config()
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            cfg.update(parse_config(fh.read()))
    return cfg


def suite_samples(cfg: dict[str, int], suite: str) -> int:
    if "samples" in cfg:
        return cfg["samples"]
    return cfg.get(f"samples.{suite}", cfg.get("samples.default", 1_000_000))
