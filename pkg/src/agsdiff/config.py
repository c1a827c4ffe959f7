"""Suite configuration: which strategy to run and which keys matter.

The file is TOML with a single ``[identification]`` table.  Every field
is optional; omitted fields keep their defaults, so an empty file is the
default configuration.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field

from .errors import ConfigParseError
from .identification import DEFAULT_CONFIG, KeyConfig, Strategy

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

CONFIG_FILE_NAME = "config"

_IDENTIFICATION_KEYS = {
    "strategy",
    "strong-keys",
    "weak-keys",
    "matching-extra-keys",
    "t",
    "u",
}


@dataclass(frozen=True, slots=True)
class SuiteConfig:
    strategy: Strategy = Strategy.MATCHING
    keys: KeyConfig = field(default_factory=lambda: DEFAULT_CONFIG)


DEFAULT_SUITE_CONFIG = SuiteConfig()


def default_config_text() -> str:
    """Commented-out template written into fresh suites."""
    cfg = DEFAULT_CONFIG
    lines = [
        "# Identification settings for this suite. Uncomment to override.",
        "[identification]",
        f'# strategy = "{Strategy.MATCHING.value}"  # or "{Strategy.STRONG_WEAK.value}", "{Strategy.KEY_TESTS.value}"',
        f"# strong-keys = {sorted(cfg.strong_keys)!r}".replace("'", '"'),
        f"# weak-keys = {sorted(cfg.weak_keys)!r}".replace("'", '"'),
        f"# matching-extra-keys = {sorted(cfg.matching_extra_keys)!r}".replace("'", '"'),
        f"# t = {cfg.t}",
        f"# u = {cfg.u}",
        "",
    ]
    return "\n".join(lines)


def parse_config(text: str) -> SuiteConfig:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigParseError(str(exc)) from exc
    unknown = set(doc) - {"identification"}
    if unknown:
        raise ConfigParseError(f"unknown config tables: {sorted(unknown)}")
    table = doc.get("identification", {})
    if not isinstance(table, dict):
        raise ConfigParseError("'identification' must be a table")
    bad = set(table) - _IDENTIFICATION_KEYS
    if bad:
        raise ConfigParseError(f"unknown identification settings: {sorted(bad)}")

    try:
        strategy = Strategy(table.get("strategy", Strategy.MATCHING.value))
    except ValueError as exc:
        raise ConfigParseError(str(exc)) from exc

    defaults = DEFAULT_CONFIG
    try:
        keys = KeyConfig(
            strong_keys=_key_list(table, "strong-keys", defaults.strong_keys),
            weak_keys=_key_list(table, "weak-keys", defaults.weak_keys),
            matching_extra_keys=_key_list(
                table, "matching-extra-keys", defaults.matching_extra_keys
            ),
            t=_ratio(table, "t", defaults.t),
            u=_ratio(table, "u", defaults.u),
        )
    except ValueError as exc:
        raise ConfigParseError(str(exc)) from exc
    return SuiteConfig(strategy=strategy, keys=keys)


def _key_list(table: dict, name: str, default: frozenset[str]) -> frozenset[str]:
    if name not in table:
        return default
    value = table[name]
    if not isinstance(value, list) or not all(isinstance(k, str) and k for k in value):
        raise ConfigParseError(f"'{name}' must be a list of non-empty strings")
    return frozenset(value)


def _ratio(table: dict, name: str, default: float) -> float:
    if name not in table:
        return default
    value = table[name]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigParseError(f"'{name}' must be a number")
    return float(value)


def load_config(path) -> SuiteConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
