"""Flat key=value experiment configs.

A config file is plain text: one ``key = value`` pair per line, ``#`` starts
a comment, and the ``experiment`` key selects the subcommand whose dataclass
the remaining keys populate. Values are coerced from the dataclass field
types; comma-separated lists map to tuples.

The same format can describe a custom normal-form game and generating
strategy::

    game_players = 2
    game_actions = 2,2
    game_payoffs_1 = 0.9,0.2,0.3,0.7     # row-major
    game_payoffs_2 = 0.5,0.3,0.2,0.7
    strategy_kind = product              # or: full
    strategy_1 = 0.71428571,0.28571429   # per-player rows (product)
    strategy_2 = 0.45454545,0.54545455
    # strategy_joint = ...               # row-major table (full)
"""

from __future__ import annotations

import dataclasses
from pathlib import Path
from typing import Any, get_args, get_origin, get_type_hints

import numpy as np

from ..errors import ConfigError
from ..games import JointStrategy, NormalFormGame


def parse_kv_text(text: str) -> dict[str, str]:
    """Parse flat key=value text; duplicate keys are an error."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def load_config(path: str | Path) -> dict[str, str]:
    return parse_kv_text(Path(path).read_text())


def _coerce(value: str, annotation: Any, key: str) -> Any:
    origin = get_origin(annotation)
    if origin in (tuple, list):
        item_type = get_args(annotation)[0]
        items = [v.strip() for v in value.split(",") if v.strip()]
        return tuple(_coerce(v, item_type, key) for v in items)
    if annotation is bool or annotation == "bool":
        lowered = value.lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {value!r}")
    if annotation is int or annotation == "int":
        return int(value)
    if annotation is float or annotation == "float":
        return float(value)
    if annotation is str or annotation == "str":
        return value
    raise ConfigError(f"{key}: unsupported config field type {annotation!r}")


def config_from_mapping(cls, mapping: dict[str, str], ignore: tuple[str, ...] = ()):
    """Build an experiment config dataclass from parsed key=value pairs."""
    hints = get_type_hints(cls)
    fields = {f.name: hints[f.name] for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in mapping.items():
        if key in ignore or key.startswith(("game_", "strategy_")):
            continue
        if key not in fields:
            raise ConfigError(
                f"unknown key {key!r} for {cls.__name__}; "
                f"valid keys: {sorted(fields)}"
            )
        kwargs[key] = _coerce(value, fields[key], key)
    return cls(**kwargs)


def game_from_mapping(mapping: dict[str, str]) -> NormalFormGame | None:
    """Build a game from ``game_*`` keys, or None when they are absent."""
    if "game_players" not in mapping:
        return None
    players = int(mapping["game_players"])
    counts = tuple(int(v) for v in mapping["game_actions"].split(","))
    if len(counts) != players:
        raise ConfigError("game_actions must list one count per player")
    payoffs = []
    for i in range(1, players + 1):
        key = f"game_payoffs_{i}"
        if key not in mapping:
            raise ConfigError(f"missing {key}")
        flat = np.array([float(v) for v in mapping[key].split(",")])
        if flat.size != int(np.prod(counts)):
            raise ConfigError(f"{key}: expected {int(np.prod(counts))} entries")
        payoffs.append(flat.reshape(counts))
    return NormalFormGame(np.stack(payoffs))


def strategy_from_mapping(mapping: dict[str, str]) -> JointStrategy | None:
    """Build a strategy from ``strategy_*`` keys, or None when absent."""
    if "strategy_kind" not in mapping:
        return None
    kind = mapping["strategy_kind"].strip().lower()
    if kind == "product":
        factors = []
        i = 1
        while f"strategy_{i}" in mapping:
            factors.append(
                np.array([float(v) for v in mapping[f"strategy_{i}"].split(",")])
            )
            i += 1
        if not factors:
            raise ConfigError("product strategy needs strategy_1, strategy_2, ...")
        return JointStrategy.product(*factors)
    if kind == "full":
        if "strategy_joint" not in mapping or "strategy_shape" not in mapping:
            raise ConfigError("full strategy needs strategy_joint and strategy_shape")
        shape = tuple(int(v) for v in mapping["strategy_shape"].split(","))
        flat = np.array([float(v) for v in mapping["strategy_joint"].split(",")])
        return JointStrategy.full(flat.reshape(shape))
    raise ConfigError(f"strategy_kind must be product or full, got {kind!r}")
