"""YAML game files with profile-keyed payoff entries.

A file looks like::

    title: Two-player example
    players:
      - name: IP
        actions: [U, D]
      - name: Opponent
        actions: [L, B, R]
    payoffs:
      - profile: [U, L]
        values: [6, 10]
      ...

Payoff values are integers or ``"p/q"`` strings; decimals are rejected.
"""
from __future__ import annotations

import itertools
import re
from importlib import resources
from pathlib import Path
from typing import Any, Optional, Union

import yaml

from .game import Game, as_fraction

_RATIONAL = re.compile(r"^\s*-?\d+(\s*/\s*-?\d+)?\s*$")

BUNDLED = ("table1", "table2", "table3")


class GameFileError(ValueError):
    """Malformed game file; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: Optional[int] = None, field: str = ""):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(field)
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class _LineLoader(yaml.SafeLoader):
    pass


def _construct_mapping(loader, node, deep=False):
    mapping = yaml.SafeLoader.construct_mapping(loader, node, deep=True)
    mapping["__line__"] = node.start_mark.line + 1
    return mapping


_LineLoader.add_constructor(
    yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping
)


def _rational(value: Any, line: Optional[int], field: str):
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise GameFileError(
            f"expected an integer or 'p/q' string, got {value!r}", line, field
        )
    if isinstance(value, str) and not _RATIONAL.match(value):
        raise GameFileError(f"not a rational literal: {value!r}", line, field)
    try:
        return as_fraction(value.replace(" ", "") if isinstance(value, str) else value)
    except (ValueError, TypeError) as err:
        raise GameFileError(str(err), line, field) from None


def parse_game(text: str) -> Game:
    try:
        doc = yaml.load(text, Loader=_LineLoader)
    except yaml.YAMLError as err:
        mark = getattr(err, "problem_mark", None)
        raise GameFileError(
            f"invalid YAML: {getattr(err, 'problem', err)}",
            mark.line + 1 if mark else None,
        ) from None
    if not isinstance(doc, dict):
        raise GameFileError("top level must be a mapping", 1)
    top = doc.get("__line__")

    players = doc.get("players")
    if not isinstance(players, list) or len(players) < 2:
        raise GameFileError("need a list of at least two players", top, "players")
    names, actions = [], []
    for i, p in enumerate(players):
        if not isinstance(p, dict):
            raise GameFileError("player entry must be a mapping", top, f"players[{i}]")
        line = p.get("__line__")
        acts = p.get("actions")
        if not isinstance(acts, list) or not acts:
            raise GameFileError("missing or empty action list", line, f"players[{i}].actions")
        acts = [str(a) for a in acts]
        if len(set(acts)) != len(acts):
            raise GameFileError("duplicate action labels", line, f"players[{i}].actions")
        names.append(str(p.get("name", "IP" if i == 0 else f"P{i}")))
        actions.append(acts)

    entries = doc.get("payoffs")
    if not isinstance(entries, list):
        raise GameFileError("missing payoff list", top, "payoffs")
    table = {}
    for e_idx, entry in enumerate(entries):
        field = f"payoffs[{e_idx}]"
        if not isinstance(entry, dict):
            raise GameFileError("payoff entry must be a mapping", top, field)
        line = entry.get("__line__")
        labels = entry.get("profile")
        values = entry.get("values")
        if not isinstance(labels, list) or len(labels) != len(actions):
            raise GameFileError(
                f"profile must list {len(actions)} action labels", line, field + ".profile"
            )
        profile = []
        for i, lab in enumerate(labels):
            lab = str(lab)
            if lab not in actions[i]:
                raise GameFileError(
                    f"unknown action {lab!r} for player {names[i]}", line, field + ".profile"
                )
            profile.append(actions[i].index(lab))
        profile = tuple(profile)
        if profile in table:
            raise GameFileError(
                f"duplicate profile ({','.join(map(str, labels))})", line, field + ".profile"
            )
        if not isinstance(values, list) or len(values) != len(actions):
            raise GameFileError(
                f"values must list {len(actions)} payoffs", line, field + ".values"
            )
        table[profile] = tuple(_rational(v, line, field + ".values") for v in values)

    for profile in itertools.product(*(range(len(a)) for a in actions)):
        if profile not in table:
            labels = ",".join(actions[i][a] for i, a in enumerate(profile))
            raise GameFileError(f"missing payoff entry for profile ({labels})", top, "payoffs")

    meta = doc.get("metadata") or {}
    title = str(doc.get("title", meta.get("title", "") if isinstance(meta, dict) else ""))
    source = str(doc.get("source", meta.get("source", "") if isinstance(meta, dict) else ""))
    return Game(tuple(map(tuple, actions)), table, tuple(names), title, source)


def _render(value) -> Union[int, str]:
    return value.numerator if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def serialize_game(game: Game) -> str:
    doc: dict[str, Any] = {}
    if game.title:
        doc["title"] = game.title
    if game.source:
        doc["source"] = game.source
    doc["players"] = [
        {"name": name, "actions": list(acts)} for name, acts in zip(game.names, game.actions)
    ]
    doc["payoffs"] = [
        {
            "profile": list(game.profile_labels(profile)),
            "values": [_render(v) for v in game.payoffs[profile]],
        }
        for profile in game.profiles()
    ]
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=None)


def load_game(path: Union[str, Path]) -> Game:
    """Read a game file; bare names such as ``table2`` resolve to bundled games."""
    p = Path(path)
    if not p.exists() and str(path) in BUNDLED:
        return bundled_game(str(path))
    try:
        text = p.read_text()
    except OSError as err:
        raise GameFileError(f"cannot read {path}: {err.strerror}") from None
    return parse_game(text)


def bundled_game(name: str) -> Game:
    text = resources.files("fpsynth.games").joinpath(f"{name}.yaml").read_text()
    return parse_game(text)


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("fpsynth.games").joinpath(f"{name}.yaml")))
