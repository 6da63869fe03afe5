"""JSON formats for strategic games, pin lists, and strategy profiles.

All writers are deterministic: keys appear in a fixed order and floats are
printed with 17 significant digits, enough to reproduce every double bit for
bit on reload.  Tree games use the text format from the efg module; this
module adds the flat JSON documents and a loader that dispatches on content.
"""

from __future__ import annotations

import json
import os
from typing import Optional, Union

import numpy as np

from .efg_text import parse_efg, serialize_efg
from .games import (ExtensiveFormGame, GameError, PinEntry, PinList,
                    StrategicFormGame)
from .seqform import PlayerStrategy, StrategyProfile

__all__ = [
    "dumps_json", "sfg_to_json", "sfg_from_json", "pins_to_json",
    "pins_from_json", "profile_to_json", "profile_from_json",
    "load_game", "save_game", "pins_sidecar_path",
]

Game = Union[ExtensiveFormGame, StrategicFormGame]


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, str):
        return json.dumps(v)
    if v is None:
        return "null"
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ", ".join(json.dumps(str(k)) + ": " + _fmt(x)
                               for k, x in v.items()) + "}"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def dumps_json(obj) -> str:
    """Serialize with full-precision floats; insertion order is kept."""
    return _fmt(obj) + "\n"


# ---------------------------------------------------------------- games
def sfg_to_json(game: StrategicFormGame) -> str:
    doc = {
        "players": game.num_players,
        "strategy_counts": list(game.strategy_counts),
        "payoffs": [np.asarray(u).reshape(-1) for u in game.payoffs],
    }
    if game.title:
        doc["title"] = game.title
    return dumps_json(doc)


def sfg_from_json(text: str) -> StrategicFormGame:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GameError(f"bad strategic game JSON: {exc}") from exc
    try:
        n = int(doc["players"])
        counts = tuple(int(c) for c in doc["strategy_counts"])
        flat = doc["payoffs"]
    except (KeyError, TypeError, ValueError) as exc:
        raise GameError(f"strategic game JSON missing field: {exc}") from exc
    if len(flat) != n:
        raise GameError(f"expected {n} payoff arrays, got {len(flat)}")
    payoffs = tuple(np.asarray(u, dtype=float).reshape(counts) for u in flat)
    return StrategicFormGame(n, counts, payoffs, title=doc.get("title", ""))


# ----------------------------------------------------------------- pins
def pins_to_json(pins: PinList) -> str:
    doc = {"pins": [{"player": e.player, "infoset": e.infoset,
                     "action": e.action, "strict": e.strict}
                    for e in pins.entries]}
    return dumps_json(doc)


def pins_from_json(text: str) -> PinList:
    try:
        doc = json.loads(text)
        entries = [PinEntry(int(e["player"]), str(e["infoset"]),
                            str(e["action"]), bool(e.get("strict", True)))
                   for e in doc["pins"]]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise GameError(f"bad pin list JSON: {exc}") from exc
    return PinList(entries)


# -------------------------------------------------------------- profiles
def profile_to_json(profile: StrategyProfile) -> str:
    players = []
    for ps in profile.players:
        strategy = []
        for iset, acts, probs in zip(ps.infoset_ids, ps.actions, ps.probs):
            for a, pr in zip(acts, probs):
                strategy.append({"infoset": iset, "action": a,
                                 "probability": float(pr)})
        players.append({"strategy": strategy,
                        "unreachable": list(ps.unreachable),
                        "realization": ps.realization})
    doc = {"epsilon": (None if profile.verified_epsilon is None
                       else float(profile.verified_epsilon)),
           "players": players}
    return dumps_json(doc)


def profile_from_json(text: str) -> StrategyProfile:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GameError(f"bad profile JSON: {exc}") from exc
    players = []
    try:
        for entry in doc["players"]:
            ids: list[str] = []
            actions: list[tuple[str, ...]] = []
            probs: list[list[float]] = []
            for row in entry["strategy"]:
                iset = str(row["infoset"])
                if not ids or ids[-1] != iset:
                    if iset in ids:
                        raise GameError(f"infoset {iset!r} listed twice")
                    ids.append(iset)
                    actions.append(())
                    probs.append([])
                actions[-1] = actions[-1] + (str(row["action"]),)
                probs[-1].append(float(row["probability"]))
            unreachable = [bool(b) for b in entry.get(
                "unreachable", [False] * len(ids))]
            realization = np.asarray(entry["realization"], dtype=float)
            players.append(PlayerStrategy(
                ids, actions, [np.asarray(pr) for pr in probs],
                unreachable, realization))
    except (KeyError, TypeError, ValueError) as exc:
        raise GameError(f"profile JSON missing field: {exc}") from exc
    eps = doc.get("epsilon")
    return StrategyProfile(players, None if eps is None else float(eps))


# ------------------------------------------------------------ file layer
def pins_sidecar_path(game_path: str) -> str:
    """games/kuhn3.efg -> games/kuhn3.pins.json"""
    stem, ext = os.path.splitext(game_path)
    if ext == ".json":
        stem = game_path[:-len(".json")]
    return stem + ".pins.json"


def load_game(path: str) -> tuple[Game, Optional[PinList]]:
    """Read a game file (tree text or strategic JSON) plus its pin sidecar."""
    with open(path) as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        game: Game = sfg_from_json(text)
    else:
        game = parse_efg(text)
    pins = None
    sidecar = pins_sidecar_path(path)
    if os.path.exists(sidecar):
        with open(sidecar) as fh:
            pins = pins_from_json(fh.read())
        if isinstance(game, ExtensiveFormGame):
            pins.validate(game)
    return game, pins


def save_game(game: Game, path: str, pins: Optional[PinList] = None) -> None:
    with open(path, "w") as fh:
        if isinstance(game, ExtensiveFormGame):
            fh.write(serialize_efg(game))
        else:
            fh.write(sfg_to_json(game))
    if pins is not None and len(pins):
        with open(pins_sidecar_path(path), "w") as fh:
            fh.write(pins_to_json(pins))
