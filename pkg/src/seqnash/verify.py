"""Exact equilibrium verification.

Everything here works directly on the game (tree walk or payoff tensors) and
shares no code with the relaxation machinery, so it can serve as the
independent check on anything the solver produces.

Best responses on trees use the standard counterfactual bottom-up sweep:
first accumulate, for every (information set, action) of the responding
player, the chance-and-opponent weighted payoff mass reaching it, then take
the best action per information set from the deepest sets upward.  One tree
traversal plus one linear pass over the information sets.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from .games import (ChanceNode, DecisionNode, ExtensiveFormGame, GameError,
                    StrategicFormGame, TerminalNode)
from .seqform import StrategyProfile

Game = Union[ExtensiveFormGame, StrategicFormGame]

# Behavioral view used internally: (player, infoset id) -> array of action probs
_BehavMap = Mapping[tuple[int, str], np.ndarray]


def _behavior_of(game: Game, profile: StrategyProfile) -> _BehavMap:
    if len(profile.players) != _num_players(game):
        raise GameError("profile has the wrong number of players")
    out: dict[tuple[int, str], np.ndarray] = {}
    for p, ps in enumerate(profile.players):
        for iset, probs in zip(ps.infoset_ids, ps.probs):
            out[(p, iset)] = np.asarray(probs, dtype=float)
    return out


def _num_players(game: Game) -> int:
    return game.num_players


def _mixed_of(game: StrategicFormGame, profile: StrategyProfile) -> list[np.ndarray]:
    mixed = []
    for p, ps in enumerate(profile.players):
        if len(ps.probs) != 1:
            raise GameError("strategic-form profile needs exactly one mixing per player")
        v = np.asarray(ps.probs[0], dtype=float)
        if v.shape != (game.strategy_counts[p],):
            raise GameError(f"player {p + 1} mixes over {v.shape[0]} strategies, "
                            f"expected {game.strategy_counts[p]}")
        mixed.append(v)
    return mixed


def expected_payoffs(game: Game, profile: StrategyProfile) -> np.ndarray:
    """Expected payoff vector under the profile, one entry per player."""
    if isinstance(game, StrategicFormGame):
        mixed = _mixed_of(game, profile)
        return np.array([_contract_all(game.payoffs[p], mixed) for p in range(game.num_players)])
    behav = _behavior_of(game, profile)

    def walk(idx: int) -> np.ndarray:
        node = game.nodes[idx]
        if isinstance(node, TerminalNode):
            return np.array([float(v) for v in node.payoffs])
        if isinstance(node, ChanceNode):
            # Kahan-compensated accumulation keeps long chance sums tight.
            total = np.zeros(game.num_players)
            comp = np.zeros(game.num_players)
            for prob, child in zip(node.probs, node.children):
                term = float(prob) * walk(child) - comp
                new_total = total + term
                comp = (new_total - total) - term
                total = new_total
            return total
        key = (node.player, node.infoset)
        if key not in behav:
            raise GameError(f"profile is missing information set {node.infoset!r} "
                            f"of player {node.player + 1}")
        probs = behav[key]
        if len(probs) != len(node.children):
            raise GameError(f"information set {node.infoset!r}: profile has "
                            f"{len(probs)} probabilities for {len(node.children)} actions")
        total = np.zeros(game.num_players)
        for pr, child in zip(probs, node.children):
            if pr != 0.0:
                total += pr * walk(child)
        return total

    return walk(game.root)


def _contract_all(tensor: np.ndarray, mixed: list[np.ndarray]) -> float:
    out = tensor
    for v in reversed(mixed):
        out = out @ v
    return float(out)


def _action_values(game: StrategicFormGame, mixed: list[np.ndarray], player: int) -> np.ndarray:
    """Expected payoff of each pure strategy of `player` against the others."""
    out = game.payoffs[player]
    # contract trailing axes first so earlier axis numbers stay valid
    for q in reversed(range(game.num_players)):
        if q != player:
            out = np.tensordot(out, mixed[q], axes=([q], [0]))
    return np.asarray(out, dtype=float)


def best_response_value(game: Game, profile: StrategyProfile, player: int) -> float:
    """Value of the exact best response of `player`, opponents and chance fixed."""
    if isinstance(game, StrategicFormGame):
        mixed = _mixed_of(game, profile)
        return float(np.max(_action_values(game, mixed, player)))
    behav = _behavior_of(game, profile)

    # Pass 1: weighted payoff mass per own (infoset, action) chain position.
    gain: dict[object, float] = {None: 0.0}
    iset_order: list[str] = []
    iset_parent: dict[str, object] = {}
    iset_actions: dict[str, int] = {}

    def down(idx: int, own_key: object, reach: float) -> None:
        node = game.nodes[idx]
        if isinstance(node, TerminalNode):
            gain[own_key] = gain.get(own_key, 0.0) + reach * float(node.payoffs[player])
            return
        if isinstance(node, ChanceNode):
            for prob, child in zip(node.probs, node.children):
                p = float(prob)
                if p != 0.0:
                    down(child, own_key, reach * p)
            return
        if node.player == player:
            iset = node.infoset
            if iset not in iset_parent:
                iset_parent[iset] = own_key
                iset_actions[iset] = len(node.actions)
                iset_order.append(iset)
            for a, child in enumerate(node.children):
                down(child, (iset, a), reach)
        else:
            key = (node.player, node.infoset)
            if key not in behav:
                raise GameError(f"profile is missing information set {node.infoset!r} "
                                f"of player {node.player + 1}")
            for pr, child in zip(behav[key], node.children):
                if pr != 0.0:
                    down(child, own_key, reach * pr)

    down(game.root, None, 1.0)

    # Pass 2: best action per information set, deepest first.
    children_of: dict[object, list[str]] = {}
    for iset in iset_order:
        children_of.setdefault(iset_parent[iset], []).append(iset)
    value: dict[str, float] = {}
    for iset in reversed(iset_order):
        best = -np.inf
        for a in range(iset_actions[iset]):
            key = (iset, a)
            v = gain.get(key, 0.0) + sum(value[s] for s in children_of.get(key, []))
            best = max(best, v)
        value[iset] = best
    return gain.get(None, 0.0) + sum(value[s] for s in children_of.get(None, []))


@dataclass
class EpsilonReport:
    expected: np.ndarray
    best_response: np.ndarray
    epsilon: float


def epsilon_report(game: Game, profile: StrategyProfile) -> EpsilonReport:
    exp = expected_payoffs(game, profile)
    br = np.array([best_response_value(game, profile, p)
                   for p in range(_num_players(game))])
    gaps = br - exp
    worst = float(np.max(gaps))
    if worst < -1e-12:
        raise GameError(f"best response below achieved value ({worst:.3g}); "
                        f"verifier inconsistency")
    return EpsilonReport(exp, br, max(worst, 0.0))


def epsilon(game: Game, profile: StrategyProfile) -> float:
    """Worst improvement any single player can gain by deviating; >= 0."""
    return epsilon_report(game, profile).epsilon
