"""Bundled game generators.

Kuhn poker, one-card one-round betting: every player antes 1, a bet costs 1
more, no raises.  Players act in seat order; once somebody bets, the remaining
players respond fold/call in cyclic order starting after the bettor, and the
highest card among players still in takes the pot.  The three-player variant
uses a four-card deck (J < Q < K < A), the two-player variant the classic
three-card deck (J < Q < K).

Fixed conventions (documented here because several tests pin the resulting
counts): deals are emitted in itertools.permutations order over the deck,
betting actions are ordered check/bet, responses fold/call, and information
set ids are "<card>:<public history>" with the history spelled in the letters
k/b/f/c.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from .games import (ChanceNode, DecisionNode, ExtensiveFormGame, Node, PinEntry,
                    PinList, StrategicFormGame, TerminalNode)

_RANK = {"J": 0, "Q": 1, "K": 2, "A": 3}


def _kuhn_payoffs(deal: tuple[str, ...], history: str) -> tuple[Fraction, ...]:
    """Profit vector for a finished betting history under the given deal."""
    n = len(deal)
    contrib = [1] * n  # antes
    folded = [False] * n
    if "b" in history:
        bettor = history.index("b")
        contrib[bettor] += 1
        responders = [(bettor + 1 + i) % n for i in range(n - 1)]
        for who, ch in zip(responders, history[bettor + 1:]):
            if ch == "c":
                contrib[who] += 1
            else:
                folded[who] = True
        contenders = [p for p in range(n) if not folded[p]]
    else:
        contenders = list(range(n))
    pot = sum(contrib)
    winner = max(contenders, key=lambda p: _RANK[deal[p]])
    return tuple(Fraction(pot - contrib[p]) if p == winner else Fraction(-contrib[p])
                 for p in range(n))


def _kuhn_state(history: str, n: int):
    """Classify a betting history: ('play', actor, action letters) or ('done',)."""
    if "b" not in history:
        if len(history) == n:
            return ("done",)
        return ("play", len(history), "kb")
    bettor = history.index("b")
    replies = len(history) - bettor - 1
    if replies == n - 1:
        return ("done",)
    actor = (bettor + 1 + replies) % n
    return ("play", actor, "fc")


_ACTION_NAME = {"k": "check", "b": "bet", "f": "fold", "c": "call"}


def kuhn_betting_histories(n: int) -> list[tuple[int, str]]:
    """All (actor, history) decision points of the n-player betting round,
    in depth-first order."""
    out: list[tuple[int, str]] = []

    def rec(history: str) -> None:
        state = _kuhn_state(history, n)
        if state[0] == "done":
            return
        _, actor, letters = state
        out.append((actor, history))
        for ch in letters:
            rec(history + ch)

    rec("")
    return out


def _build_kuhn(deck: tuple[str, ...], n: int, title: str) -> ExtensiveFormGame:
    nodes: list[Node] = []
    deals = list(itertools.permutations(deck, n))
    root = ChanceNode(probs=tuple(Fraction(1, len(deals)) for _ in deals),
                      children=(), outcome_labels=tuple("".join(d) for d in deals),
                      label="deal")
    nodes.append(root)

    def grow(deal: tuple[str, ...], history: str) -> int:
        state = _kuhn_state(history, n)
        idx = len(nodes)
        if state[0] == "done":
            nodes.append(TerminalNode(_kuhn_payoffs(deal, history), label=history))
            return idx
        _, actor, letters = state
        nodes.append(None)  # type: ignore[arg-type]  # patched below
        kids = tuple(grow(deal, history + ch) for ch in letters)
        nodes[idx] = DecisionNode(player=actor,
                                  infoset=f"{deal[actor]}:{history}",
                                  actions=tuple(_ACTION_NAME[ch] for ch in letters),
                                  children=kids, label=history)
        return idx

    children = tuple(grow(deal, "") for deal in deals)
    nodes[0] = ChanceNode(root.probs, children, root.outcome_labels, root.label)
    return ExtensiveFormGame(n, nodes, root=0, title=title)


def kuhn3_pins() -> PinList:
    """Dominated actions of three-player Kuhn poker.

    Four families: calling a bet holding the Jack, folding to a bet holding
    the Ace, calling holding the Queen once a bet has already been called,
    and checking the Ace after two checks.  The first three are strict (the
    sibling action always does better); the last is only weak, so it is
    pruned from the reduced tree but not written as a model constraint.
    """
    entries: list[PinEntry] = []
    for actor, hist in kuhn_betting_histories(3):
        if "b" not in hist:
            continue  # betting phase, not facing a bet
        entries.append(PinEntry(actor, f"J:{hist}", "call", strict=True))
        entries.append(PinEntry(actor, f"A:{hist}", "fold", strict=True))
        if "c" in hist[hist.index("b"):]:
            entries.append(PinEntry(actor, f"Q:{hist}", "call", strict=True))
    entries.append(PinEntry(2, "A:kk", "check", strict=False))
    return PinList(entries)


def generate_kuhn3() -> tuple[ExtensiveFormGame, PinList]:
    """Three-player Kuhn poker with its dominated-action pin list."""
    game = _build_kuhn(("J", "Q", "K", "A"), 3, title="kuhn3")
    return game, kuhn3_pins()


def generate_kuhn2() -> ExtensiveFormGame:
    """Two-player Kuhn poker (zero-sum, value -1/18 for the first player)."""
    return _build_kuhn(("J", "Q", "K"), 2, title="kuhn2")


def generate_random_sfg(num_players: int, num_strategies: int, seed: int) -> StrategicFormGame:
    """Random strategic-form game, payoffs i.i.d. uniform on [0, 1).

    The draw order is fixed (one tensor per player, C order) so a seed fully
    determines the game.
    """
    if num_players < 2:
        raise ValueError("need at least two players")
    if num_strategies < 1:
        raise ValueError("need at least one strategy per player")
    rng = np.random.default_rng(seed)
    shape = (num_strategies,) * num_players
    payoffs = tuple(rng.random(shape) for _ in range(num_players))
    return StrategicFormGame(num_players, shape, payoffs,
                             title=f"sfg-n{num_players}-m{num_strategies}-s{seed}")


def matching_pennies() -> StrategicFormGame:
    """Classic zero-sum 2x2 game; unique equilibrium is uniform for both."""
    u1 = np.array([[1.0, -1.0], [-1.0, 1.0]])
    return StrategicFormGame(2, (2, 2), (u1, -u1), title="matching-pennies")


def rock_paper_scissors() -> StrategicFormGame:
    u1 = np.array([[0.0, -1.0, 1.0], [1.0, 0.0, -1.0], [-1.0, 1.0, 0.0]])
    return StrategicFormGame(2, (3, 3), (u1, -u1), title="rps")
