"""Game containers: extensive-form trees, strategic-form tensors, and pin lists.

An extensive-form game is stored as a flat list of node records indexed by
position; children reference nodes by index.  Payoffs and chance probabilities
are kept as exact rationals (fractions.Fraction) so that generated games and
their serialized files round-trip without drift.  Conversion to floats happens
only when the sequence form is built.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Union

import numpy as np

Number = Union[int, Fraction, float]


class GameError(ValueError):
    """Structural problem with a game definition."""


@dataclass
class ChanceNode:
    probs: tuple[Fraction, ...]
    children: tuple[int, ...]
    outcome_labels: tuple[str, ...] = ()
    label: str = ""


@dataclass
class DecisionNode:
    player: int  # 0-based
    infoset: str
    actions: tuple[str, ...]
    children: tuple[int, ...]
    label: str = ""


@dataclass
class TerminalNode:
    payoffs: tuple[Fraction, ...]
    label: str = ""


Node = Union[ChanceNode, DecisionNode, TerminalNode]


@dataclass
class GameCounts:
    total: int
    decision: int
    terminal: int
    chance: int
    infosets_per_player: tuple[int, ...]

    @property
    def infosets_total(self) -> int:
        return sum(self.infosets_per_player)


class ExtensiveFormGame:
    """Imperfect-information game tree with information-set partition.

    Nodes are held in a list; `root` is the index of the root node.  The
    constructor checks tree structure, chance probability sums and action
    consistency inside each information set.
    """

    def __init__(self, num_players: int, nodes: list[Node], root: int = 0,
                 title: str = "", player_names: Optional[list[str]] = None):
        if num_players < 1:
            raise GameError("need at least one player")
        self.num_players = num_players
        self.nodes = nodes
        self.root = root
        self.title = title
        self.player_names = player_names or [f"P{i + 1}" for i in range(num_players)]
        self._parents: Optional[list[Optional[int]]] = None
        self._infosets: Optional[dict[tuple[int, str], list[int]]] = None
        self._validate()

    # -- structure ---------------------------------------------------------

    def _validate(self) -> None:
        n = len(self.nodes)
        if not (0 <= self.root < n):
            raise GameError("root index out of range")
        seen = [False] * n
        stack = [self.root]
        parents: list[Optional[int]] = [None] * n
        while stack:
            idx = stack.pop()
            if seen[idx]:
                raise GameError(f"node {idx} reached twice; not a tree")
            seen[idx] = True
            node = self.nodes[idx]
            if isinstance(node, TerminalNode):
                if len(node.payoffs) != self.num_players:
                    raise GameError(f"terminal {idx} has {len(node.payoffs)} payoffs, "
                                    f"expected {self.num_players}")
                continue
            if isinstance(node, ChanceNode):
                if len(node.probs) != len(node.children):
                    raise GameError(f"chance node {idx}: probability/child count mismatch")
                total = sum(node.probs, start=Fraction(0)) if all(
                    isinstance(p, Fraction) for p in node.probs) else float(sum(node.probs))
                if isinstance(total, Fraction):
                    if total != 1:
                        raise GameError(f"chance node {idx}: probabilities sum to {total}")
                elif abs(total - 1.0) > 1e-12:
                    raise GameError(f"chance node {idx}: probabilities sum to {total}")
                if any(p < 0 for p in node.probs):
                    raise GameError(f"chance node {idx}: negative probability")
            elif isinstance(node, DecisionNode):
                if not (0 <= node.player < self.num_players):
                    raise GameError(f"decision node {idx}: bad player {node.player}")
                if len(node.actions) != len(node.children):
                    raise GameError(f"decision node {idx}: action/child count mismatch")
                if len(node.actions) == 0:
                    raise GameError(f"decision node {idx}: no actions")
            else:
                raise GameError(f"node {idx}: unknown record type {type(node)!r}")
            for c in node.children:
                if not (0 <= c < n):
                    raise GameError(f"node {idx}: child index {c} out of range")
                if parents[c] is not None or c == self.root:
                    raise GameError(f"node {c} has two parents; not a tree")
                parents[c] = idx
                stack.append(c)
        if not all(seen):
            unreached = [i for i, s in enumerate(seen) if not s]
            raise GameError(f"nodes not reachable from root: {unreached[:5]}")
        self._parents = parents
        # information sets: same owner and identical action tuple throughout
        infosets: dict[tuple[int, str], list[int]] = {}
        for idx in self.dfs():
            node = self.nodes[idx]
            if isinstance(node, DecisionNode):
                key = (node.player, node.infoset)
                members = infosets.setdefault(key, [])
                if members:
                    first = self.nodes[members[0]]
                    assert isinstance(first, DecisionNode)
                    if first.actions != node.actions:
                        raise GameError(
                            f"information set {node.infoset!r} of player {node.player + 1} "
                            f"mixes action lists {first.actions} and {node.actions}")
                members.append(idx)
        self._infosets = infosets

    def dfs(self) -> Iterator[int]:
        """Node indices in depth-first preorder (children in listed order)."""
        stack = [self.root]
        while stack:
            idx = stack.pop()
            yield idx
            node = self.nodes[idx]
            if not isinstance(node, TerminalNode):
                stack.extend(reversed(node.children))

    @property
    def parents(self) -> list[Optional[int]]:
        assert self._parents is not None
        return self._parents

    @property
    def infosets(self) -> dict[tuple[int, str], list[int]]:
        """Map (player, infoset id) -> node indices, in first-visit order."""
        assert self._infosets is not None
        return self._infosets

    def infoset_ids(self, player: int) -> list[str]:
        return [iset for (p, iset) in self.infosets if p == player]

    def counts(self) -> GameCounts:
        dec = term = chance = 0
        for node in self.nodes:
            if isinstance(node, DecisionNode):
                dec += 1
            elif isinstance(node, TerminalNode):
                term += 1
            else:
                chance += 1
        per_player = tuple(len(self.infoset_ids(p)) for p in range(self.num_players))
        return GameCounts(total=len(self.nodes), decision=dec, terminal=term,
                          chance=chance, infosets_per_player=per_player)


@dataclass
class StrategicFormGame:
    """One payoff tensor per player, shape = strategy_counts."""

    num_players: int
    strategy_counts: tuple[int, ...]
    payoffs: tuple[np.ndarray, ...]
    title: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "strategy_counts", tuple(self.strategy_counts))
        if len(self.strategy_counts) != self.num_players:
            raise GameError("strategy_counts length must equal num_players")
        if any(m < 1 for m in self.strategy_counts):
            raise GameError("each player needs at least one strategy")
        if len(self.payoffs) != self.num_players:
            raise GameError("need one payoff tensor per player")
        shaped = []
        for p, tensor in enumerate(self.payoffs):
            arr = np.asarray(tensor, dtype=float)
            if arr.shape != self.strategy_counts:
                raise GameError(f"payoff tensor {p} has shape {arr.shape}, "
                                f"expected {self.strategy_counts}")
            if not np.all(np.isfinite(arr)):
                raise GameError(f"payoff tensor {p} contains non-finite values")
            shaped.append(arr)
        object.__setattr__(self, "payoffs", tuple(shaped))


@dataclass(frozen=True)
class PinEntry:
    """One behavioral probability forced to zero.

    `strict` marks actions dominated strictly (never played in any
    equilibrium).  Only strict entries become equality rows in the sequence
    form; non-strict entries still participate in tree pruning.
    """

    player: int
    infoset: str
    action: str
    strict: bool = True


@dataclass
class PinList:
    entries: list[PinEntry] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def strict_entries(self) -> list[PinEntry]:
        return [e for e in self.entries if e.strict]

    def validate(self, game: ExtensiveFormGame) -> None:
        """Check every entry exists and no infoset loses all its actions."""
        pinned: dict[tuple[int, str], set[str]] = {}
        for e in self.entries:
            key = (e.player, e.infoset)
            if key not in game.infosets:
                raise GameError(f"pin refers to missing information set {e.infoset!r} "
                                f"of player {e.player + 1}")
            node = game.nodes[game.infosets[key][0]]
            assert isinstance(node, DecisionNode)
            if e.action not in node.actions:
                raise GameError(f"pin refers to missing action {e.action!r} at "
                                f"information set {e.infoset!r}")
            pinned.setdefault(key, set()).add(e.action)
        for key, actions in pinned.items():
            node = game.nodes[game.infosets[key][0]]
            assert isinstance(node, DecisionNode)
            if len(actions) >= len(node.actions):
                raise GameError(f"all actions pinned at information set {key[1]!r}")


@dataclass
class PerfectRecallViolation:
    player: int
    infoset: str
    history_a: tuple
    history_b: tuple

    def __str__(self) -> str:
        return (f"player {self.player + 1} information set {self.infoset!r} mixes "
                f"own histories {self.history_a} and {self.history_b}")


def own_histories(game: ExtensiveFormGame, player: int) -> dict[int, tuple]:
    """Map each node index to the (infoset, action index) pairs `player`
    chose on the path from the root to that node."""
    out: dict[int, tuple] = {}

    def walk(idx: int, hist: tuple) -> None:
        out[idx] = hist
        node = game.nodes[idx]
        if isinstance(node, TerminalNode):
            return
        if isinstance(node, DecisionNode) and node.player == player:
            for a, child in enumerate(node.children):
                walk(child, hist + ((node.infoset, a),))
        else:
            for child in node.children:
                walk(child, hist)

    walk(game.root, ())
    return out


def validate_perfect_recall(game: ExtensiveFormGame) -> Optional[PerfectRecallViolation]:
    """Return None if every information set has a single own-history,
    otherwise a report naming the offending set and two conflicting histories."""
    for player in range(game.num_players):
        hists = own_histories(game, player)
        for (p, iset), members in game.infosets.items():
            if p != player:
                continue
            ref = hists[members[0]]
            for m in members[1:]:
                if hists[m] != ref:
                    return PerfectRecallViolation(player, iset, ref, hists[m])
    return None


def prune_pins(game: ExtensiveFormGame, pins: PinList) -> ExtensiveFormGame:
    """Delete every pinned action (and its subtree) from the game.

    Decision nodes left with a single action are kept as forced nodes rather
    than collapsed, so information-set structure above them is unchanged.
    """
    pins.validate(game)
    pinned: dict[tuple[int, str], set[str]] = {}
    for e in pins.entries:
        pinned.setdefault((e.player, e.infoset), set()).add(e.action)

    new_nodes: list[Node] = []

    def copy(idx: int) -> int:
        node = game.nodes[idx]
        my = len(new_nodes)
        new_nodes.append(node)  # placeholder, replaced below
        if isinstance(node, TerminalNode):
            new_nodes[my] = TerminalNode(node.payoffs, node.label)
        elif isinstance(node, ChanceNode):
            kids = tuple(copy(c) for c in node.children)
            new_nodes[my] = ChanceNode(node.probs, kids, node.outcome_labels, node.label)
        else:
            drop = pinned.get((node.player, node.infoset), set())
            keep = [k for k, a in enumerate(node.actions) if a not in drop]
            if not keep:
                raise GameError(f"all actions pinned at {node.infoset!r}")
            kids = tuple(copy(node.children[k]) for k in keep)
            new_nodes[my] = DecisionNode(node.player, node.infoset,
                                         tuple(node.actions[k] for k in keep),
                                         kids, node.label)
        return my

    copy(game.root)
    return ExtensiveFormGame(game.num_players, new_nodes, root=0,
                             title=game.title, player_names=list(game.player_names))
