"""Sequence-form representation and strategy conversions.

For each player the sequences are the distinct chains of own actions that can
occur on a root-to-node path, indexed depth-first with the empty sequence at
position 0.  Realization plans x live on sequences and satisfy the flow
equalities: x[empty] = 1 and, for every information set, the realizations of
its action sequences sum to the realization of the sequence leading into it.

Strategic-form games embed as the degenerate case: one pseudo information set
per player whose "sequences" are the pure strategies, with a single
all-ones flow row summing to 1 and no empty sequence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .games import (ChanceNode, DecisionNode, ExtensiveFormGame, GameError,
                    PinList, StrategicFormGame, TerminalNode,
                    validate_perfect_recall)


class PerfectRecallError(GameError):
    pass


@dataclass
class InfosetRecord:
    """Per information set: flow row index, parent sequence and action sequences."""
    infoset_id: str
    row: int
    parent_seq: Optional[int]  # None marks the simplex row of an embedding
    actions: tuple[str, ...]
    action_seqs: tuple[int, ...]


@dataclass
class PayoffEntry:
    """One terminal: sequence index per player and chance-weighted payoffs."""
    seqs: tuple[int, ...]
    weight: float
    values: tuple[float, ...]  # weight * raw payoff, one per player


@dataclass
class SequenceFormGame:
    num_players: int
    seq_labels: list[list[str]]            # per player, index -> label
    seq_parents: list[list[Optional[int]]]  # per player, index -> parent sequence
    infosets: list[list[InfosetRecord]]    # per player, in row order (row 0 is the unit row)
    row_counts: list[int]                  # c_p, including the unit row
    payoff_entries: list[PayoffEntry]
    pin_seqs: list[list[int]]              # per player, sequences pinned to zero (model rows)
    behavioral_pins: list[set[tuple[str, str]]]  # per player, (infoset, action) never played
    source_game: Union[ExtensiveFormGame, StrategicFormGame, None] = None
    has_empty_sequence: bool = True
    _flow_cache: dict = field(default_factory=dict, repr=False)

    def num_seqs(self, player: int) -> int:
        return len(self.seq_labels[player])

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(self.num_seqs(p) for p in range(self.num_players))

    def flow_matrix(self, player: int):
        """Flow constraint pair (E, e) as a dense array and rhs vector."""
        if player not in self._flow_cache:
            c, d = self.row_counts[player], self.num_seqs(player)
            E = np.zeros((c, d))
            e = np.zeros(c)
            if self.has_empty_sequence:
                E[0, 0] = 1.0
                e[0] = 1.0
            for rec in self.infosets[player]:
                if rec.parent_seq is None:
                    e[rec.row] = 1.0
                else:
                    E[rec.row, rec.parent_seq] -= 1.0
                for j in rec.action_seqs:
                    E[rec.row, j] += 1.0
            self._flow_cache[player] = (E, e)
        return self._flow_cache[player]

    def entry_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Payoff entries as (seqs, values) index and weight arrays.

        Cached; this is the hot layout for gradient and Jacobian work."""
        if "entries" not in self._flow_cache:
            m = len(self.payoff_entries)
            seqs = np.zeros((m, self.num_players), dtype=np.intp)
            vals = np.zeros((m, self.num_players))
            for i, e in enumerate(self.payoff_entries):
                seqs[i] = e.seqs
                vals[i] = e.values
            self._flow_cache["entries"] = (seqs, vals)
        return self._flow_cache["entries"]

    def flow_residual(self, player: int, x: np.ndarray,
                      include_pins: bool = False) -> float:
        E, e = self.flow_matrix(player)
        res = float(np.max(np.abs(E @ x - e))) if len(e) else 0.0
        if include_pins:
            for j in self.pin_seqs[player]:
                res = max(res, abs(float(x[j])))
        return res


@dataclass
class PlayerStrategy:
    """Behavioral strategy of one player plus its realization plan."""
    infoset_ids: list[str]
    actions: list[tuple[str, ...]]
    probs: list[np.ndarray]
    unreachable: list[bool]
    realization: np.ndarray


@dataclass
class StrategyProfile:
    players: list[PlayerStrategy]
    verified_epsilon: Optional[float] = None

    def behavioral_map(self, player: int) -> dict[str, dict[str, float]]:
        ps = self.players[player]
        return {iset: {a: float(pr) for a, pr in zip(acts, probs)}
                for iset, acts, probs in zip(ps.infoset_ids, ps.actions, ps.probs)}


def build_sequence_form(game: ExtensiveFormGame,
                        pins: Optional[PinList] = None) -> SequenceFormGame:
    """Construct the sequence form of a perfect-recall game tree.

    Sequence indices are assigned in depth-first order.  Pin entries marked
    strict are translated into extra equalities x = 0 on the sequences taking
    the pinned action; all pin entries are excluded when an unreachable
    information set is later filled with a uniform distribution.
    """
    violation = validate_perfect_recall(game)
    if violation is not None:
        raise PerfectRecallError(str(violation))
    if pins is not None:
        pins.validate(game)

    n = game.num_players
    seq_labels: list[list[str]] = [["/"] for _ in range(n)]
    seq_parents: list[list[Optional[int]]] = [[None] for _ in range(n)]
    infosets: list[list[InfosetRecord]] = [[] for _ in range(n)]
    iset_index: list[dict[str, InfosetRecord]] = [{} for _ in range(n)]
    entries: list[PayoffEntry] = []

    def walk(idx: int, cur_seq: list[int], weight: Fraction) -> None:
        node = game.nodes[idx]
        if isinstance(node, TerminalNode):
            w = float(weight)
            values = tuple(float(weight * v) for v in node.payoffs)
            entries.append(PayoffEntry(tuple(cur_seq), w, values))
            return
        if isinstance(node, ChanceNode):
            for prob, child in zip(node.probs, node.children):
                walk(child, cur_seq, weight * prob)
            return
        p = node.player
        rec = iset_index[p].get(node.infoset)
        if rec is None:
            action_seqs = []
            for a in node.actions:
                seq_id = len(seq_labels[p])
                seq_labels[p].append(f"{node.infoset}->{a}")
                seq_parents[p].append(cur_seq[p])
                action_seqs.append(seq_id)
            rec = InfosetRecord(node.infoset, row=len(infosets[p]) + 1,
                                parent_seq=cur_seq[p], actions=node.actions,
                                action_seqs=tuple(action_seqs))
            infosets[p].append(rec)
            iset_index[p][node.infoset] = rec
        elif rec.parent_seq != cur_seq[p]:
            raise PerfectRecallError(
                f"information set {node.infoset!r} of player {p + 1} reached by "
                f"different own sequences")
        for seq_id, child in zip(rec.action_seqs, node.children):
            saved = cur_seq[p]
            cur_seq[p] = seq_id
            walk(child, cur_seq, weight)
            cur_seq[p] = saved

    walk(game.root, [0] * n, Fraction(1))

    pin_seqs: list[list[int]] = [[] for _ in range(n)]
    behavioral_pins: list[set[tuple[str, str]]] = [set() for _ in range(n)]
    if pins is not None:
        for e in pins.entries:
            rec = iset_index[e.player].get(e.infoset)
            if rec is None:
                raise GameError(f"pin refers to information set {e.infoset!r} absent "
                                f"from the tree")
            seq_id = rec.action_seqs[rec.actions.index(e.action)]
            behavioral_pins[e.player].add((e.infoset, e.action))
            if e.strict:
                pin_seqs[e.player].append(seq_id)

    return SequenceFormGame(
        num_players=n,
        seq_labels=seq_labels,
        seq_parents=seq_parents,
        infosets=infosets,
        row_counts=[1 + len(infosets[p]) for p in range(n)],
        payoff_entries=entries,
        pin_seqs=pin_seqs,
        behavioral_pins=behavioral_pins,
        source_game=game,
        has_empty_sequence=True,
    )


def embed_strategic_form(game: StrategicFormGame) -> SequenceFormGame:
    """Degenerate sequence form of a strategic-form game.

    Each player gets one pseudo information set whose action sequences are
    the pure strategies; the single flow row is all ones with right-hand
    side 1, and there is no empty sequence.
    """
    n = game.num_players
    seq_labels = [[f"s{j}" for j in range(m)] for m in game.strategy_counts]
    infosets = [[InfosetRecord("*", row=0, parent_seq=None,
                               actions=tuple(f"s{j}" for j in range(m)),
                               action_seqs=tuple(range(m)))]
                for m in game.strategy_counts]
    entries = []
    for combo in np.ndindex(*game.strategy_counts):
        values = tuple(float(game.payoffs[p][combo]) for p in range(n))
        entries.append(PayoffEntry(tuple(int(i) for i in combo), 1.0, values))
    return SequenceFormGame(
        num_players=n,
        seq_labels=seq_labels,
        seq_parents=[[None] * m for m in game.strategy_counts],
        infosets=infosets,
        row_counts=[1] * n,
        payoff_entries=entries,
        pin_seqs=[[] for _ in range(n)],
        behavioral_pins=[set() for _ in range(n)],
        source_game=game,
        has_empty_sequence=False,
    )


_REACH_TOL = 1e-9


def realization_to_behavioral(sf: SequenceFormGame,
                              plans: list[np.ndarray],
                              residual_tol: float = 1e-6) -> StrategyProfile:
    """Divide child realizations by their parent to recover action probabilities.

    At information sets whose parent realization is (numerically) zero the
    behavioral strategy is the uniform distribution over unpinned actions and
    the set is flagged unreachable.
    """
    players = []
    for p in range(sf.num_players):
        x = np.asarray(plans[p], dtype=float)
        if x.shape != (sf.num_seqs(p),):
            raise GameError(f"plan for player {p + 1} has wrong length")
        res = sf.flow_residual(p, x)
        if res > residual_tol:
            raise GameError(f"player {p + 1} plan violates flow constraints "
                            f"(residual {res:.3g})")
        ids, actions, probs, unreachable = [], [], [], []
        for rec in sf.infosets[p]:
            parent_val = 1.0 if rec.parent_seq is None else float(x[rec.parent_seq])
            child = np.maximum(x[list(rec.action_seqs)], 0.0)
            if parent_val > _REACH_TOL and child.sum() > 0.0:
                dist = child / child.sum()
                flag = False
            else:
                allowed = np.array(
                    [0.0 if (rec.infoset_id, a) in sf.behavioral_pins[p] else 1.0
                     for a in rec.actions])
                if allowed.sum() == 0:
                    allowed = np.ones(len(rec.actions))
                dist = allowed / allowed.sum()
                flag = True
            ids.append(rec.infoset_id)
            actions.append(rec.actions)
            probs.append(dist)
            unreachable.append(flag)
        players.append(PlayerStrategy(ids, actions, probs, unreachable, x.copy()))
    return StrategyProfile(players)


def behavioral_to_realization(sf: SequenceFormGame,
                              profile: StrategyProfile) -> list[np.ndarray]:
    """Multiply action probabilities down each chain of information sets."""
    plans = []
    for p in range(sf.num_players):
        ps = profile.players[p]
        by_id = {iset: probs for iset, probs in zip(ps.infoset_ids, ps.probs)}
        x = np.zeros(sf.num_seqs(p))
        if sf.has_empty_sequence:
            x[0] = 1.0
        for rec in sf.infosets[p]:
            if rec.infoset_id not in by_id:
                raise GameError(f"profile is missing information set {rec.infoset_id!r}")
            dist = np.asarray(by_id[rec.infoset_id], dtype=float)
            if len(dist) != len(rec.action_seqs):
                raise GameError(f"information set {rec.infoset_id!r}: wrong arity")
            if np.any(dist < -1e-12) or abs(dist.sum() - 1.0) > 1e-9:
                raise GameError(f"information set {rec.infoset_id!r}: probabilities "
                                f"must be nonnegative and sum to 1")
            parent_val = 1.0 if rec.parent_seq is None else x[rec.parent_seq]
            for seq_id, pr in zip(rec.action_seqs, dist):
                x[seq_id] = parent_val * pr
        plans.append(x)
    return plans


def normalize_plans(sf: SequenceFormGame, plans: list[np.ndarray]) -> StrategyProfile:
    """Round-trip through behavioral form, producing a clean, exactly
    flow-feasible profile from a possibly noisy plan."""
    profile = realization_to_behavioral(sf, plans)
    cleaned = behavioral_to_realization(sf, profile)
    for p in range(sf.num_players):
        profile.players[p].realization = cleaned[p]
    return profile


def multilinear_payoffs(sf: SequenceFormGame, plans: list[np.ndarray]) -> np.ndarray:
    """Expected payoff vector as the sparse multilinear sum over payoff entries."""
    out = np.zeros(sf.num_players)
    for entry in sf.payoff_entries:
        coef = 1.0
        for p, j in enumerate(entry.seqs):
            coef *= plans[p][j]
        if coef != 0.0:
            out += coef * np.asarray(entry.values)
    return out
