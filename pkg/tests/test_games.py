"""Game model: structure counts, pruning, payoffs, recall validation."""

from fractions import Fraction

import numpy as np
import pytest

from seqnash.games import (ChanceNode, DecisionNode, ExtensiveFormGame,
                           GameError, PerfectRecallViolation, PinEntry,
                           PinList, StrategicFormGame, TerminalNode,
                           prune_pins, validate_perfect_recall)
from seqnash.generators import (generate_kuhn2, generate_kuhn3,
                                generate_random_sfg, kuhn3_pins,
                                matching_pennies, rock_paper_scissors)


def test_kuhn3_full_counts(kuhn3_full):
    game, _ = kuhn3_full
    c = game.counts()
    assert (c.total, c.decision, c.terminal, c.chance) == (601, 288, 312, 1)
    assert c.infosets_per_player == (16, 16, 16)


def test_kuhn3_reduced_counts(kuhn3_reduced):
    c = kuhn3_reduced.counts()
    assert (c.total, c.decision, c.terminal, c.chance) == (415, 252, 162, 1)
    assert c.infosets_per_player == (16, 16, 16)


def test_kuhn3_terminals_zero_sum(kuhn3_full):
    game, _ = kuhn3_full
    for node in game.nodes:
        if isinstance(node, TerminalNode):
            assert sum(node.payoffs) == 0


def test_kuhn3_deal_spot_check(kuhn3_full):
    # deal (Q, K, A), betting check-check-bet-fold-call: the ace bets and
    # wins a pot of 5 after one caller, so the profits are (-1, -2, +3)
    game, _ = kuhn3_full
    root = game.nodes[game.root]
    deal_idx = root.outcome_labels.index("QKA")

    node = game.nodes[root.children[deal_idx]]
    for action in ("check", "check", "bet", "fold", "call"):
        node = game.nodes[node.children[node.actions.index(action)]]
    assert isinstance(node, TerminalNode)
    assert node.payoffs == (Fraction(-1), Fraction(-2), Fraction(3))


def test_kuhn3_deal_count_accounting(kuhn3_full):
    game, _ = kuhn3_full
    root = game.nodes[game.root]
    assert len(root.children) == 24
    assert all(p == Fraction(1, 24) for p in root.probs)
    # 13 leaves per betting tree, 24 deals
    c = game.counts()
    assert c.terminal == 24 * 13


def test_kuhn3_pins_families():
    pins = kuhn3_pins()
    assert len(pins) == 22
    assert len(pins.strict_entries) == 21
    weak = [e for e in pins.entries if not e.strict]
    assert len(weak) == 1
    assert weak[0].action == "check" and weak[0].infoset.startswith("A:")


def test_pins_validate_rejects_unknown(kuhn3_full):
    game, _ = kuhn3_full
    bad = PinList([PinEntry(0, "Z:", "bet")])
    with pytest.raises(GameError):
        bad.validate(game)


def test_pins_validate_rejects_total_pin(kuhn3_full):
    game, _ = kuhn3_full
    bad = PinList([PinEntry(0, "J:", "check"), PinEntry(0, "J:", "bet")])
    with pytest.raises(GameError):
        bad.validate(game)


def test_prune_empty_pinlist_is_identity(kuhn3_full):
    game, _ = kuhn3_full
    same = prune_pins(game, PinList())
    assert same.counts() == game.counts()


def test_prune_keeps_forced_decisions():
    # one infoset with two actions; pinning one leaves a forced decision node
    nodes = [
        DecisionNode(player=0, infoset="i", actions=("a", "b"), children=(1, 2)),
        TerminalNode((Fraction(1),)),
        TerminalNode((Fraction(0),)),
    ]
    game = ExtensiveFormGame(1, nodes, root=0)
    pruned = prune_pins(game, PinList([PinEntry(0, "i", "b")]))
    c = pruned.counts()
    assert (c.decision, c.terminal) == (1, 1)
    forced = [n for n in pruned.nodes if isinstance(n, DecisionNode)][0]
    assert forced.actions == ("a",)


def test_prune_preserves_surviving_payoffs(kuhn3_full, kuhn3_reduced):
    game, _ = kuhn3_full
    full_terms = {tuple(n.payoffs) for n in game.nodes
                  if isinstance(n, TerminalNode)}
    for node in kuhn3_reduced.nodes:
        if isinstance(node, TerminalNode):
            assert tuple(node.payoffs) in full_terms


def test_perfect_recall_ok_on_generated(kuhn3_full, kuhn2):
    game, _ = kuhn3_full
    assert validate_perfect_recall(game) is None
    assert validate_perfect_recall(kuhn2) is None


def test_perfect_recall_violation_detected():
    # the player forgets which action reached the second infoset
    nodes = [
        DecisionNode(player=0, infoset="first", actions=("l", "r"),
                     children=(1, 2)),
        DecisionNode(player=0, infoset="second", actions=("x", "y"),
                     children=(3, 4)),
        DecisionNode(player=0, infoset="second", actions=("x", "y"),
                     children=(5, 6)),
        TerminalNode((Fraction(0),)), TerminalNode((Fraction(0),)),
        TerminalNode((Fraction(0),)), TerminalNode((Fraction(0),)),
    ]
    game = ExtensiveFormGame(1, nodes, root=0)
    report = validate_perfect_recall(game)
    assert isinstance(report, PerfectRecallViolation)
    assert report.infoset == "second"
    assert "second" in str(report)


def test_single_node_game_ok():
    game = ExtensiveFormGame(1, [TerminalNode((Fraction(0),))], root=0)
    assert validate_perfect_recall(game) is None
    assert game.counts().total == 1


def test_chance_probabilities_must_sum():
    nodes = [
        ChanceNode(probs=(Fraction(1, 2), Fraction(1, 3)), children=(1, 2)),
        TerminalNode((Fraction(0),)), TerminalNode((Fraction(1),)),
    ]
    with pytest.raises(GameError):
        ExtensiveFormGame(1, nodes, root=0)


def test_infoset_action_mismatch_rejected():
    nodes = [
        ChanceNode(probs=(Fraction(1, 2), Fraction(1, 2)), children=(1, 2)),
        DecisionNode(player=0, infoset="i", actions=("a", "b"), children=(3, 4)),
        DecisionNode(player=0, infoset="i", actions=("a", "c"), children=(5, 6)),
        TerminalNode((Fraction(0),)), TerminalNode((Fraction(0),)),
        TerminalNode((Fraction(0),)), TerminalNode((Fraction(0),)),
    ]
    with pytest.raises(GameError):
        ExtensiveFormGame(1, nodes, root=0)


def test_sfg_shape_validation():
    with pytest.raises(GameError):
        StrategicFormGame(2, (2, 2), (np.zeros((2, 3)), np.zeros((2, 2))))


def test_sfg_generator_deterministic():
    a = generate_random_sfg(3, 4, seed=9)
    b = generate_random_sfg(3, 4, seed=9)
    for u, v in zip(a.payoffs, b.payoffs):
        assert np.array_equal(u, v)
    c = generate_random_sfg(3, 4, seed=10)
    assert not np.array_equal(a.payoffs[0], c.payoffs[0])


def test_bundled_sfgs():
    mp = matching_pennies()
    assert mp.strategy_counts == (2, 2)
    assert np.array_equal(mp.payoffs[0], -mp.payoffs[1])
    rps = rock_paper_scissors()
    assert rps.strategy_counts == (3, 3)
    assert np.array_equal(rps.payoffs[0], -rps.payoffs[1])


def test_kuhn2_counts(kuhn2):
    c = kuhn2.counts()
    assert c.chance == 1
    assert c.infosets_per_player == (6, 6)
    root = kuhn2.nodes[kuhn2.root]
    assert len(root.children) == 6
