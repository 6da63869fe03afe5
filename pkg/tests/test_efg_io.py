"""Text round-trips for the extensive-form game format."""

from fractions import Fraction

import pytest

from seqnash.efg_text import EfgParseError, parse_efg, serialize_efg
from seqnash.games import ChanceNode, TerminalNode


def _terminal_payoffs(game):
    return [tuple(n.payoffs) for n in game.nodes if isinstance(n, TerminalNode)]


def _chance_probs(game):
    return [tuple(n.probs) for n in game.nodes if isinstance(n, ChanceNode)]


@pytest.mark.parametrize("name", ["kuhn2", "kuhn3", "kuhn3_reduced"])
def test_round_trip_preserves_structure(name, kuhn2, kuhn3_full, kuhn3_reduced):
    game = {"kuhn2": kuhn2, "kuhn3": kuhn3_full[0],
            "kuhn3_reduced": kuhn3_reduced}[name]
    back = parse_efg(serialize_efg(game))
    assert back.counts() == game.counts()
    assert back.infosets.keys() == game.infosets.keys()
    assert _terminal_payoffs(back) == _terminal_payoffs(game)
    assert _chance_probs(back) == _chance_probs(game)


def test_round_trip_is_fixed_point(kuhn2):
    text = serialize_efg(kuhn2)
    assert serialize_efg(parse_efg(text)) == text


def test_handwritten_game():
    text = """EFG 2 R "coin" { "Alice" "Bob" }
c "" 1 "" { "heads" 1/2 "tails" 1/2 } 0
p "" 1 1 "guess" { "h" "t" } 0
t "" 1 "" { 1 -1 }
t "" 2 "" { -1 1 }
p "" 1 1 "guess" { "h" "t" } 0
t "" 3 "" { -1 1 }
t "" 4 "" { 1 -1 }
"""
    game = parse_efg(text)
    c = game.counts()
    assert (c.total, c.decision, c.terminal, c.chance) == (7, 2, 4, 1)
    assert c.infosets_per_player == (1, 0)
    root = game.nodes[game.root]
    assert root.probs == (Fraction(1, 2), Fraction(1, 2))


def test_rational_and_decimal_payoffs():
    text = """EFG 2 R "mixed" { "a" "b" }
p "" 1 1 "i" { "l" "r" } 0
t "" 1 "" { 1/3 -1/3 }
t "" 2 "" { -0.5 0.5 }
"""
    game = parse_efg(text)
    pays = _terminal_payoffs(game)
    assert pays[0] == (Fraction(1, 3), Fraction(-1, 3))
    assert pays[1] == (Fraction(-1, 2), Fraction(1, 2))


def test_parse_error_reports_location():
    with pytest.raises(EfgParseError) as err:
        parse_efg('EFG 2 R "x" { "a" "b" }\nq "" 1 "" { }\n')
    assert err.value.args


@pytest.mark.parametrize("text", [
    'EFG 3 R "x" { "a" "b" }\nt "" 1 "" { 0 0 }\n',          # bad version
    'EFG 2 R "x" { "a" "b" }\nt "" 1 "" { 0 0 0 }\n',        # payoff arity
    'EFG 2 R "x" { "a" "b" }\np "" 5 1 "i" { "l" } 0\nt "" 1 "" { 0 0 }\n',
    'EFG 2 R "x" { "a" "b" }\nc "" 1 "" { "h" 1/2 "t" 1/3 } 0\n'
    't "" 1 "" { 0 0 }\nt "" 2 "" { 0 0 }\n',                # probs off
    'EFG 2 R "x" { "a" "b" }\nt "" 1 "" { 0 0\n',            # unterminated
])
def test_malformed_inputs_rejected(text):
    with pytest.raises(EfgParseError):
        parse_efg(text)


def test_trailing_garbage_rejected():
    good = 'EFG 2 R "x" { "a" "b" }\nt "" 1 "" { 0 0 }\n'
    parse_efg(good)
    with pytest.raises(EfgParseError):
        parse_efg(good + 't "" 2 "" { 1 -1 }\n')
