"""Text serialization of extensive-form games.

The format is a restricted dialect of the common EFG tree format: a header
line naming the players, then one line per node in depth-first preorder with
children following their parent.

    EFG 2 R "title" { "P1" "P2" "P3" }
    c "label" 1 "" { "outcome" 1/24 ... } 0
    p "label" 1 1 "infoset-name" { "check" "bet" } 0
    t "label" 1 "" { -1 -2 3 }

Numbers may be integers, fractions like 1/24, or decimals; they parse into
exact rationals.  The parser accepts every file the serializer emits,
bit-exactly, and tolerates commas inside payoff lists for compatibility with
files from other tools.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .games import (ChanceNode, DecisionNode, ExtensiveFormGame, GameError,
                    Node, TerminalNode)


class EfgParseError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.line = line
        self.col = col


@dataclass
class _Token:
    kind: str  # 'str', 'num', 'lbrace', 'rbrace', 'word'
    value: object
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r,":
            i += 1
            col += 1
            continue
        start_col = col
        if ch == "{":
            tokens.append(_Token("lbrace", "{", line, col))
            i += 1
            col += 1
        elif ch == "}":
            tokens.append(_Token("rbrace", "}", line, col))
            i += 1
            col += 1
        elif ch == '"':
            j = i + 1
            buf = []
            while j < n and text[j] != '"':
                if text[j] == "\n":
                    raise EfgParseError("unterminated string", line, start_col)
                buf.append(text[j])
                j += 1
            if j >= n:
                raise EfgParseError("unterminated string", line, start_col)
            tokens.append(_Token("str", "".join(buf), line, start_col))
            col += j + 1 - i
            i = j + 1
        else:
            j = i
            while j < n and text[j] not in ' \t\r\n{},"':
                j += 1
            word = text[i:j]
            col += j - i
            i = j
            num = _parse_number(word)
            if num is not None:
                tokens.append(_Token("num", num, line, start_col))
            else:
                tokens.append(_Token("word", word, line, start_col))
    return tokens


def _parse_number(word: str) -> Optional[Fraction]:
    try:
        if "/" in word:
            num, den = word.split("/", 1)
            return Fraction(int(num), int(den))
        if any(c in word for c in ".eE") and not word.lstrip("+-").isdigit():
            return Fraction(word)  # exact decimal
        return Fraction(int(word))
    except (ValueError, ZeroDivisionError):
        return None


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def _here(self) -> tuple[int, int]:
        if self.pos < len(self.tokens):
            t = self.tokens[self.pos]
            return t.line, t.col
        if self.tokens:
            t = self.tokens[-1]
            return t.line, t.col
        return 1, 1

    def fail(self, msg: str):
        line, col = self._here()
        raise EfgParseError(msg, line, col)

    def peek(self) -> Optional[_Token]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, kind: str) -> _Token:
        tok = self.peek()
        if tok is None:
            self.fail(f"unexpected end of input, wanted {kind}")
        if tok.kind != kind:
            self.fail(f"expected {kind}, found {tok.kind} {tok.value!r}")
        self.pos += 1
        return tok

    def take_word(self, expected: str) -> None:
        tok = self.take("word")
        if tok.value != expected:
            self.fail(f"expected {expected!r}, found {tok.value!r}")


def parse_efg(text: str) -> ExtensiveFormGame:
    """Parse the text format into a validated game."""
    parser = _Parser(_tokenize(text))
    parser.take_word("EFG")
    version = parser.take("num")
    if version.value != 2:
        raise EfgParseError(f"unsupported format version {version.value}", version.line, version.col)
    parser.take_word("R")
    title = parser.take("str").value
    parser.take("lbrace")
    player_names: list[str] = []
    while parser.peek() is not None and parser.peek().kind == "str":
        player_names.append(parser.take("str").value)
    parser.take("rbrace")
    if not player_names:
        parser.fail("no players declared")

    num_players = len(player_names)
    nodes: list[Node] = []
    # infoset labels: (player, file number) -> internal id
    iset_names: dict[tuple[int, int], str] = {}

    def parse_node() -> int:
        tok = parser.peek()
        if tok is None or tok.kind != "word":
            parser.fail("expected a node record (c, p or t)")
        idx = len(nodes)
        nodes.append(None)  # type: ignore[arg-type]
        if tok.value == "c":
            parser.take("word")
            label = parser.take("str").value
            parser.take("num")  # chance infoset number, unused
            parser.take("str")  # chance infoset name, unused
            parser.take("lbrace")
            probs: list[Fraction] = []
            outcome_labels: list[str] = []
            while parser.peek() is not None and parser.peek().kind == "str":
                outcome_labels.append(parser.take("str").value)
                probs.append(parser.take("num").value)
            parser.take("rbrace")
            parser.take("num")  # outcome reference, unused
            if not probs:
                parser.fail("chance node with no outcomes")
            kids = tuple(parse_node() for _ in probs)
            nodes[idx] = ChanceNode(tuple(probs), kids, tuple(outcome_labels), label)
        elif tok.value == "p":
            parser.take("word")
            label = parser.take("str").value
            player_tok = parser.take("num")
            player = int(player_tok.value) - 1
            if not (0 <= player < num_players):
                raise EfgParseError(f"player number {player + 1} out of range",
                                    player_tok.line, player_tok.col)
            iset_num = int(parser.take("num").value)
            iset_name = parser.take("str").value
            key = (player, iset_num)
            if iset_name:
                if key in iset_names and iset_names[key] != iset_name:
                    parser.fail(f"information set {iset_num} of player {player + 1} "
                                f"renamed {iset_names[key]!r} -> {iset_name!r}")
                iset_names.setdefault(key, iset_name)
            iset_id = iset_names.get(key, f"{player + 1}:{iset_num}")
            iset_names.setdefault(key, iset_id)
            parser.take("lbrace")
            actions: list[str] = []
            while parser.peek() is not None and parser.peek().kind == "str":
                actions.append(parser.take("str").value)
            parser.take("rbrace")
            parser.take("num")  # outcome reference, unused
            if not actions:
                parser.fail("decision node with no actions")
            kids = tuple(parse_node() for _ in actions)
            nodes[idx] = DecisionNode(player, iset_id, tuple(actions), kids, label)
        elif tok.value == "t":
            parser.take("word")
            label = parser.take("str").value
            parser.take("num")  # outcome number, unused
            parser.take("str")  # outcome name, unused
            parser.take("lbrace")
            payoffs: list[Fraction] = []
            while parser.peek() is not None and parser.peek().kind == "num":
                payoffs.append(parser.take("num").value)
            parser.take("rbrace")
            if len(payoffs) != num_players:
                parser.fail(f"terminal with {len(payoffs)} payoffs, expected {num_players}")
            nodes[idx] = TerminalNode(tuple(payoffs), label)
        else:
            parser.fail(f"unknown node type {tok.value!r}")
        return idx

    parse_node()
    if parser.peek() is not None:
        parser.fail("trailing tokens after the game tree")
    try:
        return ExtensiveFormGame(num_players, nodes, root=0, title=title,
                                 player_names=player_names)
    except GameError as exc:
        raise EfgParseError(str(exc), 1, 1) from exc


def _fmt_number(x: Fraction) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return repr(x)


def serialize_efg(game: ExtensiveFormGame) -> str:
    """Write the game in the text format; parse_efg round-trips the output."""
    out = [f'EFG 2 R "{game.title}" {{ '
           + " ".join(f'"{name}"' for name in game.player_names) + " }"]
    iset_numbers: dict[tuple[int, str], int] = {}
    next_num = [1] * game.num_players
    chance_count = [0]

    def visit(idx: int) -> None:
        node = game.nodes[idx]
        if isinstance(node, TerminalNode):
            pay = " ".join(_fmt_number(v) for v in node.payoffs)
            out.append(f't "{node.label}" 0 "" {{ {pay} }}')
            return
        if isinstance(node, ChanceNode):
            chance_count[0] += 1
            labels = node.outcome_labels or tuple("" for _ in node.children)
            pairs = " ".join(f'"{lab}" {_fmt_number(p)}'
                             for lab, p in zip(labels, node.probs))
            out.append(f'c "{node.label}" {chance_count[0]} "" {{ {pairs} }} 0')
        else:
            key = (node.player, node.infoset)
            if key not in iset_numbers:
                iset_numbers[key] = next_num[node.player]
                next_num[node.player] += 1
            acts = " ".join(f'"{a}"' for a in node.actions)
            out.append(f'p "{node.label}" {node.player + 1} {iset_numbers[key]} '
                       f'"{node.infoset}" {{ {acts} }} 0')
        for child in node.children:
            visit(child)

    visit(game.root)
    return "\n".join(out) + "\n"
