"""Command-line front end: generate, inspect, solve, verify, benchmark.

Every subcommand is deterministic for fixed flags and seeds (with a single
worker), and failures exit nonzero with a diagnostic on stderr.  A solve
that misses its epsilon target also exits nonzero, after saving the best
candidate if an output path was given.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from typing import Optional

from . import bnb, jsonio
from .efg_text import EfgParseError
from .games import ExtensiveFormGame, GameError, PinList, prune_pins
from .generators import (generate_kuhn2, generate_kuhn3, generate_random_sfg)
from .lp import LpError
from .ncp import assemble_ncp
from .seqform import build_sequence_form, embed_strategic_form
from .verify import epsilon_report
from .zerosum import solve_zero_sum

__all__ = ["main"]


def _fail(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return 2


def _apply_pins(game, pins: Optional[PinList], mode: str):
    """Resolve the pin handling mode into (game, model pins)."""
    if not isinstance(game, ExtensiveFormGame) or pins is None or mode == "none":
        return game, None
    if mode == "prune":
        return prune_pins(game, pins), None
    return game, pins


def _cmd_gen(args) -> int:
    if args.kind == "kuhn3":
        game, pins = generate_kuhn3()
        jsonio.save_game(game, args.out, pins)
    elif args.kind == "kuhn3-reduced":
        game, pins = generate_kuhn3()
        jsonio.save_game(prune_pins(game, pins), args.out)
    elif args.kind == "kuhn2":
        jsonio.save_game(generate_kuhn2(), args.out)
    else:
        game = generate_random_sfg(args.players, args.strategies, args.seed)
        jsonio.save_game(game, args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_inspect(args) -> int:
    game, pins = jsonio.load_game(args.game)
    if isinstance(game, ExtensiveFormGame):
        c = game.counts()
        print(f"players: {game.num_players}")
        print(f"nodes: {c.total} total, {c.decision} decision, "
              f"{c.terminal} terminal, {c.chance} chance")
        print(f"infosets: {sum(c.infosets_per_player)} "
              f"({' '.join(str(k) for k in c.infosets_per_player)} per player)")
    else:
        print(f"players: {game.num_players}")
        print(f"strategy counts: {' '.join(str(m) for m in game.strategy_counts)}")
    game, model_pins = _apply_pins(game, pins, args.pins)
    if isinstance(game, ExtensiveFormGame):
        sf = build_sequence_form(game, pins=model_pins)
    else:
        sf = embed_strategic_form(game)
    print(f"sequences: {' '.join(str(d) for d in sf.dims)}")
    if args.pins != "none" and pins is not None:
        print(f"pins: {len(pins)} listed, "
              f"{len(model_pins.strict_entries) if model_pins else 0} model rows")
    if args.ncp:
        counts = assemble_ncp(sf).counts()
        print(f"ncp: {counts.variables} variables, {counts.linear_rows} linear "
              f"rows, {counts.quadratic_rows} quadratic rows")
        print(f"     {counts.aux_vars} auxiliary product variables, "
              f"{counts.complementarity_rows} complementarity pairs")
    return 0


def _cmd_solve(args) -> int:
    game, pins = jsonio.load_game(args.game)
    game, model_pins = _apply_pins(game, pins, args.pins)
    if args.method == "zslp":
        res = solve_zero_sum(game, pins=model_pins)
        profile = res.profile
        eps = res.epsilon
        print(f"value: {res.value:.12g} (LP objective gap {res.objective_gap:.3g})")
        stats = {"lp_iterations": list(res.lp_iterations)}
    else:
        opts = bnb.SolverOptions(epsilon=args.epsilon, time_limit=args.time_limit,
                                 node_limit=args.node_limit, seed=args.seed,
                                 workers=args.workers, verbose=args.verbose)
        result = bnb.solve(game, pins=model_pins, options=opts)
        profile = result.profile
        eps = result.epsilon
        print(f"status: {result.status}" +
              (f" ({result.detail})" if result.detail else ""))
        if result.payoffs is not None:
            print("payoffs: " + " ".join(f"{v:.12g}" for v in result.payoffs))
        stats = result.stats.to_dict()
    if eps is not None:
        print(f"epsilon: {eps:.6g}")
    print("stats: " + json.dumps(stats))
    if args.out and profile is not None:
        with open(args.out, "w") as fh:
            fh.write(jsonio.profile_to_json(profile))
        print(f"wrote {args.out}")
    if eps is None or eps > args.epsilon:
        print(f"epsilon target {args.epsilon:g} not met", file=sys.stderr)
        return 1
    return 0


def _cmd_verify(args) -> int:
    game, pins = jsonio.load_game(args.game)
    game, _ = _apply_pins(game, pins, args.pins)
    with open(args.profile) as fh:
        profile = jsonio.profile_from_json(fh.read())
    report = epsilon_report(game, profile)
    for p in range(game.num_players):
        print(f"player {p + 1}: expected {report.expected[p]:.12g}  "
              f"best response {report.best_response[p]:.12g}  "
              f"regret {report.best_response[p] - report.expected[p]:.6g}")
    print(f"epsilon: {report.epsilon:.6g}")
    return 0


def _cmd_bench(args) -> int:
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    writer = csv.writer(out)
    writer.writerow(["seed", "n", "m", "status", "nodes", "lp_solves",
                     "wall_ms", "epsilon"])
    code = 0
    try:
        for k in range(args.count):
            seed = args.seed + k
            game = generate_random_sfg(args.players, args.strategies, seed)
            opts = bnb.SolverOptions(epsilon=args.epsilon,
                                     time_limit=args.time_limit, seed=seed)
            t0 = time.perf_counter()
            result = bnb.solve(game, options=opts)
            ms = (time.perf_counter() - t0) * 1000.0
            eps = "" if result.epsilon is None else format(result.epsilon, ".6g")
            writer.writerow([seed, args.players, args.strategies, result.status,
                             result.stats.nodes, result.stats.lp_solves,
                             format(ms, ".3f"), eps])
            if not result.solved:
                code = 1
    finally:
        if args.out:
            out.close()
    return code


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="seqnash",
        description="Nash equilibria of extensive-form and strategic-form "
                    "games via the sequence-form complementarity system.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a bundled or random game file")
    g.add_argument("kind", choices=["kuhn3", "kuhn3-reduced", "kuhn2", "sfg"])
    g.add_argument("--players", type=int, default=3)
    g.add_argument("--strategies", type=int, default=3)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=_cmd_gen)

    i = sub.add_parser("inspect", help="print game and model statistics")
    i.add_argument("game")
    i.add_argument("--ncp", action="store_true",
                   help="also assemble the feasibility system and report sizes")
    i.add_argument("--pins", choices=["constraints", "prune", "none"],
                   default="constraints")
    i.set_defaults(func=_cmd_inspect)

    s = sub.add_parser("solve", help="search for an equilibrium")
    s.add_argument("game")
    s.add_argument("--pins", choices=["constraints", "prune", "none"],
                   default="constraints")
    s.add_argument("--epsilon", type=float, default=1e-6)
    s.add_argument("--time-limit", type=float, default=None)
    s.add_argument("--node-limit", type=int, default=None)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default=None, help="write the profile JSON here")
    s.add_argument("--method", choices=["bnb", "zslp"], default="bnb")
    s.add_argument("--verbose", action="store_true")
    s.set_defaults(func=_cmd_solve)

    v = sub.add_parser("verify", help="evaluate a saved profile exactly")
    v.add_argument("game")
    v.add_argument("profile")
    v.add_argument("--pins", choices=["constraints", "prune", "none"],
                   default="constraints")
    v.set_defaults(func=_cmd_verify)

    b = sub.add_parser("bench", help="timing sweep over random games, CSV out")
    b.add_argument("family", choices=["sfg"])
    b.add_argument("--players", type=int, default=3)
    b.add_argument("--strategies", type=int, default=3)
    b.add_argument("--count", type=int, default=10)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--epsilon", type=float, default=1e-6)
    b.add_argument("--time-limit", type=float, default=120.0)
    b.add_argument("--out", default=None)
    b.set_defaults(func=_cmd_bench)
    return ap


def main(argv: Optional[list[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except (GameError, LpError, EfgParseError,
            json.JSONDecodeError, OSError) as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
