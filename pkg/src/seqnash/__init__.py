"""Nash equilibria of extensive-form and strategic-form games.

The pipeline: build a game tree (or payoff tensors), compile it to sequence
form, assemble the complementarity feasibility system, and search that
system by spatial branch-and-bound with an exact best-response verifier as
the only acceptance authority.  Two-player zero-sum games get a direct
linear programming route as well.
"""

from .games import (ChanceNode, DecisionNode, ExtensiveFormGame, GameError,
                    PerfectRecallViolation, PinEntry, PinList,
                    StrategicFormGame, TerminalNode, prune_pins,
                    validate_perfect_recall)
from .generators import (generate_kuhn2, generate_kuhn3, generate_random_sfg,
                         kuhn3_pins, matching_pennies, rock_paper_scissors)
from .efg_text import parse_efg, serialize_efg
from .seqform import (SequenceFormGame, StrategyProfile,
                      behavioral_to_realization, build_sequence_form,
                      embed_strategic_form, multilinear_payoffs,
                      realization_to_behavioral)
from .ncp import (FeasibilitySystem, ProductPlan, SystemCounts, assemble_ncp,
                  best_response_duals, pair_product_scheme, residuals)
from .lp import INF, LinearProgram, LpError, LpSolution, lp_from_rows, solve_lp
from .zerosum import ZeroSumResult, solve_zero_sum
from .verify import EpsilonReport, best_response_value, epsilon_report, expected_payoffs
from .bnb import (BnbNode, SolveResult, SolverOptions, SolveStats,
                  mccormick_rows, relax_node, solve, solve_system)
from .jsonio import load_game, profile_from_json, profile_to_json, save_game

__version__ = "0.1.0"

__all__ = [
    "ChanceNode", "DecisionNode", "TerminalNode", "ExtensiveFormGame",
    "StrategicFormGame", "GameError", "PerfectRecallViolation", "PinEntry",
    "PinList", "prune_pins", "validate_perfect_recall",
    "generate_kuhn2", "generate_kuhn3", "generate_random_sfg", "kuhn3_pins",
    "matching_pennies", "rock_paper_scissors",
    "parse_efg", "serialize_efg",
    "SequenceFormGame", "StrategyProfile", "build_sequence_form",
    "embed_strategic_form", "realization_to_behavioral",
    "behavioral_to_realization", "multilinear_payoffs",
    "FeasibilitySystem", "SystemCounts", "ProductPlan", "assemble_ncp",
    "pair_product_scheme", "residuals", "best_response_duals",
    "LinearProgram", "LpSolution", "LpError", "INF", "lp_from_rows", "solve_lp",
    "ZeroSumResult", "solve_zero_sum",
    "EpsilonReport", "epsilon_report", "expected_payoffs", "best_response_value",
    "SolverOptions", "SolveResult", "SolveStats", "BnbNode", "solve",
    "solve_system", "relax_node", "mccormick_rows",
    "load_game", "save_game", "profile_to_json", "profile_from_json",
    "__version__",
]
