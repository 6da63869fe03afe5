"""Exact equilibria of two-player zero-sum games by linear programming.

Realization plans make the expected payoff bilinear, x^T A y, with each
player's plan constrained by a sparse flow system.  The max player's best
guaranteed value is then a single LP over (x, q), where q prices the
opponent's flow rows; the min player's side is the symmetric LP over (y, p).
Both are solved and their objectives cross-checked; they bracket the same
game value, so any gap beyond roundoff indicates a solver problem.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import scipy.sparse as sp

from .games import ExtensiveFormGame, GameError, PinList, StrategicFormGame, TerminalNode
from .lp import INF, LinearProgram, LpError, solve_lp
from .seqform import (SequenceFormGame, StrategyProfile, build_sequence_form,
                      embed_strategic_form, realization_to_behavioral)
from .verify import epsilon_report

__all__ = ["ZeroSumResult", "solve_zero_sum"]

_GAP_TOL = 1e-7


@dataclass
class ZeroSumResult:
    value: float                 # game value to the first player
    objective_gap: float         # |primal LP obj - dual LP obj|
    profile: StrategyProfile
    epsilon: float
    lp_iterations: tuple[int, int]
    realization: tuple[np.ndarray, np.ndarray]
    duals: tuple[np.ndarray, np.ndarray]  # (p, q) pricing the flow rows

    @property
    def x(self) -> np.ndarray:
        return self.realization[0]

    @property
    def y(self) -> np.ndarray:
        return self.realization[1]

    @property
    def p(self) -> np.ndarray:
        return self.duals[0]

    @property
    def q(self) -> np.ndarray:
        return self.duals[1]


def _check_zero_sum(game: Union[ExtensiveFormGame, StrategicFormGame]) -> None:
    if game.num_players != 2:
        raise GameError("zero-sum solver needs exactly two players")
    if isinstance(game, ExtensiveFormGame):
        for node in game.nodes:
            if isinstance(node, TerminalNode) and sum(node.payoffs) != 0:
                raise GameError(f"terminal {node.label or ''!r} payoffs "
                                f"{node.payoffs} do not sum to zero")
    else:
        drift = float(np.abs(game.payoffs[0] + game.payoffs[1]).max())
        if drift > 1e-9:
            raise GameError(f"payoff tensors sum to {drift:.3g}, not zero")


def _payoff_matrix(sf: SequenceFormGame) -> sp.csr_matrix:
    d1, d2 = sf.dims
    A = sp.lil_matrix((d1, d2))
    for e in sf.payoff_entries:
        A[e.seqs[0], e.seqs[1]] += e.values[0]
    return A.tocsr()


def solve_zero_sum(game: Union[ExtensiveFormGame, StrategicFormGame],
                   pins: Optional[PinList] = None,
                   backend: str = "simplex") -> ZeroSumResult:
    _check_zero_sum(game)
    if isinstance(game, ExtensiveFormGame):
        sf = build_sequence_form(game, pins=pins)
    else:
        if pins is not None and pins.entries:
            raise GameError("pins apply to tree games only")
        sf = embed_strategic_form(game)
    d1, d2 = sf.dims
    E, e = sf.flow_matrix(0)
    F, f = sf.flow_matrix(1)
    c1, c2 = E.shape[0], F.shape[0]
    A = _payoff_matrix(sf)

    x_hi = np.ones(d1)
    for s in sf.pin_seqs[0]:
        x_hi[s] = 0.0
    y_hi = np.ones(d2)
    for s in sf.pin_seqs[1]:
        y_hi[s] = 0.0

    # max player's program: max f.q  s.t.  F^T q - A^T x <= 0,  E x = e
    lp1 = LinearProgram(
        c=np.concatenate([np.zeros(d1), f]),
        A=sp.vstack([
            sp.hstack([-A.T, sp.csr_matrix(F).T]),
            sp.hstack([sp.csr_matrix(E), sp.csr_matrix((c1, c2))]),
        ]).tocsr(),
        senses=["<"] * d2 + ["="] * c1,
        rhs=np.concatenate([np.zeros(d2), e]),
        lo=np.concatenate([np.zeros(d1), np.full(c2, -INF)]),
        hi=np.concatenate([x_hi, np.full(c2, INF)]),
        maximize=True,
    )
    # min player's program: min e.p  s.t.  E^T p - A y >= 0,  F y = f
    lp2 = LinearProgram(
        c=np.concatenate([np.zeros(d2), e]),
        A=sp.vstack([
            sp.hstack([-A, sp.csr_matrix(E).T]),
            sp.hstack([sp.csr_matrix(F), sp.csr_matrix((c2, c1))]),
        ]).tocsr(),
        senses=[">"] * d1 + ["="] * c2,
        rhs=np.concatenate([np.zeros(d1), f]),
        lo=np.concatenate([np.zeros(d2), np.full(c1, -INF)]),
        hi=np.concatenate([y_hi, np.full(c1, INF)]),
        maximize=False,
    )

    s1 = solve_lp(lp1, backend=backend)
    s2 = solve_lp(lp2, backend=backend)
    for tag, s in (("max side", s1), ("min side", s2)):
        if not s.ok:
            raise LpError(f"{tag} LP ended {s.status}: {s.message}")
    gap = abs(s1.objective - s2.objective)
    if gap > _GAP_TOL:
        raise LpError(f"zero-sum LP objectives disagree by {gap:.3g}")

    x = np.clip(s1.x[:d1], 0.0, None)
    y = np.clip(s2.x[:d2], 0.0, None)
    profile = realization_to_behavioral(sf, [x, y])
    report = epsilon_report(game, profile)
    profile = StrategyProfile(players=profile.players,
                              verified_epsilon=report.epsilon)
    return ZeroSumResult(
        value=float(s1.objective),
        objective_gap=float(gap),
        profile=profile,
        epsilon=report.epsilon,
        lp_iterations=(s1.iterations, s2.iterations),
        realization=(x, y),
        duals=(s2.x[d2:].copy(), s1.x[d1:].copy()),
    )
