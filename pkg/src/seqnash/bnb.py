"""Spatial branch-and-bound search for equilibria of the feasibility system.

Every node holds a box over the bounded variables.  Its relaxation is an LP:
flow and stationarity rows stay as written, each pairwise product is replaced
by a fresh variable tied to its factors by the four McCormick envelope
inequalities over the current box, and complementarity products are fixed at
zero so their envelopes become cutting planes.  A feasible relaxation point
is then pushed through a repair-and-polish pipeline: rounded onto the flow
polytope, restricted to a guessed support, refined by a damped Newton solve
of the square support system with active-set pivoting (sequences leave the
support when their plan value goes negative, enter when their slack does),
and finally handed to the independent verifier.  The first point whose
verified incentive error meets the target ends the search; nothing is ever
accepted on the relaxation's say-so.

Branching prefers the complementarity pair with the largest product in the
relaxation (one child forces the plan variable to zero, the other the slack);
with complementarity clean, the widest-gap product term is split spatially.
Nodes are explored best-first by their parent's total violation, depth and
an insertion counter breaking ties, so single-worker runs are reproducible.
"""

from __future__ import annotations

import heapq
import itertools
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .games import ExtensiveFormGame, GameError, PinList, StrategicFormGame
from .lp import INF, LinearProgram
from .ncp import (FeasibilitySystem, assemble_ncp, best_response_duals,
                  certified_assignment, gradients)
from .seqform import (SequenceFormGame, StrategyProfile,
                      behavioral_to_realization, build_sequence_form,
                      embed_strategic_form, realization_to_behavioral)
from .verify import epsilon_report, expected_payoffs

__all__ = ["SolverOptions", "SolveResult", "SolveStats", "BnbNode",
           "solve", "solve_system", "relax_node", "mccormick_rows",
           "EQUILIBRIUM_FOUND", "LIMIT_REACHED", "INFEASIBLE"]

Game = Union[ExtensiveFormGame, StrategicFormGame]

EQUILIBRIUM_FOUND = "equilibrium_found"
LIMIT_REACHED = "limit_reached"
INFEASIBLE = "infeasible"


@dataclass
class SolverOptions:
    epsilon: float = 1e-6
    residual_tol: float = 1e-9
    time_limit: Optional[float] = None
    node_limit: Optional[int] = None
    seed: int = 0
    workers: int = 1
    restarts: int = 3
    verbose: bool = False
    log: Callable[[str], None] = print
    comp_branch_tol: float = 1e-8
    product_branch_tol: float = 1e-10
    split_guard: float = 0.1
    support_attempts: int = 2
    newton_iters: int = 40
    active_set_pivots: int = 30
    interior_iters: int = 250


@dataclass
class SolveStats:
    nodes: int = 0
    lp_solves: int = 0
    newton_solves: int = 0
    verifier_calls: int = 0
    wall_time: float = 0.0

    def to_dict(self) -> dict:
        return {"nodes": self.nodes, "lp_solves": self.lp_solves,
                "newton_solves": self.newton_solves,
                "verifier_calls": self.verifier_calls,
                "wall_time_s": self.wall_time}


@dataclass
class BnbNode:
    """One open box of the search: refined variable bounds plus bookkeeping.

    Complementarity decisions are also encoded in the box itself (the decided
    side's upper bound is 0), so the bounds alone describe the node; the
    decision list records how it got there, each entry a (pair index, side)
    with side "x" or "r"."""
    lo: np.ndarray
    hi: np.ndarray
    decisions: tuple[tuple[int, str], ...] = ()
    depth: int = 0
    score: float = 0.0  # parent relaxation's total violation; lower first
    serial: int = 0

    def sort_key(self) -> tuple[float, int, int]:
        return (self.score, -self.depth, self.serial)


@dataclass
class SolveResult:
    status: str
    profile: Optional[StrategyProfile]
    epsilon: Optional[float]
    payoffs: Optional[tuple[float, ...]]
    assignment: Optional[np.ndarray]
    residuals: Optional[dict[str, float]]
    stats: SolveStats
    system: FeasibilitySystem
    sequence_form: SequenceFormGame
    detail: str = ""

    @property
    def solved(self) -> bool:
        return self.status == EQUILIBRIUM_FOUND


def mccormick_rows(la: float, ua: float, lb: float, ub: float
                   ) -> list[tuple[float, float, float, float]]:
    """Envelope of w = a*b over [la,ua]x[lb,ub] as rows
    (coef_a, coef_b, coef_w, rhs) meaning coef_a*a + coef_b*b + coef_w*w <= rhs."""
    return [
        (lb, la, -1.0, la * lb),
        (ub, ua, -1.0, ua * ub),
        (-ub, -la, 1.0, -la * ub),
        (-lb, -ua, 1.0, -ua * lb),
    ]


class _Relaxation:
    """Static parts of the node LP, with per-node boxes filled in on demand."""

    def __init__(self, system: FeasibilitySystem):
        self.system = system
        nv = system.num_vars

        pair_ix: dict[tuple[int, int], int] = {}
        for row in system.stationarity_rows:
            for key in row.quad:
                pair_ix.setdefault(key, len(pair_ix))
        self.num_w = len(pair_ix)
        self.n_lp = nv + self.num_w

        eq_rows: list[dict[int, float]] = []
        eq_rhs: list[float] = []
        for row, rhs in zip(system.lin_rows, system.lin_rhs):
            eq_rows.append(dict(row))
            eq_rhs.append(float(rhs))
        for row in system.stationarity_rows:
            lin = dict(row.lin)
            for key, c in row.quad.items():
                col = nv + pair_ix[key]
                lin[col] = lin.get(col, 0.0) + c
            eq_rows.append(lin)
            eq_rhs.append(-row.const)
        data, ri, ci = [], [], []
        for i, row in enumerate(eq_rows):
            for j, a in row.items():
                ri.append(i)
                ci.append(j)
                data.append(a)
        self.A_eq = sp.csr_matrix((data, (ri, ci)), shape=(len(eq_rows), self.n_lp))
        self.b_eq = np.array(eq_rhs)

        # product items: (a, b, target column); complementarity pairs are
        # handled separately since their product is pinned at zero
        t_cols = []
        a_cols = []
        b_cols = []
        for (i, j), k in sorted(pair_ix.items(), key=lambda kv: kv[1]):
            a_cols.append(i)
            b_cols.append(j)
            t_cols.append(nv + k)
        self.aux_slice = slice(len(t_cols), len(t_cols) + len(system.product_defs))
        for row in system.product_defs:
            (aux_j,) = row.lin.keys()
            ((i, j),) = row.quad.keys()
            a_cols.append(i)
            b_cols.append(j)
            t_cols.append(aux_j)
        self.t_cols = np.array(t_cols, dtype=int)
        self.a_cols = np.array(a_cols, dtype=int)
        self.b_cols = np.array(b_cols, dtype=int)
        self.w_pairs = (np.array(a_cols[:self.num_w], dtype=int),
                        np.array(b_cols[:self.num_w], dtype=int))
        self.comp_a = np.array([i for i, _ in system.pairs], dtype=int)
        self.comp_b = np.array([j for _, j in system.pairs], dtype=int)

    def tighten(self, lo: np.ndarray, hi: np.ndarray) -> None:
        """Refresh interval bounds of product variables from their factors.

        Definitions are ordered children first, so one sweep suffices."""
        for row in self.system.product_defs:
            (aux_j,) = row.lin.keys()
            ((i, j),) = row.quad.keys()
            corners = (lo[i] * lo[j], lo[i] * hi[j], hi[i] * lo[j], hi[i] * hi[j])
            lo[aux_j] = max(lo[aux_j], min(corners))
            hi[aux_j] = min(hi[aux_j], max(corners))

    def _bounds(self, lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        nv = self.system.num_vars
        lo_full = np.empty(self.n_lp)
        hi_full = np.empty(self.n_lp)
        lo_full[:nv] = lo
        hi_full[:nv] = hi
        if self.num_w:
            wa, wb = self.w_pairs
            corners = np.stack([lo[wa] * lo[wb], lo[wa] * hi[wb],
                                hi[wa] * lo[wb], hi[wa] * hi[wb]])
            lo_full[nv:] = corners.min(axis=0)
            hi_full[nv:] = corners.max(axis=0)
        return lo_full, hi_full

    def _envelopes(self, lo_v: np.ndarray, hi_v: np.ndarray, with_t: bool,
                   a_cols: np.ndarray, b_cols: np.ndarray,
                   t_cols: Optional[np.ndarray]) -> tuple[sp.csr_matrix, np.ndarray]:
        la, ua = lo_v[a_cols], hi_v[a_cols]
        lb, ub = lo_v[b_cols], hi_v[b_cols]
        fams = [
            (lb, la, -1.0, la * lb),
            (ub, ua, -1.0, ua * ub),
            (-ub, -la, 1.0, -la * ub),
            (-lb, -ua, 1.0, -ua * lb),
        ]
        blocks_data = []
        blocks_ri = []
        blocks_ci = []
        rhs_parts = []
        nrows = 0
        for ca, cb, ct, rhs in fams:
            keep = (np.abs(ca) > 1e-14) | (np.abs(cb) > 1e-14) | with_t
            idx = np.nonzero(keep)[0]
            if len(idx) == 0:
                continue
            rows = np.arange(nrows, nrows + len(idx))
            nrows += len(idx)
            blocks_data += [ca[idx], cb[idx]]
            blocks_ri += [rows, rows]
            blocks_ci += [a_cols[idx], b_cols[idx]]
            if with_t:
                blocks_data.append(np.full(len(idx), ct))
                blocks_ri.append(rows)
                blocks_ci.append(t_cols[idx])
            rhs_parts.append(rhs[idx])
        if nrows == 0:
            return sp.csr_matrix((0, self.n_lp)), np.zeros(0)
        A = sp.csr_matrix((np.concatenate(blocks_data),
                           (np.concatenate(blocks_ri), np.concatenate(blocks_ci))),
                          shape=(nrows, self.n_lp))
        return A, np.concatenate(rhs_parts)

    def _surrogate(self, hi: np.ndarray) -> np.ndarray:
        """Objective pulling undecided pairs toward complementarity.

        Purely a vertex-selection heuristic; never used to prune."""
        sysm = self.system
        c = np.zeros(self.n_lp)
        undecided = (hi[self.comp_a] > 0) & (hi[self.comp_b] > 0)
        start = 0
        for p in range(sysm.sf.num_players):
            stop = start + sysm.sf.dims[p]
            sel = undecided[start:stop]
            c[self.comp_a[start:stop][sel]] += 1.0
            c[self.comp_b[start:stop][sel]] += 1.0 / max(sysm.M[p], 1.0)
            start = stop
        return c

    def assemble(self, lo: np.ndarray, hi: np.ndarray) -> LinearProgram:
        """The node LP as an explicit program (reference form)."""
        lo_full, hi_full = self._bounds(lo, hi)
        A1, b1 = self._envelopes(lo_full, hi_full, True, self.a_cols,
                                 self.b_cols, self.t_cols)
        A2, b2 = self._envelopes(lo_full, hi_full, False, self.comp_a,
                                 self.comp_b, None)
        A = sp.vstack([self.A_eq, A1, A2]).tocsr()
        senses = ["="] * self.A_eq.shape[0] + ["<"] * (A1.shape[0] + A2.shape[0])
        rhs = np.concatenate([self.b_eq, b1, b2])
        return LinearProgram(self._surrogate(hi), A, senses, rhs,
                             lo_full, hi_full, maximize=False)

    def solve(self, lo: np.ndarray, hi: np.ndarray
              ) -> tuple[Optional[np.ndarray], Optional[np.ndarray]]:
        """Solve the node LP; returns (v_hat, w_hat) or (None, None)."""
        if np.any(lo > hi + 1e-12):
            return None, None
        lo_full, hi_full = self._bounds(lo, hi)
        A1, b1 = self._envelopes(lo_full, hi_full, True, self.a_cols,
                                 self.b_cols, self.t_cols)
        A2, b2 = self._envelopes(lo_full, hi_full, False, self.comp_a,
                                 self.comp_b, None)
        A_ub = sp.vstack([A1, A2]).tocsr() if A2.shape[0] else A1
        b_ub = np.concatenate([b1, b2])
        res = linprog(self._surrogate(hi), A_ub=A_ub, b_ub=b_ub,
                      A_eq=self.A_eq, b_eq=self.b_eq,
                      bounds=np.column_stack([lo_full, hi_full]),
                      method="highs",
                      options={"presolve": True,
                               "primal_feasibility_tolerance": 1e-9,
                               "dual_feasibility_tolerance": 1e-9})
        if res.status != 0:
            return None, None
        x = np.asarray(res.x)
        nv = self.system.num_vars
        return x[:nv], x[nv:]


def relax_node(system: FeasibilitySystem, node: BnbNode) -> LinearProgram:
    """The LP relaxation of one search node, in explicit form."""
    relax = _Relaxation(system)
    lo = node.lo.copy()
    hi = node.hi.copy()
    relax.tighten(lo, hi)
    return relax.assemble(lo, hi)


def _uniform_plans(sf: SequenceFormGame) -> list[np.ndarray]:
    plans = []
    for p in range(sf.num_players):
        x = np.zeros(sf.dims[p])
        if sf.has_empty_sequence:
            x[0] = 1.0
            for rec in sf.infosets[p]:  # creation order puts parents first
                mass = x[rec.parent_seq] if rec.parent_seq is not None else 1.0
                live = [s for s in rec.action_seqs if s not in sf.pin_seqs[p]]
                for s in live:
                    x[s] = mass / len(live)
        else:
            live = [s for s in range(sf.dims[p]) if s not in sf.pin_seqs[p]]
            x[live] = 1.0 / len(live)
        plans.append(x)
    return plans


def _random_plans(sf: SequenceFormGame, rng: np.random.Generator) -> list[np.ndarray]:
    plans = []
    for p in range(sf.num_players):
        x = np.zeros(sf.dims[p])
        if sf.has_empty_sequence:
            x[0] = 1.0
            for rec in sf.infosets[p]:
                mass = x[rec.parent_seq] if rec.parent_seq is not None else 1.0
                live = [s for s in rec.action_seqs if s not in sf.pin_seqs[p]]
                probs = rng.dirichlet(np.ones(len(live)))
                for s, pr in zip(live, probs):
                    x[s] = mass * pr
        else:
            live = [s for s in range(sf.dims[p]) if s not in sf.pin_seqs[p]]
            x[live] = rng.dirichlet(np.ones(len(live)))
        plans.append(x)
    return plans


class _Polisher:
    """Repair, support-restricted Newton refinement, and verification."""

    def __init__(self, game: Game, sf: SequenceFormGame, system: FeasibilitySystem,
                 opts: SolverOptions, stats: SolveStats):
        self.game = game
        self.sf = sf
        self.system = system
        self.opts = opts
        self.stats = stats
        self.seen: dict[tuple, int] = {}
        self.best_eps = np.inf
        self.best: Optional[tuple[list[np.ndarray], StrategyProfile]] = None
        self.flows = [sf.flow_matrix(p) for p in range(sf.num_players)]
        self.parent_of: list[dict[int, Optional[int]]] = []
        self.rec_of: list[dict[int, object]] = []
        for p in range(sf.num_players):
            par: dict[int, Optional[int]] = {}
            rec_of: dict[int, object] = {}
            for rec in sf.infosets[p]:
                for s in rec.action_seqs:
                    par[s] = rec.parent_seq
                    rec_of[s] = rec
            self.parent_of.append(par)
            self.rec_of.append(rec_of)

    # ---------------------------------------------------------- candidates
    def try_plans(self, raw: list[np.ndarray],
                  slack_hint: Optional[list[np.ndarray]] = None) -> bool:
        sf = self.sf
        try:
            profile0 = realization_to_behavioral(sf, [np.clip(x, 0.0, None)
                                                      for x in raw],
                                                 residual_tol=np.inf)
            plans0 = behavioral_to_realization(sf, profile0)
        except GameError:
            return False
        if self._verify(plans0, profile0):
            return True
        if self.opts.interior_iters > 0:
            center, center_slack = self._interior(plans0)
            if center is not None and self._try_supports(center, center_slack):
                return True
        return self._try_supports(plans0, slack_hint)

    def _try_supports(self, plans0: list[np.ndarray],
                      slack_hint: Optional[list[np.ndarray]]) -> bool:
        sf = self.sf
        for supports in self._support_guesses(plans0, slack_hint):
            key = tuple(tuple(sorted(s)) for s in supports)
            tries = self.seen.get(key, 0)
            if tries >= self.opts.support_attempts:
                continue
            self.seen[key] = tries + 1
            plans = self._refine(supports, plans0)
            if plans is None:
                continue
            try:
                profile = realization_to_behavioral(sf, plans, residual_tol=1e-5)
            except GameError:
                continue
            if self._verify(plans, profile):
                return True
        return False

    def _verify(self, plans: list[np.ndarray], profile: StrategyProfile) -> bool:
        self.stats.verifier_calls += 1
        try:
            report = epsilon_report(self.game, profile)
        except GameError:
            return False
        if report.epsilon < self.best_eps:
            self.best_eps = report.epsilon
            self.best = (plans, profile)
        return report.epsilon <= self.opts.epsilon

    # ------------------------------------------------ smoothed centering
    def _interior(self, plans_init: list[np.ndarray]
                  ) -> tuple[Optional[list[np.ndarray]],
                             Optional[list[np.ndarray]]]:
        """Newton path-following on the smoothed system x_s r_s = mu.

        Driving mu to zero finds the equilibrium support on its own, which
        point-local support guessing cannot; the endpoint is only a hint,
        refined and verified by the callers.  Pinned sequences keep x = 0
        in place of a pair row, their slack rides along unconstrained."""
        sf = self.sf
        n = sf.num_players
        dims = list(sf.dims)
        rowc = list(sf.row_counts)
        xoff = np.cumsum([0] + dims[:-1]).tolist()
        nx = sum(dims)
        loff = [nx + c for c in np.cumsum([0] + rowc[:-1])]
        roff = [nx + sum(rowc) + o for o in xoff]
        N = 2 * nx + sum(rowc)

        frow, srow, prow = [], [], []
        pos = 0
        for p in range(n):
            frow.append(pos)
            srow.append(pos + rowc[p])
            prow.append(pos + rowc[p] + dims[p])
            pos += rowc[p] + 2 * dims[p]

        free = [np.ones(dims[p], dtype=bool) for p in range(n)]
        for p in range(n):
            for s in sf.pin_seqs[p]:
                free[p][s] = False

        u = np.zeros(N)
        uniform = _uniform_plans(sf)
        g0 = None
        delta = 0.01 * (1.0 + max(self.system.M, default=1.0))
        for p in range(n):
            x = 0.9 * plans_init[p] + 0.1 * uniform[p]
            u[xoff[p]:xoff[p] + dims[p]] = x
        plans = [u[xoff[p]:xoff[p] + dims[p]] for p in range(n)]
        g0 = gradients(sf, plans)
        for p in range(n):
            lam, rbr, _ = best_response_duals(sf, plans, p, grad=g0[p])
            u[loff[p]:loff[p] + rowc[p]] = lam
            r = rbr.copy()
            r[free[p]] = np.maximum(r[free[p]], delta)
            u[roff[p]:roff[p] + dims[p]] = r

        seqs_a, vals_a = sf.entry_arrays()
        m_ent = seqs_a.shape[0]

        J0 = np.zeros((N, N))
        for p in range(n):
            E, _ = self.flows[p]
            J0[frow[p]:frow[p] + rowc[p], xoff[p]:xoff[p] + dims[p]] = E
            J0[srow[p]:srow[p] + dims[p], loff[p]:loff[p] + rowc[p]] = E.T
            for s in range(dims[p]):
                J0[srow[p] + s, roff[p] + s] = -1.0
                if not free[p][s]:
                    J0[prow[p] + s, xoff[p] + s] = 1.0

        def residual(uv: np.ndarray, mu: float) -> np.ndarray:
            pl = [uv[xoff[p]:xoff[p] + dims[p]] for p in range(n)]
            g = gradients(sf, pl)
            out = np.empty(N)
            for p in range(n):
                E, e = self.flows[p]
                lam = uv[loff[p]:loff[p] + rowc[p]]
                r = uv[roff[p]:roff[p] + dims[p]]
                out[frow[p]:frow[p] + rowc[p]] = E @ pl[p] - e
                out[srow[p]:srow[p] + dims[p]] = E.T @ lam - g[p] - r
                pr = out[prow[p]:prow[p] + dims[p]]
                pr[:] = np.where(free[p], pl[p] * r - mu, pl[p])
            return out

        def jacobian(uv: np.ndarray) -> np.ndarray:
            pl = [uv[xoff[p]:xoff[p] + dims[p]] for p in range(n)]
            J = J0.copy()
            for p in range(n):
                r = uv[roff[p]:roff[p] + dims[p]]
                idx = np.nonzero(free[p])[0]
                J[prow[p] + idx, xoff[p] + idx] = r[idx]
                J[prow[p] + idx, roff[p] + idx] = pl[p][idx]
            if m_ent:
                C = np.empty((n, m_ent))
                for q in range(n):
                    C[q] = pl[q][seqs_a[:, q]]
                for p in range(n):
                    rows = srow[p] + seqs_a[:, p]
                    for q in range(n):
                        if q == p:
                            continue
                        rest = [q2 for q2 in range(n) if q2 != p and q2 != q]
                        prod = C[rest].prod(axis=0) if rest else 1.0
                        np.add.at(J, (rows, xoff[q] + seqs_a[:, q]),
                                  -vals_a[:, p] * prod)
            return J

        mu = 0.0
        cnt = 0
        for p in range(n):
            seg = u[xoff[p]:xoff[p] + dims[p]][free[p]]
            rs = u[roff[p]:roff[p] + dims[p]][free[p]]
            mu += float(seg @ rs)
            cnt += int(free[p].sum())
        mu = max(mu / max(cnt, 1), 1e-4)

        budget = self.opts.interior_iters
        f = residual(u, mu)
        for _ in range(budget):
            self.stats.newton_solves += 1
            nrm = np.abs(f).max()
            if not np.isfinite(nrm):
                return None, None
            if nrm <= max(0.2 * mu, 1e-13):
                if mu <= 2e-13:
                    break
                mu = max(0.2 * mu, 1e-13)
                f = residual(u, mu)
                continue
            J = jacobian(u)
            try:
                step = np.linalg.solve(J, -f)
            except np.linalg.LinAlgError:
                step = np.linalg.lstsq(J, -f, rcond=None)[0]
            # fraction-to-boundary: keep every unpinned x and r positive
            alpha = 1.0
            for p in range(n):
                for off in (xoff[p], roff[p]):
                    seg = u[off:off + dims[p]][free[p]]
                    dseg = step[off:off + dims[p]][free[p]]
                    neg = dseg < 0
                    if neg.any():
                        alpha = min(alpha, 0.995 * float(
                            np.min(-seg[neg] / dseg[neg])))
            if alpha <= 1e-12:
                break
            t = alpha
            while True:
                f1 = residual(u + t * step, mu)
                n1 = np.abs(f1).max()
                if np.isfinite(n1) and (n1 < nrm * (1.0 - 0.1 * t) or n1 < 1e-13):
                    u = u + t * step
                    f = f1
                    break
                t *= 0.5
                if t < 1e-7:
                    t = 0.0
                    break
            if t == 0.0:
                break
        plans_out = [np.clip(u[xoff[p]:xoff[p] + dims[p]], 0.0, None)
                     for p in range(n)]
        slack_out = [np.clip(u[roff[p]:roff[p] + dims[p]], 0.0, None)
                     for p in range(n)]
        return plans_out, slack_out

    # ------------------------------------------------------------ supports
    def _complete(self, supports: list[set[int]],
                  rank: list[np.ndarray]) -> list[set[int]]:
        """Close a support guess: ancestors of members, and one live action
        at every infoset whose parent is in the support.  `rank` orders the
        preferred action (higher wins)."""
        sf = self.sf
        for p in range(sf.num_players):
            sup = supports[p]
            if sf.has_empty_sequence:
                sup.add(0)
            for s in list(sup):
                q = self.parent_of[p].get(s)
                while q is not None and q not in sup:
                    sup.add(q)
                    q = self.parent_of[p].get(q)
            for rec in sf.infosets[p]:  # parents first, so one pass closes
                if rec.parent_seq is not None and rec.parent_seq not in sup:
                    continue
                live = [s for s in rec.action_seqs if s not in sf.pin_seqs[p]]
                if live and not any(s in sup for s in live):
                    sup.add(max(live, key=lambda s: (rank[p][s], -s)))
        return supports

    def _support_guesses(self, plans: list[np.ndarray],
                         slack_hint: Optional[list[np.ndarray]]):
        sf = self.sf
        emitted = set()

        def emit(supports):
            key = tuple(tuple(sorted(s)) for s in supports)
            if key not in emitted:
                emitted.add(key)
                yield supports

        if slack_hint is None:
            # no relaxation slacks to read; best-response slacks against the
            # candidate itself play the same role
            g = gradients(sf, plans)
            slack_hint = [best_response_duals(sf, plans, p, grad=g[p])[1]
                          for p in range(sf.num_players)]
        for tau in (1e-7, 1e-4):
            supports = []
            for p in range(sf.num_players):
                sup = {s for s in range(sf.dims[p])
                       if s not in sf.pin_seqs[p] and slack_hint[p][s] <= tau}
                supports.append(sup)
            yield from emit(self._complete(supports, [-h for h in slack_hint]))
        for tau in (1e-6, 1e-4, 1e-3, 1e-2, 5e-2, 0.15):
            supports = []
            for p in range(sf.num_players):
                sup = set()
                x = plans[p]
                for s in range(sf.dims[p]):
                    if s in sf.pin_seqs[p] or (s == 0 and sf.has_empty_sequence):
                        continue
                    parent = self.parent_of[p].get(s)
                    mass = 1.0 if parent is None else x[parent]
                    if x[s] > tau * max(mass, 1e-12):
                        sup.add(s)
                supports.append(sup)
            yield from emit(self._complete(supports, plans))

    # ------------------------------------------------- active-set refining
    def _refine(self, supports: list[set[int]],
                plans0: list[np.ndarray]) -> Optional[list[np.ndarray]]:
        """Newton on a guessed support, pivoting the support until the KKT
        pattern closes.

        After each converged solve the slacks of a best response against the
        current plans locate the flaw: a supported sequence carrying mass
        and positive slack is overplayed (bring in its zero-slack sibling),
        one with negative mass does not belong (drop it with its subtree).
        Best-response slacks are nonnegative by construction, which the
        support-restricted system's own multipliers are not."""
        sf = self.sf
        n = sf.num_players
        S = [set(s) for s in supports]
        visited = {tuple(tuple(sorted(s)) for s in S)}
        plans = plans0
        lam: Optional[list[np.ndarray]] = None

        def drop(p: int, s: int) -> None:
            S[p].discard(s)
            stack = [s]
            while stack:  # the subtree below a dropped sequence goes too
                cur = stack.pop()
                for rec in sf.infosets[p]:
                    if rec.parent_seq == cur:
                        for a in rec.action_seqs:
                            if a in S[p]:
                                S[p].discard(a)
                                stack.append(a)

        for _ in range(self.opts.active_set_pivots):
            res = self._newton_fixed(S, plans, lam)
            g = gradients(sf, plans if res is None else res[0])
            probe = plans if res is None else res[0]
            br_slack = []
            for p in range(n):
                _, r, _ = best_response_duals(sf, probe, p, grad=g[p])
                br_slack.append(r)
            if res is None:
                # support system unsolvable: evict the sequence whose mass is
                # most clearly wasted under the last good plans
                worst_val = 0.0
                pick: Optional[tuple[int, int]] = None
                for p in range(n):
                    for s in sorted(S[p]):
                        gain = max(plans[p][s], 0.0) * br_slack[p][s]
                        if gain > worst_val:
                            worst_val = gain
                            pick = (p, s)
                if pick is None:
                    return None
                drop(*pick)
                lam = None
            else:
                plans, lam = res
                worst_val = 1e-10
                worst: Optional[tuple[str, int, int, int]] = None
                for p in range(n):
                    r = br_slack[p]
                    for s in sorted(S[p]):
                        if -plans[p][s] > worst_val:
                            worst_val = -plans[p][s]
                            worst = ("drop", p, s, -1)
                        gain = max(plans[p][s], 0.0) * r[s]
                        if gain > worst_val:
                            rec = self.rec_of[p][s]
                            live = [a for a in rec.action_seqs
                                    if a not in sf.pin_seqs[p] and a not in S[p]]
                            if live:
                                alt = min(live, key=lambda a: (r[a], a))
                                worst_val = gain
                                worst = ("swap", p, s, alt)
                if worst is None:
                    return [np.clip(x, 0.0, None) for x in plans]
                kind, p, s, alt = worst
                if kind == "drop":
                    drop(p, s)
                else:
                    S[p].add(alt)
            S = self._complete(S, [-r for r in br_slack])
            key = tuple(tuple(sorted(s)) for s in S)
            if key in visited:
                return None  # pivot cycle
            visited.add(key)
        return None

    # ------------------------------------------------------------- newton
    def _newton_fixed(self, supports: list[set[int]], init: list[np.ndarray],
                      init_lam: Optional[list[np.ndarray]] = None
                      ) -> Optional[tuple[list[np.ndarray], list[np.ndarray]]]:
        self.stats.newton_solves += 1
        sf = self.sf
        n = sf.num_players
        dims = list(sf.dims)
        rowc = list(sf.row_counts)
        xoff = np.cumsum([0] + dims[:-1]).tolist()
        nx = sum(dims)
        loff = [nx + c for c in np.cumsum([0] + rowc[:-1])]
        N = nx + sum(rowc)

        row_off = []
        pos = 0
        for p in range(n):
            row_off.append(pos)
            pos += rowc[p] + dims[p]

        u = np.zeros(N)
        for p in range(n):
            u[xoff[p]:xoff[p] + dims[p]] = init[p]
        if init_lam is None:
            grads_all = gradients(sf, init)
            for p in range(n):
                lam, _, _ = best_response_duals(sf, init, p, grad=grads_all[p])
                u[loff[p]:loff[p] + rowc[p]] = lam
        else:
            for p in range(n):
                u[loff[p]:loff[p] + rowc[p]] = init_lam[p]

        sup_mask = [np.zeros(dims[p], dtype=bool) for p in range(n)]
        for p in range(n):
            for s in supports[p]:
                sup_mask[p][s] = True

        def residual(uv: np.ndarray) -> np.ndarray:
            plans = [uv[xoff[p]:xoff[p] + dims[p]] for p in range(n)]
            g = gradients(sf, plans)
            out = np.empty(N)
            for p in range(n):
                E, e = self.flows[p]
                lam = uv[loff[p]:loff[p] + rowc[p]]
                base = row_off[p]
                out[base:base + rowc[p]] = E @ plans[p] - e
                elam = E.T @ lam
                seg = out[base + rowc[p]:base + rowc[p] + dims[p]]
                seg[:] = np.where(sup_mask[p], elam - g[p], plans[p])
            return out

        seqs_a, vals_a = sf.entry_arrays()
        m_ent = seqs_a.shape[0]

        def jacobian(uv: np.ndarray) -> np.ndarray:
            plans = [uv[xoff[p]:xoff[p] + dims[p]] for p in range(n)]
            J = np.zeros((N, N))
            for p in range(n):
                E, _ = self.flows[p]
                base = row_off[p]
                J[base:base + rowc[p], xoff[p]:xoff[p] + dims[p]] = E
                for s in range(dims[p]):
                    rw = base + rowc[p] + s
                    if sup_mask[p][s]:
                        J[rw, loff[p]:loff[p] + rowc[p]] = E[:, s]
                    else:
                        J[rw, xoff[p] + s] = 1.0
            if m_ent:
                C = np.empty((n, m_ent))
                for q in range(n):
                    C[q] = plans[q][seqs_a[:, q]]
                for p in range(n):
                    on = sup_mask[p][seqs_a[:, p]]
                    if not on.any():
                        continue
                    rows = row_off[p] + rowc[p] + seqs_a[on, p]
                    for q in range(n):
                        if q == p:
                            continue
                        rest = [q2 for q2 in range(n) if q2 != p and q2 != q]
                        prod = C[rest][:, on].prod(axis=0) if rest else 1.0
                        np.add.at(J, (rows, xoff[q] + seqs_a[on, q]),
                                  -vals_a[on, p] * prod)
            return J

        f = residual(u)
        nrm = np.abs(f).max()
        for _ in range(self.opts.newton_iters):
            if nrm < 1e-12:
                break
            J = jacobian(u)
            try:
                step = np.linalg.solve(J, -f)
            except np.linalg.LinAlgError:
                step = np.linalg.lstsq(J, -f, rcond=None)[0]
            t = 1.0
            while t > 1e-4:
                u1 = u + t * step
                f1 = residual(u1)
                n1 = np.abs(f1).max()
                if n1 < nrm * (1.0 - 0.25 * t) or n1 < 1e-13:
                    u, f, nrm = u1, f1, n1
                    break
                t *= 0.5
            else:
                return None
        if nrm > 1e-9:
            return None
        # negative plan entries are kept: they are the refiner's drop signal
        plans = [u[xoff[p]:xoff[p] + dims[p]].copy() for p in range(n)]
        lam_out = [u[loff[p]:loff[p] + rowc[p]].copy() for p in range(n)]
        return plans, lam_out


def _pure_scan(game: StrategicFormGame, sf: SequenceFormGame,
               polisher: _Polisher) -> bool:
    """Exact pure equilibria of a strategic game by vectorized comparison."""
    if int(np.prod(game.strategy_counts)) > 500_000:
        return False
    mask = np.ones(tuple(game.strategy_counts), dtype=bool)
    for p in range(game.num_players):
        U = game.payoffs[p]
        mask &= U >= U.max(axis=p, keepdims=True)
    hits = np.argwhere(mask)
    if len(hits) == 0:
        return False
    combo = hits[0]  # lexicographically first, for reproducibility
    plans = []
    for p in range(game.num_players):
        x = np.zeros(sf.dims[p])
        x[combo[p]] = 1.0
        plans.append(x)
    return polisher.try_plans(plans)


def solve(game: Game, pins: Optional[PinList] = None,
          options: Optional[SolverOptions] = None) -> SolveResult:
    """Find an equilibrium of a game, assembling its system on the way in."""
    if isinstance(game, ExtensiveFormGame):
        sf = build_sequence_form(game, pins=pins)
    else:
        if pins is not None and pins.entries:
            raise GameError("pins apply to tree games only")
        sf = embed_strategic_form(game)
    return solve_system(assemble_ncp(sf), sf, options)


def solve_system(system: FeasibilitySystem,
                 sf: Optional[SequenceFormGame] = None,
                 options: Optional[SolverOptions] = None) -> SolveResult:
    """Search a pre-assembled feasibility system for an equilibrium."""
    opts = options or SolverOptions()
    t0 = time.perf_counter()
    if sf is None:
        sf = system.sf
    game = sf.source_game
    if game is None:
        raise GameError("sequence form lost its source game; the verifier "
                        "needs the original tree or tensor")
    stats = SolveStats()
    polisher = _Polisher(game, sf, system, opts, stats)
    rng = np.random.default_rng(opts.seed)

    def finish(status: str, detail: str = "") -> SolveResult:
        stats.wall_time = time.perf_counter() - t0
        if polisher.best is not None:
            plans, profile = polisher.best
            assignment = certified_assignment(system, plans)
            residuals = system.residual_report(assignment)
            profile = StrategyProfile(players=profile.players,
                                      verified_epsilon=polisher.best_eps)
            pay = expected_payoffs(game, profile)
            return SolveResult(status, profile, polisher.best_eps,
                               tuple(float(v) for v in pay), assignment,
                               residuals, stats, system, sf, detail)
        return SolveResult(status, None, None, None, None, None, stats,
                           system, sf, detail)

    # root candidates before any LP: closed-form scans and cheap polish
    if isinstance(game, StrategicFormGame) and _pure_scan(game, sf, polisher):
        return finish(EQUILIBRIUM_FOUND)
    if polisher.try_plans(_uniform_plans(sf)):
        return finish(EQUILIBRIUM_FOUND)
    for _ in range(opts.restarts):
        if polisher.try_plans(_random_plans(sf, rng)):
            return finish(EQUILIBRIUM_FOUND)

    relax = _Relaxation(system)
    counter = itertools.count(1)
    lo0 = system.lo.copy()
    hi0 = system.hi.copy()
    relax.tighten(lo0, hi0)
    heap: list[tuple[tuple[float, int, int], BnbNode]] = []
    root = BnbNode(lo0, hi0)
    heapq.heappush(heap, (root.sort_key(), root))

    pool = ThreadPoolExecutor(max_workers=opts.workers) if opts.workers > 1 else None
    all_pruned = True
    try:
        while heap:
            if opts.time_limit is not None and time.perf_counter() - t0 > opts.time_limit:
                return finish(LIMIT_REACHED, "time limit")
            if opts.node_limit is not None and stats.nodes >= opts.node_limit:
                return finish(LIMIT_REACHED, "node limit")

            batch: list[BnbNode] = []
            while heap and len(batch) < max(1, opts.workers):
                batch.append(heapq.heappop(heap)[1])
            if pool is not None and len(batch) > 1:
                sols = list(pool.map(lambda nd: relax.solve(nd.lo, nd.hi), batch))
            else:
                sols = [relax.solve(nd.lo, nd.hi) for nd in batch]
            stats.lp_solves += len(batch)

            for node, (v_hat, w_hat) in zip(batch, sols):
                stats.nodes += 1
                if v_hat is None:
                    continue  # box holds no point of the linear relaxation
                all_pruned = False
                plans = system.x_of(v_hat)
                slack_hint = [v_hat[system.r_offset[p]:system.r_offset[p] + d]
                              for p, d in enumerate(sf.dims)]
                if polisher.try_plans([x.copy() for x in plans], slack_hint):
                    return finish(EQUILIBRIUM_FOUND)

                lo, hi = node.lo, node.hi
                comp = v_hat[relax.comp_a] * v_hat[relax.comp_b]
                undecided = (hi[relax.comp_a] > 0) & (hi[relax.comp_b] > 0)
                comp = np.where(undecided, comp, 0.0)
                if relax.num_w:
                    w_gap = np.abs(w_hat - v_hat[relax.a_cols[:relax.num_w]]
                                   * v_hat[relax.b_cols[:relax.num_w]])
                else:
                    w_gap = np.zeros(0)
                aux_sl = relax.aux_slice
                if aux_sl.stop > aux_sl.start:
                    aux_gap = np.abs(v_hat[relax.t_cols[aux_sl]]
                                     - v_hat[relax.a_cols[aux_sl]]
                                     * v_hat[relax.b_cols[aux_sl]])
                else:
                    aux_gap = np.zeros(0)

                child_score = float(comp.sum() + w_gap.sum() + aux_gap.sum())
                comp_max = comp.max(initial=0.0)
                gaps = np.concatenate([w_gap, aux_gap])
                gap_max = gaps.max(initial=0.0)

                def push(lo_c: np.ndarray, hi_c: np.ndarray,
                         decided: tuple[tuple[int, str], ...] = ()) -> None:
                    relax.tighten(lo_c, hi_c)
                    child = BnbNode(lo_c, hi_c, node.decisions + decided,
                                    node.depth + 1, child_score, next(counter))
                    heapq.heappush(heap, (child.sort_key(), child))

                if comp_max > opts.comp_branch_tol:
                    k = int(np.argmax(comp))
                    xi, ri = int(relax.comp_a[k]), int(relax.comp_b[k])
                    lo_a, hi_a = lo.copy(), hi.copy()
                    hi_a[xi] = 0.0
                    for j in system.descendant_x_vars(xi):
                        hi_a[j] = 0.0
                    push(lo_a, hi_a, ((k, "x"),))
                    lo_b, hi_b = lo.copy(), hi.copy()
                    hi_b[ri] = 0.0
                    push(lo_b, hi_b, ((k, "r"),))
                elif gap_max > opts.product_branch_tol:
                    k = int(np.argmax(gaps))
                    a = int(relax.a_cols[k])
                    b = int(relax.b_cols[k])
                    f = a if (hi[a] - lo[a]) >= (hi[b] - lo[b]) else b
                    width = hi[f] - lo[f]
                    if width < 1e-10:
                        continue
                    guard = opts.split_guard * width
                    point = min(max(v_hat[f], lo[f] + guard), hi[f] - guard)
                    lo_a, hi_a = lo.copy(), hi.copy()
                    hi_a[f] = point
                    push(lo_a, hi_a)
                    lo_b, hi_b = lo.copy(), hi.copy()
                    lo_b[f] = point
                    push(lo_b, hi_b)
                # otherwise the relaxation point satisfies every product
                # exactly yet failed verification: a numerical dead end,
                # dropped rather than subdivided further

                if opts.verbose and stats.nodes % 25 == 0:
                    opts.log(f"[bnb] nodes={stats.nodes} open={len(heap)} "
                             f"best_eps={polisher.best_eps:.3g} "
                             f"comp={comp_max:.3g} gap={gap_max:.3g} "
                             f"t={time.perf_counter() - t0:.1f}s")
        if all_pruned:
            return finish(INFEASIBLE,
                          "every relaxation was infeasible; the system admits "
                          "no point within its bounds (suspect bad pins or M)")
        return finish(LIMIT_REACHED, "search space exhausted without a "
                                     "verified equilibrium")
    finally:
        if pool is not None:
            pool.shutdown(wait=False)
