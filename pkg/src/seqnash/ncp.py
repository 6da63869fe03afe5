"""Equilibrium feasibility system over sequence-form variables.

A realization profile x is an equilibrium exactly when, for every player p,
there exist flow duals lam_p and slacks r_p >= 0 with

    E_p x_p = e_p                      (flow)
    E_p^T lam_p - g_p(x_{-p}) = r_p    (stationarity)
    x_p . r_p = 0                      (complementarity)

where g_p is the gradient of p's expected payoff in x_p, a multilinear
function of the other players' variables.  This module assembles that system
as explicit rows: linear equalities (flow plus any pinned sequences), and
quadratic rows whose nonlinear part is a weighted sum of pairwise products.

For more than three players the gradient involves products of three or more
variables.  Those are factored through auxiliary product variables: players
are grouped into consecutive pairs, each full pair gets a product table, and
any cover of remaining factors longer than two is reduced by repeatedly
merging its two rightmost members.  Merge tables are shared between players
that need the same product.

All multipliers and slacks are bounded a priori: with payoffs scaled into
the entry weights, |lam| and r never exceed (1 + rows(E_p)) * max |value|.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .seqform import SequenceFormGame

__all__ = [
    "FeasibilitySystem",
    "QuadRow",
    "SystemCounts",
    "ProductPlan",
    "assemble_ncp",
    "build_system",
    "pair_product_scheme",
    "residuals",
    "gradients",
    "best_response_duals",
    "certified_assignment",
]


@dataclass(frozen=True)
class QuadRow:
    """lin . v + sum coef * v_i * v_j + const = 0."""

    kind: str  # stationarity | complementarity | product
    label: str
    lin: dict[int, float]
    quad: dict[tuple[int, int], float]
    const: float = 0.0

    def value(self, v: np.ndarray) -> float:
        acc = self.const
        for j, a in self.lin.items():
            acc += a * v[j]
        for (i, j), a in self.quad.items():
            acc += a * v[i] * v[j]
        return acc


@dataclass(frozen=True)
class ProductPlan:
    """How opponent products are covered by at most two factors per player.

    covers[p] lists factor keys (sorted player tuples) whose product spans
    the opponents of p.  factor_defs maps each multi-player key to the two
    child keys it multiplies; insertion order puts children before parents.
    aux_counts gives the dense variable count of each multi-player factor.
    """

    covers: tuple[tuple[tuple[int, ...], ...], ...]
    factor_defs: dict[tuple[int, ...], tuple[tuple[int, ...], tuple[int, ...]]]
    aux_counts: dict[tuple[int, ...], int]
    total_aux: int


def pair_product_scheme(n: int, dims: Sequence[int]) -> ProductPlan:
    """Plan auxiliary product variables for an n-player system.

    Up to three players no products of two or more opponent variables are
    needed beyond plain pairs, so no auxiliaries are planned.  Beyond that,
    players are grouped into consecutive pairs; each player's opponent
    cover starts from the pair blocks (substituting the lone partner where
    the player sits inside a block) and is merged rightmost-first until at
    most two factors remain.  Merged factors are shared across players."""
    if n < 1:
        raise ValueError("need at least one player")
    if len(dims) != n:
        raise ValueError("one dimension per player")
    defs: dict[tuple[int, ...], tuple[tuple[int, ...], tuple[int, ...]]] = {}

    def merge(lk: tuple[int, ...], rk: tuple[int, ...]) -> tuple[int, ...]:
        key = tuple(sorted(lk + rk))
        defs.setdefault(key, (lk, rk))
        return key

    covers: list[tuple[tuple[int, ...], ...]] = []
    if n <= 3:
        covers = [tuple((q,) for q in range(n) if q != p) for p in range(n)]
    else:
        blocks: list[tuple[int, ...]] = []
        for i in range(0, n - 1, 2):
            blocks.append((i, i + 1))
        if n % 2:
            blocks.append((n - 1,))
        for p in range(n):
            cover: list[tuple[int, ...]] = []
            for blk in blocks:
                if p not in blk:
                    if len(blk) == 2:
                        defs.setdefault(blk, ((blk[0],), (blk[1],)))
                    cover.append(blk)
                elif len(blk) == 2:
                    cover.append((blk[0] if blk[1] == p else blk[1],))
            while len(cover) > 2:
                right = cover.pop()
                left = cover.pop()
                cover.append(merge(left, right))
            covers.append(tuple(cover))
    aux_counts = {key: int(np.prod([dims[q] for q in key])) for key in defs}
    return ProductPlan(tuple(covers), defs, aux_counts,
                       sum(aux_counts.values()))


@dataclass(frozen=True)
class SystemCounts:
    variables: int
    x_vars: int
    multiplier_vars: int
    slack_vars: int
    aux_vars: int
    linear_rows: int
    flow_rows: int
    pin_rows: int
    quadratic_rows: int
    stationarity_rows: int
    complementarity_rows: int
    product_rows: int


class _Factor:
    """A product over the sequences of a fixed set of players.

    Base factors are single players (their x variables).  Merge factors own
    auxiliary variables, one per materialized combination, created lazily.
    """

    __slots__ = ("players", "left", "right", "combos")

    def __init__(self, players: tuple[int, ...],
                 left: Optional["_Factor"] = None,
                 right: Optional["_Factor"] = None):
        self.players = players
        self.left = left
        self.right = right
        self.combos: dict[tuple[int, ...], int] = {}

    @property
    def is_base(self) -> bool:
        return self.left is None


class FeasibilitySystem:
    def __init__(self, sf: SequenceFormGame):
        self.sf = sf
        n = sf.num_players
        dims = sf.dims

        self.x_offset: list[int] = []
        self.lam_offset: list[int] = []
        self.r_offset: list[int] = []
        self.row_counts = list(sf.row_counts)
        pos = 0
        for p in range(n):
            self.x_offset.append(pos)
            pos += dims[p]
        for p in range(n):
            self.lam_offset.append(pos)
            pos += sf.row_counts[p]
        for p in range(n):
            self.r_offset.append(pos)
            pos += dims[p]
        self.aux_offset = pos
        self.num_x = sum(dims)
        self.num_lam = sum(sf.row_counts)

        self.var_labels: list[str] = []
        for p in range(n):
            self.var_labels += [f"x{p}:{sf.seq_labels[p][s]}" for s in range(dims[p])]
        for p in range(n):
            self.var_labels += [f"lam{p}:{i}" for i in range(sf.row_counts[p])]
        for p in range(n):
            self.var_labels += [f"r{p}:{sf.seq_labels[p][s]}" for s in range(dims[p])]

        self.M = [self._charge_bound(p) for p in range(n)]

        # ------------------------------------------------------ linear rows
        lin_rows: list[dict[int, float]] = []
        lin_rhs: list[float] = []
        lin_kinds: list[str] = []
        for p in range(n):
            E, e = sf.flow_matrix(p)
            for i in range(E.shape[0]):
                row = {self.x_offset[p] + j: float(E[i, j])
                       for j in np.nonzero(E[i])[0]}
                lin_rows.append(row)
                lin_rhs.append(float(e[i]))
                lin_kinds.append("flow")
        for p in range(n):
            for s in sorted(sf.pin_seqs[p]):
                lin_rows.append({self.x_offset[p] + s: 1.0})
                lin_rhs.append(0.0)
                lin_kinds.append("pin")
        self.lin_rows = lin_rows
        self.lin_rhs = np.array(lin_rhs)
        self.lin_kinds = lin_kinds

        # ------------------------------------------- product variable plan
        self._factors: dict[tuple[int, ...], _Factor] = {}
        self._aux_labels: list[str] = []
        self.product_defs: list[QuadRow] = []
        self._covers = self._plan_covers(n)
        self._num_aux = 0

        # --------------------------------------------------- quadratic rows
        stat: list[QuadRow] = []
        grads: list[list[tuple[dict[int, float], dict[tuple[int, int], float]]]] = [
            [(dict(), dict()) for _ in range(dims[p])] for p in range(n)
        ]
        grad_const = [np.zeros(dims[p]) for p in range(n)]
        for entry in sf.payoff_entries:
            for p in range(n):
                lin_part, quad_part = grads[p][entry.seqs[p]]
                cst = self._add_gradient_term(p, entry.seqs, -entry.values[p],
                                              lin_part, quad_part)
                grad_const[p][entry.seqs[p]] += cst
        for p in range(n):
            E, _ = sf.flow_matrix(p)
            for s in range(dims[p]):
                lin_part, quad_part = grads[p][s]
                lin = dict(lin_part)
                for i in np.nonzero(E[:, s])[0]:
                    lin[self.lam_offset[p] + int(i)] = float(E[i, s])
                lin[self.r_offset[p] + s] = lin.get(self.r_offset[p] + s, 0.0) - 1.0
                stat.append(QuadRow("stationarity",
                                    f"stat[{self.var_labels[self.x_offset[p] + s]}]",
                                    lin, quad_part,
                                    const=float(grad_const[p][s])))
        self.stationarity_rows = stat

        comp: list[QuadRow] = []
        self.pairs: list[tuple[int, int]] = []
        for p in range(n):
            for s in range(dims[p]):
                xi = self.x_offset[p] + s
                ri = self.r_offset[p] + s
                self.pairs.append((xi, ri))
                comp.append(QuadRow("complementarity",
                                    f"comp[{self.var_labels[xi]}]",
                                    {}, {(xi, ri): 1.0}))
        self.complementarity_rows = comp

        self.num_vars = self.aux_offset + self._num_aux
        self.var_labels += self._aux_labels

        lo = np.zeros(self.num_vars)
        hi = np.ones(self.num_vars)
        for p in range(n):
            a, b = self.lam_offset[p], self.lam_offset[p] + sf.row_counts[p]
            lo[a:b] = -self.M[p]
            hi[a:b] = self.M[p]
            a, b = self.r_offset[p], self.r_offset[p] + dims[p]
            hi[a:b] = self.M[p]
        for p in range(n):
            for s in sf.pin_seqs[p]:
                hi[self.x_offset[p] + s] = 0.0
        self.lo = lo
        self.hi = hi

    # ------------------------------------------------------------------
    def _charge_bound(self, p: int) -> float:
        peak = max((abs(e.values[p]) for e in self.sf.payoff_entries), default=0.0)
        return (1.0 + self.sf.row_counts[p]) * peak

    def _plan_covers(self, n: int) -> list[list[_Factor]]:
        """For each player, an ordered factor list whose product is g_p's
        coefficient structure; length <= 2 after merging."""
        plan = pair_product_scheme(n, self.sf.dims)
        self.product_plan = plan
        return [[self._factor_for(key, plan.factor_defs) for key in cover]
                for cover in plan.covers]

    def _factor_for(self, key: tuple[int, ...],
                    defs: dict) -> _Factor:
        f = self._factors.get(key)
        if f is None:
            if len(key) == 1:
                f = _Factor(key)
            else:
                lk, rk = defs[key]
                f = _Factor(key, self._factor_for(lk, defs),
                            self._factor_for(rk, defs))
            self._factors[key] = f
        return f

    def _factor_var(self, f: _Factor, seqs: tuple[int, ...]) -> int:
        """Variable index carrying the product of f over the given profile,
        materializing auxiliary variables and their defining rows on demand."""
        combo = tuple(seqs[q] for q in f.players)
        if f.is_base:
            return self.x_offset[f.players[0]] + combo[0]
        idx = f.combos.get(combo)
        if idx is not None:
            return idx
        a = self._factor_var(f.left, seqs)
        b = self._factor_var(f.right, seqs)
        idx = self.aux_offset + self._num_aux
        self._num_aux += 1
        f.combos[combo] = idx
        label = "w[" + "*".join(
            self.var_labels[self.x_offset[q] + seqs[q]] for q in f.players) + "]"
        self._aux_labels.append(label)
        key = (a, b) if a <= b else (b, a)
        self.product_defs.append(QuadRow("product", f"def[{label}]",
                                         {idx: 1.0}, {key: -1.0}))
        return idx

    def _add_gradient_term(self, p: int, seqs: tuple[int, ...], coef: float,
                           lin: dict[int, float],
                           quad: dict[tuple[int, int], float]) -> float:
        """Fold one payoff entry into p's gradient; returns any constant part."""
        cover = self._covers[p]
        if len(cover) == 0:  # one-player game: the gradient is constant
            return coef
        if len(cover) == 1:
            j = self._factor_var(cover[0], seqs)
            lin[j] = lin.get(j, 0.0) + coef
            return 0.0
        a = self._factor_var(cover[0], seqs)
        b = self._factor_var(cover[1], seqs)
        key = (a, b) if a <= b else (b, a)
        quad[key] = quad.get(key, 0.0) + coef
        return 0.0

    # ------------------------------------------------------------------
    def descendant_x_vars(self, xi: int) -> list[int]:
        """Plan variables forced to zero when xi is: all sequences reached
        only through xi's sequence, for the same player."""
        if not hasattr(self, "_desc_cache"):
            cache: dict[int, list[int]] = {}
            for p in range(self.sf.num_players):
                children: dict[int, list[int]] = {}
                for rec in self.sf.infosets[p]:
                    if rec.parent_seq is not None:
                        children.setdefault(rec.parent_seq, []).extend(rec.action_seqs)
                desc: dict[int, list[int]] = {}
                for rec in reversed(self.sf.infosets[p]):
                    for s in rec.action_seqs:
                        acc: list[int] = []
                        for ch in children.get(s, ()):  # children computed first
                            acc.append(ch)
                            acc.extend(desc.get(ch, ()))
                        desc[s] = acc
                for s, lst in desc.items():
                    cache[self.x_offset[p] + s] = [self.x_offset[p] + t for t in lst]
            self._desc_cache = cache
        return self._desc_cache.get(xi, [])

    @property
    def num_aux(self) -> int:
        return self._num_aux

    @property
    def quad_rows(self) -> list[QuadRow]:
        return self.stationarity_rows + self.complementarity_rows

    @property
    def all_rows(self) -> list[QuadRow]:
        return self.stationarity_rows + self.complementarity_rows + self.product_defs

    def counts(self) -> SystemCounts:
        return SystemCounts(
            variables=self.num_vars,
            x_vars=self.num_x,
            multiplier_vars=self.num_lam,
            slack_vars=self.num_x,
            aux_vars=self._num_aux,
            linear_rows=len(self.lin_rows),
            flow_rows=self.lin_kinds.count("flow"),
            pin_rows=self.lin_kinds.count("pin"),
            quadratic_rows=len(self.stationarity_rows) + len(self.complementarity_rows),
            stationarity_rows=len(self.stationarity_rows),
            complementarity_rows=len(self.complementarity_rows),
            product_rows=len(self.product_defs),
        )

    def linear_residual(self, v: np.ndarray) -> float:
        worst = 0.0
        for row, rhs in zip(self.lin_rows, self.lin_rhs):
            acc = -rhs
            for j, a in row.items():
                acc += a * v[j]
            worst = max(worst, abs(acc))
        return worst

    def residual_report(self, v: np.ndarray) -> dict[str, float]:
        rep = {
            "linear": self.linear_residual(v),
            "stationarity": max((abs(r.value(v)) for r in self.stationarity_rows),
                                default=0.0),
            "complementarity": max((abs(r.value(v)) for r in self.complementarity_rows),
                                   default=0.0),
            "product": max((abs(r.value(v)) for r in self.product_defs), default=0.0),
        }
        bound = np.maximum(self.lo - v, 0.0)
        bound = np.maximum(bound, np.maximum(v - self.hi, 0.0))
        rep["bounds"] = float(bound.max()) if len(bound) else 0.0
        rep["max"] = max(rep.values())
        return rep

    def x_of(self, v: np.ndarray) -> list[np.ndarray]:
        return [np.asarray(v[self.x_offset[p]:self.x_offset[p] + d])
                for p, d in enumerate(self.sf.dims)]

    def pack_x(self, plans: list[np.ndarray], v: Optional[np.ndarray] = None) -> np.ndarray:
        if v is None:
            v = np.zeros(self.num_vars)
        for p, xs in enumerate(plans):
            v[self.x_offset[p]:self.x_offset[p] + len(xs)] = xs
        return v

    def describe(self, max_rows: int = 0) -> str:
        c = self.counts()
        lines = [
            f"variables: {c.variables} "
            f"(x {c.x_vars}, multipliers {c.multiplier_vars}, "
            f"slacks {c.slack_vars}, products {c.aux_vars})",
            f"linear rows: {c.linear_rows} "
            f"(flow {c.flow_rows}, pins {c.pin_rows})",
            f"quadratic rows: {c.quadratic_rows} "
            f"(stationarity {c.stationarity_rows}, "
            f"complementarity {c.complementarity_rows})",
        ]
        if c.product_rows:
            lines.append(f"product definitions: {c.product_rows}")
        lines.append("multiplier bound per player: "
                     + ", ".join(f"{m:g}" for m in self.M))
        if max_rows:
            shown = 0
            for row in self.all_rows:
                if shown >= max_rows:
                    lines.append(f"  ... ({len(self.all_rows) - shown} more rows)")
                    break
                terms = [f"{a:+g}*{self.var_labels[j]}" for j, a in row.lin.items()]
                terms += [f"{a:+g}*{self.var_labels[i]}*{self.var_labels[j]}"
                          for (i, j), a in row.quad.items()]
                lines.append(f"  {row.label}: {' '.join(terms)} = 0")
                shown += 1
        return "\n".join(lines)

    def to_dict(self) -> dict:
        c = self.counts()
        return {
            "counts": c.__dict__,
            "multiplier_bounds": list(self.M),
            "variables": list(self.var_labels),
            "pairs": [list(pq) for pq in self.pairs],
        }


def assemble_ncp(sf: SequenceFormGame) -> FeasibilitySystem:
    """Build the complementarity feasibility system for a sequence-form game."""
    return FeasibilitySystem(sf)


build_system = assemble_ncp


def residuals(system: FeasibilitySystem, assignment: np.ndarray) -> dict[str, float]:
    """Worst violation of each row family at a full variable assignment."""
    return system.residual_report(assignment)


def gradients(sf: SequenceFormGame, plans: list[np.ndarray]) -> list[np.ndarray]:
    """Payoff gradient per player: g_p[s] = d(expected payoff)/d(x_p[s])."""
    n = sf.num_players
    seqs, vals = sf.entry_arrays()
    m = seqs.shape[0]
    if m == 0:
        return [np.zeros(d) for d in sf.dims]
    C = np.empty((n, m))
    for q in range(n):
        C[q] = plans[q][seqs[:, q]]
    out = []
    for p in range(n):
        others = [q for q in range(n) if q != p]
        prod = C[others].prod(axis=0) if others else np.ones(m)
        g = np.zeros(sf.dims[p])
        np.add.at(g, seqs[:, p], vals[:, p] * prod)
        out.append(g)
    return out


def best_response_duals(sf: SequenceFormGame, plans: list[np.ndarray], p: int,
                        grad: Optional[np.ndarray] = None,
                        ) -> tuple[np.ndarray, np.ndarray, float]:
    """Exact flow duals and slacks against a fixed opposing profile.

    Values propagate bottom-up: an infoset's multiplier is the best of its
    actions' totals, and each sequence's slack is the parent's multiplier
    minus that sequence's own total.  Slacks come out nonnegative by
    construction and vanish on best-response actions, so the complementarity
    products sum to exactly this player's regret.
    """
    g = gradients(sf, plans)[p] if grad is None else grad
    records = sf.infosets[p]
    children: dict[int, list[int]] = {}
    for rec in records:
        if rec.parent_seq is not None:
            children.setdefault(rec.parent_seq, []).append(rec.row)
    val: dict[int, float] = {}
    action_total: dict[int, float] = {}
    for rec in reversed(records):  # creation order is outside-in, so reverse
        best = -np.inf
        for s in rec.action_seqs:
            tot = g[s] + sum(val[row] for row in children.get(s, ()))
            action_total[s] = tot
            best = max(best, tot)
        val[rec.row] = best

    lam = np.zeros(sf.row_counts[p])
    for rec in records:
        lam[rec.row] = val[rec.row]
    if sf.has_empty_sequence:
        root_total = g[0] + sum(val[row] for row in children.get(0, ()))
        lam[0] = root_total
        action_total[0] = root_total
        br_value = root_total
    else:
        br_value = val[records[0].row]

    r = np.zeros(sf.dims[p])
    owner: dict[int, int] = {}
    for rec in records:
        for s in rec.action_seqs:
            owner[s] = rec.row
    for s in range(sf.dims[p]):
        if s in owner:
            r[s] = lam[owner[s]] - action_total[s]
        # the empty sequence's slack is zero by the choice of lam[0]
    return lam, r, br_value


def certified_assignment(system: FeasibilitySystem,
                         plans: list[np.ndarray]) -> np.ndarray:
    """Full variable assignment witnessing the system at a given profile.

    Multipliers are exact best-response values, slacks the per-sequence
    regret gaps, and product variables exact products, so flow, stationarity
    and product rows hold to roundoff; only the complementarity rows carry
    the profile's residual regret.
    """
    sf = system.sf
    v = np.zeros(system.num_vars)
    system.pack_x(plans, v)
    grads_all = gradients(sf, plans)
    for p in range(sf.num_players):
        lam, r, _ = best_response_duals(sf, plans, p, grad=grads_all[p])
        v[system.lam_offset[p]:system.lam_offset[p] + len(lam)] = lam
        v[system.r_offset[p]:system.r_offset[p] + len(r)] = r
    for row in system.product_defs:  # ordered so factors precede their parents
        (aux_j,) = row.lin.keys()
        ((i, j),) = row.quad.keys()
        v[aux_j] = v[i] * v[j]
    return v
