"""Bounded-variable linear programming.

Two engines behind one interface:

* ``simplex``: an in-house revised simplex with explicit variable bounds.
  Phase 1 minimizes a composite artificial objective (one signed artificial
  column per row), phase 2 the real objective.  Pricing is Dantzig's rule
  with a Bland fallback once a run of degenerate pivots exceeds a threshold.
  The basis is held as a dense LU factorization, refreshed every 64 pivots,
  with product-form eta updates in between.  Ties break toward the lowest
  variable index, so a given input always produces the same pivot path.

* ``highs``: scipy's HiGHS wrapper, used where raw speed matters (the
  branch-and-bound loop solves thousands of relaxations).  Same contract.

Rows carry a sense in {'<', '=', '>'}; variable bounds may be infinite
(numpy inf sentinels).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.linalg import lu_factor, lu_solve
from scipy.optimize import linprog

INF = float("inf")

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"
NUMERICAL_TROUBLE = "numerical_trouble"


class LpError(ValueError):
    pass


@dataclass
class LinearProgram:
    """min (or max) c.x  subject to  A x (sense) rhs,  lo <= x <= hi."""

    c: np.ndarray
    A: sp.csr_matrix
    senses: list[str]
    rhs: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    maximize: bool = False
    names: Optional[list[str]] = None

    def __post_init__(self) -> None:
        self.c = np.asarray(self.c, dtype=float)
        self.rhs = np.asarray(self.rhs, dtype=float)
        self.lo = np.asarray(self.lo, dtype=float)
        self.hi = np.asarray(self.hi, dtype=float)
        if not sp.issparse(self.A):
            self.A = sp.csr_matrix(np.atleast_2d(np.asarray(self.A, dtype=float)))
        else:
            self.A = self.A.tocsr()
        m, n = self.A.shape
        if self.c.shape != (n,) or self.lo.shape != (n,) or self.hi.shape != (n,):
            raise LpError("objective/bounds length mismatch")
        if self.rhs.shape != (m,) or len(self.senses) != m:
            raise LpError("rhs/senses length mismatch")
        bad = [s for s in self.senses if s not in ("<", "=", ">")]
        if bad:
            raise LpError(f"unknown row sense {bad[0]!r}")
        if np.any(self.lo > self.hi + 1e-12):
            raise LpError("crossed variable bounds")

    @property
    def num_vars(self) -> int:
        return self.A.shape[1]

    @property
    def num_rows(self) -> int:
        return self.A.shape[0]

    def dump(self) -> str:
        """Human-readable listing, for debugging small programs."""
        names = self.names or [f"x{j}" for j in range(self.num_vars)]
        lines = [("maximize  " if self.maximize else "minimize  ")
                 + " + ".join(f"{self.c[j]:g}*{names[j]}"
                              for j in range(self.num_vars) if self.c[j] != 0)]
        dense = self.A.toarray()
        for i in range(self.num_rows):
            terms = " + ".join(f"{dense[i, j]:g}*{names[j]}"
                               for j in range(self.num_vars) if dense[i, j] != 0)
            lines.append(f"  {terms or '0'} {self.senses[i]}= {self.rhs[i]:g}")
        for j in range(self.num_vars):
            lines.append(f"  {self.lo[j]:g} <= {names[j]} <= {self.hi[j]:g}")
        return "\n".join(lines)


def lp_from_rows(c: Sequence[float],
                 rows: Sequence[tuple[Sequence[float], str, float]],
                 bounds: Sequence[tuple[float, float]],
                 maximize: bool = False,
                 names: Optional[list[str]] = None) -> LinearProgram:
    """Convenience constructor from dense row triples (coeffs, sense, rhs)."""
    n = len(c)
    mat = np.array([list(r[0]) for r in rows], dtype=float) if rows else np.zeros((0, n))
    senses = [r[1] for r in rows]
    rhs = np.array([r[2] for r in rows], dtype=float)
    lo = np.array([b[0] for b in bounds], dtype=float)
    hi = np.array([b[1] for b in bounds], dtype=float)
    return LinearProgram(np.asarray(c, dtype=float), sp.csr_matrix(mat),
                         senses, rhs, lo, hi, maximize=maximize, names=names)


@dataclass
class LpSolution:
    status: str
    x: Optional[np.ndarray] = None
    objective: Optional[float] = None
    duals: Optional[np.ndarray] = None   # d(objective)/d(rhs), original sense
    iterations: int = 0
    message: str = ""
    # On infeasibility: a row combination y with y.A within bounds-cone but
    # y.b violating it (phase-1 prices); None for the highs engine.
    certificate: Optional[np.ndarray] = None

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL

    def residuals(self, lp: LinearProgram) -> tuple[float, float]:
        """(max row violation, max bound violation) of the returned point."""
        assert self.x is not None
        ax = lp.A @ self.x
        row_res = 0.0
        for i, s in enumerate(lp.senses):
            if s == "=":
                row_res = max(row_res, abs(ax[i] - lp.rhs[i]))
            elif s == "<":
                row_res = max(row_res, max(0.0, ax[i] - lp.rhs[i]))
            else:
                row_res = max(row_res, max(0.0, lp.rhs[i] - ax[i]))
        bnd = np.maximum(lp.lo - self.x, 0.0)
        bnd = np.maximum(bnd, np.maximum(self.x - lp.hi, 0.0))
        return row_res, float(bnd.max()) if len(bnd) else 0.0


def solve_lp(lp: LinearProgram, backend: str = "simplex",
             max_iter: Optional[int] = None) -> LpSolution:
    if backend == "simplex":
        return _solve_simplex(lp, max_iter=max_iter)
    if backend == "highs":
        return _solve_highs(lp)
    raise LpError(f"unknown backend {backend!r}")


# --------------------------------------------------------------------------
# HiGHS engine
# --------------------------------------------------------------------------

def _solve_highs(lp: LinearProgram) -> LpSolution:
    senses = np.array(lp.senses)
    eq_idx = np.nonzero(senses == "=")[0]
    ub_idx = np.nonzero(senses != "=")[0]
    flip = np.array([-1.0 if lp.senses[i] == ">" else 1.0 for i in ub_idx])

    A_eq = lp.A[eq_idx] if len(eq_idx) else None
    b_eq = lp.rhs[eq_idx] if len(eq_idx) else None
    if len(ub_idx):
        A_ub = sp.diags(flip) @ lp.A[ub_idx]
        b_ub = flip * lp.rhs[ub_idx]
    else:
        A_ub = None
        b_ub = None
    c = -lp.c if lp.maximize else lp.c
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                  bounds=np.column_stack([lp.lo, lp.hi]), method="highs",
                  options={"presolve": True,
                           "primal_feasibility_tolerance": 1e-9,
                           "dual_feasibility_tolerance": 1e-9})
    status_map = {0: OPTIMAL, 1: ITERATION_LIMIT, 2: INFEASIBLE, 3: UNBOUNDED}
    status = status_map.get(res.status, NUMERICAL_TROUBLE)
    if status != OPTIMAL:
        return LpSolution(status=status, iterations=int(res.nit), message=res.message)
    duals = np.zeros(lp.num_rows)
    if len(eq_idx):
        duals[eq_idx] = res.eqlin.marginals
    if len(ub_idx):
        duals[ub_idx] = flip * res.ineqlin.marginals
    if lp.maximize:
        duals = -duals
    obj = -res.fun if lp.maximize else res.fun
    return LpSolution(status=OPTIMAL, x=np.asarray(res.x), objective=float(obj),
                      duals=duals, iterations=int(res.nit))


# --------------------------------------------------------------------------
# In-house revised simplex
# --------------------------------------------------------------------------

_PIVOT_TOL = 1e-10
_DUAL_TOL = 1e-9
_DEGEN_TOL = 1e-11
_REFACTOR_EVERY = 64
_BLAND_AFTER = 50  # consecutive degenerate pivots before switching rule


class _Basis:
    """Dense LU of the basis with product-form eta updates."""

    def __init__(self, cols: np.ndarray, basis: list[int]):
        self.cols = cols  # dense (m, N) column matrix of the full system
        self.basis = basis
        self.etas: list[tuple[int, np.ndarray]] = []
        self.refactor()

    def refactor(self) -> None:
        B = self.cols[:, self.basis]
        self.lu = lu_factor(B)
        self.etas = []

    def ftran(self, v: np.ndarray) -> np.ndarray:
        z = lu_solve(self.lu, v)
        for r, w in self.etas:
            t = z[r] / w[r]
            if t != 0.0:
                z = z - t * w
                z[r] = t
            else:
                z[r] = 0.0
        return z

    def btran(self, u: np.ndarray) -> np.ndarray:
        y = u.astype(float).copy()
        for r, w in reversed(self.etas):
            y[r] -= (w @ y - y[r]) / w[r]
        return lu_solve(self.lu, y, trans=1)

    def update(self, r: int, w: np.ndarray, entering: int) -> None:
        self.basis[r] = entering
        self.etas.append((r, w.copy()))
        if len(self.etas) >= _REFACTOR_EVERY:
            self.refactor()


def _solve_simplex(lp: LinearProgram, max_iter: Optional[int] = None) -> LpSolution:
    m, n_struct = lp.num_rows, lp.num_vars
    if max_iter is None:
        max_iter = 2000 + 200 * (m + n_struct)

    c_orig = (-lp.c if lp.maximize else lp.c).copy()

    # slack per row turns every row into an equality
    slack_lo = np.zeros(m)
    slack_hi = np.zeros(m)
    for i, s in enumerate(lp.senses):
        if s == "<":
            slack_lo[i], slack_hi[i] = 0.0, INF
        elif s == ">":
            slack_lo[i], slack_hi[i] = -INF, 0.0
        else:
            slack_lo[i], slack_hi[i] = 0.0, 0.0

    dense_a = lp.A.toarray() if m else np.zeros((0, n_struct))
    # columns: structural | slack | artificial
    cols = np.hstack([dense_a, np.eye(m), np.eye(m)])
    lo = np.concatenate([lp.lo, slack_lo, np.zeros(m)])
    hi = np.concatenate([lp.hi, slack_hi, np.full(m, INF)])
    N = n_struct + 2 * m
    art0 = n_struct + m

    # start: non-artificials at the finite bound nearest zero (free vars at 0)
    z = np.zeros(N)
    for j in range(n_struct + m):
        if lo[j] > 0 or hi[j] < 0 or lo[j] == hi[j]:
            z[j] = lo[j] if abs(lo[j]) <= abs(hi[j]) or not np.isfinite(hi[j]) else hi[j]
        elif np.isfinite(lo[j]) and lo[j] == 0:
            z[j] = 0.0
        elif not np.isfinite(lo[j]) and not np.isfinite(hi[j]):
            z[j] = 0.0
        else:
            z[j] = lo[j] if np.isfinite(lo[j]) else (hi[j] if np.isfinite(hi[j]) else 0.0)
    res = lp.rhs - cols[:, :art0] @ z[:art0]
    sign = np.where(res >= 0, 1.0, -1.0)
    cols[:, art0:] = np.diag(sign)
    z[art0:] = np.abs(res)

    basis = list(range(art0, N))
    basis_set = set(basis)
    B = _Basis(cols, basis)

    phase1_c = np.zeros(N)
    phase1_c[art0:] = 1.0

    state = {"iters": 0, "degen_streak": 0}

    def run(cost: np.ndarray, phase: int) -> str:
        while True:
            if state["iters"] >= max_iter:
                return ITERATION_LIMIT
            y = B.btran(cost[B.basis])
            d = cost - cols.T @ y
            # eligibility by current position against bounds
            entering = -1
            best = _DUAL_TOL
            bland = state["degen_streak"] >= _BLAND_AFTER
            for j in range(N):
                if j in basis_set or lo[j] == hi[j]:
                    continue
                at_lo = np.isfinite(lo[j]) and abs(z[j] - lo[j]) <= 1e-9
                at_hi = np.isfinite(hi[j]) and abs(z[j] - hi[j]) <= 1e-9
                if at_lo and d[j] < -_DUAL_TOL:
                    score = -d[j]
                elif at_hi and d[j] > _DUAL_TOL:
                    score = d[j]
                elif not at_lo and not at_hi and abs(d[j]) > _DUAL_TOL:
                    score = abs(d[j])
                else:
                    continue
                if bland:
                    entering = j
                    break
                if score > best:
                    best = score
                    entering = j
            if entering < 0:
                return OPTIMAL
            direction = 1.0 if d[entering] < 0 else -1.0
            w = B.ftran(cols[:, entering])

            # ratio test with bound flips; ties to the lowest variable index
            span = hi[entering] - lo[entering]
            t_limit = span if np.isfinite(span) else INF
            leave_pos = -1
            for k in range(m):
                wk = direction * w[k]
                if abs(wk) <= _PIVOT_TOL:
                    continue
                jb = B.basis[k]
                if wk > 0:
                    bound = lo[jb]
                    if not np.isfinite(bound):
                        continue
                    t = (z[jb] - bound) / wk
                else:
                    bound = hi[jb]
                    if not np.isfinite(bound):
                        continue
                    t = (z[jb] - bound) / wk
                if t < -1e-9:
                    t = 0.0
                t = max(t, 0.0)
                if t < t_limit - 1e-12 or (leave_pos >= 0 and abs(t - t_limit) <= 1e-12
                                           and jb < B.basis[leave_pos]):
                    t_limit = t
                    leave_pos = k
            if not np.isfinite(t_limit):
                return UNBOUNDED if phase == 2 else NUMERICAL_TROUBLE

            state["iters"] += 1
            if t_limit <= _DEGEN_TOL:
                state["degen_streak"] += 1
            else:
                state["degen_streak"] = 0

            z[B.basis] = np.asarray(z[B.basis]) - t_limit * direction * w
            z[entering] = z[entering] + direction * t_limit
            if leave_pos < 0:
                continue  # bound flip, basis unchanged
            leaving = B.basis[leave_pos]
            # snap the leaving variable onto the bound it hit
            if direction * w[leave_pos] > 0:
                z[leaving] = lo[leaving]
            else:
                z[leaving] = hi[leaving]
            if abs(w[leave_pos]) < _PIVOT_TOL:
                B.refactor()
                w = B.ftran(cols[:, entering])
                if abs(w[leave_pos]) < _PIVOT_TOL:
                    return NUMERICAL_TROUBLE
            basis_set.discard(leaving)
            basis_set.add(entering)
            B.update(leave_pos, w, entering)

    status = run(phase1_c, phase=1)
    if status in (ITERATION_LIMIT, NUMERICAL_TROUBLE):
        return LpSolution(status=status, iterations=state["iters"],
                          message=f"phase 1 stopped: {status}")
    infeas = float(z[art0:].sum())
    if infeas > 1e-7 * (1.0 + float(np.abs(lp.rhs).max(initial=0.0))):
        y = B.btran(phase1_c[B.basis])
        return LpSolution(status=INFEASIBLE, iterations=state["iters"],
                          message=f"phase 1 infeasibility {infeas:.3g}",
                          certificate=np.asarray(y))
    hi[art0:] = 0.0  # artificials pinned for phase 2
    z[art0:] = np.maximum(np.minimum(z[art0:], 0.0), 0.0)

    phase2_c = np.concatenate([c_orig, np.zeros(2 * m)])
    state["degen_streak"] = 0
    status = run(phase2_c, phase=2)
    if status in (ITERATION_LIMIT, NUMERICAL_TROUBLE, UNBOUNDED):
        return LpSolution(status=UNBOUNDED if status == UNBOUNDED else status,
                          iterations=state["iters"], message=f"phase 2: {status}")

    # clean recomputation of basic values at the final basis
    B.refactor()
    nonbasic = [j for j in range(N) if j not in basis_set]
    rhs_eff = lp.rhs - cols[:, nonbasic] @ z[nonbasic]
    z_basic = lu_solve(B.lu, rhs_eff)
    z[B.basis] = z_basic

    y = B.btran(phase2_c[B.basis])
    obj = float(phase2_c[:art0] @ z[:art0])
    duals = np.asarray(y, dtype=float)
    if lp.maximize:
        obj = -obj
        duals = -duals
    return LpSolution(status=OPTIMAL, x=z[:n_struct].copy(), objective=obj,
                      duals=duals, iterations=state["iters"])
