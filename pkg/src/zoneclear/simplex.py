"""Bounded-variable primal simplex.

Solves  min c @ x  s.t.  A x (<=, >=, =) b,  lo <= x <= hi  with all bounds
finite. Two phases: artificial variables carry the initial residuals and are
driven to zero, then the true objective is optimized from the feasible basis.

The dense basis inverse is updated by elementary row operations on each pivot
and refactorized periodically. Entering variable: Dantzig rule (largest
reduced-cost violation, ties to the lowest index); Bland's rule takes over
after a run of degenerate pivots to guarantee termination. All tie-breaking
is by lowest index, so solves are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
UNBOUNDED = "Unbounded"
ITERATION_LIMIT = "IterationLimit"

# Absolute tolerances; problem data is on the MW scale.
_PIVOT_TOL = 1e-9
_COST_TOL = 1e-9
_FEAS_TOL = 1e-7
_DEGEN_PIVOTS_BEFORE_BLAND = 1000
_REFACTOR_EVERY = 100


@dataclass
class LpResult:
    status: str
    x: Optional[np.ndarray]  # structural variables only
    objective: float
    duals: Optional[np.ndarray]  # one per constraint row, d obj / d rhs
    reduced_costs: Optional[np.ndarray]  # structural variables only
    iterations: int


class _Tableau:
    """Working state shared by both simplex phases."""

    def __init__(self, cols: np.ndarray, lo: np.ndarray, hi: np.ndarray,
                 b: np.ndarray, basis: np.ndarray, x: np.ndarray):
        self.cols = cols          # m x N full column matrix
        self.lo = lo
        self.hi = hi
        self.b = b
        self.basis = basis        # indices of basic variables, len m
        self.x = x                # current values, len N
        m = cols.shape[0]
        self.binv = np.eye(m)
        self.in_basis = np.zeros(cols.shape[1], dtype=bool)
        self.in_basis[basis] = True
        self.refactor()

    def refactor(self) -> None:
        B = self.cols[:, self.basis]
        self.binv = np.linalg.inv(B)
        # recompute basic values from the nonbasic bounds to shed drift
        xn = self.x.copy()
        xn[self.basis] = 0.0
        self.x[self.basis] = self.binv @ (self.b - self.cols @ xn)

    def pivot(self, enter: int, leave_pos: int, w: np.ndarray) -> None:
        r = leave_pos
        piv = w[r]
        self.in_basis[self.basis[r]] = False
        self.in_basis[enter] = True
        self.basis[r] = enter
        self.binv[r] /= piv
        others = np.arange(len(w)) != r
        self.binv[others] -= np.outer(w[others], self.binv[r])


def _run_phase(t: _Tableau, c: np.ndarray, max_iter: int,
               start_iter: int) -> tuple[str, int]:
    """Iterate until optimal for cost vector c. Returns (status, iterations)."""
    m = t.cols.shape[0]
    n_all = t.cols.shape[1]
    fixed = t.hi - t.lo <= 0.0
    degen = 0
    bland = False
    it = start_iter
    since_refactor = 0
    while True:
        if it >= max_iter:
            return ITERATION_LIMIT, it
        it += 1
        y = c[t.basis] @ t.binv
        d = c - y @ t.cols
        at_lo = ~t.in_basis & (t.x <= t.lo + _FEAS_TOL)
        eligible = ~t.in_basis & ~fixed & (
            (at_lo & (d < -_COST_TOL)) | (~at_lo & (d > _COST_TOL)))
        idx = np.flatnonzero(eligible)
        if idx.size == 0:
            return OPTIMAL, it
        if bland:
            j = int(idx[0])
        else:
            j = int(idx[np.argmax(np.abs(d[idx]))])
            # lowest index among equal violations
            best = np.abs(d[j])
            ties = idx[np.abs(d[idx]) >= best - 1e-15]
            j = int(ties[0])
        entering_from_lo = bool(at_lo[j])
        delta = 1.0 if entering_from_lo else -1.0
        w = t.binv @ t.cols[:, j]

        # ratio test: basic variables move by -delta * step * w
        flip_limit = t.hi[j] - t.lo[j]
        dw = delta * w
        xb = t.x[t.basis]
        lims = np.full(m, np.inf)
        pos = dw > _PIVOT_TOL
        neg = dw < -_PIVOT_TOL
        lims[pos] = (xb[pos] - t.lo[t.basis[pos]]) / dw[pos]
        lims[neg] = (t.hi[t.basis[neg]] - xb[neg]) / (-dw[neg])
        min_lim = lims.min() if m else np.inf
        if min_lim < flip_limit - 1e-12:
            # pivot; lowest variable index among tied blocking rows
            cand = np.flatnonzero(lims <= min_lim + 1e-12)
            leave_pos = int(cand[np.argmin(t.basis[cand])])
            leave_to_lo = bool(pos[leave_pos])
            step = max(min_lim, 0.0)
        else:
            leave_pos = -1
            leave_to_lo = False
            step = flip_limit
        if step == np.inf:  # unreachable with finite bounds; kept as a guard
            return UNBOUNDED, it
        if step <= 1e-11:
            degen += 1
            if degen >= _DEGEN_PIVOTS_BEFORE_BLAND:
                bland = True
        else:
            degen = 0

        t.x[t.basis] -= dw * step
        t.x[j] = (t.lo[j] if entering_from_lo else t.hi[j]) + delta * step
        if leave_pos < 0:
            # bound flip, basis unchanged
            t.x[j] = t.hi[j] if entering_from_lo else t.lo[j]
            continue
        out = t.basis[leave_pos]
        t.x[out] = t.lo[out] if leave_to_lo else t.hi[out]
        t.pivot(j, leave_pos, w)
        since_refactor += 1
        if since_refactor >= _REFACTOR_EVERY:
            t.refactor()
            since_refactor = 0


def solve_bounded_lp(c, A, senses, b, lo, hi, *,
                     max_iter: Optional[int] = None) -> LpResult:
    """Solve min c@x s.t. A x (senses) b, lo <= x <= hi, all bounds finite.

    senses is a sequence of "<=", ">=" or "=" per row. Duals are reported as
    the marginal objective change per unit of rhs.
    """
    c = np.asarray(c, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n = c.size
    m = b.size
    if m == 0:
        x = np.where(c > 0, lo, np.where(c < 0, hi, lo))
        return LpResult(OPTIMAL, x, float(c @ x), np.zeros(0), c.copy(), 0)
    if A.shape != (m, n):
        A = A.reshape(m, n)
    if max_iter is None:
        max_iter = 50 * (n + m)

    # cap for slack variables: no feasible point can push a row further
    row_reach = np.abs(A) @ np.maximum(np.abs(lo), np.abs(hi))
    cap = row_reach + np.abs(b) + 1.0

    s_lo = np.zeros(m)
    s_hi = np.zeros(m)
    for i, s in enumerate(senses):
        if s == "<=":
            s_hi[i] = cap[i]
        elif s == ">=":
            s_lo[i] = -cap[i]
        elif s != "=":
            raise ValueError(f"unknown sense {s!r}")

    # start: structural at lo, slacks at 0; artificials absorb the residual
    x0 = lo.copy()
    r = b - A @ x0
    art_sign = np.where(r >= 0, 1.0, -1.0)

    N = n + m + m
    cols = np.zeros((m, N))
    cols[:, :n] = A
    cols[:, n:n + m] = np.eye(m)
    cols[:, n + m:] = np.eye(m)
    lo_all = np.concatenate([lo, s_lo, np.minimum(r, 0.0)])
    hi_all = np.concatenate([hi, s_hi, np.maximum(r, 0.0)])
    x_all = np.concatenate([x0, np.zeros(m), r])
    basis = np.arange(n + m, N)

    t = _Tableau(cols, lo_all, hi_all, b, basis, x_all)

    # phase 1: drive artificials to zero
    c1 = np.zeros(N)
    c1[n + m:] = art_sign
    status, it = _run_phase(t, c1, max_iter, 0)
    if status != OPTIMAL:
        return LpResult(status, None, np.nan, None, None, it)
    infeas = float(c1 @ t.x)
    if infeas > _FEAS_TOL:
        return LpResult(INFEASIBLE, None, np.nan, None, None, it)

    # phase 2: artificials pinned at zero
    t.lo[n + m:] = 0.0
    t.hi[n + m:] = 0.0
    t.x[n + m:][~t.in_basis[n + m:]] = 0.0
    t.refactor()
    c2 = np.zeros(N)
    c2[:n] = c
    status, it = _run_phase(t, c2, max_iter, it)
    if status != OPTIMAL:
        return LpResult(status, None, np.nan, None, None, it)

    t.refactor()
    x = t.x[:n].copy()
    np.clip(x, lo, hi, out=x)
    y = c2[t.basis] @ t.binv
    d = c - y @ A
    return LpResult(OPTIMAL, x, float(c @ x), y.copy(), d, it)
