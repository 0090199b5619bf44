"""Canonical LP/MILP problems and a self-contained branch-and-bound solver.

Problems are tiny (a few thousand variables at most), so the bundled
bounded-variable simplex is adequate. An external LP engine can be plugged
in through the ``lp_backend`` argument of the solve functions; it must match
the signature of :func:`zoneclear.simplex.solve_bounded_lp`.
"""

from __future__ import annotations

import heapq
import io
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from . import simplex
from .simplex import OPTIMAL, INFEASIBLE, UNBOUNDED, ITERATION_LIMIT

NUMERICAL_FAILURE = "NumericalFailure"

BOUND_TOL = 1e-7       # |x - bound| on reported solutions
FEASIBILITY_TOL = 1e-6  # absolute constraint violation, MW scale
MIP_GAP = 1e-6          # absolute objective gap for branch and bound
INTEGRALITY_TOL = 1e-6
NODE_LIMIT = 10**6

LpBackend = Callable[..., simplex.LpResult]


class MalformedProblem(ValueError):
    """Problem data violates a CanonicalProblem invariant."""


class InfeasibleFixing(ValueError):
    """A requested binary fixing admits no feasible point."""


class NodeLimitExceeded(RuntimeError):
    """Branch and bound exceeded its node budget (pathological input)."""


@dataclass(frozen=True)
class Constraint:
    """Sparse linear row: sum(coef * x[idx]) (sense) rhs."""

    coeffs: tuple[tuple[int, float], ...]
    sense: str  # "<=", ">=", "="
    rhs: float


@dataclass
class CanonicalProblem:
    """Minimization LP/MILP with finite variable bounds.

    Variables in ``binaries`` have their bounds forced into [0, 1] and are
    required to be integral by solve_milp.
    """

    n_vars: int
    objective: list[float]
    var_bounds: list[tuple[float, float]]
    constraints: list[Constraint] = field(default_factory=list)
    binaries: frozenset[int] = frozenset()

    def validate(self) -> None:
        if len(self.objective) != self.n_vars or len(self.var_bounds) != self.n_vars:
            raise MalformedProblem("objective/bounds length != n_vars")
        for j, (lo, hi) in enumerate(self.var_bounds):
            if not (np.isfinite(lo) and np.isfinite(hi)):
                raise MalformedProblem(f"variable {j}: bounds must be finite")
            if lo > hi:
                raise MalformedProblem(f"variable {j}: lo {lo} > hi {hi}")
        for i, con in enumerate(self.constraints):
            if con.sense not in ("<=", ">=", "="):
                raise MalformedProblem(f"constraint {i}: bad sense {con.sense!r}")
            for j, _ in con.coeffs:
                if not 0 <= j < self.n_vars:
                    raise MalformedProblem(f"constraint {i}: index {j} out of range")
        for j in self.binaries:
            if not 0 <= j < self.n_vars:
                raise MalformedProblem(f"binary index {j} out of range")


@dataclass
class Solution:
    status: str
    x: Optional[np.ndarray]
    objective: float
    duals: Optional[np.ndarray] = None
    nodes: int = 0
    iterations: int = 0


def _dense_arrays(p: CanonicalProblem):
    m = len(p.constraints)
    A = np.zeros((m, p.n_vars))
    b = np.zeros(m)
    senses = []
    for i, con in enumerate(p.constraints):
        for j, v in con.coeffs:
            A[i, j] += v
        b[i] = con.rhs
        senses.append(con.sense)
    c = np.asarray(p.objective, dtype=float)
    lo = np.array([bb[0] for bb in p.var_bounds])
    hi = np.array([bb[1] for bb in p.var_bounds])
    for j in p.binaries:
        lo[j] = max(lo[j], 0.0)
        hi[j] = min(hi[j], 1.0)
    return c, A, senses, b, lo, hi


def _to_solution(res: simplex.LpResult) -> Solution:
    if res.status == OPTIMAL:
        return Solution(OPTIMAL, res.x, res.objective, res.duals,
                        iterations=res.iterations)
    status = NUMERICAL_FAILURE if res.status == ITERATION_LIMIT else res.status
    return Solution(status, None, np.nan, None, iterations=res.iterations)


def solve_lp(p: CanonicalProblem, *, lp_backend: LpBackend = simplex.solve_bounded_lp
             ) -> Solution:
    """Solve the LP relaxation (binaries treated as continuous in [0, 1])."""
    p.validate()
    c, A, senses, b, lo, hi = _dense_arrays(p)
    return _to_solution(lp_backend(c, A, senses, b, lo, hi))


def _fractional_binaries(x: np.ndarray, binaries: Sequence[int]) -> list[tuple[float, int]]:
    out = []
    for j in binaries:
        f = abs(x[j] - round(x[j]))
        if f > INTEGRALITY_TOL:
            out.append((f, j))
    return out


def solve_milp(p: CanonicalProblem, *, node_limit: int = NODE_LIMIT,
               lp_backend: LpBackend = simplex.solve_bounded_lp) -> Solution:
    """Branch and bound: best-bound node selection, most-fractional branching.

    Returns the global optimum within an absolute objective gap of
    ``MIP_GAP``; the incumbent has all binaries within INTEGRALITY_TOL of
    {0, 1} (branch bounds pin them exactly).
    """
    p.validate()
    c, A, senses, b, lo0, hi0 = _dense_arrays(p)
    binaries = sorted(p.binaries)
    if not binaries:
        return _to_solution(lp_backend(c, A, senses, b, lo0, hi0))

    def node_lp(lo, hi):
        return lp_backend(c, A, senses, b, lo, hi)

    root = node_lp(lo0, hi0)
    if root.status != OPTIMAL:
        return _to_solution(root)

    incumbent: Optional[np.ndarray] = None
    incumbent_obj = np.inf
    nodes = 1
    iters = root.iterations

    # rounding heuristic at the root: a good incumbent makes best-bound prune
    frac = _fractional_binaries(root.x, binaries)
    if frac:
        lo_h, hi_h = lo0.copy(), hi0.copy()
        for j in binaries:
            v = float(round(root.x[j]))
            lo_h[j] = hi_h[j] = v
        h = node_lp(lo_h, hi_h)
        iters += h.iterations
        if h.status == OPTIMAL:
            incumbent, incumbent_obj = h.x, h.objective
    else:
        incumbent, incumbent_obj = root.x, root.objective

    heap: list = []
    seq = 0
    if frac:
        heapq.heappush(heap, (root.objective, seq, lo0, hi0, root))

    while heap:
        bound, _, lo, hi, res = heapq.heappop(heap)
        if bound >= incumbent_obj - MIP_GAP:
            break  # best-bound: no remaining node can improve
        frac = _fractional_binaries(res.x, binaries)
        if not frac:
            if res.objective < incumbent_obj:
                incumbent, incumbent_obj = res.x, res.objective
            continue
        frac.sort(key=lambda t: (-t[0], t[1]))  # most fractional, lowest index
        j = frac[0][1]
        for fix in (0.0, 1.0):
            if nodes >= node_limit:
                raise NodeLimitExceeded(f"branch and bound exceeded {node_limit} nodes")
            lo2, hi2 = lo.copy(), hi.copy()
            lo2[j] = hi2[j] = fix
            child = node_lp(lo2, hi2)
            nodes += 1
            iters += child.iterations
            if child.status != OPTIMAL:
                continue
            if child.objective >= incumbent_obj - MIP_GAP:
                continue
            if _fractional_binaries(child.x, binaries):
                seq += 1
                heapq.heappush(heap, (child.objective, seq, lo2, hi2, child))
            elif child.objective < incumbent_obj:
                incumbent, incumbent_obj = child.x, child.objective

    if incumbent is None:
        return Solution(INFEASIBLE, None, np.nan, nodes=nodes, iterations=iters)
    return Solution(OPTIMAL, incumbent, float(incumbent_obj), None,
                    nodes=nodes, iterations=iters)


def duals_at_fixed_binaries(p: CanonicalProblem,
                            binary_values: Mapping[int, float] | Sequence[float] | np.ndarray,
                            *, lp_backend: LpBackend = simplex.solve_bounded_lp
                            ) -> Solution:
    """Solve the LP with binaries fixed as constants; duals populated.

    binary_values may map binary index -> value, or be a full-length
    solution vector (e.g. a solve_milp incumbent).
    """
    p.validate()
    c, A, senses, b, lo, hi = _dense_arrays(p)
    for j in sorted(p.binaries):
        if isinstance(binary_values, Mapping):
            v = binary_values[j]
        else:
            v = binary_values[j]
        if abs(v - round(v)) > INTEGRALITY_TOL:
            raise InfeasibleFixing(f"binary {j} fixed to non-integral value {v}")
        lo[j] = hi[j] = float(round(v))
    res = lp_backend(c, A, senses, b, lo, hi)
    if res.status == INFEASIBLE:
        raise InfeasibleFixing("no feasible point with the given binary fixing")
    return _to_solution(res)


def check_solution(p: CanonicalProblem, sol: Solution) -> list[str]:
    """Feasibility audit of an Optimal solution; returns human-readable issues."""
    issues: list[str] = []
    if sol.status != OPTIMAL:
        return [f"status {sol.status}"]
    x = sol.x
    for j, (lo, hi) in enumerate(p.var_bounds):
        if j in p.binaries:
            lo, hi = max(lo, 0.0), min(hi, 1.0)
        if x[j] < lo - BOUND_TOL or x[j] > hi + BOUND_TOL:
            issues.append(f"variable {j} = {x[j]} outside [{lo}, {hi}]")
    for i, con in enumerate(p.constraints):
        lhs = sum(v * x[j] for j, v in con.coeffs)
        err = lhs - con.rhs
        if con.sense == "=" and abs(err) > FEASIBILITY_TOL:
            issues.append(f"constraint {i}: |{lhs} - {con.rhs}| > tol")
        elif con.sense == "<=" and err > FEASIBILITY_TOL:
            issues.append(f"constraint {i}: {lhs} > {con.rhs}")
        elif con.sense == ">=" and err < -FEASIBILITY_TOL:
            issues.append(f"constraint {i}: {lhs} < {con.rhs}")
    for j in p.binaries:
        if abs(x[j] - round(x[j])) > INTEGRALITY_TOL:
            issues.append(f"binary {j} = {x[j]} not integral")
    return issues


def dump_problem(p: CanonicalProblem, names: Optional[Sequence[str]] = None) -> str:
    """Plain-text dump: one line per constraint, fixed-point coefficients.

    Format (documented in the README):
        minimize: <coef>*<var> ...
        bounds:   <lo> <= <var> <= <hi>   (binaries flagged)
        row <i>:  <coef>*<var> ... <sense> <rhs>
    """
    def name(j: int) -> str:
        return names[j] if names else f"x{j}"

    buf = io.StringIO()
    terms = [f"{cj:+.6f}*{name(j)}" for j, cj in enumerate(p.objective) if cj != 0.0]
    buf.write("minimize: " + " ".join(terms) + "\n")
    for j, (lo, hi) in enumerate(p.var_bounds):
        tag = "  [binary]" if j in p.binaries else ""
        buf.write(f"bounds: {lo:.6f} <= {name(j)} <= {hi:.6f}{tag}\n")
    for i, con in enumerate(p.constraints):
        lhs = " ".join(f"{v:+.6f}*{name(j)}" for j, v in con.coeffs)
        buf.write(f"row {i}: {lhs} {con.sense} {con.rhs:.6f}\n")
    return buf.getvalue()
