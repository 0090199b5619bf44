"""Market-clearing formulations.

Translates a MarketInstance plus a formulation choice into a canonical
LP/MILP and maps solutions back to market quantities.

Variants:

* ``LOSSLESS``       -- plain ATC-bounded clearing, losses ignored.
* ``FIXED_LOSSES``   -- losses are exogenous estimates added to the demand
                        of the endpoint zones (half each), price-independent.
* ``LINEAR_LF``      -- selected lines split into forward/reverse flows with
                        a direction binary; loss = alpha*(f+ + f-) + beta.
* ``PIECEWISE_LF``   -- selected lines carry one flow variable and one
                        ordered indicator per segment and direction; the
                        active segment's (alpha_k, beta_k) prices the loss.
* ``RELAXED_LINEAR_LF`` -- no binaries; the loss variable is only bounded
                        below by the linear loss expression. Exact when all
                        zonal prices are positive, otherwise the solver can
                        manufacture artificial losses.

Losses enter each endpoint zone's balance with weight one half. Zonal
prices are the balance-row duals; for the binary variants they are taken
from the LP with binaries fixed at the incumbent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from . import milp
from .milp import CanonicalProblem, Constraint, Solution
from .model import HVDC, Interconnector, MarketInstance

LOSSLESS = "Lossless"
FIXED_LOSSES = "FixedLosses"
LINEAR_LF = "LinearLF"
PIECEWISE_LF = "PiecewiseLF"
RELAXED_LINEAR_LF = "RelaxedLinearLF"

_VARIANTS = (LOSSLESS, FIXED_LOSSES, LINEAR_LF, PIECEWISE_LF, RELAXED_LINEAR_LF)

# values this close to zero are snapped when mapping solutions back to MW
_SNAP = 1e-9


class UncalibratedLine(ValueError):
    """A selected line lacks the factors the variant needs."""


class SegmentGridMismatch(ValueError):
    """Piecewise segment grid does not end at the line rating."""


class StatusNotOptimal(RuntimeError):
    """Solution extraction requires an Optimal solve."""


@dataclass(frozen=True)
class FormulationSpec:
    """Which clearing variant to build and on which lines.

    fixed_estimates (MW per line id) are price-independent loss purchases:
    the whole story for FIXED_LOSSES, and an optional complement for the
    loss-factor variants on lines outside lf_selection (e.g. AC lines when
    only HVDC lines carry factors).
    """

    variant: str = LOSSLESS
    lf_selection: frozenset[str] = frozenset()
    fixed_estimates: Mapping[str, float] = field(default_factory=dict)

    def validate(self, instance: MarketInstance) -> None:
        if self.variant not in _VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        for line_id, est in self.fixed_estimates.items():
            if est < 0:
                raise ValueError(f"fixed estimate for {line_id} is negative")
        if self.variant in (LINEAR_LF, RELAXED_LINEAR_LF, PIECEWISE_LF):
            for line_id in self.lf_selection:
                line = instance.line(line_id)
                model = line.loss_model
                if model is None:
                    raise UncalibratedLine(f"line {line_id}: no loss model")
                if self.variant in (LINEAR_LF, RELAXED_LINEAR_LF) and model.linear is None:
                    raise UncalibratedLine(f"line {line_id}: linear factors not calibrated")
                if self.variant == PIECEWISE_LF:
                    if not model.piecewise:
                        raise UncalibratedLine(f"line {line_id}: piecewise factors not calibrated")
                    if abs(model.piecewise[-1].hi - line.rated_capacity) > 1e-9:
                        raise SegmentGridMismatch(
                            f"line {line_id}: segments end at {model.piecewise[-1].hi}, "
                            f"rating is {line.rated_capacity}")


@dataclass
class ClearingProblem:
    """Canonical problem plus the symbol table mapping variables back."""

    problem: CanonicalProblem
    instance: MarketInstance
    spec: FormulationSpec
    gen_vars: dict[str, int]
    flow_vars: dict[str, int]                      # plain-flow lines
    pair_vars: dict[str, tuple[int, int]]          # (f+, f-) for selected lines
    dir_binaries: dict[str, int]                   # u, LINEAR_LF only
    relax_loss_vars: dict[str, int]                # p, RELAXED_LINEAR_LF only
    pw_vars: dict[str, dict[str, list[int]]]       # fp/fm/up/um per segment
    balance_rows: dict[str, int]
    loss_terms: dict[str, list[tuple[int, float]]]  # variable part of each loss
    loss_consts: dict[str, float]                   # constant part of each loss
    var_names: list[str]


@dataclass
class DispatchResult:
    """Market quantities recovered from an optimal solve."""

    timestamp: int
    status: str
    objective: float
    generation: dict[str, float]
    flow: dict[str, float]               # signed, positive = from_zone -> to_zone
    modeled_loss: dict[str, float]
    zonal_price: dict[str, float]
    pair_flows: dict[str, tuple[float, float]]  # (f+, f-) for selected lines


class _Builder:
    def __init__(self) -> None:
        self.objective: list[float] = []
        self.bounds: list[tuple[float, float]] = []
        self.names: list[str] = []
        self.binaries: set[int] = set()

    def var(self, name: str, lo: float, hi: float, cost: float = 0.0,
            binary: bool = False) -> int:
        j = len(self.objective)
        self.objective.append(cost)
        self.bounds.append((lo, hi))
        self.names.append(name)
        if binary:
            self.binaries.add(j)
        return j


def build_problem(instance: MarketInstance, spec: FormulationSpec) -> ClearingProblem:
    """Assemble the clearing problem for one hour."""
    spec.validate(instance)
    b = _Builder()
    constraints: list[Constraint] = []

    gen_vars = {g.id: b.var(f"g[{g.id}]", g.p_min, g.p_max, cost=g.cost)
                for g in instance.generators}

    flow_vars: dict[str, int] = {}
    pair_vars: dict[str, tuple[int, int]] = {}
    dir_binaries: dict[str, int] = {}
    relax_loss_vars: dict[str, int] = {}
    pw_vars: dict[str, dict[str, list[int]]] = {}
    loss_terms: dict[str, list[tuple[int, float]]] = {}
    loss_consts: dict[str, float] = {}
    # flow expression per line (variable terms), used in the balances
    flow_terms: dict[str, list[tuple[int, float]]] = {}

    selected = spec.lf_selection if spec.variant in (
        LINEAR_LF, PIECEWISE_LF, RELAXED_LINEAR_LF) else frozenset()

    for line in instance.interconnectors:
        if line.id not in selected:
            j = b.var(f"f[{line.id}]", -line.atc_rev, line.atc_fwd)
            flow_vars[line.id] = j
            flow_terms[line.id] = [(j, 1.0)]
            est = spec.fixed_estimates.get(line.id)
            if est is not None:
                loss_terms[line.id] = []
                loss_consts[line.id] = float(est)
            continue

        model = line.loss_model
        if spec.variant in (LINEAR_LF, RELAXED_LINEAR_LF):
            fp = b.var(f"f+[{line.id}]", 0.0, line.atc_fwd)
            fm = b.var(f"f-[{line.id}]", 0.0, line.atc_rev)
            pair_vars[line.id] = (fp, fm)

        if spec.variant == LINEAR_LF:
            alpha, beta = model.linear.alpha, model.linear.beta
            u = b.var(f"u[{line.id}]", 0.0, 1.0, binary=True)
            dir_binaries[line.id] = u
            constraints.append(Constraint(((fp, 1.0), (u, -line.atc_fwd)), "<=", 0.0))
            constraints.append(Constraint(((fm, 1.0), (u, line.atc_rev)), "<=", line.atc_rev))
            flow_terms[line.id] = [(fp, 1.0), (fm, -1.0)]
            loss_terms[line.id] = [(fp, alpha), (fm, alpha)]
            loss_consts[line.id] = beta

        elif spec.variant == RELAXED_LINEAR_LF:
            alpha, beta = model.linear.alpha, model.linear.beta
            p_max = alpha * (line.atc_fwd + line.atc_rev) + beta
            p = b.var(f"p[{line.id}]", 0.0, p_max)
            relax_loss_vars[line.id] = p
            # loss bounded below only: p >= alpha*(f+ + f-) + beta
            constraints.append(Constraint(
                ((p, -1.0), (fp, alpha), (fm, alpha)), "<=", -beta))
            flow_terms[line.id] = [(fp, 1.0), (fm, -1.0)]
            loss_terms[line.id] = [(p, 1.0)]
            loss_consts[line.id] = 0.0

        else:  # PIECEWISE_LF
            segs = model.piecewise
            K = len(segs)
            fps = [b.var(f"f+{k}[{line.id}]", 0.0, segs[k].hi) for k in range(K)]
            fms = [b.var(f"f-{k}[{line.id}]", 0.0, segs[k].hi) for k in range(K)]
            ups = [b.var(f"u+{k}[{line.id}]", 0.0, 1.0, binary=True) for k in range(K)]
            ums = [b.var(f"u-{k}[{line.id}]", 0.0, 1.0, binary=True) for k in range(K)]
            pw_vars[line.id] = {"fp": fps, "fm": fms, "up": ups, "um": ums}
            for fvars, uvars in ((fps, ups), (fms, ums)):
                for k in range(K):
                    lo_k, hi_k = segs[k].lo, segs[k].hi
                    if k < K - 1:
                        ind = ((uvars[k], 1.0), (uvars[k + 1], -1.0))
                    else:
                        ind = ((uvars[k], 1.0),)
                    # (u_k - u_{k+1}) * lo_k <= f_k <= (u_k - u_{k+1}) * hi_k
                    constraints.append(Constraint(
                        ((fvars[k], 1.0),) + tuple((v, -hi_k * s) for v, s in ind),
                        "<=", 0.0))
                    constraints.append(Constraint(
                        ((fvars[k], -1.0),) + tuple((v, lo_k * s) for v, s in ind),
                        "<=", 0.0))
                for k in range(K - 1):
                    constraints.append(Constraint(
                        ((uvars[k + 1], 1.0), (uvars[k], -1.0)), "<=", 0.0))
            # hourly ATC caps the total flow; the segment grid stays on the rating
            constraints.append(Constraint(
                tuple((j, 1.0) for j in fps), "<=", line.atc_fwd))
            constraints.append(Constraint(
                tuple((j, 1.0) for j in fms), "<=", line.atc_rev))
            flow_terms[line.id] = [(j, 1.0) for j in fps] + [(j, -1.0) for j in fms]
            terms = [(j, segs[k].alpha) for k, j in enumerate(fps)]
            terms += [(j, segs[k].alpha) for k, j in enumerate(fms)]
            prev_beta = 0.0
            for k in range(K):
                terms.append((ups[k], segs[k].beta - prev_beta))
                terms.append((ums[k], segs[k].beta - prev_beta))
                prev_beta = segs[k].beta
            loss_terms[line.id] = terms
            loss_consts[line.id] = 0.0

    # zonal balances: generation + inflow - outflow - 0.5 * incident loss = load
    balance_rows: dict[str, int] = {}
    for zone in instance.zones:
        coeffs: dict[int, float] = {}
        rhs = zone.demand + zone.fixed_injection
        for g in instance.generators:
            if g.zone == zone.id:
                coeffs[gen_vars[g.id]] = coeffs.get(gen_vars[g.id], 0.0) + 1.0
        for line in instance.interconnectors:
            if zone.id not in (line.from_zone, line.to_zone):
                continue
            sign = -1.0 if line.from_zone == zone.id else 1.0
            for j, v in flow_terms[line.id]:
                coeffs[j] = coeffs.get(j, 0.0) + sign * v
            if line.id in loss_terms:
                for j, v in loss_terms[line.id]:
                    coeffs[j] = coeffs.get(j, 0.0) - 0.5 * v
                rhs += 0.5 * loss_consts[line.id]
        balance_rows[zone.id] = len(constraints)
        constraints.append(Constraint(tuple(coeffs.items()), "=", rhs))

    problem = CanonicalProblem(
        n_vars=len(b.objective), objective=b.objective, var_bounds=b.bounds,
        constraints=constraints, binaries=frozenset(b.binaries))
    return ClearingProblem(
        problem=problem, instance=instance, spec=spec, gen_vars=gen_vars,
        flow_vars=flow_vars, pair_vars=pair_vars, dir_binaries=dir_binaries,
        relax_loss_vars=relax_loss_vars, pw_vars=pw_vars,
        balance_rows=balance_rows, loss_terms=loss_terms,
        loss_consts=loss_consts, var_names=b.names)


def _snap(v: float) -> float:
    return 0.0 if abs(v) < _SNAP else float(v)


def extract_result(cp: ClearingProblem, sol: Solution, *,
                   lp_backend: milp.LpBackend = None) -> DispatchResult:
    """Map an optimal solution back to market quantities.

    Zonal prices come from the balance-row duals; if the solve carried
    binaries, the pricing LP refixes them at the incumbent values.
    """
    if sol.status != milp.simplex.OPTIMAL:
        raise StatusNotOptimal(f"cannot extract from status {sol.status}")
    x = sol.x
    kw = {} if lp_backend is None else {"lp_backend": lp_backend}
    if sol.duals is None:
        priced = milp.duals_at_fixed_binaries(cp.problem, x, **kw)
        duals = priced.duals
    else:
        duals = sol.duals

    generation = {gid: float(x[j]) for gid, j in cp.gen_vars.items()}
    flow: dict[str, float] = {}
    pair_flows: dict[str, tuple[float, float]] = {}
    for line in cp.instance.interconnectors:
        if line.id in cp.flow_vars:
            flow[line.id] = _snap(x[cp.flow_vars[line.id]])
        elif line.id in cp.pair_vars:
            fp, fm = cp.pair_vars[line.id]
            pair_flows[line.id] = (_snap(x[fp]), _snap(x[fm]))
            flow[line.id] = pair_flows[line.id][0] - pair_flows[line.id][1]
        else:  # piecewise: sum segment flows
            pw = cp.pw_vars[line.id]
            fplus = _snap(sum(x[j] for j in pw["fp"]))
            fminus = _snap(sum(x[j] for j in pw["fm"]))
            pair_flows[line.id] = (fplus, fminus)
            flow[line.id] = fplus - fminus

    modeled_loss = {}
    for line_id, terms in cp.loss_terms.items():
        modeled_loss[line_id] = float(
            sum(v * x[j] for j, v in terms) + cp.loss_consts[line_id])

    zonal_price = {zid: float(duals[row]) for zid, row in cp.balance_rows.items()}
    return DispatchResult(
        timestamp=cp.instance.timestamp, status=sol.status,
        objective=float(sol.objective), generation=generation, flow=flow,
        modeled_loss=modeled_loss, zonal_price=zonal_price, pair_flows=pair_flows)


def clear_instance(instance: MarketInstance, spec: FormulationSpec, *,
                   lp_backend: milp.LpBackend = None
                   ) -> tuple[ClearingProblem, Solution]:
    """Build and solve one hour; MILP when the variant carries binaries."""
    cp = build_problem(instance, spec)
    kw = {} if lp_backend is None else {"lp_backend": lp_backend}
    if cp.problem.binaries:
        sol = milp.solve_milp(cp.problem, **kw)
    else:
        sol = milp.solve_lp(cp.problem, **kw)
    return cp, sol


def balance_residuals(cp: ClearingProblem, result: DispatchResult) -> dict[str, float]:
    """Per-zone residual: (gen + inflow - outflow - load) - 0.5 * incident losses.

    Zero (to solver tolerance) on every solved hour; exposes the 50/50 loss
    split for verification.
    """
    out = {}
    inst = cp.instance
    for zone in inst.zones:
        acc = -(zone.demand + zone.fixed_injection)
        for g in inst.generators:
            if g.zone == zone.id:
                acc += result.generation[g.id]
        half_losses = 0.0
        for line in inst.interconnectors:
            if zone.id not in (line.from_zone, line.to_zone):
                continue
            acc += result.flow[line.id] if line.to_zone == zone.id else -result.flow[line.id]
            if line.id in result.modeled_loss:
                half_losses += 0.5 * result.modeled_loss[line.id]
        out[zone.id] = acc - half_losses
    return out
