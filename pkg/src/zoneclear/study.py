"""Five-scenario comparative study over an hourly instance series.

Scenarios:

* S1_NoLF           -- no loss factors; every loss-modeled line gets a
                       two-pass price-independent loss estimate.
* S2_LinearHVDC     -- linear factors on HVDC lines; AC losses estimated
                       two-pass.
* S3_PiecewiseHVDC  -- piecewise factors on HVDC lines; AC losses estimated
                       two-pass.
* S4_LinearACHVDC   -- linear factors on AC and HVDC lines.
* S5_PiecewiseACHVDC -- piecewise factors on AC and HVDC lines.

Two-pass estimation solves the lossless problem once, converts the resulting
flows to quadratic losses and re-solves exactly once with those estimates
added to the endpoint zones' demand. Losses for scenario comparison are
always recomputed ex-post from realized flows with the quadratic models.
"""

from __future__ import annotations

import csv
import gzip
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from typing import Iterable, Optional, Sequence

from . import formulations as fm
from .calibration import FlowHistory, linear_factors, piecewise_factors, quadratic_loss
from .milp import LpBackend
from .model import AC, HVDC, Interconnector, MarketInstance

SCENARIOS = ("S1_NoLF", "S2_LinearHVDC", "S3_PiecewiseHVDC",
             "S4_LinearACHVDC", "S5_PiecewiseACHVDC")

PRICE_DIFF_TOL = 1e-6  # EUR/MWh; below this an hour counts as zero-price-difference
_FIXED_POINT_TOL = 1e-6  # MW


class CalibrationMissing(ValueError):
    """A scenario selects a line whose factors are not calibrated."""


class SeriesMismatch(ValueError):
    """Scenario results cover different hourly series."""


@dataclass(frozen=True)
class StudyConfig:
    segment_mw: float = 60.0
    workers: int = 1
    lp_backend: Optional[LpBackend] = None


@dataclass
class HourOutcome:
    timestamp: int
    status: str
    objective: float
    flows: dict[str, float]
    prices: dict[str, float]
    modeled_loss: dict[str, float]
    expost_loss: dict[str, float]       # per loss-modeled line, quadratic at realized flow
    hvdc_loss: float
    ac_loss: float
    fixed_point: bool = True            # S1: second-pass flows equal first-pass flows


@dataclass
class ScenarioResult:
    scenario: str
    hours: list[HourOutcome]
    infeasible_hours: list[int]

    def timestamps(self) -> list[int]:
        return [h.timestamp for h in self.hours]

    @property
    def system_cost(self) -> float:
        return sum(h.objective for h in self.hours)

    @property
    def hvdc_losses_gwh(self) -> float:
        return sum(h.hvdc_loss for h in self.hours) / 1000.0

    @property
    def ac_losses_gwh(self) -> float:
        return sum(h.ac_loss for h in self.hours) / 1000.0


@dataclass
class ScenarioRow:
    scenario: str
    hours: int
    infeasible: int
    system_cost_eur: float
    hvdc_losses_gwh: float
    ac_losses_gwh: float
    delta_hvdc_gwh: float
    delta_ac_gwh: float
    delta_total_gwh: float
    cost_savings_meur: float
    pct_hvdc: float
    pct_total: float


@dataclass
class StudyReport:
    reference: str
    rows: list[ScenarioRow]
    hourly: list[dict]  # per scenario-hour detail


def selections(instance: MarketInstance) -> tuple[list[str], list[str]]:
    """(HVDC ids, AC ids) of the lines carrying loss models."""
    hvdc = [l.id for l in instance.interconnectors if l.loss_model and l.kind == HVDC]
    ac = [l.id for l in instance.interconnectors if l.loss_model and l.kind == AC]
    return hvdc, ac


def calibrate_series(series: Sequence[MarketInstance],
                     histories: Optional[dict[str, FlowHistory]] = None,
                     segment_mw: float = 60.0) -> list[MarketInstance]:
    """Attach linear and piecewise factors to every loss-modeled line.

    Linear factors need a flow history per line; lines without one keep
    linear=None (scenarios that need it raise CalibrationMissing).
    """
    out = []
    for inst in series:
        lines = []
        for line in inst.interconnectors:
            model = line.loss_model
            if model is not None:
                if histories and line.id in histories:
                    model = model.with_linear(linear_factors(model, histories[line.id]))
                model = model.with_piecewise(
                    piecewise_factors(model, line.rated_capacity, segment_mw))
                line = Interconnector(line.id, line.kind, line.from_zone, line.to_zone,
                                      line.atc_fwd, line.atc_rev, line.rated_capacity, model)
            lines.append(line)
        out.append(MarketInstance(inst.timestamp, inst.zones, inst.generators, tuple(lines)))
    return out


def estimate_fixed_losses(instance: MarketInstance, lines: Iterable[str], *,
                          lp_backend: Optional[LpBackend] = None
                          ) -> tuple[dict[str, float], dict[str, float]]:
    """First pass: solve lossless, price the flows with the quadratic models.

    Returns (estimates MW per line, first-pass flows per line). The caller
    re-solves once with the estimates as price-independent demand.
    """
    cp, sol = fm.clear_instance(instance, fm.FormulationSpec(fm.LOSSLESS),
                                lp_backend=lp_backend)
    if sol.status != "Optimal":
        return {}, {}
    result = fm.extract_result(cp, sol)
    estimates = {}
    for line_id in lines:
        line = instance.line(line_id)
        estimates[line_id] = quadratic_loss(line.loss_model, result.flow[line_id])
    return estimates, dict(result.flow)


def _scenario_spec(instance: MarketInstance, scenario: str, *,
                   lp_backend: Optional[LpBackend] = None
                   ) -> tuple[fm.FormulationSpec, dict[str, float]]:
    hvdc, ac = selections(instance)
    if scenario == "S1_NoLF":
        est, first = estimate_fixed_losses(instance, hvdc + ac, lp_backend=lp_backend)
        return fm.FormulationSpec(fm.FIXED_LOSSES, fixed_estimates=est), first
    if scenario in ("S2_LinearHVDC", "S3_PiecewiseHVDC"):
        est, first = estimate_fixed_losses(instance, ac, lp_backend=lp_backend)
        variant = fm.LINEAR_LF if scenario == "S2_LinearHVDC" else fm.PIECEWISE_LF
        return fm.FormulationSpec(variant, frozenset(hvdc), fixed_estimates=est), first
    if scenario in ("S4_LinearACHVDC", "S5_PiecewiseACHVDC"):
        variant = fm.LINEAR_LF if scenario == "S4_LinearACHVDC" else fm.PIECEWISE_LF
        return fm.FormulationSpec(variant, frozenset(hvdc + ac)), {}
    raise ValueError(f"unknown scenario {scenario!r}")


def _check_calibration(instance: MarketInstance, scenario: str) -> None:
    hvdc, ac = selections(instance)
    need = []
    if scenario in ("S2_LinearHVDC", "S3_PiecewiseHVDC"):
        need = hvdc
    elif scenario in ("S4_LinearACHVDC", "S5_PiecewiseACHVDC"):
        need = hvdc + ac
    linearish = scenario in ("S2_LinearHVDC", "S4_LinearACHVDC")
    for line_id in need:
        model = instance.line(line_id).loss_model
        if linearish and model.linear is None:
            raise CalibrationMissing(f"line {line_id}: linear factors missing")
        if not linearish and not model.piecewise:
            raise CalibrationMissing(f"line {line_id}: piecewise factors missing")


def _solve_hour(instance: MarketInstance, scenario: str,
                lp_backend: Optional[LpBackend]) -> HourOutcome:
    spec, first_pass = _scenario_spec(instance, scenario, lp_backend=lp_backend)
    cp, sol = fm.clear_instance(instance, spec, lp_backend=lp_backend)
    if sol.status != "Optimal":
        return HourOutcome(instance.timestamp, sol.status, float("nan"),
                           {}, {}, {}, {}, 0.0, 0.0)
    result = fm.extract_result(cp, sol, lp_backend=lp_backend)
    expost: dict[str, float] = {}
    hvdc_loss = ac_loss = 0.0
    for line in instance.interconnectors:
        if line.loss_model is None:
            continue
        loss = quadratic_loss(line.loss_model, result.flow[line.id])
        expost[line.id] = loss
        if line.kind == HVDC:
            hvdc_loss += loss
        else:
            ac_loss += loss
    fixed_point = all(
        abs(result.flow[lid] - f0) <= _FIXED_POINT_TOL for lid, f0 in first_pass.items()
    ) if spec.variant == fm.FIXED_LOSSES else True
    return HourOutcome(instance.timestamp, sol.status, result.objective,
                       dict(result.flow), dict(result.zonal_price),
                       dict(result.modeled_loss), expost, hvdc_loss, ac_loss,
                       fixed_point)


def run_scenario(series: Sequence[MarketInstance], scenario: str,
                 config: StudyConfig = StudyConfig()) -> ScenarioResult:
    """Clear every hour of the series under one scenario.

    Hours are independent solves and may run on several worker threads;
    results are ordered by timestamp, so aggregates do not depend on the
    worker count. Infeasible hours are recorded and excluded.
    """
    if scenario not in SCENARIOS:
        raise ValueError(f"unknown scenario {scenario!r}; choose from {SCENARIOS}")
    for inst in series:
        _check_calibration(inst, scenario)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(
                lambda inst: _solve_hour(inst, scenario, config.lp_backend), series))
    else:
        outcomes = [_solve_hour(inst, scenario, config.lp_backend) for inst in series]
    outcomes.sort(key=lambda h: h.timestamp)

    ok = [h for h in outcomes if h.status == "Optimal"]
    bad = [h.timestamp for h in outcomes if h.status != "Optimal"]
    return ScenarioResult(scenario, ok, bad)


def compare_scenarios(results: Sequence[ScenarioResult],
                      reference: str = "S1_NoLF") -> StudyReport:
    """Deltas of ex-post losses (GWh) and cost savings (MEUR) vs the reference."""
    by_name = {r.scenario: r for r in results}
    if reference not in by_name:
        raise ValueError(f"reference scenario {reference!r} not among results")
    ref = by_name[reference]
    stamps = ref.timestamps()
    for r in results:
        if r.timestamps() != stamps:
            raise SeriesMismatch(
                f"{r.scenario} covers different hours than {reference}")

    ref_total = ref.hvdc_losses_gwh + ref.ac_losses_gwh
    rows = []
    hourly = []
    for r in results:
        total = r.hvdc_losses_gwh + r.ac_losses_gwh
        d_hvdc = r.hvdc_losses_gwh - ref.hvdc_losses_gwh
        d_ac = r.ac_losses_gwh - ref.ac_losses_gwh
        rows.append(ScenarioRow(
            scenario=r.scenario,
            hours=len(r.hours),
            infeasible=len(r.infeasible_hours),
            system_cost_eur=r.system_cost,
            hvdc_losses_gwh=r.hvdc_losses_gwh,
            ac_losses_gwh=r.ac_losses_gwh,
            delta_hvdc_gwh=d_hvdc,
            delta_ac_gwh=d_ac,
            delta_total_gwh=d_hvdc + d_ac,
            cost_savings_meur=(ref.system_cost - r.system_cost) / 1e6,
            pct_hvdc=(100.0 * d_hvdc / ref.hvdc_losses_gwh
                      if ref.hvdc_losses_gwh else 0.0),
            pct_total=(100.0 * (d_hvdc + d_ac) / ref_total if ref_total else 0.0),
        ))
        for h in r.hours:
            hourly.append({
                "scenario": r.scenario, "hour": h.timestamp, "status": h.status,
                "objective_eur": h.objective, "hvdc_loss_mw": h.hvdc_loss,
                "ac_loss_mw": h.ac_loss, "fixed_point": h.fixed_point,
            })
    return StudyReport(reference=reference, rows=rows, hourly=hourly)


@dataclass
class LineLossCost:
    line: str
    hours: int
    zero_price_diff_hours: int
    loss_cost_eur: float
    from_zone_share_eur: float
    to_zone_share_eur: float


def tso_loss_cost_accounting(result: ScenarioResult,
                             series: Sequence[MarketInstance]) -> list[LineLossCost]:
    """Cost of losses in zero-price-difference hours, split 50/50 per endpoint TSO.

    An hour counts for a line when its endpoint prices differ by less than
    PRICE_DIFF_TOL; the hour's loss cost is the ex-post loss times the mean
    endpoint price.
    """
    by_ts = {inst.timestamp: inst for inst in series}
    acc: dict[str, LineLossCost] = {}
    for h in result.hours:
        inst = by_ts[h.timestamp]
        for line in inst.interconnectors:
            if line.id not in h.expost_loss:
                continue
            entry = acc.setdefault(line.id, LineLossCost(line.id, 0, 0, 0.0, 0.0, 0.0))
            entry.hours += 1
            p_from = h.prices[line.from_zone]
            p_to = h.prices[line.to_zone]
            if abs(p_from - p_to) < PRICE_DIFF_TOL:
                entry.zero_price_diff_hours += 1
                cost = h.expost_loss[line.id] * 0.5 * (p_from + p_to)
                entry.loss_cost_eur += cost
                entry.from_zone_share_eur += 0.5 * cost
                entry.to_zone_share_eur += 0.5 * cost
    return [acc[k] for k in sorted(acc)]


# --- report serialization ---------------------------------------------------

_SUMMARY_FIELDS = ["scenario", "hours", "infeasible", "system_cost_eur",
                   "hvdc_losses_gwh", "ac_losses_gwh", "delta_hvdc_gwh",
                   "delta_ac_gwh", "delta_total_gwh", "cost_savings_meur",
                   "pct_hvdc", "pct_total"]

_HOURLY_FIELDS = ["scenario", "hour", "status", "objective_eur",
                  "hvdc_loss_mw", "ac_loss_mw", "fixed_point"]


def _fmt(v) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def write_report_csv(report: StudyReport, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(_SUMMARY_FIELDS)
        for row in report.rows:
            d = asdict(row)
            w.writerow([_fmt(d[k]) for k in _SUMMARY_FIELDS])


def write_hourly_csv(report: StudyReport, path, *, gzipped: bool = False) -> None:
    opener = gzip.open if gzipped else open
    with opener(path, "wt", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(_HOURLY_FIELDS)
        for h in report.hourly:
            w.writerow([_fmt(h[k]) for k in _HOURLY_FIELDS])


def write_report_json(report: StudyReport, path) -> None:
    payload = {
        "reference": report.reference,
        "scenarios": [asdict(r) for r in report.rows],
        "hourly": report.hourly,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_tso_csv(entries: Sequence[LineLossCost], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["line", "hours", "zero_price_diff_hours", "loss_cost_eur",
                    "from_zone_share_eur", "to_zone_share_eur"])
        for e in entries:
            w.writerow([e.line, e.hours, e.zero_price_diff_hours,
                        _fmt(e.loss_cost_eur), _fmt(e.from_zone_share_eur),
                        _fmt(e.to_zone_share_eur)])
