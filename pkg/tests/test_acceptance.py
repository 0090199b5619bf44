"""Acceptance suite: one test per release criterion.

Each test prints a single PASS line on success; a pytest failure marks the
criterion failed. Run with -s to see the lines.
"""

import dataclasses
import itertools
import time

import numpy as np
import pytest

from zoneclear import formulations as fm
from zoneclear import study
from zoneclear.calibration import (FlowHistory, fleet_rmse, linear_factors,
                                   piecewise_factors, pw_loss_at)
from zoneclear.milp import CanonicalProblem, Constraint, solve_lp, solve_milp
from zoneclear.model import (AC, HVDC, Generator, Interconnector, LossModel,
                             MarketInstance, Zone)
from zoneclear.simplex import INFEASIBLE, OPTIMAL
from conftest import FLEET, random_instance
from test_calibration import discrete_ls_fit
from test_formulations import with_factors


def report(n, name):
    print(f"\nACCEPTANCE {n} ({name}): PASS")


# --- 1. solver correctness against exhaustive enumeration -------------------

def test_criterion_1_solver_vs_enumeration():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    for k in range(200):
        n = int(rng.integers(4, 31))
        n_bin = int(rng.integers(1, 11)) if k % 10 == 0 else int(rng.integers(1, 7))
        binaries = frozenset(rng.choice(n, size=min(n_bin, n), replace=False).tolist())
        bounds = [(0.0, 1.0) if j in binaries else
                  (lo := float(rng.uniform(-8, 0)), lo + float(rng.uniform(1, 15)))
                  for j in range(n)]
        x0 = np.array([rng.uniform(l, h) for l, h in bounds])
        cons = []
        for _ in range(int(rng.integers(1, 7))):
            idx = rng.choice(n, size=int(rng.integers(1, 5)), replace=False)
            coefs = tuple((int(j), float(rng.uniform(-3, 3))) for j in idx)
            val = sum(v * x0[j] for j, v in coefs)
            sense = ["<=", ">="][int(rng.integers(0, 2))]
            rhs = val + rng.uniform(0, 3) if sense == "<=" else val - rng.uniform(0, 3)
            cons.append(Constraint(coefs, sense, float(rhs)))
        p = CanonicalProblem(n, rng.uniform(-5, 5, n).tolist(), bounds, cons, binaries)

        got = solve_milp(p)
        best = np.inf
        for bits in itertools.product((0.0, 1.0), repeat=len(binaries)):
            bb = list(p.var_bounds)
            for j, v in zip(sorted(binaries), bits):
                bb[j] = (v, v)
            res = solve_lp(CanonicalProblem(n, p.objective, bb, cons))
            if res.status == OPTIMAL:
                best = min(best, res.objective)
        if np.isinf(best):
            assert got.status == INFEASIBLE
        else:
            assert got.status == OPTIMAL
            assert abs(got.objective - best) <= 1e-6
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0, f"took {elapsed:.1f}s"
    report(1, "solver matches enumeration on 200 random MILPs")


# --- 2. relaxation exactness under positive prices ---------------------------

def test_criterion_2_relaxation_exactness():
    rng = np.random.default_rng(7)
    checked = 0
    while checked < 100:
        inst = with_factors(random_instance(rng, n_zones=int(rng.integers(2, 5))))
        sel = frozenset(l.id for l in inst.interconnectors)
        cp, sol = fm.clear_instance(inst, fm.FormulationSpec(fm.LINEAR_LF, sel))
        if sol.status != OPTIMAL:
            continue
        strict = fm.extract_result(cp, sol)
        if not all(p > 0 for p in strict.zonal_price.values()):
            continue
        cp2, sol2 = fm.clear_instance(inst, fm.FormulationSpec(fm.RELAXED_LINEAR_LF, sel))
        assert sol2.status == OPTIMAL
        relaxed = fm.extract_result(cp2, sol2)
        assert abs(relaxed.objective - strict.objective) <= 1e-5 * max(
            1.0, abs(strict.objective))
        for lid in sel:
            assert abs(relaxed.flow[lid] - strict.flow[lid]) <= 1e-4
        checked += 1
    report(2, "LinearLF == RelaxedLinearLF on 100 positive-price fixtures")


# --- 3. artificial losses appear only in the relaxation ----------------------

def test_criterion_3_artificial_loss_prevention():
    inst = MarketInstance(
        0,
        (Zone("A", 100.0), Zone("B", 200.0)),
        (Generator("gA", "A", -60.0, 0.0, 1000.0),
         Generator("gB", "B", 50.0, 0.0, 1000.0)),
        (Interconnector("L", HVDC, "A", "B", 150.0, 150.0, 150.0,
                        LossModel(quad_a=1e-4, quad_b=0.0, quad_c=2.0)),))
    inst = with_factors(inst, median=100.0)
    lf = inst.line("L").loss_model.linear

    cp, sol = fm.clear_instance(inst, fm.FormulationSpec(
        fm.RELAXED_LINEAR_LF, frozenset({"L"})))
    relaxed = fm.extract_result(cp, sol)
    artificial = relaxed.modeled_loss["L"] - (
        lf.alpha * abs(relaxed.flow["L"]) + lf.beta)
    assert artificial > 0.1

    cp, sol = fm.clear_instance(inst, fm.FormulationSpec(
        fm.LINEAR_LF, frozenset({"L"})))
    strict = fm.extract_result(cp, sol)
    fp, fmn = strict.pair_flows["L"]
    assert min(fp, fmn) == 0.0
    report(3, "artificial losses in relaxation only, binaries exact")


# --- 4. calibration consistency with the published coefficient table ---------

def test_criterion_4_calibration_consistency():
    for name, (a, b, c, alpha_pub, beta_pub, rated) in FLEET.items():
        m = (alpha_pub - b) / a
        model = LossModel(quad_a=a, quad_b=b, quad_c=c)
        lf = linear_factors(model, FlowHistory(name, (m,)))
        assert abs(lf.alpha - alpha_pub) <= 1e-4
        assert abs(lf.beta - beta_pub) <= 1e-4
        for seg in piecewise_factors(model, rated, 150.0):
            alpha_o, beta_o = discrete_ls_fit(a, b, c, seg.lo, seg.hi)
            assert abs(seg.alpha - alpha_o) <= 1e-6
            assert abs(seg.beta - beta_o) <= 1e-6
    report(4, "published factors reproduced, piecewise matches LS oracle")


# --- 5. RMSE decreases and solve time grows with granularity -----------------

def test_criterion_5_rmse_and_time_tradeoff(fleet_lines, mini_nordic):
    # fleet RMSE strictly decreasing from linear through 5 MW segments
    linear_lines = []
    for line in fleet_lines:
        a, b, _c, alpha_pub, _beta, _r = FLEET[line.id]
        lf = linear_factors(line.loss_model,
                            FlowHistory(line.id, ((alpha_pub - b) / a,)))
        linear_lines.append(dataclasses.replace(
            line, loss_model=line.loss_model.with_linear(lf)))
    rmse = [fleet_rmse(linear_lines)]
    for seg in (600.0, 300.0, 150.0, 60.0, 5.0):
        rmse.append(fleet_rmse(fleet_lines, segment_len=seg))
    assert all(b < a for a, b in zip(rmse, rmse[1:])), rmse

    # per-hour solve time on the bundled dataset grows with granularity
    def per_hour(series, scenario, hours, repeats):
        sub = series[:hours]
        specs = [study._scenario_spec(inst, scenario)[0] for inst in sub]
        best = np.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            for inst, spec in zip(sub, specs):
                fm.clear_instance(inst, spec)
            best = min(best, time.perf_counter() - t0)
        return best / hours

    times = []
    cal = study.calibrate_series(mini_nordic.series, mini_nordic.histories, 60.0)
    times.append(per_hour(cal, "S2_LinearHVDC", 6, 5))
    for seg in (600.0, 300.0, 150.0, 60.0):
        cal = study.calibrate_series(mini_nordic.series, mini_nordic.histories, seg)
        times.append(per_hour(cal, "S3_PiecewiseHVDC", 6, 5))
    cal = study.calibrate_series(mini_nordic.series, mini_nordic.histories, 5.0)
    times.append(per_hour(cal, "S3_PiecewiseHVDC", 1, 1))
    assert all(b >= a for a, b in zip(times, times[1:])), times
    report(5, "RMSE strictly decreasing, solve time monotone increasing")


# --- 6. merit-order dispatch over parallel HVDC lines ------------------------

def _three_parallel_instance():
    zones = (Zone("A", 0.0), Zone("B", 260.0))
    gens = (Generator("gA", "A", 10.0, 0.0, 1000.0),
            Generator("gB", "B", 500.0, 0.0, 1000.0))
    lines = tuple(
        Interconnector(lid, HVDC, "A", "B", 150.0, 150.0, 150.0,
                       LossModel(quad_a=a, quad_b=0.0, quad_c=0.5))
        for lid, a in (("L1", 1e-4), ("L2", 2.5e-4), ("L3", 5e-4)))
    return with_factors(MarketInstance(0, zones, gens, lines),
                        median=90.0, segment_mw=30.0)


def test_criterion_6_parallel_hvdc_merit_order():
    inst = _three_parallel_instance()
    sel = frozenset({"L1", "L2", "L3"})
    segs = {lid: inst.line(lid).loss_model.piecewise for lid in sel}

    def loss(lid, f):
        return 0.0 if f == 0 else pw_loss_at(segs[lid], f)

    cp, sol = fm.clear_instance(inst, fm.FormulationSpec(fm.PIECEWISE_LF, sel))
    res = fm.extract_result(cp, sol)
    total = sum(res.modeled_loss[lid] for lid in sel)

    # brute force on a 1 MW grid: delivered power must cover the demand
    demand = 260.0
    g3 = np.array([f - 0.5 * loss("L3", f) for f in range(151)])
    l3 = np.array([loss("L3", f) for f in range(151)])
    best = np.inf
    for f1 in range(151):
        d1 = f1 - 0.5 * loss("L1", f1)
        for f2 in range(151):
            need = demand - d1 - (f2 - 0.5 * loss("L2", f2))
            k = int(np.searchsorted(g3, need - 1e-9))
            if k <= 150:
                best = min(best, loss("L1", f1) + loss("L2", f2) + l3[k])
    assert abs(total - best) <= 0.5, (total, best)

    # linear factors saturate lines in increasing-alpha order
    cp, sol = fm.clear_instance(inst, fm.FormulationSpec(fm.LINEAR_LF, sel))
    lin = fm.extract_result(cp, sol)
    flows = [lin.flow[lid] for lid in ("L1", "L2", "L3")]  # alpha increasing
    for cheaper, dearer in zip(flows, flows[1:]):
        if dearer > 1e-6:
            assert cheaper >= 150.0 - 1e-6
    assert flows[0] == pytest.approx(150.0, abs=1e-6)
    assert flows[2] == pytest.approx(0.0, abs=1e-6)
    report(6, "piecewise split matches grid oracle, linear fills by alpha")


# --- 7. scenario directionality on the AC-parallel fixture -------------------

def _ac_parallel_series(n_hours=3):
    out = []
    for h in range(n_hours):
        zones = (Zone("A", 100.0), Zone("C", 200.0), Zone("B", 480.0 + 10.0 * h))
        gens = (Generator("gA", "A", 10.0, 0.0, 2000.0),
                Generator("gC", "C", 10.05, 0.0, 300.0),
                Generator("gB", "B", 80.0, 0.0, 600.0))
        lines = (
            Interconnector("HV", HVDC, "A", "B", 600.0, 600.0, 600.0,
                           LossModel(quad_a=3e-5, quad_b=0.0, quad_c=2.0)),
            Interconnector("AC1", AC, "A", "C", 200.0, 200.0, 200.0,
                           LossModel(quad_a=8e-5, quad_b=0.0, quad_c=0.2)),
            Interconnector("AC2", AC, "C", "B", 210.0, 210.0, 210.0,
                           LossModel(quad_a=8e-5, quad_b=0.0, quad_c=0.2)),
        )
        out.append(MarketInstance(h, zones, gens, lines))
    hist = {"HV": FlowHistory("HV", (400.0,)),
            "AC1": FlowHistory("AC1", (150.0,)),
            "AC2": FlowHistory("AC2", (100.0,))}
    return study.calibrate_series(out, hist, segment_mw=60.0)


def test_criterion_7_scenario_directionality():
    series = _ac_parallel_series()
    t0 = time.perf_counter()
    results = {sc: study.run_scenario(series, sc) for sc in study.SCENARIOS}
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0, f"took {elapsed:.1f}s"

    hvdc = {sc: r.hvdc_losses_gwh for sc, r in results.items()}
    ac = {sc: r.ac_losses_gwh for sc, r in results.items()}
    total = {sc: hvdc[sc] + ac[sc] for sc in results}
    assert hvdc["S1_NoLF"] >= hvdc["S2_LinearHVDC"] >= hvdc["S3_PiecewiseHVDC"]
    assert total["S5_PiecewiseACHVDC"] <= total["S4_LinearACHVDC"] <= total["S1_NoLF"]
    assert ac["S2_LinearHVDC"] > ac["S1_NoLF"]
    report(7, "S1>=S2>=S3 HVDC losses, S5<=S4<=S1 total, AC shift strict")


# --- 8. half of each line's loss lands in each endpoint balance --------------

def test_criterion_8_loss_split(mini_nordic_60):
    for scenario in ("S2_LinearHVDC", "S3_PiecewiseHVDC"):
        for inst in mini_nordic_60[:6]:
            spec, _ = study._scenario_spec(inst, scenario)
            cp, sol = fm.clear_instance(inst, spec)
            assert sol.status == OPTIMAL
            res = fm.extract_result(cp, sol)
            for zone_id, resid in fm.balance_residuals(cp, res).items():
                assert abs(resid) <= 1e-8, (scenario, inst.timestamp, zone_id)
    report(8, "balance residuals recover the 50/50 loss split")


# --- 9. worker count does not change the written report ----------------------

def test_criterion_9_study_determinism(tmp_path):
    from zoneclear.cli import main
    from conftest import DATA_DIR
    manifest = str(DATA_DIR / "mini_nordic" / "manifest.json")
    outs = []
    for workers in (1, 4):
        out = tmp_path / f"w{workers}"
        rc = main(["study", manifest, "--workers", str(workers),
                   "--out", str(out), "--no-figures"])
        assert rc == 0
        outs.append(out)
    for name in ("summary.csv", "hourly.csv", "report.json", "tso_loss_costs.csv"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes(), name
    report(9, "study reports byte-identical across worker counts")
