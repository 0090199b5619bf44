"""Command-line interface.

Subcommands:

* ``validate``  -- load a dataset manifest and report violations.
* ``calibrate`` -- calibrate loss factors and export them (CSV + figures).
* ``clear``     -- clear a single hour under one formulation variant.
* ``study``     -- run the scenario study and write the report files.
* ``rmse``      -- fleet approximation RMSE per segment granularity.

Exit codes: 0 success, 1 validation or data failure, 2 solver failure.
The output directory may also be set with the ZONECLEAR_OUT environment
variable; an explicit --out wins.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

from . import __version__, formulations as fm, report_plots, study
from .calibration import fleet_rmse, write_factors_csv
from .dataio import (LoadedDataset, ParseError, ReferentialError, load_config,
                     load_dataset)
from .milp import NodeLimitExceeded
from .study import CalibrationMissing

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_SOLVER = 2

_VARIANTS = {
    "lossless": fm.LOSSLESS,
    "fixed": fm.FIXED_LOSSES,
    "linear": fm.LINEAR_LF,
    "piecewise": fm.PIECEWISE_LF,
    "relaxed": fm.RELAXED_LINEAR_LF,
}


def _out_dir(args) -> Path:
    out = args.out or os.environ.get("ZONECLEAR_OUT") or "out"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load(args) -> LoadedDataset:
    ds = load_dataset(args.manifest)
    for w in ds.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return ds


def cmd_validate(args) -> int:
    ds = _load(args)
    bad = [w for w in ds.warnings if "clamped" not in w]
    print(f"{len(ds.series)} hours, "
          f"{len(ds.series[0].interconnectors)} interconnectors, "
          f"{len(ds.series[0].zones)} zones")
    if bad:
        print(f"{len(bad)} validation problems")
        return EXIT_VALIDATION
    print("dataset valid")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    ds = _load(args)
    series = study.calibrate_series(ds.series, ds.histories, args.segment_mw)
    out = _out_dir(args)
    write_factors_csv(out / "factors.csv", series[0].interconnectors)
    print(f"wrote {out / 'factors.csv'}")
    if args.figures:
        for line in series[0].interconnectors:
            if line.loss_model is None:
                continue
            fig = out / f"loss_curve_{line.id}.png"
            report_plots.plot_loss_curves(line, fig)
            print(f"wrote {fig}")
    return EXIT_OK


def cmd_clear(args) -> int:
    ds = _load(args)
    series = study.calibrate_series(ds.series, ds.histories, args.segment_mw)
    try:
        inst = series[args.hour]
    except IndexError:
        print(f"error: hour {args.hour} out of range (0..{len(series) - 1})",
              file=sys.stderr)
        return EXIT_VALIDATION
    variant = _VARIANTS[args.variant]
    selection = frozenset(
        l.id for l in inst.interconnectors
        if l.loss_model is not None
        and (args.lines is None or l.id in args.lines.split(","))
    ) if variant in (fm.LINEAR_LF, fm.PIECEWISE_LF, fm.RELAXED_LINEAR_LF) else frozenset()
    spec = fm.FormulationSpec(variant, selection)
    cp, sol = fm.clear_instance(inst, spec)
    if sol.status != "Optimal":
        print(f"solver failure: status {sol.status}", file=sys.stderr)
        return EXIT_SOLVER
    result = fm.extract_result(cp, sol)
    payload = {
        "hour": result.timestamp, "variant": variant,
        "objective_eur": result.objective,
        "generation_mw": result.generation, "flow_mw": result.flow,
        "modeled_loss_mw": result.modeled_loss,
        "zonal_price_eur_mwh": result.zonal_price,
    }
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        out = _out_dir(args) / f"dispatch_h{args.hour}.json"
        out.write_text(text + "\n")
        print(f"wrote {out}")
    else:
        print(text)
    return EXIT_OK


def cmd_study(args) -> int:
    cfg = load_config(args.config) if args.config else None
    scenarios = (args.scenarios.split(",") if args.scenarios
                 else (cfg.scenarios if cfg else list(study.SCENARIOS)))
    segment_mw = args.segment_mw if args.segment_mw is not None else (
        cfg.segment_mw if cfg else 60.0)
    workers = args.workers if args.workers is not None else (
        cfg.workers if cfg else 1)
    reference = args.reference or (cfg.reference if cfg else "S1_NoLF")
    figures = (not args.no_figures) and (cfg.figures if cfg else True)
    gzip_hourly = args.gzip_hourly or (cfg.gzip_hourly if cfg else False)
    if args.out is None and cfg:
        args.out = cfg.out_dir

    ds = _load(args)
    series = study.calibrate_series(ds.series, ds.histories, segment_mw)
    run_cfg = study.StudyConfig(segment_mw=segment_mw, workers=workers)
    results = []
    for sc in scenarios:
        t0 = time.perf_counter()
        r = study.run_scenario(series, sc, run_cfg)
        print(f"{sc}: {len(r.hours)} hours in {time.perf_counter() - t0:.2f}s, "
              f"{len(r.infeasible_hours)} infeasible")
        if not r.hours:
            print(f"solver failure: no feasible hours in {sc}", file=sys.stderr)
            return EXIT_SOLVER
        results.append(r)

    ref = reference if reference in scenarios else scenarios[0]
    report = study.compare_scenarios(results, ref)
    out = _out_dir(args)
    study.write_report_csv(report, out / "summary.csv")
    hourly = out / ("hourly.csv.gz" if gzip_hourly else "hourly.csv")
    study.write_hourly_csv(report, hourly, gzipped=gzip_hourly)
    study.write_report_json(report, out / "report.json")
    tso = study.tso_loss_cost_accounting(results[0], series)
    study.write_tso_csv(tso, out / "tso_loss_costs.csv")
    if figures:
        report_plots.plot_scenario_comparison(report, out / "scenario_comparison.png")
    print(f"wrote report files to {out}")
    return EXIT_OK


def cmd_rmse(args) -> int:
    ds = _load(args)
    segments = [float(s) for s in args.segments.split(",")]
    out = _out_dir(args)
    series = study.calibrate_series(ds.series, ds.histories, segments[0])
    lines = series[0].interconnectors

    rows: list[tuple[str, float, float]] = []
    can_linear = all(l.loss_model is None or l.loss_model.linear is not None
                     for l in lines)
    if can_linear:
        t = _timed_scenario(series, "S2_LinearHVDC", args) if args.time else 0.0
        rows.append(("linear", fleet_rmse(lines), t))
    for seg in segments:
        cal = study.calibrate_series(ds.series, ds.histories, seg)
        t = _timed_scenario(cal, "S3_PiecewiseHVDC", args) if args.time else 0.0
        rows.append((f"{seg:g}MW", fleet_rmse(cal[0].interconnectors,
                                              segment_len=seg), t))

    with open(out / "rmse.csv", "w") as fh:
        fh.write("granularity,rmse_mw,solve_time_s\n")
        for label, rmse, t in rows:
            fh.write(f"{label},{rmse!r},{t!r}\n")
            print(f"{label:>8}: RMSE {rmse:.4f} MW"
                  + (f", solve {t:.2f}s" if args.time else ""))
    if args.time and not args.no_figures:
        report_plots.plot_rmse_tradeoff(rows, out / "rmse_tradeoff.png")
    print(f"wrote {out / 'rmse.csv'}")
    return EXIT_OK


def _timed_scenario(series, scenario: str, args) -> float:
    t0 = time.perf_counter()
    study.run_scenario(series, scenario, study.StudyConfig(
        workers=args.workers if args.workers else 1))
    return time.perf_counter() - t0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="zoneclear",
        description="Zonal market clearing with HVDC loss factors.")
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true",
                    help="log at DEBUG level")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("manifest", help="path to the dataset manifest JSON")
        p.add_argument("--out", default=None,
                       help="output directory (default: $ZONECLEAR_OUT or ./out)")

    p = sub.add_parser("validate", help="validate a dataset")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("calibrate", help="calibrate and export loss factors")
    common(p)
    p.add_argument("--segment-mw", type=float, default=60.0,
                   help="piecewise segment width in MW (default 60)")
    p.add_argument("--figures", action="store_true",
                   help="also render a loss-curve figure per line")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("clear", help="clear a single hour")
    common(p)
    p.add_argument("--hour", type=int, default=0)
    p.add_argument("--variant", choices=sorted(_VARIANTS), default="lossless")
    p.add_argument("--lines", default=None,
                   help="comma-separated line ids to carry loss factors "
                        "(default: all loss-modeled lines)")
    p.add_argument("--segment-mw", type=float, default=60.0)
    p.set_defaults(func=cmd_clear)

    p = sub.add_parser("study", help="run the scenario study")
    common(p)
    p.add_argument("--scenarios", default=None,
                   help=f"comma-separated subset of {','.join(study.SCENARIOS)}")
    p.add_argument("--segment-mw", type=float, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--reference", default=None)
    p.add_argument("--config", default=None, help="INI run configuration")
    p.add_argument("--gzip-hourly", action="store_true")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("rmse", help="approximation RMSE per granularity")
    common(p)
    p.add_argument("--segments", default="600,300,150,60,5",
                   help="comma-separated segment widths in MW")
    p.add_argument("--time", action="store_true",
                   help="also time a piecewise study run per granularity")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_rmse)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ParseError, ReferentialError, CalibrationMissing, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NodeLimitExceeded, fm.StatusNotOptimal) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
