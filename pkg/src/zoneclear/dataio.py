"""Dataset ingestion: zonal CSV schemas, nodal-to-zonal aggregation, config.

The zonal schema is a neutral re-encoding of the upstream market data:
plain UTF-8 CSV, '.' decimal separator, 0-based contiguous hour index.

    zones.csv            zone
    generators.csv       id,zone,cost,p_min,p_max
    interconnectors.csv  id,kind,from_zone,to_zone,rated_mw,quad_a,quad_b,quad_c
                         (blank quad_a -> no loss model; blank quad_b reads 0)
    atc.csv              hour,line,fwd_mw,rev_mw
    demand.csv           hour,zone,mw
    injections.csv       hour,zone,mw          (signed; optional file)
    flows.csv            hour,line,mw          (optional history for calibration)

A manifest is a JSON file mapping these keys to paths (relative to the
manifest's directory). Optional nodal inputs live under the "nodal" key and
are aggregated to the zonal schema before loading.
"""

from __future__ import annotations

import configparser
import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .calibration import FlowHistory
from .model import (Generator, Interconnector, LossModel, MarketInstance,
                    Zone, validate_instance)

log = logging.getLogger(__name__)

_ZONAL_KEYS = ("zones", "generators", "interconnectors", "atc", "demand")


class ParseError(ValueError):
    """Malformed cell; carries file, line and column context."""

    def __init__(self, path, line_no: int, column: str, message: str):
        super().__init__(f"{path}:{line_no}: column {column!r}: {message}")
        self.path, self.line_no, self.column = str(path), line_no, column


class ReferentialError(ValueError):
    """Dangling id or missing (hour, line) pair."""


class UnmappedNode(ValueError):
    """A nodal entity references a node absent from the node->zone map."""


@dataclass
class DatasetManifest:
    zones: Path
    generators: Path
    interconnectors: Path
    atc: Path
    demand: Path
    injections: Optional[Path] = None
    flows: Optional[Path] = None

    @classmethod
    def load(cls, path) -> "DatasetManifest":
        path = Path(path)
        raw = json.loads(path.read_text())
        base = path.parent
        if "nodal" in raw:
            raw = dict(raw)
            nodal = raw.pop("nodal")
            zonal_dir = base / raw.pop("aggregated_dir", "aggregated")
            aggregate_nodal_to_zonal(
                {k: base / v for k, v in nodal.items()}, zonal_dir,
                hours=raw.pop("hours", None))
            for key in _ZONAL_KEYS + ("injections",):
                raw.setdefault(key, str(zonal_dir / f"{key}.csv"))
        kwargs = {}
        for key in ("zones", "generators", "interconnectors", "atc",
                    "demand", "injections", "flows"):
            if key in raw and raw[key] is not None:
                p = Path(raw[key])
                kwargs[key] = p if p.is_absolute() else base / p
        missing = [k for k in _ZONAL_KEYS if k not in kwargs]
        if missing:
            raise ReferentialError(f"manifest {path}: missing keys {missing}")
        for k, p in kwargs.items():
            if not p.exists():
                raise ReferentialError(f"manifest {path}: {k} file {p} does not exist")
        return cls(**kwargs)


@dataclass
class LoadedDataset:
    series: list[MarketInstance]
    histories: dict[str, FlowHistory] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)


def _read_rows(path) -> list[tuple[int, dict]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return [(i, row) for i, row in enumerate(reader, start=2)]


def _num(path, line_no: int, row: dict, col: str, *, optional: bool = False,
         default: float = 0.0) -> float:
    raw = (row.get(col) or "").strip()
    if raw in ("", "-"):
        if optional:
            return default
        raise ParseError(path, line_no, col, "missing value")
    try:
        return float(raw)
    except ValueError:
        raise ParseError(path, line_no, col, f"not a number: {raw!r}") from None


def _int(path, line_no: int, row: dict, col: str) -> int:
    raw = (row.get(col) or "").strip()
    try:
        return int(raw)
    except ValueError:
        raise ParseError(path, line_no, col, f"not an integer: {raw!r}") from None


def load_dataset(manifest: DatasetManifest | str | Path) -> LoadedDataset:
    """Load and validate the hourly series; clamps negative ATC with a warning."""
    if not isinstance(manifest, DatasetManifest):
        manifest = DatasetManifest.load(manifest)
    warnings: list[str] = []

    zone_ids = []
    for ln, row in _read_rows(manifest.zones):
        zid = (row.get("zone") or "").strip()
        if not zid:
            raise ParseError(manifest.zones, ln, "zone", "empty zone id")
        zone_ids.append(zid)
    zone_set = set(zone_ids)

    gens = []
    for ln, row in _read_rows(manifest.generators):
        gid = (row.get("id") or "").strip()
        zone = (row.get("zone") or "").strip()
        if zone not in zone_set:
            raise ReferentialError(f"{manifest.generators}:{ln}: generator {gid}: "
                                   f"unknown zone {zone!r}")
        gens.append(Generator(gid, zone,
                              _num(manifest.generators, ln, row, "cost"),
                              _num(manifest.generators, ln, row, "p_min"),
                              _num(manifest.generators, ln, row, "p_max")))

    base_lines: dict[str, Interconnector] = {}
    for ln, row in _read_rows(manifest.interconnectors):
        lid = (row.get("id") or "").strip()
        for end in ("from_zone", "to_zone"):
            if (row.get(end) or "").strip() not in zone_set:
                raise ReferentialError(f"{manifest.interconnectors}:{ln}: line {lid}: "
                                       f"unknown zone {row.get(end)!r}")
        rated = _num(manifest.interconnectors, ln, row, "rated_mw")
        quad_a_raw = (row.get("quad_a") or "").strip()
        model = None
        if quad_a_raw not in ("", "-"):
            model = LossModel(
                quad_a=_num(manifest.interconnectors, ln, row, "quad_a"),
                quad_b=_num(manifest.interconnectors, ln, row, "quad_b",
                            optional=True),
                quad_c=_num(manifest.interconnectors, ln, row, "quad_c",
                            optional=True))
        base_lines[lid] = Interconnector(
            lid, (row.get("kind") or "").strip(), row["from_zone"].strip(),
            row["to_zone"].strip(), rated, rated, rated, model)

    demand: dict[tuple[int, str], float] = {}
    hours = set()
    for ln, row in _read_rows(manifest.demand):
        h = _int(manifest.demand, ln, row, "hour")
        zone = (row.get("zone") or "").strip()
        if zone not in zone_set:
            raise ReferentialError(f"{manifest.demand}:{ln}: unknown zone {zone!r}")
        demand[(h, zone)] = _num(manifest.demand, ln, row, "mw")
        hours.add(h)
    if not hours:
        raise ReferentialError(f"{manifest.demand}: no hours")
    n_hours = max(hours) + 1
    if hours != set(range(n_hours)):
        raise ReferentialError(
            f"{manifest.demand}: hour indices not contiguous from 0")

    injections: dict[tuple[int, str], float] = {}
    if manifest.injections:
        for ln, row in _read_rows(manifest.injections):
            h = _int(manifest.injections, ln, row, "hour")
            zone = (row.get("zone") or "").strip()
            if zone not in zone_set:
                raise ReferentialError(f"{manifest.injections}:{ln}: unknown zone {zone!r}")
            injections[(h, zone)] = _num(manifest.injections, ln, row, "mw")

    atc: dict[tuple[int, str], tuple[float, float]] = {}
    for ln, row in _read_rows(manifest.atc):
        h = _int(manifest.atc, ln, row, "hour")
        lid = (row.get("line") or "").strip()
        if lid not in base_lines:
            raise ReferentialError(f"{manifest.atc}:{ln}: unknown line {lid!r}")
        fwd = _num(manifest.atc, ln, row, "fwd_mw")
        rev = _num(manifest.atc, ln, row, "rev_mw")
        if fwd < 0 or rev < 0:
            warnings.append(f"hour {h} line {lid}: negative ATC "
                            f"({fwd}, {rev}) clamped to 0")
            fwd, rev = max(fwd, 0.0), max(rev, 0.0)
        atc[(h, lid)] = (fwd, rev)
    for h in range(n_hours):
        for lid in base_lines:
            if (h, lid) not in atc:
                raise ReferentialError(f"{manifest.atc}: missing (hour={h}, line={lid})")

    histories: dict[str, FlowHistory] = {}
    if manifest.flows:
        samples: dict[str, list[float]] = {}
        for ln, row in _read_rows(manifest.flows):
            lid = (row.get("line") or "").strip()
            if lid not in base_lines:
                raise ReferentialError(f"{manifest.flows}:{ln}: unknown line {lid!r}")
            samples.setdefault(lid, []).append(_num(manifest.flows, ln, row, "mw"))
        histories = {lid: FlowHistory(lid, tuple(v)) for lid, v in samples.items()}

    series = []
    for h in range(n_hours):
        zones = tuple(Zone(z, demand.get((h, z), 0.0), injections.get((h, z), 0.0))
                      for z in zone_ids)
        lines = []
        for lid, proto in base_lines.items():
            fwd, rev = atc[(h, lid)]
            lines.append(Interconnector(
                proto.id, proto.kind, proto.from_zone, proto.to_zone,
                min(fwd, proto.rated_capacity), min(rev, proto.rated_capacity),
                proto.rated_capacity, proto.loss_model))
        inst = MarketInstance(h, zones, tuple(gens), tuple(lines))
        report = validate_instance(inst)
        for v in report.violations:
            warnings.append(f"hour {h}: {v.entity}: {v.rule}: {v.message}")
        series.append(inst)

    for w in warnings:
        log.warning("%s", w)
    return LoadedDataset(series, histories, warnings)


def load_series(manifest) -> list[MarketInstance]:
    return load_dataset(manifest).series


def write_series(out_dir, series: list[MarketInstance],
                 histories: Optional[dict[str, FlowHistory]] = None) -> Path:
    """Write a series back to the zonal schema; returns the manifest path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    first = series[0]

    with open(out / "zones.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["zone"])
        for z in first.zones:
            w.writerow([z.id])
    with open(out / "generators.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "zone", "cost", "p_min", "p_max"])
        for g in first.generators:
            w.writerow([g.id, g.zone, repr(g.cost), repr(g.p_min), repr(g.p_max)])
    with open(out / "interconnectors.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "kind", "from_zone", "to_zone", "rated_mw",
                    "quad_a", "quad_b", "quad_c"])
        for l in first.interconnectors:
            m = l.loss_model
            w.writerow([l.id, l.kind, l.from_zone, l.to_zone, repr(l.rated_capacity),
                        repr(m.quad_a) if m else "", repr(m.quad_b) if m else "",
                        repr(m.quad_c) if m else ""])
    with open(out / "atc.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["hour", "line", "fwd_mw", "rev_mw"])
        for inst in series:
            for l in inst.interconnectors:
                w.writerow([inst.timestamp, l.id, repr(l.atc_fwd), repr(l.atc_rev)])
    with open(out / "demand.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["hour", "zone", "mw"])
        for inst in series:
            for z in inst.zones:
                w.writerow([inst.timestamp, z.id, repr(z.demand)])
    with open(out / "injections.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["hour", "zone", "mw"])
        for inst in series:
            for z in inst.zones:
                w.writerow([inst.timestamp, z.id, repr(z.fixed_injection)])
    manifest = {key: f"{key}.csv" for key in _ZONAL_KEYS + ("injections",)}
    if histories:
        with open(out / "flows.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["hour", "line", "mw"])
            for lid in sorted(histories):
                for h, mw in enumerate(histories[lid].samples):
                    w.writerow([h, lid, repr(mw)])
        manifest["flows"] = "flows.csv"
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest_path


# --- nodal aggregation -------------------------------------------------------

def aggregate_nodal_to_zonal(nodal_paths: dict[str, Path], out_dir,
                             hours: Optional[int] = None) -> Path:
    """Aggregate a nodal dataset to the zonal schema and write it to out_dir.

    Expected nodal files (CSV):
        node_map     node,zone
        demand       hour,node,mw
        injections   hour,node,mw          (optional)
        generators   id,node,cost,p_min,p_max
        circuits     id,from_node,to_node,kind,limit_mw,quad_a,quad_b,quad_c

    Demands, injections and generators are summed/re-homed per zone.
    Inter-zonal circuits collapse to one equivalent line per (zone pair,
    kind): limits add, quadratic coefficients combine like parallel
    resistances (harmonic), stand-by losses add. Intra-zonal circuits are
    dropped with the internal network.
    """
    node_zone: dict[str, str] = {}
    for ln, row in _read_rows(nodal_paths["node_map"]):
        node_zone[(row.get("node") or "").strip()] = (row.get("zone") or "").strip()

    def zone_of(node: str, ctx: str) -> str:
        if node not in node_zone:
            raise UnmappedNode(f"{ctx}: node {node!r} not in node map")
        return node_zone[node]

    zone_ids = sorted(set(node_zone.values()))

    demand: dict[tuple[int, str], float] = {}
    max_hour = -1
    for ln, row in _read_rows(nodal_paths["demand"]):
        h = _int(nodal_paths["demand"], ln, row, "hour")
        z = zone_of((row.get("node") or "").strip(), f"demand line {ln}")
        demand[(h, z)] = demand.get((h, z), 0.0) + _num(nodal_paths["demand"], ln, row, "mw")
        max_hour = max(max_hour, h)

    injections: dict[tuple[int, str], float] = {}
    if "injections" in nodal_paths:
        for ln, row in _read_rows(nodal_paths["injections"]):
            h = _int(nodal_paths["injections"], ln, row, "hour")
            z = zone_of((row.get("node") or "").strip(), f"injections line {ln}")
            injections[(h, z)] = injections.get((h, z), 0.0) + _num(
                nodal_paths["injections"], ln, row, "mw")

    gens = []
    for ln, row in _read_rows(nodal_paths["generators"]):
        z = zone_of((row.get("node") or "").strip(), f"generators line {ln}")
        gens.append((row["id"].strip(), z, row["cost"], row["p_min"], row["p_max"]))

    # collapse inter-zonal circuits
    groups: dict[tuple[str, str, str], list[dict]] = {}
    for ln, row in _read_rows(nodal_paths["circuits"]):
        zf = zone_of((row.get("from_node") or "").strip(), f"circuits line {ln}")
        zt = zone_of((row.get("to_node") or "").strip(), f"circuits line {ln}")
        if zf == zt:
            continue  # internal network is not modeled
        kind = (row.get("kind") or "").strip()
        key = (kind, *sorted((zf, zt)))
        flipped = (zf, zt) != tuple(sorted((zf, zt)))
        groups.setdefault(key, []).append({
            "limit": _num(nodal_paths["circuits"], ln, row, "limit_mw"),
            "quad_a": _num(nodal_paths["circuits"], ln, row, "quad_a",
                           optional=True, default=float("nan")),
            "quad_b": _num(nodal_paths["circuits"], ln, row, "quad_b", optional=True),
            "quad_c": _num(nodal_paths["circuits"], ln, row, "quad_c", optional=True),
            "flipped": flipped,
        })

    lines = []
    for (kind, za, zb), members in sorted(groups.items()):
        limit = sum(mbr["limit"] for mbr in members)
        a_vals = [mbr["quad_a"] for mbr in members]
        if all(a == a and a > 0 for a in a_vals):  # NaN-free and positive
            g_total = sum(1.0 / a for a in a_vals)
            a_eq = 1.0 / g_total
            # conductance-weighted mean: flow splits inversely to resistance
            b_eq = sum(mbr["quad_b"] / mbr["quad_a"] for mbr in members) / g_total
            c_eq = sum(mbr["quad_c"] for mbr in members)
            quad = (a_eq, b_eq, c_eq)
        else:
            quad = None
        lines.append({"id": f"{za}-{zb}", "kind": kind, "from": za, "to": zb,
                      "limit": limit, "quad": quad})

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n_hours = hours if hours is not None else max_hour + 1

    with open(out / "zones.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["zone"])
        for z in zone_ids:
            w.writerow([z])
    with open(out / "generators.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "zone", "cost", "p_min", "p_max"])
        for row in gens:
            w.writerow(row)
    with open(out / "interconnectors.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "kind", "from_zone", "to_zone", "rated_mw",
                    "quad_a", "quad_b", "quad_c"])
        for l in lines:
            q = l["quad"]
            w.writerow([l["id"], l["kind"], l["from"], l["to"], repr(l["limit"]),
                        repr(q[0]) if q else "", repr(q[1]) if q else "",
                        repr(q[2]) if q else ""])
    with open(out / "atc.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["hour", "line", "fwd_mw", "rev_mw"])
        for h in range(n_hours):
            for l in lines:
                # deliberate simplification: equivalent ATC = sum of circuit limits
                w.writerow([h, l["id"], repr(l["limit"]), repr(l["limit"])])
    with open(out / "demand.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["hour", "zone", "mw"])
        for h in range(n_hours):
            for z in zone_ids:
                w.writerow([h, z, repr(demand.get((h, z), 0.0))])
    with open(out / "injections.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["hour", "zone", "mw"])
        for h in range(n_hours):
            for z in zone_ids:
                w.writerow([h, z, repr(injections.get((h, z), 0.0))])
    meta = {"aggregation": "nodal-to-zonal",
            "atc_note": "equivalent ATC = sum of member circuit limits"}
    (out / "aggregation_meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    return out


# --- run configuration -------------------------------------------------------

@dataclass
class RunConfig:
    scenarios: list[str] = field(default_factory=lambda: ["S1_NoLF"])
    segment_mw: float = 60.0
    workers: int = 1
    reference: str = "S1_NoLF"
    out_dir: str = "out"
    gzip_hourly: bool = False
    figures: bool = True


def load_config(path) -> RunConfig:
    """Read the INI run configuration; CLI flags override these values."""
    cp = configparser.ConfigParser()
    with open(path) as fh:
        cp.read_file(fh)
    cfg = RunConfig()
    if cp.has_section("study"):
        s = cp["study"]
        if "scenarios" in s:
            cfg.scenarios = [x.strip() for x in s["scenarios"].split(",") if x.strip()]
        cfg.segment_mw = s.getfloat("segment_mw", cfg.segment_mw)
        cfg.workers = s.getint("workers", cfg.workers)
        cfg.reference = s.get("reference", cfg.reference)
    if cp.has_section("output"):
        o = cp["output"]
        cfg.out_dir = o.get("dir", cfg.out_dir)
        cfg.gzip_hourly = o.getboolean("gzip_hourly", cfg.gzip_hourly)
        cfg.figures = o.getboolean("figures", cfg.figures)
    return cfg
