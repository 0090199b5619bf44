"""Domain types for zonal market instances.

A market instance is one hour of a zonal day-ahead market: bidding zones
with rigid demand and fixed injections (wind/PV as negative load, fixed
neighbor exchanges), price-taking generators, and inter-zonal
interconnectors with per-direction ATC bounds and optional transmission
loss models.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from typing import Optional

AC = "AC"
HVDC = "HVDC"

_KINDS = (AC, HVDC)


@dataclass(frozen=True)
class LinearLossFactors:
    """Linear loss approximation: loss(f) = alpha * |f| + beta."""

    alpha: float
    beta: float


@dataclass(frozen=True)
class PwSegment:
    """One segment [lo, hi] of a piecewise-linear loss curve.

    Within the segment the loss of a flow f (MW, magnitude) is
    ``alpha * f + beta``.
    """

    lo: float
    hi: float
    alpha: float
    beta: float


@dataclass(frozen=True)
class LossModel:
    """Quadratic loss curve of a line plus derived linear/piecewise factors.

    The quadratic model is ``loss(f) = quad_a * f**2 + quad_b * |f| + quad_c``
    with quad_a in 1/MW, quad_b dimensionless and quad_c the stand-by
    (no-load) loss in MW.
    """

    quad_a: float
    quad_b: float = 0.0
    quad_c: float = 0.0
    linear: Optional[LinearLossFactors] = None
    piecewise: Optional[tuple[PwSegment, ...]] = None

    def with_linear(self, factors: LinearLossFactors) -> "LossModel":
        return LossModel(self.quad_a, self.quad_b, self.quad_c, factors, self.piecewise)

    def with_piecewise(self, segments) -> "LossModel":
        return LossModel(self.quad_a, self.quad_b, self.quad_c, self.linear, tuple(segments))


@dataclass(frozen=True)
class Zone:
    """A bidding zone: single clearing price, rigid demand.

    fixed_injection is signed: negative values inject power (wind/PV
    modeled as negative load), positive values withdraw it (fixed exports
    to neighboring countries).
    """

    id: str
    demand: float
    fixed_injection: float = 0.0


@dataclass(frozen=True)
class Generator:
    id: str
    zone: str
    cost: float  # EUR/MWh, negative allowed (negative-price bids)
    p_min: float
    p_max: float


@dataclass(frozen=True)
class Interconnector:
    """Inter-zonal line. Positive flow runs from_zone -> to_zone.

    atc_fwd / atc_rev are the per-direction ATC bounds for the hour;
    rated_capacity is the physical rating the piecewise segment grid is
    built on.
    """

    id: str
    kind: str
    from_zone: str
    to_zone: str
    atc_fwd: float
    atc_rev: float
    rated_capacity: float
    loss_model: Optional[LossModel] = None


@dataclass(frozen=True)
class MarketInstance:
    """One hour's zonal market. Immutable; safe to share across workers."""

    timestamp: int
    zones: tuple[Zone, ...]
    generators: tuple[Generator, ...]
    interconnectors: tuple[Interconnector, ...]

    def zone_ids(self) -> list[str]:
        return [z.id for z in self.zones]

    def zone(self, zone_id: str) -> Zone:
        for z in self.zones:
            if z.id == zone_id:
                return z
        raise KeyError(zone_id)

    def line(self, line_id: str) -> Interconnector:
        for l in self.interconnectors:
            if l.id == line_id:
                return l
        raise KeyError(line_id)

    def net_demand(self) -> float:
        return sum(z.demand + z.fixed_injection for z in self.zones)


@dataclass(frozen=True)
class Violation:
    entity: str
    rule: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    def __bool__(self) -> bool:
        return not self.violations

    @property
    def ok(self) -> bool:
        return not self.violations


def _validate_loss_model(line: Interconnector, out: list[Violation]) -> None:
    m = line.loss_model
    if m is None:
        return
    if m.quad_a < 0:
        out.append(Violation(line.id, "quad_a_negative", f"quad_a={m.quad_a} must be >= 0"))
    if m.quad_c < 0:
        out.append(Violation(line.id, "quad_c_negative", f"quad_c={m.quad_c} must be >= 0"))
    if m.piecewise:
        segs = m.piecewise
        if abs(segs[0].lo) > 1e-9:
            out.append(Violation(line.id, "segments_not_from_zero",
                                 f"first segment starts at {segs[0].lo}"))
        for a, b in zip(segs, segs[1:]):
            if abs(a.hi - b.lo) > 1e-9:
                out.append(Violation(line.id, "segments_not_contiguous",
                                     f"gap between {a.hi} and {b.lo}"))
        widths = [s.hi - s.lo for s in segs]
        if len(widths) > 1 and any(abs(w - widths[0]) > 1e-9 for w in widths[:-1]):
            out.append(Violation(line.id, "segments_unequal_width",
                                 "all segments but the last must have equal width"))
        if widths and widths[-1] - widths[0] > 1e-9:
            out.append(Violation(line.id, "last_segment_too_wide",
                                 "last segment wider than the common width"))
        if abs(segs[-1].hi - line.rated_capacity) > 1e-9:
            out.append(Violation(line.id, "segments_not_covering_rating",
                                 f"last hi {segs[-1].hi} != rated {line.rated_capacity}"))
        if m.quad_a > 0:
            alphas = [s.alpha for s in segs]
            if any(a2 <= a1 for a1, a2 in zip(alphas, alphas[1:])):
                out.append(Violation(line.id, "alphas_not_increasing",
                                     "piecewise alphas must strictly increase"))


def validate_instance(instance: MarketInstance) -> ValidationReport:
    """Check every domain invariant; violations are data, not errors."""
    out: list[Violation] = []
    zone_ids = set()
    for z in instance.zones:
        if z.id in zone_ids:
            out.append(Violation(z.id, "duplicate_zone_id", f"zone id {z.id!r} repeated"))
        zone_ids.add(z.id)
        if z.demand < 0:
            out.append(Violation(z.id, "negative_demand", f"demand={z.demand} must be >= 0"))

    gen_ids = set()
    for g in instance.generators:
        if g.id in gen_ids:
            out.append(Violation(g.id, "duplicate_generator_id", f"generator id {g.id!r} repeated"))
        gen_ids.add(g.id)
        if g.p_min > g.p_max:
            out.append(Violation(g.id, "p_min>p_max", f"p_min={g.p_min} > p_max={g.p_max}"))
        if g.zone not in zone_ids:
            out.append(Violation(g.id, "unknown_zone", f"zone {g.zone!r} not in instance"))

    line_ids = set()
    for l in instance.interconnectors:
        if l.id in line_ids:
            out.append(Violation(l.id, "duplicate_line_id", f"line id {l.id!r} repeated"))
        line_ids.add(l.id)
        if l.kind not in _KINDS:
            out.append(Violation(l.id, "unknown_kind", f"kind={l.kind!r} not in {_KINDS}"))
        if l.from_zone == l.to_zone:
            out.append(Violation(l.id, "self_loop", "from_zone == to_zone"))
        for end in (l.from_zone, l.to_zone):
            if end not in zone_ids:
                out.append(Violation(l.id, "unknown_zone", f"zone {end!r} not in instance"))
        if l.rated_capacity <= 0:
            out.append(Violation(l.id, "rating_not_positive",
                                 f"rated_capacity={l.rated_capacity} must be > 0"))
        if l.atc_fwd < 0 or l.atc_rev < 0:
            out.append(Violation(l.id, "negative_atc",
                                 f"atc_fwd={l.atc_fwd}, atc_rev={l.atc_rev} must be >= 0"))
        if l.atc_fwd > l.rated_capacity or l.atc_rev > l.rated_capacity:
            out.append(Violation(l.id, "atc exceeds rating",
                                 f"atc ({l.atc_fwd}, {l.atc_rev}) > rating {l.rated_capacity}"))
        _validate_loss_model(l, out)

    flexible = sum(g.p_max for g in instance.generators)
    rigid = sum(g.p_min for g in instance.generators)
    net = instance.net_demand()
    if flexible < net:
        out.append(Violation(str(instance.timestamp), "insufficient_supply",
                             f"total p_max {flexible} < net demand {net}"))
    if rigid > net:
        out.append(Violation(str(instance.timestamp), "excess_must_run",
                             f"total p_min {rigid} > net demand {net}"))

    return ValidationReport(tuple(out))


# --- serialization ---------------------------------------------------------

def instance_to_dict(instance: MarketInstance) -> dict:
    return asdict(instance)


def _loss_model_from_dict(d: Optional[dict]) -> Optional[LossModel]:
    if d is None:
        return None
    linear = LinearLossFactors(**d["linear"]) if d.get("linear") else None
    pw = tuple(PwSegment(**s) for s in d["piecewise"]) if d.get("piecewise") else None
    return LossModel(d["quad_a"], d.get("quad_b", 0.0), d.get("quad_c", 0.0), linear, pw)


def instance_from_dict(d: dict) -> MarketInstance:
    zones = tuple(Zone(**z) for z in d["zones"])
    gens = tuple(Generator(**g) for g in d["generators"])
    lines = []
    for ld in d["interconnectors"]:
        ld = dict(ld)
        ld["loss_model"] = _loss_model_from_dict(ld.get("loss_model"))
        lines.append(Interconnector(**ld))
    return MarketInstance(d["timestamp"], zones, gens, tuple(lines))


def instance_to_json(instance: MarketInstance) -> str:
    return json.dumps(instance_to_dict(instance), indent=2, sort_keys=True)


def instance_from_json(text: str) -> MarketInstance:
    return instance_from_dict(json.loads(text))
