"""Loss-factor calibration.

Turns quadratic line-loss curves ``a*f**2 + b*|f| + c`` into the linear and
piecewise-linear factors used by the clearing formulations, and measures
approximation quality (RMSE against the quadratic curve).

Linear factors interpolate the quadratic at zero flow and at the median of
the historical non-zero flow magnitudes. Piecewise factors are the
continuous least-squares linear fit per segment, on an equal-width segment
grid over [0, rated_capacity] (last segment truncated at the rating).
"""

from __future__ import annotations

import csv
import statistics
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .model import Interconnector, LinearLossFactors, LossModel, PwSegment


class OutOfRange(ValueError):
    """Flow magnitude beyond the line rating."""


class NoNonzeroFlows(ValueError):
    """The line was never used; the median-flow calibration is impossible."""


@dataclass(frozen=True)
class FlowHistory:
    line_id: str
    samples: tuple[float, ...]  # signed MW, one per historical hour


def quadratic_loss(model: LossModel, f: float, rated_capacity: float | None = None) -> float:
    """True loss at signed flow f: a*f**2 + b*|f| + c. Even in f."""
    if rated_capacity is not None and abs(f) > rated_capacity + 1e-9:
        raise OutOfRange(f"|{f}| exceeds rating {rated_capacity}")
    return model.quad_a * f * f + model.quad_b * abs(f) + model.quad_c


def linear_factors(model: LossModel, history: FlowHistory) -> LinearLossFactors:
    """Secant through (0, c) and (m, loss(m)), m the median non-zero |flow|."""
    mags = [abs(s) for s in history.samples if s != 0.0]
    if not mags:
        raise NoNonzeroFlows(f"line {history.line_id}: no non-zero flow samples")
    m = statistics.median(mags)
    alpha = model.quad_a * m + model.quad_b
    return LinearLossFactors(alpha=alpha, beta=model.quad_c)


def segment_grid(rated_capacity: float, segment_len: float) -> list[tuple[float, float]]:
    """Equal-width breakpoints over [0, rated], last segment truncated."""
    if segment_len <= 0:
        raise ValueError("segment_len must be > 0")
    edges = [0.0]
    while edges[-1] + segment_len < rated_capacity - 1e-9:
        edges.append(edges[-1] + segment_len)
    edges.append(rated_capacity)
    return list(zip(edges[:-1], edges[1:]))


def piecewise_factors(model: LossModel, rated_capacity: float,
                      segment_len: float) -> tuple[PwSegment, ...]:
    """Per-segment continuous least-squares linear fit to the quadratic.

    On [l, u] the fit of a*f**2 + b*f + c is
        alpha = a*(l + u) + b
        beta  = c - a*(l*u + (u - l)**2 / 6)
    (the residual is orthogonal to {1, f} on the segment). Fitting each
    segment independently yields a discontinuous piecewise function, which
    the disjunctive clearing formulation represents exactly.
    """
    a, b, c = model.quad_a, model.quad_b, model.quad_c
    segs = []
    for l, u in segment_grid(rated_capacity, segment_len):
        alpha = a * (l + u) + b
        beta = c - a * (l * u + (u - l) ** 2 / 6.0)
        segs.append(PwSegment(lo=l, hi=u, alpha=alpha, beta=beta))
    return tuple(segs)


def pw_loss_at(segments: Sequence[PwSegment], f: float) -> float:
    """Value of the piecewise approximation at flow magnitude |f|."""
    mag = abs(f)
    for seg in segments:
        if mag <= seg.hi + 1e-9:
            return seg.alpha * mag + seg.beta
    raise OutOfRange(f"|{f}| beyond last segment {segments[-1].hi}")


def discontinuity_magnitudes(segments: Sequence[PwSegment]) -> list[float]:
    """Jump of the fitted function at each interior breakpoint (reported per line)."""
    jumps = []
    for s1, s2 in zip(segments, segments[1:]):
        jumps.append(abs((s2.alpha * s2.lo + s2.beta) - (s1.alpha * s1.hi + s1.beta)))
    return jumps


def approximation_rmse(model: LossModel, rated_capacity: float, *,
                       linear: LinearLossFactors | None = None,
                       piecewise: Sequence[PwSegment] | None = None,
                       grid_step: float = 1.0) -> float:
    """RMSE of (approximation - quadratic) on the uniform grid [0, rated]."""
    if (linear is None) == (piecewise is None):
        raise ValueError("pass exactly one of linear= or piecewise=")
    fs = np.arange(0.0, rated_capacity + grid_step / 2, grid_step)
    fs[-1] = min(fs[-1], rated_capacity)
    true = model.quad_a * fs ** 2 + model.quad_b * fs + model.quad_c
    if linear is not None:
        approx = linear.alpha * fs + linear.beta
    else:
        approx = np.array([pw_loss_at(piecewise, f) for f in fs])
    return float(np.sqrt(np.mean((approx - true) ** 2)))


def fleet_rmse(lines: Iterable[Interconnector], *, segment_len: float | None = None,
               grid_step: float = 1.0) -> float:
    """Arithmetic mean of per-line RMSE. segment_len=None uses linear factors."""
    errs = []
    for line in lines:
        model = line.loss_model
        if model is None:
            continue
        if segment_len is None:
            if model.linear is None:
                raise ValueError(f"line {line.id}: linear factors not calibrated")
            errs.append(approximation_rmse(model, line.rated_capacity,
                                           linear=model.linear, grid_step=grid_step))
        else:
            segs = piecewise_factors(model, line.rated_capacity, segment_len)
            errs.append(approximation_rmse(model, line.rated_capacity,
                                           piecewise=segs, grid_step=grid_step))
    if not errs:
        raise ValueError("no lines with loss models")
    return float(np.mean(errs))


def write_factors_csv(path, lines: Iterable[Interconnector]) -> None:
    """Export calibrated factors: line id, k (0 = linear row), lo, hi, alpha, beta."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["line", "k", "lo", "hi", "alpha", "beta"])
        for line in lines:
            model = line.loss_model
            if model is None:
                continue
            if model.linear is not None:
                w.writerow([line.id, 0, 0.0, line.rated_capacity,
                            repr(model.linear.alpha), repr(model.linear.beta)])
            if model.piecewise:
                for k, s in enumerate(model.piecewise, start=1):
                    w.writerow([line.id, k, repr(s.lo), repr(s.hi),
                                repr(s.alpha), repr(s.beta)])
