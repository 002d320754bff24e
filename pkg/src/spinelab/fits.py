"""Log-log exponent fits and two-parameter envelope fitting."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence


@dataclass
class ExponentFit:
    slope: float
    intercept: float
    drift: float              # |slope(first half) - slope(second half)|
    points: int
    admissible: list          # (n, value, width) actually used

    def __repr__(self):
        return (f"ExponentFit(slope={self.slope:.4f}, drift={self.drift:.4f}, "
                f"points={self.points})")


def _ols_slope(xs, ys):
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    slope = sxy / sxx
    return slope, my - slope * mx


def fit_exponent(series: Sequence, width_frac: float = 0.05,
                 min_points: int = 6) -> ExponentFit:
    """Least-squares slope of log(value) against log(n).

    ``series`` holds (n, value, width) triples; points whose bracket width
    exceeds ``width_frac`` of the value are dropped.  Drift compares the
    slopes of the two halves of the admissible window.
    """
    admissible = [(n, v, w) for (n, v, w) in series
                  if v > 0 and w <= width_frac * v]
    if len(admissible) < min_points:
        raise ValueError(f"only {len(admissible)} admissible points "
                         f"(need >= {min_points})")
    xs = [math.log(n) for (n, _, _) in admissible]
    ys = [math.log(v) for (_, v, _) in admissible]
    slope, intercept = _ols_slope(xs, ys)
    half = len(xs) // 2
    s1, _ = _ols_slope(xs[:half + 1], ys[:half + 1])
    s2, _ = _ols_slope(xs[half:], ys[half:])
    return ExponentFit(slope, intercept, abs(s1 - s2), len(admissible), admissible)


def series_from_brackets(pairs) -> list:
    """(n, Bracket) pairs -> (n, midpoint value, width) triples."""
    return [(n, b.mid, b.width) for (n, b) in pairs]


C2_GRID = [0.25 * 2 ** (k / 2.0) for k in range(17)]   # log-spaced, 0.25 .. 64


@dataclass
class Envelope:
    c1: float
    c2: float
    side: str                  # "upper" or "lower"
    samples: int


def fit_envelope(samples, side: str, grid=None) -> Envelope:
    """Fit c1 at each c2 on a log-spaced grid for bounds of the form
    value <= c1 * exp(-d^2 / (c2 n)) ("upper") or >= ("lower").

    ``samples`` holds (value, d, n); the best c2 minimizes c1 for upper
    envelopes and maximizes it for lower ones.
    """
    grid = grid or C2_GRID
    best = None
    for c2 in grid:
        weights = [v * math.exp(d * d / (c2 * n)) for (v, d, n) in samples]
        c1 = max(weights) if side == "upper" else min(weights)
        if best is None or (side == "upper" and c1 < best[0]) \
                or (side == "lower" and c1 > best[0]):
            best = (c1, c2)
    return Envelope(best[0], best[1], side, len(samples))
