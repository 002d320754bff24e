"""Verification of two-sided heat-kernel estimates: Gaussian envelopes,
the volume-proxy upper bound, and the book-like spine-to-spine bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .fits import Envelope, fit_envelope
from .gluing import glued_structure
from .graphs import WeightedGraph, ball, distance, volume
from .heat import heat_series
from .spectral import big_f
from .windows import Bracket


@dataclass
class GaussianEnvelope:
    c1: float                  # lower prefactor at the shared c2
    c2: float
    c3: float                  # upper prefactor
    c4: float
    spread: float              # c3 / c1 at the best shared exponent constant
    samples: int


def check_gaussian(g: WeightedGraph, pairs, times, radius=None,
                   quotient="auto") -> GaussianEnvelope:
    """Two-sided Gaussian envelope constants for V(x, sqrt n)-normalized
    heat kernel values over the sampled pairs and times (n >= d only)."""
    samples = []
    for (x, y) in pairs:
        d = int(distance(g, x, y, cap=max(times)))
        series = heat_series(g, x, y, [n for n in times if n >= max(d, 1)],
                             radius=radius, quotient=quotient)
        for n, b in series:
            vol = volume(g, x, math.isqrt(n))
            samples.append((b.mid * vol, d, n))
    best = None
    from .fits import C2_GRID
    for c in C2_GRID:
        lo = min(v * math.exp(d * d / (c * n)) for (v, d, n) in samples)
        hi = max(v * math.exp(d * d / (c * n)) for (v, d, n) in samples)
        if best is None or hi / lo < best[0]:
            best = (hi / lo, c, lo, hi)
    spread, c, lo, hi = best
    return GaussianEnvelope(c1=lo, c2=c, c3=hi, c4=c, spread=spread,
                            samples=len(samples))


@dataclass
class FKUpperReport:
    envelope: Envelope
    series: list               # (n, x, y, value bracket, F-normalizer)
    bound_slope_series: list   # (n, 1/sqrt(F(x,rt n) F(y, rt n)))


def check_fk_upper(g: WeightedGraph, pairs, times, radius=None,
                   quotient="auto", delta=None) -> FKUpperReport:
    """Envelope constants (c1, c2) for
    p(n,x,y) <= c1 (F(x, sqrt n) F(y, sqrt n))^{-1/2} exp(-d^2/(c2 n))."""
    samples, series, bound_series = [], [], []
    for (x, y) in pairs:
        d = int(distance(g, x, y, cap=max(times)))
        hs = heat_series(g, x, y, [n for n in times if n >= max(d, 1)],
                         radius=radius, quotient=quotient)
        for n, b in hs:
            rt = max(1, math.isqrt(n))
            F = math.sqrt(big_f(g, x, rt, delta) * big_f(g, y, rt, delta))
            samples.append((b.upper * F, d, n))
            series.append((n, x, y, b, F))
            bound_series.append((n, 1.0 / F))
    env = fit_envelope(samples, "upper")
    return FKUpperReport(env, series, bound_series)


def nearest_page_point(g: WeightedGraph, v, page):
    """Closest page vertex; ties broken by lexicographically smallest id."""
    if page.member(v):
        return v
    seen = {v}
    frontier = [v]
    while frontier:
        hits = sorted(w for w in frontier if page.member(w))
        if hits:
            return hits[0]
        nxt = set()
        for u in frontier:
            for w, _ in g.neighbors(u):
                if w not in seen:
                    seen.add(w)
                    nxt.add(w)
        frontier = sorted(nxt)
    raise ValueError("page unreachable")


def min_page_volume_at(g: WeightedGraph, v, r: int) -> float:
    """min_i V_i(v_i, r) over pages, v_i the nearest page point."""
    st = glued_structure(g)
    best = math.inf
    for page in st.pages:
        vi = nearest_page_point(g, v, page)
        best = min(best, volume(page.graph, page.section(vi), r))
    return best


class NotBookLike(ValueError):
    pass


@dataclass
class SpineBoundsReport:
    upper: Envelope
    lower: Envelope
    spread: float
    series: list               # (n, v, w, bracket, reference volume)
    used_pairs: list
    min_time_rule: str


def check_spine_bounds(g: WeightedGraph, pairs, times, factor: float = 8.0,
                       radius=None, quotient="auto") -> SpineBoundsReport:
    """Two-sided envelope for spine-to-spine values against
    min_i V_i(v_i, sqrt m), for book-like graphs only.

    Times failing m >= factor * (d + delta) are dropped (the walk must have
    time to see all pages).
    """
    st = glued_structure(g)
    if not st.book_like:
        raise NotBookLike(
            f"{g.name} is not certified book-like; only the volume-proxy "
            f"upper bound (check_fk_upper) applies")
    delta = st.delta or 0
    samples, series, used = [], [], []
    for (v, w) in pairs:
        d = int(distance(g, v, w, cap=max(times)))
        admissible = [m for m in times if m >= factor * (d + delta) and m >= max(d, 1)]
        if not admissible:
            continue
        used.append((v, w))
        hs = heat_series(g, v, w, admissible, radius=radius, quotient=quotient)
        for m, b in hs:
            rt = max(1, math.isqrt(m))
            ref = min_page_volume_at(g, v, rt)
            samples.append((b.mid * ref, d, m))
            series.append((m, v, w, b, ref))
    if not samples:
        raise ValueError("no admissible (pair, time) samples under the "
                         "minimum-time rule")
    up = fit_envelope(samples, "upper")
    lo = fit_envelope(samples, "lower")
    return SpineBoundsReport(up, lo, up.c1 / lo.c1, series, used,
                             f"m >= {factor} * (d + {delta})")
