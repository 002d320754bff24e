"""Gluing pages along a spine, and cutting graphs back apart.

Pages are weighted graphs with a marked margin; each margin is identified
with a copy inside the spine by a bijection.  Identified vertices collapse
to a single spine-tagged id, weights add, and doubled edges merge by summing
their weights.  The reverse (cutting) removes a spine vertex set, caps the
trailing edges and reweights the pieces within declared comparability
constants.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from .graphs import (InvariantViolation, Subgraph, Vertex, WeightedGraph, ball,
                     check_weights, distance_to_set)

SPINE = "s"


@dataclass(frozen=True)
class PageSpec:
    """One page of a gluing: a graph, its margin and the identification map."""

    tag: str
    graph: WeightedGraph
    in_margin: Callable[[tuple], bool]             # page coords -> bool
    to_spine: Callable[[tuple], tuple]             # margin coords -> spine coords
    from_spine: Callable[[tuple], Optional[tuple]]  # spine coords -> page coords


@dataclass(frozen=True)
class GluingSpec:
    pages: tuple
    spine: WeightedGraph          # vertices (SPINE, coords); possibly edgeless, pi == 0
    name: str
    compat_lower: Optional[float] = None   # declared c_I
    compat_upper: Optional[float] = None   # declared C_I


@dataclass
class GluedPage:
    """A page seen inside the glued graph."""

    tag: str
    graph: WeightedGraph                       # standalone page graph
    spec: PageSpec

    def member(self, v) -> bool:
        t, c = v
        if t == self.tag:
            return True
        if t == SPINE:
            return self.spec.from_spine(c) is not None
        return False

    def section(self, v):
        """Glued-graph vertex -> standalone page vertex (None if outside)."""
        t, c = v
        if t == self.tag:
            return v
        if t == SPINE:
            pc = self.spec.from_spine(c)
            if pc is not None:
                return (self.tag, pc)
        return None

    def subgraph(self, glued: WeightedGraph) -> Subgraph:
        return Subgraph(glued, self.member, name=self.tag)


@dataclass
class GluedStructure:
    """Back-references from a glued graph to its pages and spine."""

    pages: tuple
    spine_member: Callable[[Vertex], bool]
    delta: Optional[int] = None          # certified spine width (0 = margins in pages)
    book_like: Optional[bool] = None     # analytic certificate, None = unknown
    alpha: Optional[int] = None          # smallest window-certified alpha (condition B)
    spine_enum: Optional[Callable] = None  # (z, R) -> [(spine vertex, exact distance)]
    compat: tuple = (None, None)

    def page(self, i) -> GluedPage:
        return self.pages[i]


def edgeless_spine(contains_coords: Callable[[tuple], bool], name="spine") -> WeightedGraph:
    """A totally disconnected spine with zero vertex weights."""
    return WeightedGraph(
        name=name,
        neighbors=lambda v: [],
        vertex_weight=lambda v: 0.0,
        contains=lambda v: v[0] == SPINE and contains_coords(v[1]),
        laziness=1.0,
        meta={"cache_id": name},
    )


def glue(spec: GluingSpec, check_center=None, check_radius: int = 5,
         delta: Optional[int] = 0, book_like: Optional[bool] = None,
         spine_enum: Optional[Callable] = None) -> WeightedGraph:
    """Glue pages along the spine; validates conditions A-D on a window.

    Weights on the glued graph are the sums of the component weights, with the
    convention that a component contributes zero off its own vertex set.
    Raises InvariantViolation when the window validation fails.
    """
    pages = tuple(GluedPage(p.tag, p.graph, p) for p in spec.pages)
    by_tag = {p.tag: p for p in pages}
    spine = spec.spine

    def canon(p: GluedPage, w):
        t, c = w
        if p.spec.in_margin(c):
            return (SPINE, p.spec.to_spine(c))
        return w

    def neighbors(v):
        t, c = v
        acc = {}
        if t == SPINE:
            for w, mu in spine.neighbors(v):
                acc[w] = acc.get(w, 0.0) + mu
            for p in pages:
                pc = p.spec.from_spine(c)
                if pc is None:
                    continue
                for w, mu in p.graph.neighbors((p.tag, pc)):
                    cw = canon(p, w)
                    acc[cw] = acc.get(cw, 0.0) + mu
        else:
            p = by_tag[t]
            for w, mu in p.graph.neighbors(v):
                cw = canon(p, w)
                acc[cw] = acc.get(cw, 0.0) + mu
        return list(acc.items())

    def pi(v):
        t, c = v
        if t == SPINE:
            total = spine.vertex_weight(v)
            for p in pages:
                pc = p.spec.from_spine(c)
                if pc is not None:
                    total += p.graph.vertex_weight((p.tag, pc))
            return total
        return by_tag[t].graph.vertex_weight(v)

    def contains(v):
        t, c = v
        if t == SPINE:
            return spine.contains(v)
        p = by_tag.get(t)
        return p is not None and p.graph.contains(v) and not p.spec.in_margin(c)

    structure = GluedStructure(
        pages=pages,
        spine_member=lambda v: v[0] == SPINE and contains(v),
        delta=delta,
        book_like=book_like,
        spine_enum=spine_enum,
        compat=(spec.compat_lower, spec.compat_upper),
    )
    lazies = [p.graph.laziness for p in pages] + [spine.laziness]
    g = WeightedGraph(
        name=spec.name,
        neighbors=neighbors,
        vertex_weight=pi,
        contains=contains,
        laziness=min(lazies),
        weight_control=None,
        meta={"cache_id": spec.name, "glued": structure},
    )
    if check_center is not None:
        report = validate_gluing(g, check_center, check_radius)
        if report["violations"]:
            raise InvariantViolation("; ".join(report["violations"][:3]))
        structure.alpha = report["alpha"]
    return g


def glued_structure(g: WeightedGraph) -> GluedStructure:
    try:
        return g.meta["glued"]
    except KeyError:
        raise ValueError(f"{g.name} is not a glued graph") from None


def validate_gluing(g: WeightedGraph, center, radius: int) -> dict:
    """Window certification of conditions A-D plus the weight invariants.

    A: the window ball is connected by construction of BFS; we additionally
       check every page and the spine are reached when they meet the window.
    B: smallest alpha such that the alpha-neighborhood of the spine
       (restricted to the window) is connected.
    C: the inner boundary of each page equals its margin, on the window.
    D: identification bijections with comparable weights.
    """
    st = glued_structure(g)
    window = ball(g, center, radius)
    report = {"violations": [], "alpha": None, "window_radius": radius,
              "center": center}

    wrep = check_weights(g, window)
    if not wrep.ok:
        report["violations"].extend(wrep.violations)
    report["weights"] = wrep

    # C: inner boundary of each page = margin, within the deflated window
    deflate = {v for v, d in window.items() if d <= radius - 1}
    for i, p in enumerate(st.pages):
        for v in deflate:
            if not p.member(v):
                continue
            on_margin = v[0] == SPINE
            exposed = any(not p.member(w) for w, _ in g.neighbors(v))
            if exposed and not on_margin:
                report["violations"].append(
                    f"condition C: page {p.tag} inner-boundary vertex {v!r} off margin")
            if on_margin and not exposed:
                # margin vertex fully surrounded by one page: only possible if
                # the other components never touch it, which breaks cutting
                # condition c but not gluing itself; record as a note
                report.setdefault("notes", []).append(
                    f"margin vertex {v!r} has all neighbors inside page {p.tag}")

    # D: bijection + compatible weights on the window
    lo, hi = math.inf, 0.0
    for v in deflate:
        if not st.spine_member(v):
            continue
        _, c = v
        weights_here = []
        for p in st.pages:
            pc = p.spec.from_spine(c)
            if pc is None:
                continue
            if p.spec.to_spine(pc) != c:
                report["violations"].append(
                    f"condition D: identification of {v!r} with page {p.tag} not a bijection")
            weights_here.append(p.graph.vertex_weight((p.tag, pc)))
        for a, b in itertools.combinations(weights_here, 2):
            if a > 0 and b > 0:
                lo = min(lo, a / b, b / a)
                hi = max(hi, a / b, b / a)
    report["compat_witness"] = (lo if lo is not math.inf else 1.0, max(hi, 1.0))

    # B: alpha-connectivity of the spine inside the window
    spine_pts = sorted(v for v in window if st.spine_member(v))
    if spine_pts:
        for alpha in range(0, radius + 1):
            if _alpha_connected(g, spine_pts, alpha, window):
                report["alpha"] = alpha
                break
        if report["alpha"] is None:
            report["violations"].append(
                f"condition B: spine not alpha-connected on window radius {radius}")
    return report


def _alpha_connected(g, spine_pts, alpha, window) -> bool:
    """Is the alpha-neighborhood of the spine connected, within the window?"""
    hood = set()
    for v in window:
        if distance_to_set(g, v, lambda w: w in set(spine_pts), cap=alpha) <= alpha:
            hood.add(v)
    if not hood:
        return False
    seen = {next(iter(sorted(hood)))}
    frontier = list(seen)
    while frontier:
        nxt = []
        for v in frontier:
            for w, _ in g.neighbors(v):
                if w in hood and w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    return all(v in seen for v in spine_pts)


def spine_width(g: WeightedGraph, window_center, window_radius: int):
    """Smallest certified width delta on the window, or None if inconclusive.

    delta = max over spine vertices in the window of the distance to the
    nearest page; distances are capped at the window radius, and hitting the
    cap makes the result inconclusive.
    """
    st = glued_structure(g)
    window = ball(g, window_center, window_radius)
    worst = 0
    for v in window:
        if not st.spine_member(v):
            continue
        best = min(distance_to_set(g, v, p.member, cap=window_radius)
                   for p in st.pages)
        if best is math.inf:
            return None
        worst = max(worst, best)
    return worst


def is_book_like(g: WeightedGraph, delta: int, window_center, window_radius: int):
    """Window check of the book-like property: every spine vertex within
    ``delta`` of every page.  Returns (bool, witness or None)."""
    st = glued_structure(g)
    window = ball(g, window_center, window_radius)
    for v in sorted(w for w in window if st.spine_member(w)):
        for p in st.pages:
            if distance_to_set(g, v, p.member, cap=delta + 1) > delta:
                return False, (v, p.tag)
    return True, None


def augmented_page(g: WeightedGraph, i: int, delta: int) -> Subgraph:
    """The page thickened into the spine: [page]_delta intersect (page u spine)."""
    st = glued_structure(g)
    page = st.pages[i]

    def member(v):
        if not (page.member(v) or st.spine_member(v)):
            return False
        return distance_to_set(g, v, page.member, cap=delta + 1) <= delta

    return Subgraph(g, member, name=f"{page.tag}^")


# ---------------------------------------------------------------------------
# Cutting
# ---------------------------------------------------------------------------

@dataclass
class CutResult:
    spine: WeightedGraph
    pages: tuple                     # PageSpec per piece, margins = cap vertices
    spec: GluingSpec
    report: dict = field(default_factory=dict)

    def reglue(self, **kw) -> WeightedGraph:
        return glue(self.spec, **kw)


def cut(g: WeightedGraph, spine_member: Callable[[Vertex], bool],
        component_of: Callable[[Vertex], int], n_components: int,
        reweight: Optional[dict] = None, name: Optional[str] = None,
        check_center=None, check_radius: int = 5,
        spine_mode: str = "zero") -> CutResult:
    """Cut ``g`` along a spine vertex set into capped, reweighted pages.

    ``component_of`` labels the components of g minus the spine (0-based);
    for implicit infinite graphs the labeling is supplied by the caller and
    certified on the window.  ``reweight`` may carry per-piece weight
    overrides ``{"vertex": fn(tag, coords) -> pi or None,
    "edge": fn(tag, c1, c2) -> mu or None}``; None falls back to the weights
    inherited from ``g`` (plain Neumann inheritance).  ``spine_mode`` is
    "zero" for a totally disconnected weight-zero spine or "inherited" for
    the induced subgraph on the spine set with its inherited weights.
    """
    rw_v = (reweight or {}).get("vertex", lambda t, c: None)
    rw_e = (reweight or {}).get("edge", lambda t, c1, c2: None)
    # page/spine "coordinates" are plain coordinate tuples when the base graph
    # has a single component tag, otherwise full base vertex ids
    if "tag" in g.meta:
        base_tag = g.meta["tag"]
        unpack = lambda c: (base_tag, c)
        pack = lambda v: v[1]
    else:
        unpack = lambda c: c
        pack = lambda v: v

    def page_spec(idx: int) -> PageSpec:
        tag = f"p{idx + 1}"

        def _piece_member(c) -> bool:
            v = unpack(c)
            try:
                if not g.contains(v):
                    return False
            except (TypeError, ValueError, IndexError):
                return False
            if spine_member(v):
                # cap vertex: kept iff adjacent to this component
                return any(not spine_member(w) and component_of(w) == idx
                           for w, _ in g.neighbors(v))
            return component_of(v) == idx

        def nbrs(v):
            # induced edges, including the added-back edges between caps
            _, c = v
            out = []
            for w, mu in g.neighbors(unpack(c)):
                wc = pack(w)
                if not _piece_member(wc):
                    continue
                override = rw_e(tag, c, wc)
                out.append(((tag, wc), override if override is not None else mu))
            return out

        def pi(v):
            _, c = v
            override = rw_v(tag, c)
            if override is not None:
                return override
            return g.vertex_weight(unpack(c))

        page_graph = WeightedGraph(
            name=f"{g.name}-cut-{tag}",
            neighbors=nbrs,
            vertex_weight=pi,
            contains=lambda v: v[0] == tag and _piece_member(v[1]),
            laziness=g.laziness,
            meta={"cache_id": f"{g.cache_id}-cut-{tag}"},
        )
        return PageSpec(
            tag=tag,
            graph=page_graph,
            in_margin=lambda c: spine_member(unpack(c)) and _piece_member(c),
            to_spine=lambda c: c,
            from_spine=lambda c: c if _piece_member(c) else None,
        )

    def spine_coords(c) -> bool:
        v = unpack(c)
        try:
            return g.contains(v) and spine_member(v)
        except (TypeError, ValueError, IndexError):
            return False

    pages = tuple(page_spec(i) for i in range(n_components))
    if spine_mode == "zero":
        spine = edgeless_spine(spine_coords, name=f"{g.name}-cut-spine")
    elif spine_mode == "inherited":
        def spine_nbrs(v):
            _, c = v
            return [((SPINE, pack(w)), mu) for w, mu in g.neighbors(unpack(c))
                    if spine_member(w)]

        spine = WeightedGraph(
            name=f"{g.name}-cut-spine",
            neighbors=spine_nbrs,
            vertex_weight=lambda v: g.vertex_weight(unpack(v[1])),
            contains=lambda v: v[0] == SPINE and spine_coords(v[1]),
            laziness=g.laziness,
            meta={"cache_id": f"{g.cache_id}-cut-spine"},
        )
    else:
        raise ValueError(f"unknown spine_mode {spine_mode!r}")
    spec = GluingSpec(pages=pages, spine=spine, name=name or f"{g.name}-reglued")
    result = CutResult(spine=spine, pages=pages, spec=spec)

    if check_center is not None:
        result.report = _check_cut_conditions(g, spine_member, component_of,
                                              n_components, check_center, check_radius)
        if result.report["violations"]:
            raise InvariantViolation("; ".join(result.report["violations"][:3]))
    return result


def _check_cut_conditions(g, spine_member, component_of, n_components,
                          center, radius) -> dict:
    """Cutting conditions a-c, certified on a window."""
    window = ball(g, center, radius)
    report = {"violations": [], "window_radius": radius}
    seen_components = set()
    for v in window:
        if spine_member(v):
            pieces = set()
            for w, _ in g.neighbors(v):
                pieces.add(-1 if spine_member(w) else component_of(w))
            if pieces and pieces != {-1} and len(pieces) < 2:
                report["violations"].append(
                    f"condition c: spine vertex {v!r} surrounded by a single piece")
        else:
            idx = component_of(v)
            if not 0 <= idx < n_components:
                report["violations"].append(f"component label {idx} out of range at {v!r}")
            seen_components.add(idx)
    # condition a: every piece present in the window must reach the rim
    # (finite-component witness)
    rim = {v for v, d in window.items() if d == radius}
    for idx in sorted(seen_components):
        if not any(not spine_member(v) and component_of(v) == idx for v in rim):
            report["violations"].append(
                f"condition a: component {idx} appears finite within window radius {radius}")
    report["components_seen"] = sorted(seen_components)
    return report
