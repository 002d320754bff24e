"""Named glued-graph constructions and the gallery registry.

Every constructor returns a WeightedGraph whose ``meta["glued"]`` carries the
page/spine structure, an analytic spine-width certificate where one exists,
and (for the lattice families) exact automorphism orbit maps used by the heat
evolution fast path.
"""

from __future__ import annotations

import dataclasses
import math
from fractions import Fraction
from typing import Optional

from .gluing import SPINE, GluingSpec, PageSpec, edgeless_spine, glue, glued_structure
from .graphs import OrbitMap, WeightedGraph
from .lattices import (_canon_free_coords, _orbit_size_sorted_abs, half_line,
                       half_plane, lattice)


def _axis_orbit_map(dims, k, fixed, swap_classes=()):
    """Orbit map of a lattice gluing along shared Z^k axes.

    The group is (shared hyperoctahedral action on the k axis coordinates
    fixing the pinned vertices) x (per-page action on the remaining
    coordinates) x (swaps of identical, unpinned pages).
    """
    frozen_axis, frozen_page = set(), {i: set() for i in range(len(dims))}
    pinned_pages = set()
    for t, c in fixed:
        if t == SPINE:
            for j, x in enumerate(c):
                if x != 0:
                    frozen_axis.add(j)
        else:
            i = int(t[1:]) - 1
            pinned_pages.add(i)
            for j, x in enumerate(c):
                if x != 0:
                    (frozen_axis if j < k else frozen_page[i]).add(j)
    free_axis = tuple(j for j in range(k) if j not in frozen_axis)
    free_page = {i: tuple(j for j in range(k, dims[i]) if j not in frozen_page[i])
                 for i in range(len(dims))}
    swap_to = {}
    for cls in swap_classes:
        cls = [i for i in cls if i not in pinned_pages]
        for i in cls[1:]:
            swap_to[f"p{i + 1}"] = (f"p{cls[0] + 1}", len(cls))

    def canon(v):
        t, c = v
        if t == SPINE:
            return (t, _canon_free_coords(c, free_axis))
        i = int(t[1:]) - 1
        c = _canon_free_coords(_canon_free_coords(c, free_axis), free_page[i])
        if t in swap_to:
            t = swap_to[t][0]
        return (t, c)

    def osize(v):
        t, c = v
        n = _orbit_size_sorted_abs([c[j] for j in free_axis])
        if t == SPINE:
            return n
        i = int(t[1:]) - 1
        n *= _orbit_size_sorted_abs([c[j] for j in free_page[i]])
        for cls in swap_classes:
            cls = [j for j in cls if j not in pinned_pages]
            if int(t[1:]) - 1 in cls:
                n *= len(cls)
        return n

    return OrbitMap(canon, osize, name="axes")


def _lattice_page(i, dim):
    return lattice(dim, tag=f"p{i + 1}")


def _with_orbit_hook(g, hook):
    g2 = dataclasses.replace(g, orbit_map=hook)
    return g2


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def half_planes() -> WeightedGraph:
    """Two lazy-SRW half-planes glued along an edgeless copy of Z.

    The glued graph is Z^2 with doubled weights on the axis: spine vertices
    get weight 12 and the doubled axis edges weight 2.
    """
    def page(i, upper):
        tag = f"p{i + 1}"
        return PageSpec(
            tag=tag,
            graph=half_plane(tag, upper=upper),
            in_margin=lambda c: c[1] == 0,
            to_spine=lambda c: (c[0],),
            from_spine=lambda sc: (sc[0], 0),
        )

    spec = GluingSpec(
        pages=(page(0, True), page(1, False)),
        spine=edgeless_spine(lambda c: len(c) == 1, name="Z-spine"),
        name="half-planes",
    )

    def spine_enum(z, R):
        t, c = z
        if t == SPINE:
            a, off = c[0], 0
        else:
            a, off = c[0], abs(c[1])
        return [((SPINE, (a + d,)), off + abs(d)) for d in range(-(R - off), R - off + 1)
                if off + abs(d) <= R]

    g = glue(spec, check_center=(SPINE, (0,)), check_radius=4,
             delta=0, book_like=True, spine_enum=spine_enum)
    return g


def lattice_axes(dims, k: int = 1) -> WeightedGraph:
    """Lattices Z^{D_1}, ..., Z^{D_l} glued along a shared edgeless Z^k.

    Book-like for every width since the spine lies inside all pages.
    """
    dims = tuple(int(d) for d in dims)
    if any(d <= k for d in dims):
        raise ValueError("page dimensions must exceed the spine dimension")
    if min(dims) - k < 3:
        import warnings
        warnings.warn("min page dim minus spine dim < 3: pages are not "
                      "uniformly transient over the spine", stacklevel=2)

    def page(i, dim):
        tag = f"p{i + 1}"
        return PageSpec(
            tag=tag,
            graph=_lattice_page(i, dim),
            in_margin=lambda c: all(x == 0 for x in c[k:]),
            to_spine=lambda c: c[:k],
            from_spine=lambda sc, d=dim: sc + (0,) * (d - k),
        )

    spec = GluingSpec(
        pages=tuple(page(i, d) for i, d in enumerate(dims)),
        spine=edgeless_spine(lambda c: len(c) == k, name=f"Z{k}-spine"),
        name=f"lattice-axes{list(dims)}-k{k}",
    )

    def spine_enum(z, R):
        t, c = z
        if t == SPINE:
            base, off = c, 0
        else:
            base, off = c[:k], sum(abs(x) for x in c[k:])
        out = []
        budget = R - off
        if budget < 0:
            return out
        for delta in _l1_box(k, budget):
            d = off + sum(abs(x) for x in delta)
            out.append(((SPINE, tuple(b + x for b, x in zip(base, delta))), d))
        return out

    swap_classes = [[i for i, d in enumerate(dims) if d == dv]
                    for dv in sorted(set(dims))]
    g = glue(spec, check_center=(SPINE, (0,) * k), check_radius=3,
             delta=0, book_like=True, spine_enum=spine_enum)
    return _with_orbit_hook(g, lambda fixed: _axis_orbit_map(dims, k, fixed, swap_classes))


def finite_set(dims) -> WeightedGraph:
    """Lattice pages glued at a single shared origin (finite gluing set)."""
    dims = tuple(int(d) for d in dims)

    def page(i, dim):
        tag = f"p{i + 1}"
        return PageSpec(
            tag=tag,
            graph=_lattice_page(i, dim),
            in_margin=lambda c: all(x == 0 for x in c),
            to_spine=lambda c: (),
            from_spine=lambda sc, d=dim: (0,) * d,
        )

    spec = GluingSpec(
        pages=tuple(page(i, d) for i, d in enumerate(dims)),
        spine=edgeless_spine(lambda c: c == (), name="point-spine"),
        name=f"finite-set{list(dims)}",
    )
    swap_classes = [[i for i, d in enumerate(dims) if d == dv]
                    for dv in sorted(set(dims))]
    g = glue(spec, check_center=(SPINE, ()), check_radius=3,
             delta=0, book_like=True,
             spine_enum=lambda z, R: _point_spine_enum(z, R))
    return _with_orbit_hook(g, lambda fixed: _axis_orbit_map(dims, 0, fixed, swap_classes))


def _point_spine_enum(z, R):
    t, c = z
    d = sum(abs(x) for x in c)
    return [((SPINE, ()), d)] if d <= R else []


def z3_tail() -> WeightedGraph:
    """Z^3 with a half-line tail, glued at the origins."""
    p1 = PageSpec(
        tag="p1",
        graph=_lattice_page(0, 3),
        in_margin=lambda c: c == (0, 0, 0),
        to_spine=lambda c: (),
        from_spine=lambda sc: (0, 0, 0),
    )
    p2 = PageSpec(
        tag="p2",
        graph=half_line("p2"),
        in_margin=lambda c: c == (0,),
        to_spine=lambda c: (),
        from_spine=lambda sc: (0,),
    )
    spec = GluingSpec(pages=(p1, p2), spine=edgeless_spine(lambda c: c == (), name="o"),
                      name="z3-tail")
    g = glue(spec, check_center=(SPINE, ()), check_radius=3,
             delta=0, book_like=True, spine_enum=_point_spine_enum)

    def hook(fixed):
        from .lattices import lattice_orbit_map
        om = lattice_orbit_map("p1", 3, fixed)
        if om is None:
            return None
        return OrbitMap(om.canon, om.orbit_size, name="z3tail-sym")

    return _with_orbit_hook(g, hook)


def z3_z2() -> WeightedGraph:
    """Z^3 glued to Z^2 at the origins (recurrent second page)."""
    p1 = PageSpec("p1", _lattice_page(0, 3), lambda c: c == (0, 0, 0),
                  lambda c: (), lambda sc: (0, 0, 0))
    p2 = PageSpec("p2", _lattice_page(1, 2), lambda c: c == (0, 0),
                  lambda c: (), lambda sc: (0, 0))
    spec = GluingSpec(pages=(p1, p2), spine=edgeless_spine(lambda c: c == (), name="o"),
                      name="z3-z2")
    g = glue(spec, check_center=(SPINE, ()), check_radius=3,
             delta=0, book_like=True, spine_enum=_point_spine_enum)

    def hook(fixed):
        from .lattices import lattice_orbit_map
        om1 = lattice_orbit_map("p1", 3, fixed)
        om2 = lattice_orbit_map("p2", 2, fixed)
        if om1 is None and om2 is None:
            return None

        def canon(v):
            if v[0] == "p1" and om1 is not None:
                return om1.canon(v)
            if v[0] == "p2" and om2 is not None:
                return om2.canon(v)
            return v

        def osize(v):
            if v[0] == "p1" and om1 is not None:
                return om1.orbit_size(v)
            if v[0] == "p2" and om2 is not None:
                return om2.orbit_size(v)
            return 1

        return OrbitMap(canon, osize, name="z3z2-sym")

    return _with_orbit_hook(g, hook)


def cross(dims=(4, 5, 6)) -> WeightedGraph:
    """Three lattices glued along a cross of two axes of the middle page.

    Page 1 shares its first axis with the middle page, page 3 shares its
    second axis with the middle page.  The spine (both axes of the middle
    page) has fixed width zero but the graph is not book-like unless all
    pages have equal dimension.
    """
    d1, d2, d3 = (int(d) for d in dims)

    def on_axis1(sc):
        return sc[1] == 0

    def on_axis2(sc):
        return sc[0] == 0

    p1 = PageSpec(
        "p1", _lattice_page(0, d1),
        in_margin=lambda c: all(x == 0 for x in c[1:]),
        to_spine=lambda c: (c[0], 0),
        from_spine=lambda sc: (sc[0],) + (0,) * (d1 - 1) if on_axis1(sc) else None,
    )
    p2 = PageSpec(
        "p2", _lattice_page(1, d2),
        in_margin=lambda c: (all(x == 0 for x in c[1:]) or
                             (c[0] == 0 and all(x == 0 for x in c[2:]))),
        to_spine=lambda c: (c[0], c[1]),
        from_spine=lambda sc: (sc[0], sc[1]) + (0,) * (d2 - 2)
        if sc[0] * sc[1] == 0 else None,
    )
    p3 = PageSpec(
        "p3", _lattice_page(2, d3),
        in_margin=lambda c: c[0] == 0 and all(x == 0 for x in c[2:]),
        to_spine=lambda c: (0, c[1]),
        from_spine=lambda sc: (0, sc[1]) + (0,) * (d3 - 2) if on_axis2(sc) else None,
    )
    spec = GluingSpec(
        pages=(p1, p2, p3),
        spine=edgeless_spine(lambda c: len(c) == 2 and c[0] * c[1] == 0,
                             name="cross-spine"),
        name=f"cross{list((d1, d2, d3))}",
    )

    def spine_enum(z, R):
        t, c = z
        if t == SPINE:
            base, off = c, 0
        elif t == "p1":
            base, off = (c[0], 0), sum(abs(x) for x in c[1:])
        elif t == "p2":
            base, off = (c[0], c[1]), sum(abs(x) for x in c[2:])
        else:
            base, off = (0, c[1]), abs(c[0]) + sum(abs(x) for x in c[2:])
        out = []
        budget = R - off
        if budget < 0:
            return out
        for axis, center, mk in ((0, base[0], lambda s: (s, 0)),
                                 (1, base[1], lambda s: (0, s))):
            for t1 in range(center - budget, center + budget + 1):
                sc = mk(t1)
                if sc == (0, 0) and axis == 1:
                    continue  # origin counted once
                d = off + _cross_plane_dist(base, sc)
                if d <= R:
                    out.append(((SPINE, sc), d))
        return out

    return glue(spec, check_center=(SPINE, (0, 0)), check_radius=3,
                delta=0, book_like=(d1 == d2 == d3), spine_enum=spine_enum)


def _cross_plane_dist(a, b):
    """Graph distance between cross points, within the shared middle page."""
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def parabola(dims=(5, 6), alpha=Fraction(1, 2), mode="interior") -> WeightedGraph:
    """Two lattices glued along (the interior of) a flat lattice parabola.

    The gluing set lives in the x1-x2 plane of both pages: points with
    x1 >= 0 and x2^2 <= x1^(2 alpha), tested in exact integer arithmetic for
    rational alpha = p/q.  In "band" mode only points within a vertical
    distance ceil(sqrt(max dim)) of the boundary curve are glued.
    """
    d1, d2 = (int(d) for d in dims)
    alpha = Fraction(alpha)
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    p, q = alpha.numerator, alpha.denominator
    s = math.isqrt(max(d1, d2) - 1) + 1

    def inside(x1, x2) -> bool:
        return x1 >= 0 and abs(x2) ** (2 * q) <= x1 ** (2 * p)

    if mode == "interior":
        def in_set(x1, x2):
            return inside(x1, x2)
    elif mode == "band":
        def in_set(x1, x2):
            return inside(x1, x2) and x1 ** (2 * p) < (abs(x2) + s) ** (2 * q)
    else:
        raise ValueError(f"unknown parabola mode {mode!r}")

    def page(i, dim):
        tag = f"p{i + 1}"
        return PageSpec(
            tag=tag,
            graph=_lattice_page(i, dim),
            in_margin=lambda c: all(x == 0 for x in c[2:]) and in_set(c[0], c[1]),
            to_spine=lambda c: (c[0], c[1]),
            from_spine=lambda sc, d=dim: sc + (0,) * (d - 2) if in_set(*sc) else None,
        )

    spec = GluingSpec(
        pages=(page(0, d1), page(1, d2)),
        spine=edgeless_spine(lambda c: len(c) == 2 and in_set(*c),
                             name="parabola-spine"),
        name=f"parabola{[d1, d2]}-a{p}q{q}-{mode}",
    )

    def spine_enum(z, R):
        t, c = z
        if t == SPINE:
            base, off = c, 0
        else:
            base, off = (c[0], c[1]), sum(abs(x) for x in c[2:])
        out = []
        budget = R - off
        for dx in range(-budget, budget + 1):
            x1 = base[0] + dx
            rem = budget - abs(dx)
            for dy in range(-rem, rem + 1):
                x2 = base[1] + dy
                if in_set(x1, x2):
                    out.append(((SPINE, (x1, x2)), off + abs(dx) + abs(dy)))
        return out

    # two pages: automatically book-like; spine width zero (margins in pages)
    return glue(spec, check_center=(SPINE, (1, 0)), check_radius=3,
                delta=0, book_like=True, spine_enum=spine_enum)


def lattice_slab(dims, k: int = 1, h: int = 1) -> WeightedGraph:
    """Slab-spine variant of the axis gluing, built by cutting and regluing.

    The spine consists of one slab |x_j| <= h (j > k) per page, all meeting in
    the shared central Z^k; spine vertices strictly inside a slab belong to no
    page.
    """
    from .gluing import cut
    dims = tuple(int(d) for d in dims)
    if any(d - k < 2 for d in dims):
        raise ValueError("need page dim - spine dim >= 2 to keep pieces connected")
    base = lattice_axes(dims, k)

    def in_slab(v) -> bool:
        t, c = v
        if t == SPINE:
            return True
        return all(abs(x) <= h for x in c[k:])

    def component_of(v) -> int:
        t, c = v
        return int(t[1:]) - 1

    res = cut(base, in_slab, component_of, len(dims),
              name=f"lattice-slab{list(dims)}-k{k}-h{h}",
              check_center=(SPINE, (0,) * k), check_radius=h + 2,
              spine_mode="inherited")
    origin = (SPINE, (SPINE, (0,) * k))
    g = res.reglue(check_center=origin, check_radius=h + 2,
                   delta=h + 1, book_like=None)
    g.meta["origin"] = origin
    return g


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

def _l1_box(dim, R):
    """All integer points of the closed L1 ball of radius R in Z^dim."""
    if dim == 0:
        yield ()
        return
    for x in range(-R, R + 1):
        for rest in _l1_box(dim - 1, R - abs(x)):
            yield (x,) + rest


GALLERY = {
    "lattice": {
        "build": lambda d=2: lattice(int(d)),
        "doc": "plain Z^d with lazy SRW (d=2)",
    },
    "half-planes": {
        "build": half_planes,
        "doc": "two half-planes glued along an edgeless Z",
    },
    "lattice-axis": {
        "build": lambda D=(4, 5), k=1: lattice_axes(D, int(k)),
        "doc": "Z^{D_1}#...#Z^{D_l} glued along a shared Z^k (D=[4,5], k=1)",
    },
    "lattice-slab": {
        "build": lambda D=(4, 5), k=1, h=1: lattice_slab(D, int(k), int(h)),
        "doc": "axis gluing cut apart with slab spines (D=[4,5], k=1, h=1)",
    },
    "finite-set": {
        "build": lambda D=(3, 3): finite_set(D),
        "doc": "lattice pages glued at one shared origin (D=[3,3])",
    },
    "cross": {
        "build": lambda D=(4, 5, 6): cross(D),
        "doc": "Z^D1 and Z^D3 glued to two axes of Z^D2 (D=[4,5,6])",
    },
    "cross-equal": {
        "build": lambda D=(4, 4, 4): cross(D),
        "doc": "equal-volume cross (D=[4,4,4])",
    },
    "parabola": {
        "build": lambda D=(5, 6), alpha="1/2", mode="interior":
            parabola(D, Fraction(alpha), mode),
        "doc": "lattices glued along a flat parabola region (D=[5,6], alpha=1/2)",
    },
    "z3-tail": {
        "build": z3_tail,
        "doc": "Z^3 with a half-line tail, glued at the origins",
    },
    "z3-z2": {
        "build": z3_z2,
        "doc": "Z^3 glued to Z^2 at the origins",
    },
}


def build(name: str, **params) -> WeightedGraph:
    if name not in GALLERY:
        raise KeyError(f"unknown gallery graph {name!r}; see gallery.names()")
    return GALLERY[name]["build"](**params)


def names():
    return sorted(GALLERY)


def origin_of(g: WeightedGraph):
    """A canonical base vertex: the spine origin for glued graphs."""
    if "origin" in g.meta:
        return g.meta["origin"]
    if "glued" in g.meta:
        for cand in [(SPINE, ()), (SPINE, (0,)), (SPINE, (0, 0)), (SPINE, (0, 0, 0))]:
            if g.contains(cand):
                return cand
        raise ValueError(f"no canonical origin for {g.name}")
    dim = g.meta.get("dim")
    return (g.meta.get("tag", "z"), (0,) * dim)
