"""Gluing/cutting constructions, width predicates, augmented pages."""

import math

import pytest

import spinelab as sl
from spinelab import gallery
from spinelab.gluing import (SPINE, GluingSpec, PageSpec, augmented_page, cut,
                             edgeless_spine, glue, glued_structure,
                             is_book_like, spine_width, validate_gluing)
from spinelab.graphs import InvariantViolation
from spinelab.lattices import lattice


def _single_page_glued(dim=2):
    """Gluing with one page and an empty margin interaction."""
    page = PageSpec("p1", lattice(dim, tag="p1"),
                    in_margin=lambda c: all(x == 0 for x in c),
                    to_spine=lambda c: (),
                    from_spine=lambda sc: (0,) * dim)
    spec = GluingSpec((page,), edgeless_spine(lambda c: c == ()), "one-page")
    return glue(spec, check_center=(SPINE, ()), check_radius=3, delta=0,
                book_like=True, spine_enum=lambda z, R: [
                    ((SPINE, ()), sum(abs(x) for x in z[1]))]
                if sum(abs(x) for x in z[1]) <= R else [])


def test_single_page_glue_equals_page():
    g = _single_page_glued(2)
    # same weights and degrees as plain Z^2 everywhere
    z2 = lattice(2)
    for c in [(0, 0), (1, 0), (2, 3), (-1, 4)]:
        v = (SPINE, ()) if c == (0, 0) else ("p1", c)
        assert g.vertex_weight(v) == z2.vertex_weight(("z", c))
        assert len(g.neighbors(v)) == len(z2.neighbors(("z", c)))


def test_axis_gluing_weight_sums():
    g = gallery.build("lattice-axis", D=(4, 5))
    st = glued_structure(g)
    spine_v = (SPINE, (0,))
    # summed weights on the spine, untouched weights off it
    assert g.vertex_weight(spine_v) == 16.0 + 20.0
    assert g.vertex_weight(("p1", (0, 1, 0, 0))) == 16.0
    assert g.vertex_weight(("p2", (0, 1, 0, 0, 0))) == 20.0
    # doubled axis edges: both pages contribute an axis edge
    row = dict(g.neighbors(spine_v))
    assert row[(SPINE, (1,))] == 2.0
    assert row[("p1", (0, 1, 0, 0))] == 1.0
    rep = sl.check_weights(g, sl.ball(g, spine_v, 2))
    assert rep.ok


def test_glue_rejects_incompatible_margin():
    # page-2 margin bijection broken: from_spine maps off the margin
    p1 = PageSpec("p1", lattice(3, tag="p1"),
                  in_margin=lambda c: c == (0, 0, 0),
                  to_spine=lambda c: (), from_spine=lambda sc: (0, 0, 0))
    p2 = PageSpec("p2", lattice(3, tag="p2"),
                  in_margin=lambda c: c == (0, 0, 0),
                  to_spine=lambda c: (), from_spine=lambda sc: (1, 0, 0))
    spec = GluingSpec((p1, p2), edgeless_spine(lambda c: c == ()), "broken")
    with pytest.raises(InvariantViolation):
        glue(spec, check_center=(SPINE, ()), check_radius=2)


def test_validate_gluing_reports_alpha():
    g = gallery.build("lattice-axis", D=(4, 5))
    report = validate_gluing(g, (SPINE, (0,)), 3)
    assert not report["violations"]
    assert report["alpha"] == 0      # the spine is connected through the pages
    lo, hi = report["compat_witness"]
    assert lo <= 1.0 <= hi


# ---------------------------------------------------------------------------
# cutting
# ---------------------------------------------------------------------------

def _cut_z2_exact():
    z2 = lattice(2)
    rw = {"vertex": lambda t, c: 4.0 if c[1] == 0 else None,
          "edge": lambda t, c1, c2: 0.5 if c1[1] == 0 and c2[1] == 0 else None}
    return cut(z2, lambda v: v[1][1] == 0,
               lambda v: 0 if v[1][1] > 0 else 1, 2, reweight=rw,
               check_center=("z", (0, 0)), check_radius=4)


def test_cut_reglue_reproduces_z2_exactly():
    res = _cut_z2_exact()
    g = res.reglue(check_center=(SPINE, (0, 0)), check_radius=4,
                   delta=0, book_like=True)
    z2 = lattice(2)

    def image(c):
        return (SPINE, (c[0], 0)) if c[1] == 0 else \
            (("p1", c) if c[1] > 0 else ("p2", c))

    for c in [(0, 0), (3, 0), (1, 1), (2, -1), (-2, 2)]:
        v = image(c)
        assert g.vertex_weight(v) == z2.vertex_weight(("z", c))
        row = {w: mu for w, mu in g.neighbors(v)}
        zrow = {image(w[1]): mu for w, mu in z2.neighbors(("z", c))}
        assert row == zrow


def test_cut_neumann_inheritance_cap_weights():
    z2 = lattice(2)
    res = cut(z2, lambda v: v[1][1] == 0, lambda v: 0 if v[1][1] > 0 else 1, 2,
              check_center=("z", (0, 0)), check_radius=4)
    page = res.pages[0].graph
    cap = ("p1", (0, 0))
    assert page.vertex_weight(cap) == 8.0          # inherited weight
    assert dict(page.neighbors(cap))[("p1", (1, 0))] == 1.0  # added-back edge
    from spinelab.graphs import MarkovKernel
    neumann = MarkovKernel(page, "full")
    assert dict(neumann.row(cap))[cap] == pytest.approx(5 / 8)


def test_cut_empty_spine_is_identity():
    z2 = lattice(2)
    res = cut(z2, lambda v: False, lambda v: 0, 1)
    page = res.pages[0].graph
    for c in [(0, 0), (2, -1)]:
        assert page.vertex_weight(("p1", c)) == 8.0
        assert len(page.neighbors(("p1", c))) == 4


def test_cut_condition_c_violation():
    # an isolated interior spine vertex is surrounded by a single piece
    z2 = lattice(2)
    with pytest.raises(InvariantViolation):
        cut(z2, lambda v: v[1] == (0, 0), lambda v: 0, 1,
            check_center=("z", (0, 0)), check_radius=3)


def test_cut_detects_finite_component():
    z2 = lattice(2)
    ring = lambda v: sum(map(abs, v[1])) == 3
    comp = lambda v: 0 if sum(map(abs, v[1])) < 3 else 1
    with pytest.raises(InvariantViolation):
        cut(z2, ring, comp, 2, check_center=("z", (0, 0)), check_radius=8)


# ---------------------------------------------------------------------------
# width predicates and augmented pages
# ---------------------------------------------------------------------------

def test_lattice_axes_book_like_for_every_width():
    g = gallery.build("lattice-axis", D=(4, 5))
    assert glued_structure(g).book_like is True
    assert spine_width(g, (SPINE, (0,)), 4) == 0
    ok, witness = is_book_like(g, 0, (SPINE, (0,)), 4)
    assert ok and witness is None


def test_cross_fixed_width_not_book_like(cross_graph):
    g = cross_graph
    assert spine_width(g, (SPINE, (0, 0)), 4) == 0       # fixed width holds
    ok, witness = is_book_like(g, 1, (SPINE, (0, 0)), 4)
    assert not ok
    v, tag = witness
    assert tag in ("p1", "p3")     # a far spine point misses the outer pages


def test_single_page_trivially_book_like():
    g = _single_page_glued(2)
    assert spine_width(g, (SPINE, ()), 3) == 0
    assert is_book_like(g, 0, (SPINE, ()), 3)[0]


def test_augmented_page_contains_spine_when_book_like():
    g = gallery.build("lattice-axis", D=(4, 5))
    for i in range(2):
        hat = augmented_page(g, i, 0)
        for t in range(-3, 4):
            assert hat.member((SPINE, (t,)))


def test_augmented_page_cross_omits_far_spine(cross_graph):
    hat1 = augmented_page(cross_graph, 0, 1)   # the Z^4 page, width 1
    assert hat1.member((SPINE, (3, 0)))        # x1-axis belongs to page 1
    assert not hat1.member((SPINE, (0, 8)))    # far x2-axis point omitted
    assert not hat1.member((SPINE, (0, 2)))


def test_spine_enum_matches_bfs(cross_graph):
    g = cross_graph
    st = glued_structure(g)
    for z in [(SPINE, (0, 0)), (SPINE, (0, 3)), ("p2", (1, 2, 1, 0, 0))]:
        R = 4
        listed = {v: d for v, d in st.spine_enum(z, R)}
        hood = sl.ball(g, z, R)
        spine_in_ball = {v: d for v, d in hood.items() if st.spine_member(v)}
        assert listed == spine_in_ball


def test_slab_spine_has_interior_spine_vertices():
    g = gallery.build("lattice-slab", D=(4, 5), k=1, h=1)
    st = glued_structure(g)
    # the central axis is spine but belongs to no capped page: with h=1 its
    # neighbors all stay inside the slabs, so it was never capped
    interior = gallery.origin_of(g)
    assert g.contains(interior)
    assert st.spine_member(interior)
    assert not any(p.member(interior) for p in st.pages)
    w = spine_width(g, interior, 3)
    assert w is not None and w >= 1
