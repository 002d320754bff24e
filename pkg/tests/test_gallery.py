"""Gallery constructions: claimed certificates, membership and symmetries."""

import math
from fractions import Fraction

import pytest

import spinelab as sl
from spinelab import gallery
from spinelab.gluing import SPINE, glued_structure, is_book_like, spine_width
from spinelab.heat import heat_series


def test_gallery_names_and_docs():
    names = gallery.names()
    for required in ["half-planes", "lattice-axis", "finite-set", "cross",
                     "parabola", "z3-tail", "z3-z2"]:
        assert required in names
    with pytest.raises(KeyError):
        gallery.build("no-such-graph")


@pytest.mark.parametrize("name,params", [
    ("half-planes", {}), ("lattice-axis", {}), ("finite-set", {}),
    ("cross", {}), ("parabola", {}), ("z3-tail", {}), ("z3-z2", {}),
    ("cross-equal", {}), ("lattice-slab", {}),
])
def test_gallery_graphs_pass_weight_checks(name, params):
    g = gallery.build(name, **params)
    o = gallery.origin_of(g)
    rep = sl.check_weights(g, sl.ball(g, o, 2))
    assert rep.ok, rep.violations
    assert rep.c_e_witness >= 0.5 - 1e-12


def test_claimed_certificates_match_windowed_checks():
    for name, radius in [("half-planes", 4), ("lattice-axis", 4),
                         ("finite-set", 4), ("z3-tail", 4), ("parabola", 4)]:
        g = gallery.build(name)
        st = glued_structure(g)
        o = gallery.origin_of(g)
        w = spine_width(g, o, radius)
        assert w == st.delta, (name, w, st.delta)
        if st.book_like:
            assert is_book_like(g, st.delta, o, radius)[0], name


def test_lattice_axis_min_dimension_warning():
    with pytest.warns(UserWarning):
        gallery.build("lattice-axis", D=(4, 5), k=2)   # D_min - k = 2 < 3


def test_z3_tail_structure(z3_tail_graph):
    g = z3_tail_graph
    st = glued_structure(g)
    assert len(st.pages) == 2
    o = gallery.origin_of(g)
    assert g.vertex_weight(o) == 12.0 + 2.0
    assert st.pages[0].member(o) and st.pages[1].member(o)
    assert g.contains(("p2", (3,))) and not g.contains(("p2", (-1,)))


def test_parabola_membership_exact():
    g = gallery.build("parabola", D=(5, 6), alpha="1/2")
    # alpha = 1/2: inside iff x2^4 <= x1^2, i.e. x2^2 <= x1
    assert g.contains((SPINE, (4, 2)))
    assert g.contains((SPINE, (4, -2)))
    assert not g.contains((SPINE, (3, 2)))
    assert g.contains((SPINE, (0, 0)))
    assert not g.contains((SPINE, (-1, 0)))
    # page vertices keep plain lattice membership off the margin
    assert g.contains(("p1", (4, 2, 1, 0, 0)))
    assert not g.contains(("p1", (4, 2, 0, 0, 0)))   # identified into the spine


def test_parabola_band_mode_is_boundary_layer():
    g = gallery.build("parabola", D=(5, 6), alpha="1/2", mode="band")
    assert g.contains((SPINE, (16, 4)))       # on the curve
    assert g.contains((SPINE, (16, 3)))       # within sqrt(6) of it vertically
    assert not g.contains((SPINE, (100, 0)))  # deep interior excluded


def test_parabola_bad_alpha_rejected():
    with pytest.raises(ValueError):
        gallery.build("parabola", D=(5, 6), alpha="3/2")


def test_cross_pages_seen_from_far_axis_point(cross_graph):
    from spinelab.spectral import pages_seen
    w = (SPINE, (0, 8))
    assert pages_seen(cross_graph, w, 4) == [1, 2]
    assert pages_seen(cross_graph, w, 8) == [0, 1, 2]


@pytest.mark.parametrize("name,fixed_extra", [
    ("finite-set", ()),
    ("z3-tail", ()),
    ("z3-z2", ()),
    ("lattice-axis", ()),
])
def test_quotient_matches_direct_offcenter(name, fixed_extra):
    g = gallery.build(name)
    o = gallery.origin_of(g)
    direct = heat_series(g, o, o, [10], radius=12, quotient=None)[0][1]
    fast = heat_series(g, o, o, [10], radius=12, quotient="auto")[0][1]
    assert direct.lower == pytest.approx(fast.lower, abs=1e-14)


def test_axis_pair_quotient_matches_direct():
    g = gallery.build("lattice-axis", D=(4, 5))
    v, w = (SPINE, (0,)), (SPINE, (2,))
    direct = heat_series(g, v, w, [8], radius=10, quotient=None)[0][1]
    fast = heat_series(g, v, w, [8], radius=10, quotient="auto")[0][1]
    assert direct.lower == pytest.approx(fast.lower, abs=1e-14)
    om = g.symmetry_fixing((v, w))
    assert om is not None and om.orbit_size(v) == 1 and om.orbit_size(w) == 1


def test_finite_set_page_swap_orbit():
    g = gallery.build("finite-set", D=(3, 3))
    om = g.symmetry_fixing((gallery.origin_of(g),))
    assert om.canon(("p2", (1, 2, 0))) == om.canon(("p1", (2, 1, 0)))
    assert om.orbit_size(("p1", (1, 0, 0))) == 2 * 6   # signs/perms x page swap


def test_z3z3_diag_equals_half_z3(z3):
    # collapsing the double cover: K_glued^n(o, o) = K_Z3^n(o, o), so the
    # heat density at the glued origin is half the Z3 one (pi doubles)
    g = gallery.build("finite-set", D=(3, 3))
    o = gallery.origin_of(g)
    oz = ("z", (0, 0, 0))
    for n in (4, 9):
        glued = heat_series(g, o, o, [n], radius=n, quotient="auto")[0][1].lower
        plain = heat_series(z3, oz, oz, [n], radius=n, quotient="auto")[0][1].lower
        assert glued == pytest.approx(plain / 2, rel=1e-12)
