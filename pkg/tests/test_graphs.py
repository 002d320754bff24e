"""graph-core: kernels, weights, balls, sub-kernels."""

import math

import pytest

from oracles import kernel_dict, lattice_ball_closed_form

import spinelab as sl
from spinelab.gluing import SPINE, edgeless_spine
from spinelab.graphs import (MarkovKernel, OrbitMap, Subgraph, WeightedGraph,
                             quotient_graph)
from spinelab.lattices import half_plane, lattice, lattice_orbit_map


def test_z2_lazy_kernel_row(z2):
    row = kernel_dict(z2, ("z", (0, 0)))
    assert row[("z", (0, 0))] == 0.5
    for w in [(1, 0), (-1, 0), (0, 1), (0, -1)]:
        assert row[("z", w)] == 0.125


def test_isolated_zero_weight_vertex_holds():
    spine = edgeless_spine(lambda c: True)
    assert spine.kernel_row((SPINE, (3,))) == [((SPINE, (3,)), 1.0)]


def test_z1_lazy_row(z1):
    row = kernel_dict(z1, ("z", (5,)))
    assert row == {("z", (5,)): 0.5, ("z", (4,)): 0.25, ("z", (6,)): 0.25}


def test_check_weights_z3(z3):
    rep = sl.check_weights(z3, sl.ball(z3, ("z", (0, 0, 0)), 2))
    assert rep.ok and rep.symmetric and rep.subordinate
    assert rep.c_c_witness == 12.0
    assert rep.c_e_witness == 0.5


def test_check_weights_flags_asymmetric():
    def nbrs(v):
        # directed weight mismatch between 0 and 1
        t, (x,) = v
        out = []
        if x + 1 <= 2:
            out.append((("z", (x + 1,)), 2.0 if x == 0 else 1.0))
        if x - 1 >= 0:
            out.append((("z", (x - 1,)), 1.0))
        return out

    g = WeightedGraph("bad", nbrs, lambda v: 8.0, lambda v: True)
    rep = sl.check_weights(g, [("z", (0,)), ("z", (1,)), ("z", (2,))])
    assert not rep.symmetric
    assert rep.bad_edge is not None


def test_glued_half_planes_weights(half_planes_graph):
    g = half_planes_graph
    o = (SPINE, (0,))
    assert g.vertex_weight(o) == 12.0
    row = dict(g.neighbors(o))
    assert row[(SPINE, (1,))] == 2.0 and row[(SPINE, (-1,))] == 2.0
    assert row[("p1", (0, 1))] == 1.0 and row[("p2", (0, -1))] == 1.0
    rep = sl.check_weights(g, sl.ball(g, o, 3))
    assert rep.ok
    assert rep.c_e_witness == 0.5


def test_volume_and_distance(z2):
    o = ("z", (0, 0))
    assert sl.volume(z2, o, 0) == 8.0
    assert sl.volume(z2, o, 1) == 40.0
    assert sl.distance(z2, o, o) == 0
    assert sl.distance(z2, o, ("z", (3, -2))) == 5
    # profile route vs generic BFS enumeration
    g_slow = lattice(2, constraint=lambda c: True, transitive=False)
    for r in range(4):
        assert sl.volume(z2, o, r) == sl.volume(g_slow, ("z", (0, 0)), r)
        assert sl.volume(z2, o, r) == 8.0 * lattice_ball_closed_form(2, r)


def test_disconnected_distance_is_inf():
    # a cap is required to witness infinity on an implicit infinite graph
    g = lattice(1, constraint=lambda c: c[0] != 0, transitive=False)
    assert sl.distance(g, ("z", (1,)), ("z", (-1,)), cap=50) is math.inf


def test_neumann_dirichlet_whole_graph(z2):
    sub = Subgraph(z2, lambda v: True, name="all")
    o = ("z", (0, 0))
    assert kernel_dict(z2, o) == dict(sub.neumann_kernel().row(o))
    assert kernel_dict(z2, o) == dict(sub.dirichlet_kernel().row(o))


def test_half_plane_neumann_diagonal(z2):
    sub = Subgraph(z2, lambda v: v[1][1] >= 0, name="upper")
    v = ("z", (3, 0))
    nrow = dict(sub.neumann_kernel().row(v))
    assert nrow[v] == pytest.approx(1 - 3 / 8)   # three surviving neighbors
    assert sub.neumann_kernel().row_sum(v) == pytest.approx(1.0)
    drow = dict(sub.dirichlet_kernel().row(v))
    assert drow[v] == 0.5
    assert sub.dirichlet_kernel().row_sum(v) == pytest.approx(1 - 1 / 8)
    # interior vertex: Dirichlet row sums to one
    assert sub.dirichlet_kernel().row_sum(("z", (0, 2))) == pytest.approx(1.0)


def test_boundaries(z2):
    sub = Subgraph(z2, lambda v: v[1][1] >= 0, name="upper")
    region = sl.ball(z2, ("z", (0, 1)), 2)
    ext = sub.exterior_boundary(region)
    inner = sub.inner_boundary(region)
    assert all(v[1][1] == -1 for v in ext)
    assert all(v[1][1] == 0 for v in inner)
    assert not set(ext) & set(inner)


def test_row_sums_and_reversibility_sampled(z3_tail_graph):
    g = z3_tail_graph
    kern = MarkovKernel(g, "full")
    window = sl.ball(g, ("s", ()), 3)
    for v in window:
        assert abs(kern.row_sum(v) - 1.0) <= 1e-12
        pv = g.vertex_weight(v)
        for w, p in kern.row(v):
            if w == v:
                continue
            back = dict(kern.row(w))[v]
            assert abs(p * pv - back * g.vertex_weight(w)) <= 1e-12 * max(pv, 1)


def test_quotient_graph_is_reversible_weighted_graph(z3):
    om = lattice_orbit_map("z", 3, [("z", (0, 0, 0))])
    q = quotient_graph(z3, om)
    window = sl.ball(q, ("z", (0, 0, 0)), 3)
    rep = sl.check_weights(q, window)
    assert rep.ok
    kern = MarkovKernel(q, "full")
    assert all(abs(kern.row_sum(v) - 1.0) <= 1e-12 for v in window)


def test_build_kernel_rejects_bad_graph():
    g = WeightedGraph("bad", lambda v: [(("z", (1,)), 9.0)] if v[1] == (0,)
                      else [(("z", (0,)), 9.0)],
                      lambda v: 8.0, lambda v: True)
    with pytest.raises(sl.InvariantViolation):
        sl.build_kernel(g, check_region=[("z", (0,)), ("z", (1,))])
