"""Heat evolution: exactness, brackets, loss accounting, sub-kernels, cache."""

import math

import numpy as np
import pytest

from oracles import dense_matrix_power_entry, paths_mass

import spinelab as sl
from spinelab import gallery
from spinelab.graphs import MarkovKernel, Subgraph
from spinelab.heat import (dirichlet_heat, heat_kernel, heat_series,
                           neumann_heat, semigroup_identity_gap, sub_heat_series)
from spinelab.lattices import lattice, lattice_orbit_map
from spinelab.windows import HeatCache, compile_window, evolve


def test_time_zero_is_indicator(z2):
    o = ("z", (0, 0))
    b = heat_kernel(z2, 0, o, o, radius=2, quotient=None)
    assert b.lower == pytest.approx(1 / 8)
    assert b.width == 0.0


def test_z2_one_and_two_step_values(z2):
    o = ("z", (0, 0))
    assert heat_kernel(z2, 1, o, o, radius=2, quotient=None).lower == 1 / 2 / 8
    # stay-stay plus out-and-back: u_2(o) = 1/4 + 4/64 = 5/16
    state = evolve(MarkovKernel(z2, "full"), o, [2], 3)[0]
    assert state.mass(o) == pytest.approx(5 / 16)
    assert state.mass(o) == pytest.approx(paths_mass(z2, o, o, 2))


def test_z1_two_step_path_enumeration(z1):
    o = ("z", (0,))
    expect = paths_mass(z1, o, o, 2) / 4.0
    got = heat_kernel(z1, 2, o, o, radius=3, quotient=None).lower
    assert got == pytest.approx(expect)
    assert expect == pytest.approx(3 / 32)


def test_exact_mode_zero_width_and_support(z2):
    o = ("z", (0, 0))
    kern = MarkovKernel(z2, "full")
    states = evolve(kern, o, [0, 3, 6], radius=6)
    for s in states:
        assert s.rim_lost == 0.0
        # finite propagation: support inside B(o, n)
        live = [s.window.ids[i] for i in np.nonzero(s.u)[0]]
        assert all(sum(map(abs, v[1])) <= s.time for v in live)
    assert states[-1].bracket(o).width == 0.0


def test_mass_accounting_exact(z3_tail_graph):
    kern = MarkovKernel(z3_tail_graph, "full")
    o = gallery.origin_of(z3_tail_graph)
    s = evolve(kern, o, [40], radius=10)[0]
    assert s.rim_lost > 0
    assert abs(s.total_mass() + s.rim_lost + s.killed - 1.0) <= 1e-12
    assert s.killed == 0.0    # full kernel has no interior kill


def test_lost_mass_monotone_and_zero_before_rim(z2):
    kern = MarkovKernel(z2, "full")
    states = evolve(kern, ("z", (0, 0)), list(range(0, 13, 2)), radius=8)
    lost = [s.rim_lost for s in states]
    assert all(a <= b + 1e-18 for a, b in zip(lost, lost[1:]))
    for s in states:
        if s.time <= 8:
            assert s.rim_lost == 0.0
    assert states[-1].rim_lost > 0   # n = 12 > R = 8


def test_bracket_contains_truth_and_nests(z2):
    o = ("z", (0, 0))
    exact = heat_kernel(z2, 24, o, o, radius=24, quotient=None).lower
    b_small = heat_kernel(z2, 24, o, o, radius=8, quotient=None)
    b_mid = heat_kernel(z2, 24, o, o, radius=14, quotient=None)
    assert b_small.contains(exact) and b_mid.contains(exact)
    assert b_small.encloses(b_mid)


def test_symmetry_in_exact_mode(z3_tail_graph):
    g = z3_tail_graph
    x, y = ("p1", (2, 0, 0)), ("p2", (1,))
    bxy = heat_kernel(g, 10, x, y, radius=10, quotient=None)
    byx = heat_kernel(g, 10, y, x, radius=10, quotient=None)
    assert abs(bxy.lower - byx.lower) <= 1e-12
    assert bxy.overlaps(byx)


def test_semigroup_identity(z2):
    gap = semigroup_identity_gap(z2, 3, 5, ("z", (0, 0)), ("z", (1, 1)))
    assert gap <= 1e-12


def test_quotient_source_must_be_fixed(z2):
    kern = MarkovKernel(z2, "full")
    om = lattice_orbit_map("z", 2, [("z", (0, 0))])
    with pytest.raises(ValueError):
        evolve(kern, ("z", (1, 0)), [2], 4, om)


def test_subgraph_heat_whole_graph_reduces(z2):
    sub = Subgraph(z2, lambda v: True, name="all")
    o = ("z", (0, 0))
    full = heat_kernel(z2, 6, o, o, radius=6, quotient=None)
    assert dirichlet_heat(sub, 6, o, o, radius=6).lower == full.lower
    assert neumann_heat(sub, 6, o, o, radius=6).lower == full.lower


def test_dirichlet_below_neumann_pointwise(z3):
    o = ("z", (0, 0, 0))
    sub = Subgraph(z3, lambda v: v != o, name="z3-minus-o")
    x, y = ("z", (2, 0, 0)), ("z", (0, 2, 0))
    for n in (8, 16, 32):
        pd = dirichlet_heat(sub, n, x, y, radius=n).lower
        pn = neumann_heat(sub, n, x, y, radius=n).lower
        assert 0 < pd <= pn + 1e-15


def test_halfline_dirichlet_absorbs_faster(z1):
    # Dirichlet at 0 kills the recurrent mass; Neumann keeps it
    sub = Subgraph(z1, lambda v: v[1][0] >= 1, name="tail")
    x = ("z", (1,))
    region = [("z", (k,)) for k in range(1, 40)]
    for n in (16, 64):
        pd = dirichlet_heat(sub, n, x, x, radius=50).lower
        pn = neumann_heat(sub, n, x, x, radius=50).lower
        oracle = dense_matrix_power_entry(z1, region, x, x, n) / 4.0
        assert pd == pytest.approx(oracle, rel=1e-10)
        assert pd < pn
    r16 = dirichlet_heat(sub, 16, x, x, radius=80).lower / \
        neumann_heat(sub, 16, x, x, radius=80).lower
    r64 = dirichlet_heat(sub, 64, x, x, radius=80).lower / \
        neumann_heat(sub, 64, x, x, radius=80).lower
    assert r64 < r16


def test_outside_sub_rejected(z3):
    sub = Subgraph(z3, lambda v: v != ("z", (0, 0, 0)), name="punctured")
    with pytest.raises(ValueError):
        dirichlet_heat(sub, 4, ("z", (0, 0, 0)), ("z", (1, 0, 0)))


def test_heat_cache_bitwise(tmp_path, z3_tail_graph):
    g = z3_tail_graph
    o = gallery.origin_of(g)
    kern = MarkovKernel(g, "full")
    cache = HeatCache(tmp_path)
    fresh = evolve(kern, o, [8, 16], 12, cache=cache)
    assert cache.misses == 1
    cached = evolve(kern, o, [8, 16], 12, cache=cache)
    assert cache.hits == 1
    for a, b in zip(fresh, cached):
        assert a.time == b.time
        assert np.array_equal(a.u, b.u)
        assert a.rim_lost == b.rim_lost


def test_auto_radius_yields_small_loss(z2):
    o = ("z", (0, 0))
    series = heat_series(z2, o, o, [256], quotient="auto")
    n, b = series[0]
    assert b.width <= 1e-3 * b.lower
