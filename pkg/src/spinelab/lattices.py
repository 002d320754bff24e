"""Lattice building blocks: Z^d pieces with the lazy simple random walk.

These serve as pages for the gluing constructions.  All weights follow the
lazy-SRW convention ``pi = 2 deg`` and ``mu = 1`` on every edge, so the walk
holds with probability 1/2 and otherwise moves to a uniform neighbor.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable, Optional

from .graphs import OrbitMap, WeightedGraph


def _lattice_neighbors(coords, constraint):
    out = []
    for i in range(len(coords)):
        for s in (1, -1):
            w = list(coords)
            w[i] += s
            w = tuple(w)
            if constraint is None or constraint(w):
                out.append(w)
    return out


_FACT = [math.factorial(i) for i in range(20)]


def _orbit_size_sorted_abs(values) -> int:
    """Orbit size of a coordinate tuple under permutations and sign flips."""
    size = _FACT[len(values)]
    run, prev = 0, None
    for v in sorted(map(abs, values)):
        if v != 0:
            size *= 2
        if v == prev:
            run += 1
            size //= run
        else:
            run = 1
            prev = v
    return size


def _canon_free_coords(coords, free_axes):
    if len(free_axes) == len(coords):
        return tuple(sorted(map(abs, coords), reverse=True))
    vals = sorted((abs(coords[i]) for i in free_axes), reverse=True)
    out = list(coords)
    for i, a in zip(free_axes, vals):
        out[i] = a
    return tuple(out)


def lattice_orbit_map(tag: str, dim: int, fixed_vertices, name="bsym") -> Optional[OrbitMap]:
    """Hyperoctahedral orbit map of Z^d fixing the given vertices pointwise.

    Axes on which every fixed vertex has coordinate zero remain fully
    symmetric (permute + flip); all other axes are frozen.  Returns None if
    no symmetry survives.
    """
    frozen = set()
    for v in fixed_vertices:
        t, c = v
        if t != tag:
            continue
        for i, x in enumerate(c):
            if x != 0:
                frozen.add(i)
    free = tuple(i for i in range(dim) if i not in frozen)
    if not free:
        return None

    def canon(v):
        t, c = v
        if t != tag:
            return v
        return (t, _canon_free_coords(c, free))

    def osize(v):
        t, c = v
        if t != tag:
            return 1
        return _orbit_size_sorted_abs([c[i] for i in free])

    return OrbitMap(canon, osize, name=f"{name}[{tag}:{','.join(map(str, free))}]")


def lattice(dim: int, tag: str = "z", constraint: Optional[Callable] = None,
            name: Optional[str] = None, transitive: Optional[bool] = None) -> WeightedGraph:
    """Z^dim with lazy SRW, optionally restricted by a coordinate constraint.

    The constraint takes a raw coordinate tuple; degrees (hence pi) shrink
    where neighbors are cut away, exactly as for a subgraph with inherited
    simple weights.
    """

    if constraint is None:
        offsets = []
        for i in range(dim):
            for s in (1, -1):
                off = [0] * dim
                off[i] = s
                offsets.append(tuple(off))

        def nbrs(v):
            t, c = v
            return [((t, tuple(x + o for x, o in zip(c, off))), 1.0)
                    for off in offsets]

        four_d = 4.0 * dim

        def pi(v):
            return four_d
    else:
        def nbrs(v):
            t, c = v
            return [((t, w), 1.0) for w in _lattice_neighbors(c, constraint)]

        def pi(v):
            _, c = v
            return 2.0 * len(_lattice_neighbors(c, constraint))

    def contains(v):
        t, c = v
        return (t == tag and len(c) == dim and all(isinstance(x, int) for x in c)
                and (constraint is None or constraint(c)))

    is_trans = transitive if transitive is not None else constraint is None
    g = WeightedGraph(
        name=name or f"Z{dim}[{tag}]",
        neighbors=nbrs,
        vertex_weight=pi,
        contains=contains,
        laziness=0.5,
        weight_control=4.0 * dim,
        vertex_transitive=is_trans,
        orbit_map=(lambda fixed: lattice_orbit_map(tag, dim, fixed)) if constraint is None else None,
        meta={"cache_id": name or f"Z{dim}[{tag}]", "dim": dim, "tag": tag},
    )
    if is_trans:
        g.meta["volume_profile"] = lambda r: 4.0 * dim * lattice_ball_count(dim, r)
    return g


def half_line(tag: str = "h") -> WeightedGraph:
    """Z_{>=0} with lazy SRW (pi(0) = 2, interior pi = 4)."""
    return lattice(1, tag=tag, constraint=lambda c: c[0] >= 0,
                   name=f"halfline[{tag}]", transitive=False)


def half_plane(tag: str, upper: bool = True) -> WeightedGraph:
    """Discrete half-plane {y >= 0} (or {y <= 0}) of Z^2 with lazy SRW."""
    cons = (lambda c: c[1] >= 0) if upper else (lambda c: c[1] <= 0)
    side = "upper" if upper else "lower"
    return lattice(2, tag=tag, constraint=cons, name=f"halfplane-{side}[{tag}]",
                   transitive=False)


@lru_cache(maxsize=None)
def lattice_ball_count(dim: int, r: int) -> int:
    """Number of lattice points in the closed L1 ball of radius r in Z^dim.

    Recurrence over dimension: N_d(r) = sum over the last coordinate of
    N_{d-1}(r - |x_d|).
    """
    if r < 0:
        return 0
    if dim == 0:
        return 1
    total = lattice_ball_count(dim - 1, r)
    for a in range(1, r + 1):
        total += 2 * lattice_ball_count(dim - 1, r - a)
    return total
