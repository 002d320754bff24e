"""Weighted graphs carrying a reversible random-walk structure.

A graph is given implicitly by a neighbor generator over vertices of the form
``(tag, coords)`` where ``tag`` is a short component label and ``coords`` an
integer tuple.  No global vertex table is ever materialized, so implicit
infinite lattices (and graphs glued from them) are first-class citizens.

Conventions:
  * edge weights ``mu`` are symmetric and adapted to the edges,
  * ``sum_w mu(v,w) <= pi(v)`` (subordination), with slack realized as
    holding probability of the induced Markov kernel,
  * ``pi(v) = 0`` is permitted only for isolated vertices, which then hold
    with probability one.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

Vertex = tuple  # (tag: str, coords: tuple[int, ...])


class InvariantViolation(ValueError):
    """A structural invariant failed; names the offending vertex or edge."""

    def __init__(self, message, vertex=None, edge=None):
        super().__init__(message)
        self.vertex = vertex
        self.edge = edge


@dataclass(frozen=True)
class OrbitMap:
    """Orbit structure of a vertex-weight-preserving automorphism group.

    ``canon`` maps a vertex to its orbit representative, ``orbit_size`` gives
    the orbit cardinality of a representative.  Used to evolve heat states on
    the exact orbit quotient of a graph.
    """

    canon: Callable[[Vertex], Vertex]
    orbit_size: Callable[[Vertex], int]
    name: str = "orbit"


@dataclass(frozen=True)
class WeightedGraph:
    """Implicit weighted graph: neighbor generator plus vertex weights."""

    name: str
    neighbors: Callable[[Vertex], list]          # v -> [(w, mu_vw), ...]
    vertex_weight: Callable[[Vertex], float]     # pi
    contains: Callable[[Vertex], bool]
    laziness: float = 0.5                        # declared C_e
    weight_control: Optional[float] = None       # declared C_c
    vertex_transitive: bool = False
    # optional hook: fixed vertices -> OrbitMap of the largest implemented
    # symmetry subgroup fixing them pointwise, or None
    orbit_map: Optional[Callable[[tuple], Optional[OrbitMap]]] = None
    meta: dict = field(default_factory=dict, hash=False, compare=False)

    def pi(self, v) -> float:
        return self.vertex_weight(v)

    @property
    def cache_id(self) -> str:
        return self.meta.get("cache_id", self.name)

    def kernel_row(self, v):
        """Transition row of the induced Markov kernel, diagonal included."""
        p = self.vertex_weight(v)
        if p == 0.0:
            return [(v, 1.0)]
        row = [(w, mu / p) for w, mu in self.neighbors(v)]
        diag = 1.0 - math.fsum(q for _, q in row)
        row.append((v, diag))
        return row

    def symmetry_fixing(self, fixed) -> Optional[OrbitMap]:
        if self.orbit_map is None:
            return None
        return self.orbit_map(tuple(fixed))


@dataclass(frozen=True)
class MarkovKernel:
    """Markov (or sub-Markov) kernel of a graph or of a subgraph.

    mode "full": kernel of the whole graph.
    mode "neumann": edges leaving the membership set are dropped and their
        mass is added to the diagonal (reflected walk).
    mode "dirichlet": edges leaving the set are dropped and their mass is
        killed; rows on the inner boundary sum to < 1.
    """

    graph: WeightedGraph
    mode: str = "full"
    membership: Optional[Callable[[Vertex], bool]] = None
    name: str = ""

    def __post_init__(self):
        if self.mode not in ("full", "neumann", "dirichlet"):
            raise ValueError(f"unknown kernel mode {self.mode!r}")
        if self.mode != "full" and self.membership is None:
            raise ValueError("neumann/dirichlet kernels need a membership predicate")

    def pi(self, v) -> float:
        return self.graph.vertex_weight(v)

    def row(self, v):
        """Transition row [(w, K(v,w)), ...] including the diagonal entry."""
        if self.mode == "full":
            return self.graph.kernel_row(v)
        if not self.membership(v):
            raise InvariantViolation(f"vertex {v!r} outside subgraph", vertex=v)
        p = self.graph.vertex_weight(v)
        if p == 0.0:
            return [(v, 1.0)]
        inside, boundary_mass = [], 0.0
        for w, mu in self.graph.neighbors(v):
            if self.membership(w):
                inside.append((w, mu / p))
            else:
                boundary_mass += mu / p
        full_diag = 1.0 - math.fsum(mu / p for w, mu in self.graph.neighbors(v))
        if self.mode == "neumann":
            inside.append((v, full_diag + boundary_mass))
        else:
            inside.append((v, full_diag))
        return inside

    def row_sum(self, v) -> float:
        return math.fsum(q for _, q in self.row(v))


@dataclass(frozen=True)
class Subgraph:
    """A subgraph of a parent graph given by a membership predicate."""

    parent: WeightedGraph
    member: Callable[[Vertex], bool]
    name: str = ""

    def neumann_kernel(self) -> MarkovKernel:
        return MarkovKernel(self.parent, "neumann", self.member, name=f"{self.name}:N")

    def dirichlet_kernel(self) -> MarkovKernel:
        return MarkovKernel(self.parent, "dirichlet", self.member, name=f"{self.name}:D")

    def exterior_boundary(self, region) -> list:
        """Vertices outside the subgraph adjacent to it, within ``region``."""
        out = set()
        for v in region:
            if not self.member(v):
                continue
            for w, _ in self.parent.neighbors(v):
                if not self.member(w):
                    out.add(w)
        return sorted(out)

    def inner_boundary(self, region) -> list:
        inner = []
        for v in region:
            if not self.member(v):
                continue
            if any(not self.member(w) for w, _ in self.parent.neighbors(v)):
                inner.append(v)
        return sorted(inner)

    def as_graph(self, mode="neumann") -> WeightedGraph:
        """The subgraph with its inherited (Neumann) random-walk structure."""
        kern = self.neumann_kernel() if mode == "neumann" else self.dirichlet_kernel()

        def nbrs(v):
            return [(w, mu) for w, mu in self.parent.neighbors(v) if self.member(w)]

        return WeightedGraph(
            name=f"{self.parent.name}|{self.name or mode}",
            neighbors=nbrs,
            vertex_weight=self.parent.vertex_weight,
            contains=lambda v: self.parent.contains(v) and self.member(v),
            laziness=self.parent.laziness,
            weight_control=self.parent.weight_control,
            meta={"cache_id": f"{self.parent.cache_id}|{self.name or mode}"},
        )


def build_kernel(g: WeightedGraph, check_region: Optional[Iterable] = None) -> MarkovKernel:
    """Markov kernel of ``g``; optionally validates invariants on a region."""
    kern = MarkovKernel(g, "full", name=g.name)
    if check_region is not None:
        report = check_weights(g, check_region)
        if report.violations:
            raise InvariantViolation(report.violations[0], vertex=report.bad_vertex,
                                     edge=report.bad_edge)
    return kern


@dataclass
class WeightsReport:
    symmetric: bool
    subordinate: bool
    adapted: bool
    c_c_witness: Optional[float]    # tightest controlled-weights constant seen
    c_e_witness: Optional[float]    # tightest laziness constant seen
    violations: list
    bad_vertex: Optional[Vertex] = None
    bad_edge: Optional[tuple] = None

    @property
    def ok(self):
        return not self.violations


def check_weights(g: WeightedGraph, region, tol=1e-12) -> WeightsReport:
    """Check symmetry/adaptedness/subordination and witness C_c, C_e on a region."""
    region = list(region)
    rep = WeightsReport(True, True, True, None, None, [])
    c_c, c_e = 0.0, 1.0
    for v in region:
        p = g.vertex_weight(v)
        nbrs = g.neighbors(v)
        if p == 0.0:
            if nbrs:
                rep.violations.append(f"pi({v!r}) = 0 but vertex is not isolated")
                rep.bad_vertex = v
                rep.subordinate = False
            continue
        total = math.fsum(mu for _, mu in nbrs)
        if total > p * (1 + tol):
            rep.subordinate = False
            rep.violations.append(f"edge weights at {v!r} exceed pi: {total} > {p}")
            rep.bad_vertex = v
        c_e = min(c_e, 1.0 - total / p)
        for w, mu in nbrs:
            if mu <= 0:
                rep.adapted = False
                rep.violations.append(f"non-positive edge weight on {(v, w)!r}")
                rep.bad_edge = (v, w)
                continue
            c_c = max(c_c, p / mu)
            back = [m for u, m in g.neighbors(w) if u == v]
            if not back or abs(back[0] - mu) > tol * max(1.0, mu):
                rep.symmetric = False
                rep.violations.append(f"asymmetric edge weight on {(v, w)!r}")
                rep.bad_edge = (v, w)
    rep.c_c_witness = c_c if c_c > 0 else None
    rep.c_e_witness = c_e
    return rep


def distance(g: WeightedGraph, x, y, cap: Optional[int] = None):
    """BFS graph distance; ``math.inf`` for pairs not connected within cap."""
    if x == y:
        return 0
    seen = {x}
    frontier = [x]
    d = 0
    while frontier:
        d += 1
        if cap is not None and d > cap:
            return math.inf
        nxt = []
        for v in frontier:
            for w, _ in g.neighbors(v):
                if w in seen:
                    continue
                if w == y:
                    return d
                seen.add(w)
                nxt.append(w)
        frontier = nxt
    return math.inf


def ball(g: WeightedGraph, x, r: int) -> dict:
    """Closed ball B(x, r): map vertex -> distance from x."""
    if r < 0:
        raise ValueError("radius must be >= 0")
    dist = {x: 0}
    frontier = [x]
    for d in range(1, r + 1):
        nxt = []
        for v in frontier:
            for w, _ in g.neighbors(v):
                if w not in dist:
                    dist[w] = d
                    nxt.append(w)
        frontier = nxt
        if not frontier:
            break
    return dist


def volume(g: WeightedGraph, x, r: int) -> float:
    """V(x, r): pi-mass of the closed ball."""
    if g.vertex_transitive and "volume_profile" in g.meta:
        return g.meta["volume_profile"](r)
    return math.fsum(g.vertex_weight(v) for v in ball(g, x, r))


def distance_to_set(g: WeightedGraph, x, member: Callable[[Vertex], bool],
                    cap: Optional[int] = None):
    """Graph distance from ``x`` to the nearest vertex satisfying ``member``."""
    if member(x):
        return 0
    seen = {x}
    frontier = deque([(x, 0)])
    while frontier:
        v, d = frontier.popleft()
        if cap is not None and d >= cap:
            continue
        for w, _ in g.neighbors(v):
            if w in seen:
                continue
            if member(w):
                return d + 1
            seen.add(w)
            frontier.append((w, d + 1))
    return math.inf


def neumann_kernel(sub: Subgraph) -> MarkovKernel:
    return sub.neumann_kernel()


def dirichlet_kernel(sub: Subgraph) -> MarkovKernel:
    return sub.dirichlet_kernel()


def quotient_graph(g: WeightedGraph, om: OrbitMap) -> WeightedGraph:
    """Exact orbit quotient of ``g`` under ``om``.

    Orbit representatives become vertices with ``pi_q = |orbit| * pi`` and
    merged edge weights ``mu_q(O, O') = |O| * sum_{w in O', w ~ v} mu(v, w)``.
    The result is again reversible, subordinate, lazy and controlled, and the
    heat evolution of an orbit-invariant initial mass commutes with orbit
    summation.
    """
    canon, osize = om.canon, om.orbit_size

    def nbrs(v):
        size = osize(v)
        acc = {}
        for w, mu in g.neighbors(v):
            r = canon(w)
            acc[r] = acc.get(r, 0.0) + mu
        return [(r, mu * size) for r, mu in acc.items()]

    return WeightedGraph(
        name=f"{g.name}/{om.name}",
        neighbors=nbrs,
        vertex_weight=lambda v: osize(v) * g.vertex_weight(v),
        contains=lambda v: g.contains(v) and canon(v) == v,
        laziness=g.laziness,
        weight_control=None,
        meta={"cache_id": f"{g.cache_id}/{om.name}", "base": g, "orbit": om},
    )
