"""Finite computational windows with certified truncation accounting.

A window is the ball B(center, R) explored through a (possibly sub-Markov)
kernel.  Everything that steps past the rim is absorbed and accumulated as
*rim loss*; mass killed by a Dirichlet condition inside the window is tracked
separately because it is part of the kernel's semantics, not truncation
error.  Finite propagation speed makes the state exact while n <= R.

Heat states evolve by repeated sparse kernel application; iteration order is
fixed by sorting vertex ids, so results are bit-reproducible.
"""

from __future__ import annotations

import hashlib
import json
import math
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy import sparse

from .graphs import MarkovKernel, OrbitMap, Vertex, WeightedGraph, quotient_graph

CACHE_VERSION = "spinelab-heat-v1"

# deterministic per-step bound on mass-conservation rounding drift
FP_SLACK_PER_STEP = 2e-15


@dataclass
class CompiledWindow:
    """BFS-enumerated ball with the kernel assembled as a sparse matrix."""

    kernel: MarkovKernel
    center: Vertex
    radius: int
    ids: list
    index: dict
    dist: np.ndarray
    pi: np.ndarray            # vertex weights of the (possibly quotient) graph
    kt: sparse.csr_matrix     # transposed one-step kernel
    rim_rate: np.ndarray      # per-vertex mass rate stepping past the rim
    kill_rate: np.ndarray     # intrinsic sub-Markov deficit (Dirichlet kill)
    quotient: Optional[OrbitMap] = None

    @property
    def size(self):
        return len(self.ids)

    def locate(self, v) -> Optional[int]:
        if self.quotient is not None:
            v = self.quotient.canon(v)
        return self.index.get(v)

    def orbit_size(self, v) -> int:
        if self.quotient is None:
            return 1
        return self.quotient.orbit_size(self.quotient.canon(v))


def compile_window(kernel: MarkovKernel, center, radius: int,
                   quotient: Optional[OrbitMap] = None) -> CompiledWindow:
    base_kernel = kernel
    if quotient is not None:
        qg = quotient_graph(kernel.graph, quotient)
        member = kernel.membership
        kernel = MarkovKernel(qg, kernel.mode, member, name=kernel.name)
        center = quotient.canon(center)

    dist = {center: 0}
    rows = {}
    queue = deque([center])
    while queue:
        v = queue.popleft()
        d = dist[v]
        row = kernel.row(v)
        rows[v] = row
        if d >= radius:
            continue
        for w, _ in row:
            if w not in dist:
                dist[w] = d + 1
                queue.append(w)

    ids = sorted(dist)
    index = {v: i for i, v in enumerate(ids)}
    n = len(ids)
    pi = np.empty(n)
    darr = np.empty(n, dtype=np.int32)
    rim = np.zeros(n)
    kill = np.zeros(n)
    ri, ci, vals = [], [], []
    for i, v in enumerate(ids):
        pi[i] = kernel.pi(v)
        darr[i] = dist[v]
        total = 0.0
        for w, p in rows[v]:
            total += p
            j = index.get(w)
            if j is None:
                rim[i] += p
            else:
                ri.append(i)
                ci.append(j)
                vals.append(p)
        kill[i] = max(0.0, 1.0 - total)
    del rows
    k = sparse.coo_matrix((vals, (ri, ci)), shape=(n, n)).tocsr()
    return CompiledWindow(base_kernel, center, radius, ids, index, darr, pi,
                          k.T.tocsr(), rim, kill, quotient)


@dataclass(frozen=True)
class Bracket:
    """Certified enclosure of a scalar computed on a finite window."""

    lower: float
    upper: float

    def __post_init__(self):
        if self.upper < self.lower:
            raise ValueError(f"inverted bracket [{self.lower}, {self.upper}]")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def mid(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def contains(self, x: float) -> bool:
        return self.lower <= x <= self.upper

    def overlaps(self, other) -> bool:
        return self.lower <= other.upper and other.lower <= self.upper

    def encloses(self, other) -> bool:
        return self.lower <= other.lower and other.upper <= self.upper


@dataclass
class HeatState:
    """Mass vector K^n_D(source, .) over a window, with loss accounting."""

    window: CompiledWindow
    source: Vertex
    time: int
    u: np.ndarray
    rim_lost: float     # truncation loss: mass absorbed past the rim
    killed: float       # intrinsic Dirichlet kill (not truncation error)

    @property
    def lost(self) -> float:
        return self.rim_lost

    @property
    def fp_slack(self) -> float:
        return FP_SLACK_PER_STEP * max(1, self.time)

    def mass(self, v) -> float:
        """K^n(source, v) for a single vertex (orbit-resolved)."""
        i = self.window.locate(v)
        if i is None:
            return 0.0
        return float(self.u[i]) / self.window.orbit_size(v)

    def density(self, v) -> float:
        """Heat kernel value p(n, source, v) = K^n(source, v) / pi(v)."""
        i = self.window.locate(v)
        if i is None:
            return 0.0
        return float(self.u[i] / self.window.pi[i])

    def bracket(self, v) -> Bracket:
        """Certified bracket [u/pi, (u + rim loss)/pi] on p(n, source, v).

        Floating-point accumulation is not folded into the bracket; per the
        1e-12 assertion-tolerance convention it stays a separate diagnostic
        (``fp_slack``).
        """
        i = self.window.locate(v)
        err = self.rim_lost
        if i is None:
            pi_v = self.window.kernel.pi(v)
            return Bracket(0.0, err / pi_v if pi_v > 0 else math.inf)
        os = self.window.orbit_size(v)
        pi_base = self.window.pi[i] / os
        lo = float(self.u[i] / self.window.pi[i])
        return Bracket(lo, lo + err / pi_base)

    def total_mass(self) -> float:
        return float(np.sum(self.u))


def evolve(kernel: MarkovKernel, source, times: Sequence[int],
           radius: int, quotient: Optional[OrbitMap] = None,
           cache: Optional["HeatCache"] = None) -> list:
    """Heat states K^n_D(source, .) at the requested times (ascending)."""
    times = sorted(set(int(t) for t in times))
    if times and times[0] < 0:
        raise ValueError("times must be non-negative")
    if cache is not None:
        hit = cache.load(kernel, source, radius, quotient, times)
        if hit is not None:
            return hit

    win = compile_window(kernel, source, radius, quotient)
    i0 = win.locate(source)
    if i0 is None:
        raise ValueError(f"source {source!r} not inside its own window")
    if win.quotient is not None and win.quotient.orbit_size(source) != 1:
        raise ValueError("heat source must be a fixed point of the quotient symmetry")
    u = np.zeros(win.size)
    u[i0] = 1.0
    out = []
    rim_lost = killed = 0.0
    want = set(times)
    if 0 in want:
        out.append(HeatState(win, source, 0, u.copy(), 0.0, 0.0))
    kt, rim, kill = win.kt, win.rim_rate, win.kill_rate
    for n in range(1, times[-1] + 1 if times else 1):
        rim_lost += float(rim @ u)
        killed += float(kill @ u)
        u = kt @ u
        if n in want:
            out.append(HeatState(win, source, n, u.copy(), rim_lost, killed))
    if cache is not None:
        cache.store(kernel, source, radius, quotient, times, out)
    return out


def auto_radius(n: int, dist: int = 0, margin: float = 3.4) -> int:
    """Window radius heuristic targeting negligible rim loss at time n."""
    return int(dist + math.ceil(margin * math.sqrt(max(1, n))) + 8)


def resolve_quotient(graph: WeightedGraph, fixed, quotient="auto"):
    """Map the user-facing quotient argument to an OrbitMap or None."""
    if quotient is None or isinstance(quotient, OrbitMap):
        return quotient
    if quotient == "auto":
        return graph.symmetry_fixing(tuple(fixed))
    raise ValueError(f"bad quotient spec {quotient!r}")


class HeatCache:
    """Versioned binary cache of heat snapshots keyed by the run coordinates."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.hits = 0
        self.misses = 0

    @staticmethod
    def _key(kernel, source, radius, quotient, times) -> str:
        ident = [CACHE_VERSION, kernel.graph.cache_id, kernel.mode,
                 kernel.name, repr(source), int(radius),
                 quotient.name if quotient is not None else None,
                 [int(t) for t in times]]
        return hashlib.sha256(json.dumps(ident).encode()).hexdigest()[:32]

    def load(self, kernel, source, radius, quotient, times):
        path = self.root / (self._key(kernel, source, radius, quotient, times) + ".npz")
        if not path.exists():
            self.misses += 1
            return None
        data = np.load(path, allow_pickle=False)
        win = compile_window(kernel, source, radius, quotient)
        out = []
        for k, n in enumerate(data["times"]):
            out.append(HeatState(win, source, int(n), data[f"u{k}"],
                                 float(data["rim"][k]), float(data["killed"][k])))
        self.hits += 1
        return out

    def store(self, kernel, source, radius, quotient, times, states):
        path = self.root / (self._key(kernel, source, radius, quotient, times) + ".npz")
        payload = {"times": np.array([s.time for s in states], dtype=np.int64),
                   "rim": np.array([s.rim_lost for s in states]),
                   "killed": np.array([s.killed for s in states])}
        for k, s in enumerate(states):
            payload[f"u{k}"] = s.u
        tmp = path.with_suffix(".tmp.npz")
        np.savez(tmp, **payload)
        tmp.replace(path)
