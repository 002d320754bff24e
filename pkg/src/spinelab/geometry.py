"""Metric-geometry diagnostics: doubling, Poincare constants, uniform and
inner-uniform path witnesses, quasi-isometry checks with Faber-Krahn
transfer."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .graphs import MarkovKernel, Subgraph, WeightedGraph, ball, distance, volume
from .spectral import IterationCapExceeded, connected_subsets, lambda1_dense, lambda1


def doubling_profile(g: WeightedGraph, center, radii) -> list:
    """Volume-doubling ratios V(x, 2r) / V(x, r) for positive integer radii."""
    out = []
    for r in radii:
        r = int(r)
        if r < 1:
            raise ValueError("doubling radii must be >= 1")
        out.append(volume(g, center, 2 * r) / volume(g, center, r))
    return out


# ---------------------------------------------------------------------------
# Poincare constant via the Neumann spectral gap
# ---------------------------------------------------------------------------

def _neumann_sym_matrix(g: WeightedGraph, region):
    region = sorted(region)
    index = {v: i for i, v in enumerate(region)}
    n = len(region)
    pi = np.array([g.vertex_weight(v) for v in region])
    S = np.zeros((n, n))
    kern = MarkovKernel(g, "neumann", membership=lambda v: v in index)
    for i, v in enumerate(region):
        for w, p in kern.row(v):
            j = index[w] if w in index else None
            if j is not None:
                S[i, j] += p * math.sqrt(pi[i] / pi[j])
    return S, pi, region


def lambda_nz_dense(g: WeightedGraph, region) -> float:
    """Smallest nonzero eigenvalue of the Neumann form (dense oracle)."""
    S, pi, _ = _neumann_sym_matrix(g, region)
    vals = np.linalg.eigvalsh(S)
    return 1.0 - float(vals[-2]) if len(vals) > 1 else 0.0


def lambda_nz(g: WeightedGraph, region, tol: float = 1e-8,
              max_iter: int = 500_000) -> float:
    """Neumann spectral gap by power iteration with the constant deflated.

    The top eigenvector of the symmetrized Neumann kernel is sqrt(pi); the
    iteration runs in its orthogonal complement with a residual certificate.
    """
    S, pi, region = _neumann_sym_matrix(g, region)
    n = len(region)
    if n == 1:
        return 0.0
    if n <= 2:
        return lambda_nz_dense(g, region)
    phi = np.sqrt(pi)
    phi /= np.linalg.norm(phi)

    def project(x):
        return x - (phi @ x) * phi

    rng = np.random.default_rng(0)
    v = project(rng.standard_normal(n))
    v /= np.linalg.norm(v)
    # shift to make the target the dominant eigenvalue of S+I on the complement
    for _ in range(max_iter):
        w = project(S @ v + v)
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            return 1.0
        w /= nrm
        mu = float(w @ (S @ w))
        res = np.linalg.norm(project(S @ w - mu * w))
        v = w
        if res <= tol:
            return 1.0 - mu
    raise IterationCapExceeded(f"Neumann gap iteration stalled above {tol}")


def poincare_constant(g: WeightedGraph, center=None, r: Optional[int] = None,
                      region=None, tol: float = 1e-8) -> float:
    """Best Poincare constant with kappa = 1: [r^2 lambda_NZ(B)]^{-1}.

    Either a ball (center, r) or an explicit finite region may be given; a
    single vertex has constant 0 by convention.
    """
    if region is None:
        region = sorted(ball(g, center, r))
    else:
        region = sorted(region)
        r = r if r is not None else 1
    if len(region) == 1:
        return 0.0
    lam = lambda_nz_dense(g, region) if len(region) <= 400 else lambda_nz(g, region, tol)
    if lam <= 0:
        raise ValueError("degenerate Neumann gap")
    return 1.0 / (r * r * lam)


# ---------------------------------------------------------------------------
# uniformity witnesses
# ---------------------------------------------------------------------------

@dataclass
class UniformityWitness:
    pair: tuple
    path: list
    c_u: float               # achieved clearance constant
    big_c_u: float           # achieved length constant k / d
    mode: str                # "uniform" (ambient distance) or "inner"
    base_distance: int

    def verify(self, sub: Subgraph, clearance: Callable[[object], float]) -> bool:
        """Independent re-check of both defining conditions along the path."""
        k = len(self.path) - 1
        if self.path[0] != self.pair[0] or self.path[-1] != self.pair[1]:
            return False
        for j, v in enumerate(self.path):
            if not sub.member(v):
                return False
            if j > 0 and all(w != v for w, _ in sub.parent.neighbors(self.path[j - 1])):
                return False
            if clearance(v) < self.c_u * (1 + min(j, k - j)) - 1e-12:
                return False
        return k <= self.big_c_u * self.base_distance + 1e-12


@dataclass
class UniformityResult:
    witness: Optional[UniformityWitness]
    status: str               # "witness" | "refuted-on-window" | "inconclusive"
    budget: dict


def clearance_field(sub: Subgraph, window) -> dict:
    """Certified lower bounds on d(v, complement) for window vertices.

    Multi-source BFS from the complement vertices seen in the window; capped
    by the distance to the window rim so unseen complement vertices beyond
    the window cannot invalidate the bound.
    """
    parent = sub.parent
    radius = max(window.values()) if window else 0
    comp = [v for v in window if not sub.member(v)]
    dist = {v: 0 for v in comp}
    queue = deque(comp)
    while queue:
        v = queue.popleft()
        for w, _ in parent.neighbors(v):
            if w in window and w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    out = {}
    for v, dc in window.items():
        if not sub.member(v):
            continue
        rim_guard = (radius - dc) + 1
        out[v] = min(dist.get(v, math.inf), rim_guard)
    return out


def check_uniform(sub: Subgraph, pairs, mode: str = "uniform",
                  window_center=None, window_radius: int = 12,
                  length_budget: float = 4.0) -> list:
    """Best uniformity witness per pair, by exhaustive layered DP.

    For every admissible path length k <= length_budget * d the DP computes
    the maximum over paths of the minimum normalized clearance
    ``clearance(x_j) / (1 + min(j, k - j))``; the best (c_u, k) wins.  Since
    the DP is exhaustive over the window, a poor witness doubles as a
    refutation-on-window for better constants at the explored lengths.
    """
    parent = sub.parent
    if window_center is None:
        window_center = pairs[0][0]
    window = ball(parent, window_center, window_radius)
    clr = clearance_field(sub, window)
    inside = sorted(clr)
    nbr = {v: [w for w, _ in parent.neighbors(v) if w in clr] for v in inside}
    results = []
    for (x, y) in pairs:
        if x == y:
            results.append(UniformityResult(
                UniformityWitness((x, y), [x], c_u=clr.get(x, 1.0), big_c_u=0.0,
                                  mode=mode, base_distance=0), "witness",
                {"window_radius": window_radius}))
            continue
        if mode == "uniform":
            d = distance(parent, x, y, cap=4 * window_radius)
        else:
            d = distance(sub.as_graph(), x, y, cap=4 * window_radius)
        if d is math.inf or x not in clr or y not in clr:
            results.append(UniformityResult(None, "inconclusive",
                                            {"reason": "pair outside window"}))
            continue
        kmax = int(length_budget * d)
        best = None
        for k in range(int(d), kmax + 1):
            val, path = _tent_dp(x, y, k, clr, nbr)
            if val is None:
                continue
            if best is None or val > best[0] + 1e-15:
                best = (val, k, path)
        if best is None:
            results.append(UniformityResult(None, "refuted-on-window",
                                            {"k_max": kmax, "window_radius": window_radius}))
            continue
        c_u, k, path = best
        results.append(UniformityResult(
            UniformityWitness((x, y), path, c_u=c_u, big_c_u=k / d,
                              mode=mode, base_distance=int(d)),
            "witness", {"k_max": kmax, "window_radius": window_radius}))
    return results


def _tent_dp(x, y, k, clr, nbr):
    """Maximize min_j clearance(x_j)/(1 + min(j, k-j)) over length-k paths."""
    def norm(v, j):
        return clr[v] / (1 + min(j, k - j))

    f = {x: norm(x, 0)}
    parents = [{} for _ in range(k + 1)]
    for j in range(1, k + 1):
        nf = {}
        for v, val in f.items():
            for w in nbr[v]:
                cand = min(val, norm(w, j))
                if cand > nf.get(w, -1.0):
                    nf[w] = cand
                    parents[j][w] = v
        f = nf
        if not f:
            return None, None
    if y not in f:
        return None, None
    path = [y]
    for j in range(k, 0, -1):
        path.append(parents[j][path[-1]])
    path.reverse()
    return f[y], path


# ---------------------------------------------------------------------------
# quasi-isometries
# ---------------------------------------------------------------------------

@dataclass
class QuasiIsometryMap:
    source: WeightedGraph
    target: WeightedGraph
    phi: Callable
    inverse: Callable
    eps: float = 1.0
    name: str = "phi"


@dataclass
class QuasiIsometryReport:
    a: float
    b: float
    eps: float
    c_q: float
    violations: list
    fk_transfer: Optional[dict] = None

    @property
    def ok(self):
        return not self.violations


def check_quasi_isometry(qi: QuasiIsometryMap, window_center, window_radius: int,
                         pair_samples: int = 40, fk_fit=None,
                         fk_balls=None, s_max: int = 3, seed: int = 0) -> QuasiIsometryReport:
    """Witness the quasi-isometry constants on a window.

    Verifies the eps-net property, the two-sided distance comparison on
    sampled pairs, the weight comparability, and
    ``d2(z, phi(inverse(z))) <= eps``.  With ``fk_fit`` given, additionally
    spot-checks the transferred Faber-Krahn bound
    ``c1 * fit(B(inverse(z), c2 r), c3 nu)`` against enumerated subsets in
    target balls, calibrating (c1, c3) with least slack and reporting them.
    """
    src, dst = qi.source, qi.target
    swin = ball(src, window_center, window_radius)
    svs = sorted(swin)
    image = [qi.phi(v) for v in svs]
    violations = []

    # eps-net and round-trip, checked on the deflated target window
    z0 = qi.phi(window_center)
    dwin = ball(dst, z0, window_radius)
    image_set = set(image)
    eps_wit = 0.0
    for z in sorted(dwin):
        if dwin[z] > window_radius - int(qi.eps) - 1:
            continue
        dz = _dist_to_listed(dst, z, image_set, cap=int(qi.eps) + 2)
        if dz > qi.eps:
            violations.append(f"eps-net fails at {z!r} (distance {dz})")
        eps_wit = max(eps_wit, min(dz, qi.eps))
        back = qi.phi(qi.inverse(z))
        dround = distance(dst, z, back, cap=int(qi.eps) + 2)
        if dround > qi.eps:
            violations.append(f"round-trip drift {dround} > eps at {z!r}")

    rng = np.random.default_rng(seed)
    cq_wit = 1.0
    dpairs = []
    for _ in range(pair_samples):
        x, y = (svs[i] for i in rng.integers(0, len(svs), 2))
        d1 = distance(src, x, y, cap=4 * window_radius)
        d2 = distance(dst, qi.phi(x), qi.phi(y), cap=8 * window_radius)
        if d1 is not math.inf and d2 is not math.inf:
            dpairs.append((d1, d2))
    a_wit = max([d2 / d1 for d1, d2 in dpairs if d1 > 0], default=1.0)
    a_wit = max(a_wit, 1.0)
    b_wit = max([d1 / a_wit - d2 for d1, d2 in dpairs], default=0.0)
    b_wit = max(b_wit, 0.0)
    for v in svs:
        p1, p2 = src.vertex_weight(v), dst.vertex_weight(qi.phi(v))
        if p1 > 0 and p2 > 0:
            cq_wit = max(cq_wit, p1 / p2, p2 / p1)

    report = QuasiIsometryReport(a=a_wit, b=b_wit, eps=qi.eps, c_q=cq_wit,
                                 violations=violations)
    if fk_fit is not None and fk_balls:
        c2 = a_wit * (1 + 2 * qi.eps + b_wit)
        worst = math.inf
        checked = 0
        for (z, r) in fk_balls:
            B = sorted(ball(dst, z, r))
            subsets, _ = connected_subsets(dst, B, s_max, cap=5000)
            back = qi.inverse(z)
            r_back = max(1, math.ceil(c2 * r))
            vol_back = volume(src, back, r_back)
            for s in subsets:
                nu = math.fsum(dst.vertex_weight(v) for v in s)
                lam = lambda1_dense(dst, s) if len(s) <= 24 else lambda1(dst, s)
                raw = fk_fit.value(r_back, vol_back, nu)
                if raw > 0:
                    worst = min(worst, lam / raw)
                    checked += 1
        report.fk_transfer = {"c1": worst if worst is not math.inf else None,
                              "c2": c2, "c3": 1.0, "subsets": checked}
    return report


def _dist_to_listed(g, z, targets, cap):
    if z in targets:
        return 0
    seen = {z}
    frontier = [z]
    for d in range(1, cap + 1):
        nxt = []
        for v in frontier:
            for w, _ in g.neighbors(v):
                if w in seen:
                    continue
                if w in targets:
                    return d
                seen.add(w)
                nxt.append(w)
        frontier = nxt
    return math.inf
