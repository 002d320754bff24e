"""First Dirichlet eigenvalues, relative Faber-Krahn profiles and the glued
Faber-Krahn lower bound built from per-page Harnack-form fits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import eigsh

from .gluing import glued_structure
from .graphs import MarkovKernel, Subgraph, WeightedGraph, ball, distance_to_set, volume


class IterationCapExceeded(RuntimeError):
    pass


def _dirichlet_matrix(g: WeightedGraph, region: Sequence):
    """Dense symmetrized Dirichlet sub-kernel on an ordered vertex list.

    Returns (S, pi) with S_ij = K(v_i, v_j) sqrt(pi_i / pi_j); S is symmetric
    by reversibility and shares the sub-kernel's spectrum.
    """
    region = list(region)
    index = {v: i for i, v in enumerate(region)}
    n = len(region)
    pi = np.array([g.vertex_weight(v) for v in region])
    S = np.zeros((n, n))
    kern = MarkovKernel(g, "full")
    for i, v in enumerate(region):
        for w, p in kern.row(v):
            j = index.get(w)
            if j is not None:
                S[i, j] = p * math.sqrt(pi[i] / pi[j])
    return S, pi


def lambda1_dense(g: WeightedGraph, region) -> float:
    """First Dirichlet eigenvalue by dense symmetric eigensolve (oracle route)."""
    S, _ = _dirichlet_matrix(g, region)
    if S.shape[0] == 0:
        raise ValueError("empty region")
    return 1.0 - float(np.linalg.eigvalsh(S)[-1])


def lambda1(g: WeightedGraph, region, tol: float = 1e-10,
            max_iter: int = 200000) -> float:
    """First Dirichlet eigenvalue ``1 - beta`` of a finite region.

    ``beta`` is the Perron eigenvalue of the Dirichlet sub-kernel, computed by
    power iteration on the pi-symmetrized matrix with a residual certificate
    ``|S v - beta v| <= tol``; for a symmetric matrix this pins the eigenvalue
    within ``tol`` of the Rayleigh quotient.
    """
    region = sorted(region)
    n = len(region)
    if n == 0:
        raise ValueError("empty region")
    if n <= 2:
        return lambda1_dense(g, region)
    S, _ = _dirichlet_matrix(g, region)
    Ssp = sparse.csr_matrix(S) if n > 256 else S
    v = np.full(n, 1.0 / math.sqrt(n))
    beta = 0.0
    for it in range(max_iter):
        w = Ssp @ v
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            return 1.0
        w /= nrm
        beta = float(w @ (Ssp @ w))
        res = np.linalg.norm(Ssp @ w - beta * w)
        v = w
        if res <= tol:
            return 1.0 - beta
    raise IterationCapExceeded(
        f"power iteration did not reach residual {tol} in {max_iter} steps")


def lambda1_variational(g: WeightedGraph, region) -> float:
    """Variational route: smallest Rayleigh quotient over f supported in the
    region (dense generalized eigensolve; used as the independent oracle)."""
    region = sorted(region)
    index = {v: i for i, v in enumerate(region)}
    n = len(region)
    pi = np.array([g.vertex_weight(v) for v in region])
    # energy form 1/2 sum mu |f(x)-f(y)|^2 over all edges incident to region
    A = np.zeros((n, n))
    for i, v in enumerate(region):
        for w, mu in g.neighbors(v):
            j = index.get(w)
            A[i, i] += mu
            if j is not None:
                A[i, j] -= mu
    D = np.diag(1.0 / np.sqrt(pi))
    return float(np.linalg.eigvalsh(D @ A @ D)[0])


# ---------------------------------------------------------------------------
# connected subset enumeration
# ---------------------------------------------------------------------------

def connected_subsets(g: WeightedGraph, vertices: Iterable, max_size: int,
                      cap: int = 2_000_000):
    """Enumerate connected subsets (size <= max_size) of an induced region.

    Classic binary-partition enumeration: each subset is produced exactly once
    as a growth of its smallest vertex.  Returns (subsets, exhaustive); the
    flag drops when the cap is hit.
    """
    verts = sorted(set(vertices))
    vset = set(verts)
    adj = {v: sorted(w for w, _ in g.neighbors(v) if w in vset) for v in verts}
    out = []
    exhausted = True

    for root_idx, root in enumerate(verts):
        if len(out) >= cap:
            exhausted = False
            break
        stack = [((root,), tuple(w for w in adj[root] if w > root), frozenset())]
        while stack:
            subset, ext, banned = stack.pop()
            out.append(subset)
            if len(out) >= cap:
                exhausted = False
                break
            if len(subset) == max_size:
                continue
            for idx, v in enumerate(ext):
                new_banned = banned | set(ext[:idx])
                grown = subset + (v,)
                new_ext = tuple(w for w in ext[idx + 1:]) + tuple(
                    w for w in adj[v]
                    if w > root and w not in grown and w not in ext
                    and w not in new_banned)
                stack.append((grown, new_ext, new_banned))
    return out, exhausted


@dataclass
class FKProfile:
    """Sampled relative Faber-Krahn profile of one ball."""

    center: object
    radius: int
    samples: list            # (mass, inf lambda1 over connected subsets of mass <= m)
    exhaustive: list         # per-sample flag
    subsets_seen: int

    def value(self, nu: float) -> float:
        best = math.inf
        for (m, lam) in self.samples:
            if m <= nu:
                best = min(best, lam)
        return best


def fk_profile(g: WeightedGraph, center, radius: int, s_max: int = 5,
               cap: int = 200_000) -> FKProfile:
    """Profile (nu, inf lambda_1) over enumerated connected subsets of a ball."""
    B = sorted(ball(g, center, radius))
    subsets, exhausted = connected_subsets(g, B, s_max, cap)
    min_pi = min(g.vertex_weight(v) for v in B)
    by_mass = {}
    for s in subsets:
        m = math.fsum(g.vertex_weight(v) for v in s)
        lam = lambda1_dense(g, s) if len(s) <= 24 else lambda1(g, s)
        if m not in by_mass or lam < by_mass[m]:
            by_mass[m] = lam
    masses = sorted(by_mass)
    samples, flags = [], []
    best = math.inf
    for m in masses:
        best = min(best, by_mass[m])
        samples.append((m, best))
        # exhaustive iff every subset of mass <= m has size <= s_max and the
        # enumeration did not hit the cap
        flags.append(exhausted and m < (s_max + 1) * min_pi)
    return FKProfile(center, radius, samples, flags, len(subsets))


@dataclass
class HarnackFKFit:
    """Constants (a, alpha) of the Harnack-form profile a/r^2 (V/nu)^alpha."""

    a: float
    alpha: float
    window: str
    residual: float          # mean log slack over the fit witnesses
    witnesses: int

    def value(self, r: float, vol: float, nu: float) -> float:
        if nu <= 0:
            return math.inf
        return (self.a / r**2) * (vol / nu) ** self.alpha


ALPHA_GRID = [0.05 * k for k in range(1, 41)]


def fit_harnack_fk(g: WeightedGraph, balls, s_max: int = 4,
                   cap: int = 50_000, safety: float = 1.0) -> HarnackFKFit:
    """Fit Harnack-form constants so the profile lower-bounds every witness.

    For each alpha on the grid the largest admissible ``a`` is
    ``min lambda1 * r^2 * (nu / V)^alpha``; the reported pair minimizes the
    mean log slack.  ``safety < 1`` shrinks ``a`` for held-out validity.
    """
    witnesses = []
    for (z, r) in balls:
        vol = volume(g, z, r)
        prof = fk_profile(g, z, r, s_max=s_max, cap=cap)
        for (m, lam) in prof.samples:
            witnesses.append((r, vol, m, lam))
    if not witnesses:
        raise ValueError("no witnesses enumerated")
    best = None
    for alpha in ALPHA_GRID:
        a = min(lam * r**2 * (m / vol) ** alpha for (r, vol, m, lam) in witnesses)
        if a <= 0:
            continue
        slack = math.fsum(
            math.log(lam / ((a / r**2) * (vol / m) ** alpha))
            for (r, vol, m, lam) in witnesses) / len(witnesses)
        if best is None or slack < best[0]:
            best = (slack, alpha, a)
    if best is None:
        raise ValueError("no admissible Harnack-form fit on the alpha grid")
    slack, alpha, a = best
    return HarnackFKFit(a * safety, alpha, window=f"balls={list(balls)!r}",
                        residual=slack, witnesses=len(witnesses))


# ---------------------------------------------------------------------------
# glued Faber-Krahn machinery
# ---------------------------------------------------------------------------

def _page_distance(g, z, page, cap):
    return distance_to_set(g, z, page.member, cap=cap)


def pages_seen(g: WeightedGraph, z, r: int, delta: Optional[int] = None) -> list:
    """Indices of pages whose delta-augmented page meets the ball B(z, r)."""
    st = glued_structure(g)
    d = st.delta if delta is None else delta
    out = []
    for i, page in enumerate(st.pages):
        if _page_distance(g, z, page, cap=r + d + 1) <= r + d:
            out.append(i)
    return out


def _inner_set(g, z, r: int, page, delta: int):
    """[B]_delta intersect page intersect [spine]_delta, with certificates.

    For delta = 0 this is exactly the spine vertices of the ball lying in the
    page, enumerated through the construction's spine walker when available.
    """
    st = glued_structure(g)
    if delta == 0 and st.spine_enum is not None:
        return [v for (v, d) in st.spine_enum(z, r) if d <= r and page.member(v)]
    hood = ball(g, z, r + delta)
    out = []
    for v, dv in hood.items():
        if max(0, dv - r) > delta or not page.member(v):
            continue
        if distance_to_set(g, v, st.spine_member, cap=delta + 1) <= delta:
            out.append(v)
    return out


def v_min(g: WeightedGraph, z, r: int, delta: Optional[int] = None) -> float:
    """Minimized page volume over pages seen by B(z, r) and their inner sets."""
    st = glued_structure(g)
    d = st.delta if delta is None else delta
    seen = pages_seen(g, z, r, d)
    if not seen:
        raise ValueError(f"no page meets B({z!r}, {r})")
    best = math.inf
    found_any = False
    for i in seen:
        page = st.pages[i]
        if page.graph.vertex_transitive:
            # volume independent of the base point: only nonemptiness matters
            if _inner_nonempty(g, z, r, page, d):
                found_any = True
                best = min(best, volume(page.graph, _any_page_vertex(page), r))
            continue
        pts = _inner_set(g, z, r, page, d)
        if pts:
            found_any = True
            best = min(best, min(volume(page.graph, page.section(v), r) for v in pts))
    if not found_any:
        raise ValueError(
            f"all inner minimization sets empty for B({z!r}, {r}); malformed spine")
    return best


def _inner_nonempty(g, z, r, page, delta):
    st = glued_structure(g)
    if delta == 0 and st.spine_enum is not None:
        return any(d <= r and page.member(v) for (v, d) in st.spine_enum(z, r))

    def target(v):
        return (page.member(v)
                and distance_to_set(g, v, st.spine_member, cap=delta + 1) <= delta)

    return distance_to_set(g, z, target, cap=r + delta + 1) <= r + delta


def _any_page_vertex(page):
    tag = page.tag
    dim = page.graph.meta.get("dim")
    return (tag, (0,) * dim)


def ball_in_page(g: WeightedGraph, z, r: int) -> Optional[int]:
    """Index of a page containing B(z, r) entirely, or None."""
    st = glued_structure(g)
    for i, page in enumerate(st.pages):
        if not page.member(z):
            continue
        # early exit: distance from z to the page's complement
        outside = lambda v: not page.member(v)
        if distance_to_set(g, z, outside, cap=r + 1) > r:
            return i
    return None


def big_f(g: WeightedGraph, z, r: int, delta: Optional[int] = None) -> float:
    """Volume proxy: V(z, r) when the ball sits inside one page, else V_min."""
    i = ball_in_page(g, z, r)
    if i is not None:
        return volume(g, z, r)
    return v_min(g, z, r, delta)


@dataclass
class GluedFKConstants:
    """Existence constants of the glued Faber-Krahn bound, frozen after
    calibration on a training corpus."""

    a1: float = 1.0
    a2: float = 1.0
    c1: float = 1.0
    c2: float = 1.0
    c3: float = 1.0
    cor_c: float = 1.0       # Corollary-form constant


def glued_fk(g: WeightedGraph, z, r: int, nu: float, fits: dict,
             consts: Optional[GluedFKConstants] = None,
             delta: Optional[int] = None) -> float:
    """Glued relative Faber-Krahn lower bound at (B(z, r), nu).

    Inside a single page the page profile applies up to (a1, a2); across the
    spine the bound is the minimum of page profiles based at inner-set points
    within rescaled balls, with constants (c1, c2, c3).  Empty inner minima
    are skipped (and counted) since the minimization set can be empty for
    fixed-width spines.
    """
    st = glued_structure(g)
    cc = consts or GluedFKConstants()
    d = st.delta if delta is None else delta
    i = ball_in_page(g, z, r)
    if i is not None:
        page = st.pages[i]
        fit = fits[page.tag]
        vol = volume(page.graph, page.section(z), r)
        return cc.a1 * fit.value(r, vol, cc.a2 * nu)
    best = math.inf
    skipped = 0
    for i in pages_seen(g, z, r, d):
        page = st.pages[i]
        fit = fits[page.tag]
        r2 = max(1, math.ceil(cc.c2 * r))
        if page.graph.vertex_transitive:
            if not _inner_nonempty(g, z, r, page, d):
                skipped += 1
                continue
            vol = volume(page.graph, _any_page_vertex(page), r2)
            best = min(best, fit.value(r2, vol, cc.c3 * nu))
        else:
            pts = _inner_set(g, z, r, page, d)
            if not pts:
                skipped += 1
                continue
            vol = min(volume(page.graph, page.section(v), r2) for v in pts)
            best = min(best, fit.value(r2, vol, cc.c3 * nu))
    if best is math.inf:
        raise ValueError(f"all inner minima empty for B({z!r}, {r})")
    return cc.c1 * best


def corollary_fk(g: WeightedGraph, z, r: int, nu: float, fits: dict,
                 consts: Optional[GluedFKConstants] = None,
                 delta: Optional[int] = None) -> float:
    """Closed-form glued bound (C / r^2) (F(z, r) / nu)^alpha_min."""
    st = glued_structure(g)
    cc = consts or GluedFKConstants()
    alpha = min(fits[p.tag].alpha for p in st.pages)
    F = big_f(g, z, r, delta)
    return (cc.cor_c / r**2) * (F / nu) ** alpha


def calibrate_glued_fk(g: WeightedGraph, fits: dict, balls, s_max: int = 4,
                       cap: int = 20_000, safety: float = 0.9):
    """Fit (a1, c1, cor_c) on a training corpus so the bounds hold with least
    slack, then shrink by ``safety`` and freeze."""
    cc = GluedFKConstants()
    a1 = c1 = cor = math.inf
    for (z, r) in balls:
        B = sorted(ball(g, z, r))
        subsets, _ = connected_subsets(g, B, s_max, cap)
        inside = ball_in_page(g, z, r)
        for s in subsets:
            nu = math.fsum(g.vertex_weight(v) for v in s)
            lam = lambda1_dense(g, s) if len(s) <= 24 else lambda1(g, s)
            probe = GluedFKConstants()
            raw = glued_fk(g, z, r, nu, fits, probe)
            if raw > 0:
                (a1, c1) = ((min(a1, lam / raw), c1) if inside is not None
                            else (a1, min(c1, lam / raw)))
            raw_cor = corollary_fk(g, z, r, nu, fits, probe)
            if raw_cor > 0:
                cor = min(cor, lam / raw_cor)
    if a1 is not math.inf:
        cc.a1 = a1 * safety
    if c1 is not math.inf:
        cc.c1 = c1 * safety
    if cor is not math.inf:
        cc.cor_c = cor * safety
    return cc
