"""Hitting probabilities, Green brackets, transience certificates and Doob
h-transforms.

The upper hitting field needs a nontrivial bound on the hitting probability
from the window rim; with literal outer boundary value 1 the upper Dirichlet
problem is solved by the constant 1 and certifies nothing.  For point (and
lattice-axis) targets a verified superharmonic barrier supplies that rim
bound; without a barrier the vacuous value 1 is used and results degrade to
"inconclusive" rather than silently passing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import spsolve

from .graphs import MarkovKernel, OrbitMap, WeightedGraph, distance
from .windows import Bracket, CompiledWindow, compile_window, resolve_quotient


# ---------------------------------------------------------------------------
# superharmonic radial barrier
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RadialBarrier:
    """Verified superharmonic barrier ((|x|^2 + beta)/beta)^{-a/2} for the
    lazy SRW on Z^m.

    Writing rho^2 = |x|^2 + beta, superharmonicity of phi = rho^{-a} off the
    origin holds analytically for rho >= rho0: the coordinate-wise second
    difference of f(t) = (c + beta + (x_i + t)^2)^{-a/2} obeys
        sum_i f_i(1) + f_i(-1) - 2 f_i(0)
            <= a(a+2-m) rho^{-a-2} + (m/3) a(a+1)(a+6) (rho-1)^{-a-3}
    (fourth-order Taylor, Lagrange bound on f'''; the shift only subtracts a
    further a(a+2) beta rho^{-a-4}), which is <= 0 once
    (rho-1)^{a+3} / rho^{a+2} >= m(a+1)(a+6) / (3(m-2-a)).  Below rho0 the
    inequality is checked exhaustively on the lattice at construction time;
    the shift beta removes the near-axis anisotropy violations that plain
    |x|^{-a} suffers at small radii.

    Consequence: for the lazy SRW on Z^m (m >= 3) and K = {0},
    psi_K(x) <= ((|x|^2 + beta)/beta)^{-a/2} (optional stopping of the
    supermartingale phi(X_{n and tau})/phi(0)).  The same bound covers
    hitting a Z^k axis inside Z^D with m = D - k via the perpendicular
    coordinates: the perpendicular projection of the walk is again a lazy
    walk on Z^m, and hitting the axis is hitting the projected origin.
    """

    m: int
    a: float
    beta: float
    rho0: float
    perp_axes: Optional[tuple] = None   # None: all coordinates count

    def bound_coords(self, coords) -> float:
        use = coords if self.perp_axes is None else [coords[i] for i in self.perp_axes]
        q = math.fsum(float(x) * float(x) for x in use)
        return ((q + self.beta) / self.beta) ** (-self.a / 2.0)

    def bound(self, v) -> float:
        return self.bound_coords(v[1])


_BARRIER_CANDIDATES = [(0.95, 8.0), (0.9, 6.0), (0.9, 4.0), (0.8, 4.0),
                       (0.7, 3.0), (0.6, 2.0), (0.5, 2.0), (0.4, 1.0)]


def radial_barrier(m: int, a: Optional[float] = None, beta: Optional[float] = None,
                   perp_axes=None) -> RadialBarrier:
    """Construct and verify a barrier; searches the candidate family unless
    (a, beta) are pinned.  Raises if no candidate verifies."""
    if m < 3:
        raise ValueError("transient barrier needs m >= 3")
    cands = [(a, beta)] if a is not None and beta is not None else _BARRIER_CANDIDATES
    last_err = None
    for (ca, cb) in cands:
        if not 0.0 < ca < min(1.0, m - 2):
            continue
        try:
            rho0 = _analytic_rho0(m, ca)
            _verify_barrier_enumeration(m, ca, cb, rho0)
            return RadialBarrier(m, ca, cb, rho0,
                                 tuple(perp_axes) if perp_axes is not None else None)
        except RuntimeError as e:
            last_err = e
    raise RuntimeError(f"no verified barrier for m={m}: {last_err}")


def _analytic_rho0(m: int, a: float) -> float:
    q_need = m * (a + 1) * (a + 6) / (3.0 * (m - 2 - a))
    rho = 3.0
    while (rho - 1) ** (a + 3) < rho ** (a + 2) * q_need:
        rho += 1.0
        if rho > 20000:
            raise RuntimeError("no analytic radius found")
    return rho


def _verify_barrier_enumeration(m: int, a: float, beta: float, rho0: float):
    """Exhaustive superharmonicity check of (|x|^2 + beta)^{-a/2} for all
    0 < |x|, |x|^2 <= rho0^2 - beta, deduplicated by coordinate symmetry."""

    def f(q):
        return (np.asarray(q, dtype=float) + beta) ** (-a / 2.0)

    r_max = math.isqrt(int(rho0 * rho0 - beta)) + 1
    reps = _sorted_reps(m, r_max)
    s = np.sum(reps.astype(float) ** 2, axis=1)
    pos = s > 0
    reps, s = reps[pos], s[pos]
    total = -2.0 * m * f(s)
    for i in range(m):
        xi = reps[:, i].astype(float)
        total += f(s + 2.0 * xi + 1.0) + f(s - 2.0 * xi + 1.0)
    bad = np.nonzero(total > 0.0)[0]
    if bad.size:
        x = reps[bad[0]]
        raise RuntimeError(f"barrier (a={a}, beta={beta}) fails at "
                           f"{tuple(int(v) for v in x)}: "
                           f"discrete laplacian {total[bad[0]]:.3e} > 0")


def _sorted_reps(m: int, r0: int) -> np.ndarray:
    """All x with x_1 >= x_2 >= ... >= x_m >= 0 and |x|_2 <= r0."""
    rows = []

    def rec(prefix, remaining, budget):
        if remaining == 0:
            rows.append(prefix)
            return
        hi = min(prefix[-1] if prefix else math.isqrt(budget), math.isqrt(budget))
        for v in range(hi, -1, -1):
            rec(prefix + [v], remaining - 1, budget - v * v)

    rec([], m, r0 * r0)
    return np.array(rows, dtype=np.int64)


# ---------------------------------------------------------------------------
# hitting probabilities
# ---------------------------------------------------------------------------

@dataclass
class HittingSolution:
    window: CompiledWindow
    target: list                      # canonical target vertices
    lower: np.ndarray                 # certified-from-below field (rim value 0)
    upper: np.ndarray                 # field with certified rim bound (or 1)
    rim_bound: float                  # max hitting bound used at the rim
    residual: float
    sweeps: int
    certified_upper: bool             # False when the vacuous rim value 1 was used

    def psi_minus(self, v) -> float:
        i = self.window.locate(v)
        return float(self.lower[i]) if i is not None else 0.0

    def psi_plus(self, v) -> float:
        i = self.window.locate(v)
        return float(self.upper[i]) if i is not None else 1.0

    def bracket(self, v) -> Bracket:
        return Bracket(self.psi_minus(v), max(self.psi_minus(v), self.psi_plus(v)))


def _window_matrix(win: CompiledWindow):
    return win.kt.T.tocsr()


def _rim_rhs(kernel: MarkovKernel, win: CompiledWindow, bound: Callable) -> np.ndarray:
    """Per-vertex mass flowing to outside-window targets, weighted by the
    certified hitting bound at those targets."""
    rhs = np.zeros(win.size)
    if bound is None:
        return rhs
    qk = kernel
    if win.quotient is not None:
        from .graphs import quotient_graph
        qk = MarkovKernel(quotient_graph(kernel.graph, win.quotient),
                          kernel.mode, kernel.membership, name=kernel.name)
    for i in np.nonzero(win.rim_rate > 0)[0]:
        v = win.ids[i]
        for w, p in qk.row(v):
            if w not in win.index:
                rhs[i] += p * bound(w)
    return rhs


def hitting_prob(g, target: Sequence, radius: int, tol: float = 1e-10,
                 center=None, quotient="auto", barrier: Optional[RadialBarrier] = None,
                 max_sweeps: int = 400_000, solver: str = "jacobi") -> HittingSolution:
    """Bracketing fields for psi_K = P(hit the target set).

    lower: monotone Jacobi from 0 with absorbing rim value 0 -- every iterate
    is a true lower bound of psi_K on the window.  upper: same iteration from
    1 with rim boundary data from the barrier (or 1 without one); every
    iterate is a true upper bound.  The final residual is reported.
    """
    kernel = g if isinstance(g, MarkovKernel) else MarkovKernel(g, "full")
    target = list(target)
    center = center if center is not None else target[0]
    om = resolve_quotient(kernel.graph, tuple(target), quotient)
    win = compile_window(kernel, center, radius, om)
    tset = sorted({win.locate(v) for v in target} - {None})
    if not tset:
        raise ValueError("target set outside window")
    tidx = np.array(tset, dtype=np.int64)
    M = _window_matrix(win)
    bound_fn = barrier.bound if barrier is not None else None
    rim_plus = _rim_rhs(kernel, win, bound_fn)
    rim_bound = float(np.max(rim_plus / np.maximum(win.rim_rate, 1e-300))) \
        if bound_fn is not None and np.any(win.rim_rate > 0) else (0.0 if bound_fn else 1.0)

    if solver == "direct":
        lower = _direct_field(M, win, tidx, np.zeros(win.size))
        upper = _direct_field(M, win, tidx, rim_plus if bound_fn else win.rim_rate)
        sweeps = 0
    else:
        lower, sweeps_lo = _monotone_sweeps(M, tidx, np.zeros(win.size),
                                            start=0.0, tol=tol, cap=max_sweeps)
        upper, sweeps_up = _monotone_sweeps(M, tidx,
                                            rim_plus if bound_fn else win.rim_rate,
                                            start=1.0, tol=tol, cap=max_sweeps)
        sweeps = max(sweeps_lo, sweeps_up)
    res = _field_residual(M, tidx, np.zeros(win.size), lower)
    upper = np.maximum(upper, lower)
    return HittingSolution(win, [win.quotient.canon(v) if win.quotient else v
                                 for v in target],
                           lower, upper,
                           rim_bound=rim_bound, residual=res, sweeps=sweeps,
                           certified_upper=bound_fn is not None)


def _monotone_sweeps(M, tidx, rim_rhs, start, tol, cap):
    n = M.shape[0]
    psi = np.full(n, start)
    psi[tidx] = 1.0
    for it in range(1, cap + 1):
        nxt = M @ psi + rim_rhs
        nxt[tidx] = 1.0
        delta = float(np.max(np.abs(nxt - psi)))
        psi = nxt
        if delta <= tol:
            return psi, it
    import warnings
    warnings.warn(f"hitting sweeps hit the cap {cap} (delta {delta:.2e})",
                  stacklevel=2)
    return psi, cap


def _direct_field(M, win, tidx, rim_rhs):
    n = M.shape[0]
    mask = np.ones(n, dtype=bool)
    mask[tidx] = False
    A = sparse.eye(n, format="csr") - M
    rhs = rim_rhs + np.asarray(M[:, tidx].sum(axis=1)).ravel()
    sol = spsolve(A[mask][:, mask].tocsc(), rhs[mask])
    out = np.ones(n)
    out[mask] = sol
    return np.clip(out, 0.0, 1.0)


def _field_residual(M, tidx, rim_rhs, psi):
    r = psi - (M @ psi + rim_rhs)
    r[tidx] = 0.0
    return float(np.max(np.abs(r)))


def distances_to_target(win: CompiledWindow, target_idx) -> np.ndarray:
    """Multi-source BFS distances inside the window (kernel adjacency)."""
    n = win.size
    adj = win.kt  # row j lists the in-neighbors of j; symmetric support
    dist = np.full(n, -1, dtype=np.int64)
    frontier = list(target_idx)
    for i in frontier:
        dist[i] = 0
    d = 0
    indptr, indices = adj.indptr, adj.indices
    while frontier:
        d += 1
        nxt = []
        for i in frontier:
            for j in indices[indptr[i]:indptr[i + 1]]:
                if dist[j] < 0:
                    dist[j] = d
                    nxt.append(j)
        frontier = nxt
    return dist


@dataclass
class STransienceReport:
    uniform: Optional[bool]        # None = inconclusive
    status: str
    epsilon: float
    shell: tuple
    max_psi_plus: float
    min_psi_minus: float
    certified: bool


def s_transience_diagnose(g, target, L: int, radius: int, quotient="auto",
                          barrier: Optional[RadialBarrier] = None,
                          tol: float = 1e-10, solver: str = "jacobi") -> STransienceReport:
    """Uniform S-transience on the shell d(x, K) in [L, radius/2].

    uniform-on-window iff the certified upper field stays <= 1 - eps on the
    shell; refuted when even the lower field approaches 1; otherwise
    inconclusive (never a silent pass).
    """
    sol = hitting_prob(g, target, radius, tol=tol, quotient=quotient,
                       barrier=barrier, solver=solver)
    win = sol.window
    dist = distances_to_target(win, [win.locate(v) for v in sol.target])
    shell = (dist >= L) & (dist <= radius // 2) & (dist >= 0)
    if not np.any(shell):
        return STransienceReport(None, "inconclusive", 0.0, (L, radius // 2),
                                 1.0, 0.0, False)
    mx_plus = float(np.max(sol.upper[shell]))
    mn_minus = float(np.min(sol.lower[shell]))
    mx_minus = float(np.max(sol.lower[shell]))
    if sol.certified_upper and mx_plus < 1.0 - tol:
        eps = 1.0 - mx_plus
        return STransienceReport(True, "uniform-on-window", eps,
                                 (L, radius // 2), mx_plus, mn_minus, True)
    if mx_minus > 0.95:
        return STransienceReport(False, "not-uniform-evidence", 0.0,
                                 (L, radius // 2), mx_plus, mn_minus, False)
    return STransienceReport(None, "inconclusive", 0.0, (L, radius // 2),
                             mx_plus, mn_minus, False)


# ---------------------------------------------------------------------------
# Green function brackets
# ---------------------------------------------------------------------------

@dataclass
class GreenResult:
    source: object
    radius: int
    brackets: dict                # vertex -> Bracket on G(x, o) = sum_n p(n, x, o)
    psi_bar: float                # rim hitting bound used for the upper family
    lower_only: bool
    sweep: list                   # (R, G_R(x0, o)) convergence trace for targets[0]


def green(g, source, targets, radius: int, quotient="auto",
          barrier: Optional[RadialBarrier] = None,
          sweep_radii: Optional[list] = None) -> GreenResult:
    """Certified brackets on the Green function G(x, o) = sum_n p(n, x, o).

    Lower bounds come from the window-killed Green function (monotone in the
    radius); the upper family needs a rim hitting bound psi_bar < 1 from a
    barrier: G+(o,o) = G_R(o,o) / (1 - psi_bar) and
    G+(x,o) = G_R(x,o) + psi_bar G+(o,o).
    """
    kernel = g if isinstance(g, MarkovKernel) else MarkovKernel(g, "full")
    om = resolve_quotient(kernel.graph, (source,), quotient)
    radii = sorted(set((sweep_radii or []) + [radius]))
    trace = []
    final = None
    for R in radii:
        win = compile_window(kernel, source, R, om)
        gvec = _green_vector(win)
        i0 = win.locate(source)
        pio = win.pi[i0] / win.orbit_size(source)
        trace.append((R, float(gvec[i0]) / pio))
        if R == radius:
            final = (win, gvec, pio)
    win, gvec, pio = final
    i0 = win.locate(source)
    g_oo = float(gvec[i0]) / pio

    psi_bar = 1.0
    if barrier is not None:
        vals = [0.0]
        qk = kernel
        if win.quotient is not None:
            from .graphs import quotient_graph
            qk = MarkovKernel(quotient_graph(kernel.graph, win.quotient),
                              kernel.mode, kernel.membership, name=kernel.name)
        for i in np.nonzero(win.rim_rate > 0)[0]:
            for w, p in qk.row(win.ids[i]):
                if w not in win.index:
                    vals.append(barrier.bound(w))
        psi_bar = max(vals)
    lower_only = psi_bar >= 1.0
    g_oo_up = math.inf if lower_only else g_oo / (1.0 - psi_bar)

    brackets = {}
    for x in targets:
        i = win.locate(x)
        lo = float(gvec[i]) / pio if i is not None else 0.0
        up = math.inf if lower_only else lo + psi_bar * g_oo_up
        if x == source and not lower_only:
            up = g_oo_up
        brackets[x] = Bracket(lo, up)
    return GreenResult(source, radius, brackets, psi_bar, lower_only, trace)


def _green_vector(win: CompiledWindow) -> np.ndarray:
    """Expected visit counts from every window vertex to the center:
    (I - K_window) g = e_center, in visit normalization."""
    n = win.size
    M = _window_matrix(win)
    e = np.zeros(n)
    e[win.locate(win.center)] = 1.0
    A = (sparse.eye(n, format="csr") - M).tocsc()
    return spsolve(A, e)


# ---------------------------------------------------------------------------
# Monte Carlo cross-check (fixed lattice instances)
# ---------------------------------------------------------------------------

def mc_point_hitting(dim: int, start, radius: int, walkers: int = 100_000,
                     seed: int = 7, max_steps: Optional[int] = None):
    """Empirical P(hit origin before leaving the L1 ball) for lazy SRW on Z^d.

    Counter-based generator with a fixed seed; returns (estimate, sigma).
    """
    rng = np.random.default_rng(np.random.Philox(seed))
    pos = np.tile(np.asarray(start, dtype=np.int64), (walkers, 1))
    alive = np.ones(walkers, dtype=bool)
    hit = np.zeros(walkers, dtype=bool)
    cap = max_steps or 64 * radius * radius
    for _ in range(cap):
        if not alive.any():
            break
        n_alive = int(alive.sum())
        move = rng.integers(0, 4 * dim, n_alive)
        stay = move >= 2 * dim
        axis = np.where(stay, 0, move // 2)
        step = np.where(stay, 0, np.where(move % 2 == 0, 1, -1))
        idx = np.nonzero(alive)[0]
        pos[idx, axis] += step
        l1 = np.abs(pos[idx]).sum(axis=1)
        hit_now = l1 == 0
        out_now = l1 > radius
        hit[idx[hit_now]] = True
        alive[idx[hit_now | out_now]] = False
    p = hit.mean()
    sigma = math.sqrt(max(p * (1 - p), 1e-12) / walkers)
    unfinished = float(alive.mean())
    return p, sigma + unfinished


# ---------------------------------------------------------------------------
# harmonic profiles and h-transforms
# ---------------------------------------------------------------------------

@dataclass
class HarmonicProfile:
    """Positive function, harmonic within tolerance on a verified window."""

    graph: WeightedGraph
    values: dict                     # canonical vertex -> h
    verified: Callable[[object], bool]
    extension: Callable[[object], float]
    tail_slope: float
    residual: float
    window_radius: int
    canon: Optional[Callable] = None

    def value(self, v) -> float:
        if self.canon is not None:
            v = self.canon(v)
        got = self.values.get(v)
        return got if got is not None else self.extension(v)

    def residual_at(self, v) -> float:
        h = self.value(v)
        acc = 0.0
        kern = MarkovKernel(self.graph, "full")
        for w, p in kern.row(v):
            acc += p * self.value(w)
        return abs(acc - h) / max(h, 1e-300)


def h_transform(g: WeightedGraph, h: HarmonicProfile) -> WeightedGraph:
    """Doob transform: pi_h = h^2 pi and mu_h(x,y) = mu(x,y) h(x) h(y),
    so K_h(x,y) = K(x,y) h(y)/h(x)."""

    def nbrs(v):
        hv = h.value(v)
        if hv <= 0:
            raise ValueError(f"h not positive at {v!r}")
        return [(w, mu * hv * h.value(w)) for w, mu in g.neighbors(v)]

    return WeightedGraph(
        name=f"{g.name}-h",
        neighbors=nbrs,
        vertex_weight=lambda v: h.value(v) ** 2 * g.vertex_weight(v),
        contains=g.contains,
        laziness=g.laziness,
        orbit_map=g.orbit_map,
        meta={**g.meta, "cache_id": f"{g.cache_id}-h"},
    )


def _page_green_field(page_graph: WeightedGraph, origin, radius: int):
    """(window, visit-normalized green vector, pi(origin)) on a page."""
    kernel = MarkovKernel(page_graph, "full")
    om = page_graph.symmetry_fixing((origin,)) if page_graph.orbit_map else None
    win = compile_window(kernel, origin, radius, om)
    gvec = _green_vector(win)
    i0 = win.locate(origin)
    pio = win.pi[i0] / win.orbit_size(origin)
    return win, gvec, pio


def build_h_z3_tail(radius: int = 48, tol: float = 1e-9) -> HarmonicProfile:
    """Harmonic profile 1 + G_{Z3}(x, o) on the lattice page, linear on the
    tail, with the tail slope solved from harmonicity at the junction."""
    from .gallery import z3_tail
    g = z3_tail()
    page = g.meta["glued"].pages[0].graph     # standalone Z^3
    o3 = ("p1", (0, 0, 0))
    win, gvec, pio = _page_green_field(page, o3, radius)

    def g_at(coords) -> float:
        i = win.locate(("p1", coords))
        return float(gvec[i]) / pio if i is not None else 0.0

    h_o = 1.0 + g_at((0, 0, 0))
    # harmonicity at the glued origin fixes the tail slope
    nbr_sum = math.fsum(1.0 + g_at(c) for c in
                        [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0),
                         (0, 0, 1), (0, 0, -1)])
    # pi(o) = 14 in the glued graph: h(o) = h(o)/2 + (nbr_sum + a + h(o))/14
    a = 6.0 * h_o - 6.0 - (nbr_sum - 6.0)
    if a <= 0:
        raise ValueError("no positive tail slope: green bracket too wide")

    values = {}
    for i, v in enumerate(win.ids):
        values[v] = 1.0 + float(gvec[i]) / pio
    values[("s", ())] = h_o

    om = win.quotient

    def canon(v):
        t, c = v
        if t == "p1" and om is not None:
            return om.canon(v)
        return v

    def extension(v):
        t, c = v
        if t == "p2":
            return a * c[0] + h_o
        return 1.0   # beyond the verified window the green part is dropped

    def verified(v):
        t, c = v
        if t == "p2" or t == "s":
            return True
        i = win.locate(canon(v))
        return i is not None and win.dist[i] <= radius - 1

    prof = HarmonicProfile(g, values, verified, extension, tail_slope=a,
                           residual=0.0, window_radius=radius, canon=canon)
    prof.residual = _max_residual(prof, sample_radius=min(8, radius - 2))
    if prof.residual > tol:
        raise ValueError(f"harmonic residual {prof.residual:.2e} exceeds {tol}")
    return prof


def build_h_z3_z2(radius: int = 48, tol: float = 1e-9) -> HarmonicProfile:
    """Harmonic profile on Z3 # Z2: 1 + G on the transient page, a * (potential
    kernel) + 1 + G(o,o) on the recurrent one."""
    from .gallery import z3_z2
    g = z3_z2()
    pages = g.meta["glued"].pages
    win3, gv3, pio3 = _page_green_field(pages[0].graph, ("p1", (0, 0, 0)), radius)
    win2, gv2, pio2 = _page_green_field(pages[1].graph, ("p2", (0, 0)), radius)

    def g3(coords):
        i = win3.locate(("p1", coords))
        return float(gv3[i]) / pio3 if i is not None else 0.0

    i2o = win2.locate(("p2", (0, 0)))
    g2_origin = float(gv2[i2o]) / pio2

    def pot2(coords) -> float:
        # potential kernel A_R(x) = G_R(o,o) - G_R(x,o), normalized A(o) = 0
        i = win2.locate(("p2", coords))
        gx = float(gv2[i]) / pio2 if i is not None else 0.0
        return g2_origin - gx

    h_o = 1.0 + g3((0, 0, 0))
    nbr3 = math.fsum(1.0 + g3(c) for c in
                     [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0),
                      (0, 0, 1), (0, 0, -1)])
    nbr2_pot = math.fsum(pot2(c) for c in [(1, 0), (-1, 0), (0, 1), (0, -1)])
    # glued pi(o) = 20: h(o) = h(o)/2 + (nbr3 + a nbr2_pot + 4 h(o))/20
    a = (6.0 * h_o - (nbr3 - 6.0) - 6.0) / nbr2_pot
    if a <= 0:
        raise ValueError("no positive slope on the recurrent page")

    values = {("s", ()): h_o}
    for i, v in enumerate(win3.ids):
        values[v] = 1.0 + float(gv3[i]) / pio3
    for i, v in enumerate(win2.ids):
        if v == ("p2", (0, 0)) or (win2.quotient and
                                   win2.quotient.canon(("p2", (0, 0))) == v):
            continue
        values[v] = a * (g2_origin - float(gv2[i]) / pio2) + h_o

    om3, om2 = win3.quotient, win2.quotient

    def canon(v):
        t, _ = v
        if t == "p1" and om3 is not None:
            return om3.canon(v)
        if t == "p2" and om2 is not None:
            return om2.canon(v)
        return v

    def extension(v):
        t, c = v
        if t == "p2":
            r = math.sqrt(c[0] ** 2 + c[1] ** 2)
            return a * (0.25 + math.log(max(r, 1.0)) / (2 * math.pi)) + h_o
        return 1.0

    def verified(v):
        t, _ = v
        if t == "s":
            return True
        w = win3 if t == "p1" else win2
        i = w.locate(canon(v))
        return i is not None and w.dist[i] <= radius - 1

    prof = HarmonicProfile(g, values, verified, extension, tail_slope=a,
                           residual=0.0, window_radius=radius, canon=canon)
    prof.residual = _max_residual(prof, sample_radius=min(8, radius - 2))
    if prof.residual > tol:
        raise ValueError(f"harmonic residual {prof.residual:.2e} exceeds {tol}")
    return prof


def _max_residual(prof: HarmonicProfile, sample_radius: int) -> float:
    from .graphs import ball
    worst = 0.0
    for v in ball(prof.graph, ("s", ()), sample_radius):
        if prof.verified(v):
            worst = max(worst, prof.residual_at(v))
    return worst
