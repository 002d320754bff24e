"""Verification suites aggregating the module-level invariants.

Each suite returns a SuiteReport with one CheckResult per assertion; the CLI
maps overall success to the exit code.  ``fast=True`` shrinks windows and
sample counts for interactive runs; the acceptance tests run the full sizes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import gallery
from .appendixb import b4_gap, jk_series, mean_value_constant, scan_weight_constant
from .fits import fit_exponent, series_from_brackets
from .gluing import glued_structure
from .graphs import MarkovKernel, Subgraph, ball, check_weights, distance, volume
from .heat import heat_series, semigroup_identity_gap, sub_heat_series
from .lattices import lattice, lattice_orbit_map
from .potential import (green, hitting_prob, mc_point_hitting, radial_barrier,
                        s_transience_diagnose)
from .spectral import (GluedFKConstants, calibrate_glued_fk, connected_subsets,
                       corollary_fk, fit_harnack_fk, glued_fk, lambda1,
                       lambda1_dense, lambda1_variational)
from .windows import compile_window, evolve


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class SuiteReport:
    suite: str
    checks: list = field(default_factory=list)

    def add(self, name, passed, detail=""):
        self.checks.append(CheckResult(name, bool(passed), str(detail)))
        return passed

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> str:
        return json.dumps({
            "suite": self.suite,
            "passed": self.passed,
            "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail}
                       for c in self.checks],
        }, indent=2, sort_keys=True)

    def summary(self) -> str:
        lines = [f"suite {self.suite}: {'PASS' if self.passed else 'FAIL'}"]
        for c in self.checks:
            lines.append(f"  [{'ok' if c.passed else 'FAIL'}] {c.name}"
                         + (f" ({c.detail})" if c.detail else ""))
        return "\n".join(lines)


def _gallery_instances(fast: bool):
    names = [("lattice", {"d": 2}), ("half-planes", {}), ("finite-set", {}),
             ("z3-tail", {}), ("z3-z2", {})]
    if not fast:
        names += [("lattice-axis", {}), ("cross", {}), ("parabola", {}),
                  ("lattice-slab", {})]
    return [(n, gallery.build(n, **p)) for (n, p) in names]


# ---------------------------------------------------------------------------
# core invariants
# ---------------------------------------------------------------------------

def suite_core_invariants(fast: bool = False) -> SuiteReport:
    rep = SuiteReport("core-invariants")
    tol = 1e-12
    for name, g in _gallery_instances(fast):
        o = gallery.origin_of(g)
        window = ball(g, o, 3)
        kern = MarkovKernel(g, "full")
        conserved = all(abs(kern.row_sum(v) - 1.0) <= tol for v in window)
        rep.add(f"{name}: row sums = 1", conserved)
        wrep = check_weights(g, window)
        rep.add(f"{name}: weights symmetric/subordinate", wrep.ok,
                f"C_c={wrep.c_c_witness}, C_e={wrep.c_e_witness}")
        rev_ok = True
        for v in window:
            pv = g.vertex_weight(v)
            for w, p in kern.row(v):
                if w == v or w not in window:
                    continue
                back = [q for u, q in kern.row(w) if u == v]
                if abs(p * pv - back[0] * g.vertex_weight(w)) > tol * max(pv, 1.0):
                    rev_ok = False
        rep.add(f"{name}: reversibility", rev_ok)
        balls = [set(ball(g, o, r)) for r in range(4)]
        vols = [volume(g, o, r) for r in range(4)]
        rep.add(f"{name}: ball nesting / volume monotone",
                all(balls[i] <= balls[i + 1] for i in range(3))
                and all(vols[i] <= vols[i + 1] for i in range(3)))
        if "glued" in g.meta:
            st = glued_structure(g)
            page = st.pages[0]
            sub = page.subgraph(g)
            nk, dk = sub.neumann_kernel(), sub.dirichlet_kernel()
            ok = True
            for v in window:
                if not page.member(v):
                    continue
                sn, sd = nk.row_sum(v), dk.row_sum(v)
                inner = any(not page.member(w) for w, _ in g.neighbors(v))
                if abs(sn - 1.0) > tol or sd > sn + tol:
                    ok = False
                if inner == (sd >= 1.0 - tol) and g.vertex_weight(v) > 0:
                    ok = False  # strict deficit exactly on the inner boundary
            rep.add(f"{name}: dirichlet <= neumann rows", ok)

    # semigroup + symmetry in exact mode
    g = gallery.build("z3-tail")
    o = gallery.origin_of(g)
    gap = semigroup_identity_gap(g, 3, 4, o, ("p1", (1, 0, 0)))
    rep.add("semigroup identity (z3-tail)", gap <= 1e-12, f"gap={gap:.2e}")
    x, y = ("p1", (1, 0, 0)), ("p2", (2,))
    pxy = heat_series(g, x, y, [9], radius=9, quotient=None)[0][1].lower
    pyx = heat_series(g, y, x, [9], radius=9, quotient=None)[0][1].lower
    rep.add("heat-kernel symmetry", abs(pxy - pyx) <= 1e-12,
            f"|{pxy:.3e}-{pyx:.3e}|")

    # bracket nesting in the window radius
    g2 = gallery.build("z3-z2")
    o2 = gallery.origin_of(g2)
    n = 48
    br = {R: heat_series(g2, o2, o2, [n], radius=R)[0][1] for R in (10, 16, 50)}
    rep.add("bracket nesting R=10>16>50",
            br[10].encloses(br[16]) and br[16].encloses(br[50])
            and br[50].width == 0.0,
            f"widths {br[10].width:.2e} > {br[16].width:.2e} > {br[50].width:.2e}")

    # heat equation residual: the density p(n, o, .) solves
    # p(n+1, x) = sum_y K(x, y) p(n, y) at interior vertices
    kern = MarkovKernel(g2, "full")
    win = compile_window(kern, o2, 8)
    u = np.zeros(win.size)
    u[win.locate(o2)] = 1.0
    for _ in range(4):
        u = win.kt @ u
    u_next = win.kt @ u
    M = win.kt.T.tocsr()
    interior = win.dist <= win.radius - 1
    resid = float(np.max(np.abs((u_next / win.pi - M @ (u / win.pi))[interior])))
    rep.add("heat equation residual", resid <= 1e-12, f"{resid:.2e}")

    # lambda1: monotonicity + dense vs iterative vs variational
    gz = lattice(2)
    oz = ("z", (0, 0))
    boxes = [sorted(ball(gz, oz, r)) for r in (1, 2, 3)]
    lams = [lambda1(gz, b) for b in boxes]
    rep.add("lambda1 domain monotonicity",
            lams[0] >= lams[1] >= lams[2], f"{[round(l, 4) for l in lams]}")
    agree = True
    for name, g in _gallery_instances(True):
        region = sorted(ball(g, gallery.origin_of(g), 1))
        if not 1 < len(region) <= 400:
            continue
        ld = lambda1_dense(g, region)
        li = lambda1(g, region)
        lv = lambda1_variational(g, region)
        if abs(ld - li) > 1e-8 or abs(ld - lv) > 1e-8:
            agree = False
    rep.add("lambda1 dense/iterative/variational agree (1e-8)", agree)

    # quotient evolution equals direct evolution (dual route)
    for name in ("finite-set", "z3-tail", "z3-z2"):
        g = gallery.build(name)
        o = gallery.origin_of(g)
        direct = heat_series(g, o, o, [12], radius=14, quotient=None)[0][1]
        quick = heat_series(g, o, o, [12], radius=14, quotient="auto")[0][1]
        rep.add(f"{name}: quotient == direct",
                abs(direct.lower - quick.lower) <= 1e-12,
                f"{direct.lower:.6e} vs {quick.lower:.6e}")
    return rep


# ---------------------------------------------------------------------------
# Faber-Krahn suite
# ---------------------------------------------------------------------------

FK_GRAPHS = [("finite-set", {"D": (3, 3)}), ("lattice-axis", {"D": (4, 5)}),
             ("z3-z2", {})]


def page_fits(g, s_max=4, cap=20_000):
    """Harnack-form fits per page tag, computed on the standalone pages."""
    st = glued_structure(g)
    fits = {}
    for page in st.pages:
        dim = page.graph.meta.get("dim", 1)
        o = (page.tag, (0,) * dim)
        radii = [(o, 2), (o, 3)]
        fits[page.tag] = fit_harnack_fk(page.graph, radii, s_max=s_max, cap=cap)
    return fits


def _fk_corpus(g, centers, radius, s_max, cap):
    corpus = []
    for z in centers:
        B = sorted(ball(g, z, radius))
        subsets, _ = connected_subsets(g, B, s_max, cap)
        corpus.append((z, radius, subsets))
    return corpus


def suite_fk(fast: bool = False, min_subsets: int = 0) -> SuiteReport:
    rep = SuiteReport("fk")
    s_max = 3 if fast else 4
    cap = 4000 if fast else 40_000
    total = 0
    for name, params in FK_GRAPHS:
        g = gallery.build(name, **params)
        st = glued_structure(g)
        fits = page_fits(g, s_max=3, cap=3000)
        o = gallery.origin_of(g)
        train_centers = [o]
        page0 = st.pages[0]
        dim0 = page0.graph.meta["dim"]
        train_centers.append((page0.tag, (1,) * dim0))
        consts = calibrate_glued_fk(g, fits, [(z, 2) for z in train_centers],
                                    s_max=3, cap=3000)
        # validation corpus: different centers and radii
        val_centers = [o, (page0.tag, (2,) + (0,) * (dim0 - 1))]
        if g.contains(("s", (1,))):
            val_centers.append(("s", (1,)))
        corpus = _fk_corpus(g, val_centers, 2, s_max, cap)
        if not fast:
            corpus += _fk_corpus(g, [o], 3, s_max, cap)
        violations = 0
        count = 0
        for (z, r, subsets) in corpus:
            for s in subsets:
                nu = math.fsum(g.vertex_weight(v) for v in s)
                lam = lambda1_dense(g, s) if len(s) <= 24 else lambda1(g, s)
                if lam < glued_fk(g, z, r, nu, fits, consts) - 1e-12:
                    violations += 1
                if lam < corollary_fk(g, z, r, nu, fits, consts) - 1e-12:
                    violations += 1
                count += 1
        total += count
        rep.add(f"{name}: FK validity on {count} subsets", violations == 0,
                f"a1={consts.a1:.3f} c1={consts.c1:.3f} corC={consts.cor_c:.3f}")
        # profile monotonicity
        from .spectral import fk_profile
        prof = fk_profile(g, o, 2, s_max=3, cap=3000)
        vals = [v for (_, v) in prof.samples]
        rep.add(f"{name}: profile non-increasing",
                all(vals[i] >= vals[i + 1] - 1e-12 for i in range(len(vals) - 1)))
    if min_subsets:
        rep.add(f"corpus size >= {min_subsets}", total >= min_subsets, f"{total}")
    return rep


# ---------------------------------------------------------------------------
# spine bounds suite
# ---------------------------------------------------------------------------

def suite_spine_bounds(fast: bool = False) -> SuiteReport:
    from .heatchecks import check_spine_bounds
    rep = SuiteReport("spine-bounds")

    # finite gluing set: p(m, v, w) ~ p(m, o, o), on-diagonal slope -D_min/2
    g = gallery.build("finite-set", D=(3, 3))
    o = gallery.origin_of(g)
    times = [2 ** k for k in range(5, 9 if fast else 11)]
    series = heat_series(g, o, o, times, radius=int(3.4 * math.sqrt(times[-1])) + 8)
    fit = fit_exponent(series_from_brackets(series), min_points=min(6, len(times)))
    rep.add("finite-set[3,3] spine slope in [-1.65, -1.35]",
            -1.65 <= fit.slope <= -1.35, f"slope={fit.slope:.3f}")
    sb = check_spine_bounds(g, [(o, o)], times)
    rep.add("finite-set[3,3] two-sided envelope",
            sb.lower.c1 > 0 and sb.spread < 50.0, f"spread={sb.spread:.2f}")

    if not fast:
        # shared-axis gluing: envelope against min-page volume, slope ~ -2
        g2 = gallery.build("lattice-axis", D=(4, 5))
        s0, s2 = ("s", (0,)), ("s", (2,))
        times2 = [32, 64, 128, 256]
        sb2 = check_spine_bounds(g2, [(s0, s0), (s0, s2)], times2, radius=60)
        rep.add("lattice-axis[4,5] two-sided envelope",
                sb2.lower.c1 > 0 and sb2.spread < 50.0,
                f"spread={sb2.spread:.2f}")
        diag = [(n, b) for (n, v, w, b, _) in sb2.series if v == w == s0]
        fit2 = fit_exponent(series_from_brackets(diag), min_points=4)
        rep.add("lattice-axis[4,5] diagonal slope ~ -2",
                -2.35 <= fit2.slope <= -1.65, f"slope={fit2.slope:.3f}")

        # equal pages: bounds go through although spine is a cross
        g3 = gallery.build("cross-equal", D=(4, 4, 4))
        c0, c2 = ("s", (0, 0)), ("s", (2, 0))
        sb3 = check_spine_bounds(g3, [(c0, c0), (c0, c2)], [16, 32, 64],
                                 radius=20)
        rep.add("cross-equal two-sided envelope", sb3.lower.c1 > 0,
                f"spread={sb3.spread:.2f}")
    return rep


# ---------------------------------------------------------------------------
# appendix-b suite
# ---------------------------------------------------------------------------

def suite_appendix_b(fast: bool = False, n_jk: int = None,
                     b4_samples: int = None) -> SuiteReport:
    rep = SuiteReport("appendix-b")
    g = lattice(2)
    o = ("z", (0, 0))
    n_jk = n_jk if n_jk is not None else (128 if fast else 512)
    b4_samples = b4_samples if b4_samples is not None else (30 if fast else 100)

    d_scan = scan_weight_constant(g, o, n=32, radius=24)
    rep.add("weight condition scan found D", d_scan > 0, f"D_scan={d_scan:.2f}")
    jk = jk_series(g, o, n_jk, D=4.0 * d_scan)
    rep.add(f"J_k non-increasing up to k={n_jk}", jk.monotone,
            f"max relative increase {jk.max_increase:.2e}")

    # equality case: u and f both constant on a Neumann-closed region
    region = sorted(ball(g, o, 3))
    sub = Subgraph(g, lambda v: v in set(region), name="B3")
    nk = sub.neumann_kernel()
    win = compile_window(nk, o, 6)
    u = np.ones(win.size)
    j0 = float(np.sum(u * u * win.pi))
    for _ in range(5):
        u = win.kt @ u
    j5 = float(np.sum(u * u * win.pi))
    rep.add("constant solution, f = 1: J_k constant", abs(j5 - j0) <= 1e-9 * j0)

    rng = np.random.default_rng(11)
    pts = [("z", (0, 0)), ("z", (1, 0)), ("z", (2, 1)), ("z", (-3, 2)),
           ("z", (4, -4)), ("z", (0, 5))]
    ks = [4, 8, 16, 32, 64]
    checked = worst = 0
    worst_gap = math.inf
    D = 4.0 * d_scan
    while checked < b4_samples:
        x = pts[rng.integers(0, len(pts))]
        y = pts[rng.integers(0, len(pts))]
        k = ks[rng.integers(0, len(ks))]
        if distance(g, x, y, cap=2 * k) > 2 * k:
            continue  # outside the n >= d(x,y) domain of the comparison
        gap = b4_gap(g, x, y, k, D)
        worst_gap = min(worst_gap, gap)
        if gap < 0:
            worst += 1
        checked += 1
    rep.add(f"B.4 comparison on {checked} samples", worst == 0,
            f"min slack {worst_gap:.3e}")

    # equality trend at x = y as D grows
    from .appendixb import e_d
    from .heat import heat_kernel
    k = 8
    p2k = heat_kernel(g, 2 * k, o, o, radius=2 * k, quotient=None).lower
    eds = [e_d(g, o, k, D) for D in (8.0, 32.0, 128.0)]
    rep.add("B.4 diagonal: E_D decreasing to p(2k,o,o)",
            eds[0] >= eds[1] >= eds[2] >= p2k - 1e-15,
            f"{[round(e, 6) for e in eds]} -> {p2k:.6f}")

    mv = mean_value_constant(g, [o, ("z", (3, 0))], [8, 16], radius=24,
                             F_alpha=1.0)
    rep.add("mean-value inequality constant fitted", math.isfinite(mv.constant),
            f"C={mv.constant:.3f} over {mv.samples} samples")
    return rep


# ---------------------------------------------------------------------------
# potential suite
# ---------------------------------------------------------------------------

def suite_potential(fast: bool = False) -> SuiteReport:
    rep = SuiteReport("potential")
    g3 = lattice(3)
    o3 = ("z", (0, 0, 0))
    bar = radial_barrier(3)
    R = 30 if fast else 40
    diag = s_transience_diagnose(g3, [o3], L=5, radius=R, barrier=bar)
    rep.add("Z3 point target uniformly transient on shell [5, R/2]",
            diag.uniform is True and diag.epsilon > 0.1,
            f"eps={diag.epsilon:.3f} max psi+={diag.max_psi_plus:.3f}")
    shell_hi = 15
    sol = hitting_prob(g3, [o3], R, barrier=bar)
    from .potential import distances_to_target
    win = sol.window
    dist = distances_to_target(win, [win.locate(sol.target[0])])
    shell = (dist >= 5) & (dist <= shell_hi)
    rep.add("Z3 psi+ <= 1 - eps on shell d in [5,15]",
            float(np.max(sol.upper[shell])) < 0.9,
            f"max psi+ = {np.max(sol.upper[shell]):.3f}")

    # recurrent case: psi- -> 1 at large window
    g1 = lattice(1)
    o1 = ("z", (0,))
    R1 = 2000 if fast else 10_000
    sol1 = hitting_prob(g1, [o1], R1, solver="direct")
    w1 = sol1.window
    d1 = distances_to_target(w1, [w1.locate(o1)])
    shell1 = (d1 >= 5) & (d1 <= 15)
    rep.add("Z recurrent: psi- >= 0.99 on the probe shell at R=10^4",
            float(np.min(sol1.lower[shell1])) >= 0.99,
            f"min psi- = {np.min(sol1.lower[shell1]):.5f}")

    # psi bracket sweep: lower nondecreasing, upper nonincreasing in R
    vals = []
    x_probe = ("z", (3, 0, 0))
    for Rs in (16, 24, 32):
        s = hitting_prob(g3, [o3], Rs, barrier=bar)
        vals.append((s.psi_minus(x_probe), s.psi_plus(x_probe)))
    rep.add("psi bracket nesting in R",
            all(vals[i][0] <= vals[i + 1][0] + 1e-12 for i in range(2))
            and all(vals[i][1] >= vals[i + 1][1] - 1e-12 for i in range(2)),
            f"{[(round(a, 4), round(b, 4)) for a, b in vals]}")

    # Monte Carlo agreement on three fixed instances
    mc_ok = True
    detail = []
    for (dim, start, Rmc) in [(1, (5,), 40), (2, (3, 0), 24), (3, (3, 0, 0), 20)]:
        gd = lattice(dim)
        od = ("z", (0,) * dim)
        sold = hitting_prob(gd, [od], Rmc,
                            solver="direct" if dim == 1 else "jacobi")
        est, sig = mc_point_hitting(dim, start, Rmc,
                                    walkers=30_000 if fast else 100_000, seed=5)
        ref = sold.psi_minus(("z", start))
        detail.append(f"d{dim}: {est:.4f} vs {ref:.4f}")
        if abs(est - ref) > 3 * sig + 1e-6:
            mc_ok = False
    rep.add("MC vs linear solve (3 sigma, 3 instances)", mc_ok, "; ".join(detail))

    # green function: monotone lower family + certified bracket
    gr = green(g3, o3, [o3, ("z", (4, 0, 0))], 40, barrier=bar,
               sweep_radii=[20, 30])
    mono = all(gr.sweep[i][1] <= gr.sweep[i + 1][1] + 1e-15
               for i in range(len(gr.sweep) - 1))
    rep.add("green lower family monotone in R", mono,
            f"{[(r, round(v, 5)) for r, v in gr.sweep]}")
    rep.add("green upper certified (psi_bar < 1)", not gr.lower_only,
            f"psi_bar={gr.psi_bar:.4f}")

    # Dirichlet vs Neumann on Z3 minus a point (spine-kernel comparison)
    om = lattice_orbit_map("z", 3, [("z", (3, 0, 0)), ("z", (-3, 0, 0)), o3])
    sub = Subgraph(g3, lambda v: v != o3, name="z3-minus-o")
    x, y = ("z", (3, 0, 0)), ("z", (-3, 0, 0))
    times = [32, 64, 128] if fast else [32, 64, 128, 256, 512]
    Rw = 48 if fast else 96
    pd = sub_heat_series(sub, "dirichlet", x, y, times, Rw, quotient=om)
    pn = sub_heat_series(sub, "neumann", x, y, times, Rw, quotient=om)
    ratios = [bd.lower / bn.upper for (_, bd), (_, bn) in zip(pd, pn)]
    band_ok = all(0 < r <= 1 + 1e-12 for r in ratios) and ratios[-1] >= 0.2
    stab = ratios[-1] / ratios[-2] if ratios[-2] else 0
    rep.add("p_D/p_N in a fixed (c, 1] band over n in [32, 512]",
            band_ok and 0.8 <= stab <= 1.25,
            f"ratios={[round(r, 3) for r in ratios]}")
    return rep


SUITE_FUNCS = {
    "core-invariants": suite_core_invariants,
    "fk": suite_fk,
    "spine-bounds": suite_spine_bounds,
    "appendix-b": suite_appendix_b,
    "potential": suite_potential,
}


def verify(name: str, fast: bool = False) -> SuiteReport:
    if name not in SUITE_FUNCS:
        raise KeyError(f"unknown suite {name!r}; one of {sorted(SUITE_FUNCS)}")
    return SUITE_FUNCS[name](fast=fast)
