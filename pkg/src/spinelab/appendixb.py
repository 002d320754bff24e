"""Integrated-maximum-principle style numeric property checks.

All quantities live on exact windows (radius >= time horizon), so the heat
states are genuine solutions of the discrete heat equation there and the
checks carry no truncation error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .graphs import MarkovKernel, WeightedGraph, distance
from .windows import compile_window, evolve


def _grad_sq(win, f):
    """Pointwise |grad f|^2(x) = 1/2 sum_y K(x,y) (f(y) - f(x))^2 on the
    window interior (all neighbors inside)."""
    M = win.kt.T.tocsr()
    row_sum = np.asarray(M.sum(axis=1)).ravel()
    return 0.5 * (M @ (f * f) - 2.0 * f * (M @ f) + f * f * row_sum)


def gaussian_weight(dist, k, n, D):
    """f_k(x) = exp(-rho(x)^2 / (D (n + 1 - k))) with rho = max(dist, 1)."""
    rho = np.maximum(dist, 1.0)
    return np.exp(-rho * rho / (D * (n + 1.0 - k)))


def weight_condition_margin(g: WeightedGraph, center, n: int, D: float,
                            radius: Optional[int] = None,
                            alpha: Optional[float] = None) -> float:
    """Largest violation of the weight condition
    d_k f + |grad f_{k+1}|^2 / (4 alpha f_{k+1}) <= 0 over the window and all
    k in [0, n); negative margin means the condition holds."""
    alpha = alpha if alpha is not None else g.laziness
    R = radius if radius is not None else max(16, n // 4)
    kern = MarkovKernel(g, "full")
    win = compile_window(kern, center, R)
    interior = win.dist <= R - 1
    dist = win.dist.astype(float)
    worst = -math.inf
    for k in range(n):
        fk = gaussian_weight(dist, k, n, D)
        fk1 = gaussian_weight(dist, k + 1, n, D)
        lhs = (fk1 - fk) + _grad_sq(win, fk1) / (4.0 * alpha * fk1)
        worst = max(worst, float(np.max(lhs[interior])))
    return worst


def scan_weight_constant(g: WeightedGraph, center, n: int,
                         radius: Optional[int] = None,
                         alpha: Optional[float] = None,
                         grid_base: float = 1.25, d_max: float = 4096.0) -> float:
    """Smallest D on a geometric grid for which the weight condition holds on
    the window (the analytic constant is existence-only, so it is scanned
    empirically per graph)."""
    D = 1.0
    while D <= d_max:
        if weight_condition_margin(g, center, n, D, radius, alpha) <= 0.0:
            return D
        D *= grid_base
    raise ValueError(f"no valid weight constant up to {d_max}")


@dataclass
class JkReport:
    D: float
    n: int
    values: np.ndarray
    max_increase: float      # max over k of (J_{k+1} - J_k) / J_k

    @property
    def monotone(self) -> bool:
        return self.max_increase <= 1e-12


def jk_series(g: WeightedGraph, source, n: int, D: float) -> JkReport:
    """J_k = sum_x u_k(x)^2 f_k(x) pi(x) for the heat solution from a point
    source, on an exact window; checks it is non-increasing in k."""
    kern = MarkovKernel(g, "full")
    R = n + 2
    win = compile_window(kern, source, R)
    i0 = win.locate(source)
    u = np.zeros(win.size)
    u[i0] = 1.0
    dist = win.dist.astype(float)
    vals = np.empty(n + 1)
    for k in range(n + 1):
        fk = gaussian_weight(dist, k, n, D)
        vals[k] = float(np.sum(u * u * fk * win.pi))
        if k < n:
            u = win.kt @ u
    inc = np.diff(vals) / np.maximum(vals[:-1], 1e-300)
    return JkReport(D, n, vals, float(np.max(inc)) if len(inc) else 0.0)


def e_d(g: WeightedGraph, x, k: int, D: float) -> float:
    """E_D(k, x) = sum_z p(k,x,z)^2 exp(rho(x,z)^2/(Dk)) pi(z), exact."""
    kern = MarkovKernel(g, "full")
    state = evolve(kern, x, [k], k + 1)[0]
    win = state.window
    rho = np.maximum(win.dist.astype(float), 1.0)
    p = state.u / win.pi
    return float(np.sum(p * p * np.exp(rho * rho / (D * k)) * win.pi))


def b4_gap(g: WeightedGraph, x, y, k: int, D: float) -> float:
    """Signed slack of the on/off-diagonal comparison
    p(2k,x,y) <= sqrt(E_D(k,x) E_D(k,y)) exp(-d(x,y)^2/(4Dk));
    positive slack means the inequality holds."""
    kern = MarkovKernel(g, "full")
    d = distance(g, x, y, cap=2 * k + 1)
    if d is math.inf:
        raise ValueError("pair not connected within 2k")
    p2k = evolve(kern, x, [2 * k], 2 * k + 1)[0].density(y)
    rhs = math.sqrt(e_d(g, x, k, D) * e_d(g, y, k, D)) * \
        math.exp(-d * d / (4.0 * D * k))
    return rhs - p2k


@dataclass
class MeanValueReport:
    constant: float           # fitted smallest admissible C
    samples: int


def mean_value_constant(g: WeightedGraph, sources: Sequence, times: Sequence[int],
                        radius: int, F_alpha: float,
                        F_value=None) -> MeanValueReport:
    """Fitted constant of the L2 mean-value inequality for Dirichlet-window
    subsolutions started at point sources:
        u(T,z)^2 <= C / (F(z,R) min{T^{1+1/alpha} R^{-2/alpha}, R^2})
                    * sum_{k<=2T} sum_x u_k(x)^2 pi(x).
    """
    from .graphs import volume
    kern = MarkovKernel(g, "full")
    consts = []
    for z in sources:
        F = F_value(z, radius) if F_value is not None else volume(g, z, radius)
        win = compile_window(kern, z, radius)
        i0 = win.locate(z)
        u = np.zeros(win.size)
        u[i0] = 1.0
        # the inequality is stated for the density u_k = p(k, z, .)
        acc = float(np.sum(u * u / win.pi))
        horizon = 2 * max(times)
        udiag = {0: float(u[i0])}
        accs = {0: acc}
        for k in range(1, horizon + 1):
            u = win.kt @ u
            acc += float(np.sum(u * u / win.pi))
            udiag[k] = float(u[i0])
            accs[k] = acc
        for T in times:
            denom_time = min(T ** (1.0 + 1.0 / F_alpha) * radius ** (-2.0 / F_alpha),
                             float(radius * radius))
            lhs = (udiag[T] / win.pi[i0]) ** 2
            rhs_core = accs[2 * T] / (F * denom_time)
            consts.append(lhs / rhs_core if rhs_core > 0 else math.inf)
    return MeanValueReport(max(consts), len(consts))
