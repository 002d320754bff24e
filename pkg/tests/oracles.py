"""Independent oracles used to freeze expected values.

These deliberately avoid the library's own computation paths: brute-force
path enumeration, closed-form lattice ball counts, dense matrix powers, and
exhaustive subset filters.
"""

import itertools
import math

import numpy as np


def kernel_dict(g, v):
    return dict(g.kernel_row(v))


def paths_mass(g, x, y, n):
    """K^n(x, y) by explicit enumeration over all length-n kernel paths."""
    if n == 0:
        return 1.0 if x == y else 0.0
    total = 0.0
    frontier = {x: 1.0}
    for _ in range(n):
        nxt = {}
        for v, mass in frontier.items():
            for w, p in g.kernel_row(v):
                nxt[w] = nxt.get(w, 0.0) + mass * p
        frontier = nxt
    return frontier.get(y, 0.0)


def lattice_ball_closed_form(d, r):
    """# lattice points with L1 norm <= r: sum_k 2^k C(d,k) C(r,k)."""
    return sum(2 ** k * math.comb(d, k) * math.comb(r, k)
               for k in range(0, min(d, r) + 1))


def dense_kernel_matrix(g, region):
    region = sorted(region)
    index = {v: i for i, v in enumerate(region)}
    K = np.zeros((len(region), len(region)))
    for i, v in enumerate(region):
        for w, p in g.kernel_row(v):
            j = index.get(w)
            if j is not None:
                K[i, j] = p
    return K, region, index


def dense_matrix_power_entry(g, region, x, y, n):
    """(K_D^n)(x, y) on a region, by dense matrix powers."""
    K, _, index = dense_kernel_matrix(g, region)
    e = np.zeros(K.shape[0])
    e[index[x]] = 1.0
    for _ in range(n):
        e = e @ K
    return float(e[index[y]])


def brute_connected_subsets(g, vertices, max_size):
    """All connected subsets by filtering every combination (tiny regions)."""
    verts = sorted(vertices)
    vset = set(verts)
    adj = {v: {w for w, _ in g.neighbors(v) if w in vset} for v in verts}

    def connected(sub):
        sub = set(sub)
        seen = {next(iter(sub))}
        stack = [next(iter(sub))]
        while stack:
            v = stack.pop()
            for w in adj[v] & sub:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen == sub

    out = []
    for size in range(1, max_size + 1):
        for combo in itertools.combinations(verts, size):
            if connected(combo):
                out.append(frozenset(combo))
    return out


def brute_best_uniformity(g, member, clearance, x, y, max_len):
    """Exhaustive search over all (possibly non-simple) paths up to max_len.

    Returns the best achievable min-normalized-clearance per path length.
    """
    best = {}

    def rec(path):
        k = len(path) - 1
        if path[-1] == y and k > 0:
            val = min(clearance[v] / (1 + min(j, k - j))
                      for j, v in enumerate(path))
            if k not in best or val > best[k]:
                best[k] = val
        if k == max_len:
            return
        for w, _ in g.neighbors(path[-1]):
            if member(w) and w in clearance:
                rec(path + [w])

    rec([x])
    return best


def richardson_potential_kernel(d2_heat, x, n_base):
    """Potential kernel partial sums with one Richardson extrapolation step.

    d2_heat(n, target) must return exact p(n, o, target) values; the tail of
    sum [p(n,o,o) - p(n,o,x)] decays like c/n, so S_inf ~ 2 S_{2N} - S_N.
    """
    def partial(N):
        return math.fsum(d2_heat(n, "o") - d2_heat(n, "x") for n in range(N))

    s1 = partial(n_base)
    s2 = partial(2 * n_base)
    return 2 * s2 - s1
