"""Brute-force reference implementations used by the tests."""
import itertools
import math

import numpy as np

from ripscover.homology.field import rank_mod_p


def rips_cells(d, r_max, max_dim):
    """Every vertex tuple of at most max_dim+1 points with diameter <= r_max."""
    n = d.shape[0]
    out = {}
    for k in range(max_dim + 1):
        for s in itertools.combinations(range(n), k + 1):
            diam = max((d[a, b] for a, b in itertools.combinations(s, 2)), default=0.0)
            if diam <= r_max:
                out[s] = float(diam)
    return out


def cover_cells(d, sets, r_max, max_dim):
    sets = [set(map(int, s)) for s in sets]
    return {s: v for s, v in rips_cells(d, r_max, max_dim).items() if any(set(s) <= u for u in sets)}


def boundary_dense(cells, k, p):
    """Dense boundary matrix from k-cells to (k-1)-cells of a cell list."""
    ck = [c for c in cells if len(c) == k + 1]
    cl = [c for c in cells if len(c) == k]
    pos = {c: i for i, c in enumerate(cl)}
    m = np.zeros((len(cl), len(ck)), dtype=np.int64)
    for j, c in enumerate(ck):
        for i in range(len(c)):
            m[pos[c[:i] + c[i + 1:]], j] = (-1) ** i % p
    return m


def betti_dense(cells, p, max_k):
    """Betti numbers b_0..b_max_k by ranks of dense boundary matrices."""
    cells = list(cells)
    ranks = {}
    for k in range(1, max_k + 2):
        m = boundary_dense(cells, k, p)
        ranks[k] = rank_mod_p(m, p) if m.size else 0
    out = []
    for k in range(max_k + 1):
        nk = sum(1 for c in cells if len(c) == k + 1)
        out.append(nk - (ranks[k] if k else 0) - ranks[k + 1])
    return out


def reduced_betti_dense(cells, p, max_k):
    b = betti_dense(cells, p, max_k)
    if not any(len(c) == 1 for c in cells):
        return None
    b[0] -= 1
    return b


def nerve_cells(sets, max_dim):
    sets = [set(map(int, s)) for s in sets]
    out = []
    for k in range(max_dim + 1):
        for fam in itertools.combinations(range(len(sets)), k + 1):
            if set.intersection(*[sets[i] for i in fam]):
                out.append(fam)
    return out


def bottleneck_exhaustive(a, b):
    """Bottleneck distance of finite diagrams by trying every partial matching."""
    a = [tuple(x) for x in np.asarray(a, dtype=float).reshape(-1, 2)]
    b = [tuple(x) for x in np.asarray(b, dtype=float).reshape(-1, 2)]
    half = lambda x: (x[1] - x[0]) / 2
    best = math.inf
    for k in range(min(len(a), len(b)) + 1):
        for ia in itertools.combinations(range(len(a)), k):
            for ib in itertools.permutations(range(len(b)), k):
                cost = 0.0
                for i, j in zip(ia, ib):
                    cost = max(cost, abs(a[i][0] - b[j][0]), abs(a[i][1] - b[j][1]))
                for i in set(range(len(a))) - set(ia):
                    cost = max(cost, half(a[i]))
                for j in set(range(len(b))) - set(ib):
                    cost = max(cost, half(b[j]))
                best = min(best, cost)
    return best if (a or b) else 0.0


def witness_oracle(d, simplex):
    """X(T) and Xbar(T) by direct point scans."""
    s = sorted(set(simplex))
    diam = lambda t: max((d[x, y] for x in t for y in t), default=0.0)
    n = d.shape[0]
    X = [y for y in range(n) if all(d[y, x] <= diam(s) for x in s)]
    Xbar = set()
    for k in range(1, len(s) + 1):
        for sub in itertools.combinations(s, k):
            Xbar |= {y for y in range(n) if all(d[y, x] <= diam(sub) for x in sub)}
    return X, sorted(Xbar)


def r1_oracle(d, sets, max_dim):
    """R1 by enumerating every tuple of at most max_dim+1 points."""
    sets = [set(map(int, s)) for s in sets]
    n = d.shape[0]
    diams = sorted({0.0} | {float(d[i, j]) for i in range(n) for j in range(i + 1, n)})
    delta = math.inf
    for s, v in rips_cells(d, math.inf, max_dim).items():
        if not any(set(s) <= u for u in sets):
            delta = min(delta, v)
    if math.isinf(delta):
        return math.inf
    below = [x for x in diams if x < delta]
    return below[-1] if below else -math.inf
