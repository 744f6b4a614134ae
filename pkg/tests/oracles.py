"""Independent reference computations used by the tests.

Nothing here imports the solver or the combinatorial helpers under test.
"""
from __future__ import annotations

import itertools
from fractions import Fraction

import mpmath
import numpy as np


def random_bipartite(rng: np.random.Generator, n: int, k: int, p: float = 0.4):
    """Observe/reward sets with K_j inside V_j, every base-arm in some reward set."""
    observe, reward = [], []
    for _ in range(k):
        v = set(np.flatnonzero(rng.random(n) < p).tolist()) or {int(rng.integers(n))}
        kk = {i for i in v if rng.random() < 0.5} or {min(v)}
        observe.append(v)
        reward.append(kk)
    for i in range(n):
        if not any(i in r for r in reward):
            j = int(rng.integers(k))
            reward[j].add(i)
            observe[j].add(i)
    return observe, reward


def lp_vertex_float(c, a, b):
    """min c.x s.t. a x >= b, x >= 0 by enumerating basic solutions; None when infeasible."""
    c, a, b = (np.asarray(v, dtype=float) for v in (c, a, b))
    m, n = a.shape
    best = None
    for s in range(0, min(m, n) + 1):
        rows = list(itertools.combinations(range(m), s))
        cols = list(itertools.combinations(range(n), s))
        if s == 0:
            cand = [np.zeros(n)]
        else:
            r_idx = np.array(rows)[:, None, :, None]
            c_idx = np.array(cols)[None, :, None, :]
            mats = a[r_idx, c_idx].reshape(-1, s, s)
            rhs = np.broadcast_to(b[np.array(rows)][:, None, :], (len(rows), len(cols), s)).reshape(-1, s)
            det = np.linalg.det(mats)
            ok = np.abs(det) > 1e-9
            if not ok.any():
                continue
            sol = np.linalg.solve(mats[ok], rhs[ok][..., None])[..., 0]
            col_of = np.broadcast_to(np.arange(len(cols))[None, :], (len(rows), len(cols))).reshape(-1)[ok]
            cand = []
            for x_sub, ci in zip(sol, col_of):
                x = np.zeros(n)
                x[list(cols[ci])] = x_sub
                cand.append(x)
        for x in cand:
            if np.all(x >= -1e-9) and np.all(a @ x >= b - 1e-9):
                val = float(c @ x)
                if best is None or val < best:
                    best = val
    return best


def _solve_exact(mat, rhs):
    s = len(mat)
    aug = [list(row) + [r] for row, r in zip(mat, rhs)]
    for col in range(s):
        piv = next((r for r in range(col, s) if aug[r][col] != 0), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        for r in range(s):
            if r != col and aug[r][col] != 0:
                f = aug[r][col] / aug[col][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [aug[r][s] / aug[r][r] for r in range(s)]


def lp_vertex_exact(c, a, b):
    """Exact rational optimum (Fraction) by vertex enumeration; None when infeasible."""
    c = [Fraction(int(x)) for x in c]
    a = [[Fraction(int(x)) for x in row] for row in a]
    b = [Fraction(int(x)) for x in b]
    m, n = len(a), len(c)
    best = None
    for s in range(0, min(m, n) + 1):
        for rows in itertools.combinations(range(m), s):
            for cols in itertools.combinations(range(n), s):
                if s:
                    sub = _solve_exact([[a[r][j] for j in cols] for r in rows], [b[r] for r in rows])
                    if sub is None:
                        continue
                else:
                    sub = []
                x = [Fraction(0)] * n
                for j, v in zip(cols, sub):
                    x[j] = v
                if any(v < 0 for v in x):
                    continue
                if any(sum(a[r][j] * x[j] for j in range(n)) < b[r] for r in range(m)):
                    continue
                val = sum(cj * xj for cj, xj in zip(c, x))
                if best is None or val < best:
                    best = val
    return best


def supports(observe, n):
    return [{j for j, v in enumerate(observe) if i in v} for i in range(n)]


def hitting_number(observe, n):
    sup = supports(observe, n)
    k = len(observe)
    for size in range(1, k + 1):
        for combo in itertools.combinations(range(k), size):
            cs = set(combo)
            if all(s & cs for s in sup):
                return size
    return None


def is_clique(observe, reward, members):
    return all(reward[b] <= observe[a] for a in members for b in members)


def set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def clique_partition_number(observe, reward):
    best = None
    for part in set_partitions(list(range(len(observe)))):
        if best is not None and len(part) >= best:
            continue
        if all(is_clique(observe, reward, p) for p in part):
            best = len(part)
    return best


def min_clique_cost(observe, reward, members, cost):
    best = None
    for part in set_partitions(list(members)):
        if all(is_clique(observe, reward, p) for p in part):
            val = sum(cost(p) for p in part)
            if best is None or val < best:
                best = val
    return best


def expected_stopping_time(n: int, p: float) -> float:
    """E[tau] = sum_{k>=0} P(tau > k) = sum_k 1 - (1 - (1-p)^k)^n."""
    mpmath.mp.dps = 40
    q = mpmath.mpf(1) - mpmath.mpf(p)
    total, k = mpmath.mpf(0), 0
    while True:
        term = 1 - (1 - q ** k) ** n
        total += term
        if term < mpmath.mpf(10) ** -30:
            return float(total)
        k += 1


def kl_highprec(theta, sigma) -> float:
    mpmath.mp.dps = 50
    t, s = mpmath.mpf(theta), mpmath.mpf(sigma)
    out = mpmath.mpf(0)
    if t > 0:
        out += t * mpmath.log(t / s)
    if t < 1:
        out += (1 - t) * mpmath.log((1 - t) / (1 - s))
    return float(out)
