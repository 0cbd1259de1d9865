"""Compiled kernels for the single-worker branch and bound.

Contributions are plain float arrays; workers are indexed by descending
proficiency.  The search is an explicit-stack depth-first walk so numba can
compile it without recursion.
"""

from __future__ import annotations

import numba as nb
import numpy as np


@nb.njit(cache=True)
def post_attack(x, keep):
    """Sum of the ``keep`` smallest contributions."""
    a = np.sort(x)
    return a[:keep].sum()


@nb.njit(cache=True)
def waterfill(x, extra, keep):
    """Best sum of the ``keep`` smallest entries after spreading ``extra`` over ``x``."""
    a = np.sort(x)
    n = a.size
    acc = 0.0
    level = 0.0
    j = 0
    for j in range(1, n + 1):
        acc += a[j - 1]
        level = (acc + extra) / j
        if j == n or level <= a[j]:
            break
    tot = 0.0
    for i in range(keep):
        tot += level if i < j else a[i]
    return tot


@nb.njit(cache=True)
def frac_eval(lam, x, p, order, navail, rem, tau):
    # value and right slope at lam; remaining utility raises the most
    # proficient workers below lam first
    val = -tau * lam
    slope = -float(tau)
    for w in range(x.size):
        if x[w] < lam:
            val += x[w]
        else:
            val += lam
            if x[w] > lam:
                slope += 1.0
    gained = 0.0
    budget = rem
    inv = 0.0
    k = 0.0
    for i in range(navail):
        w = order[i]
        h = lam - x[w]
        if h <= 0:
            continue
        cost = h / p[w]
        if cost > budget:
            return val + gained + p[w] * budget, slope + k - p[w] * inv
        gained += h
        budget -= cost
        inv += 1.0 / p[w]
        k += 1.0
    return val + gained, slope + k


@nb.njit(cache=True)
def frac_bound(x, p, order, navail, rem, tau, iters):
    """Fractional relaxation, maximised over lam by bisection on the slope.

    The bracket width times ``n`` bounds the slope error, keeping it admissible.
    """
    lo = 0.0
    hi = x.max() + rem * p[order[0]] + 1e-12
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if frac_eval(mid, x, p, order, navail, rem, tau)[1] >= 0:
            lo = mid
        else:
            hi = mid
    a = frac_eval(lo, x, p, order, navail, rem, tau)[0]
    b = frac_eval(hi, x, p, order, navail, rem, tau)[0]
    return max(a, b) + x.size * (hi - lo)


@nb.njit(cache=True)
def search(p, c, u, tau, inc_val, inc_assign, max_nodes):
    """Returns (task map, value, nodes); nodes is -1 when ``max_nodes`` ran out."""
    n = p.size
    m = u.size
    keep = n - tau
    suffix = np.zeros(m + 1)
    for t in range(m - 1, -1, -1):
        suffix[t] = suffix[t + 1] + u[t]
    x = np.zeros(n)
    cnt = np.zeros(n, np.int64)
    choice = np.full(m + 1, -1, np.int64)
    best_val = inc_val
    best = inc_assign.copy()
    order = np.empty(n, np.int64)
    nodes = 0
    t = 0
    entering = True
    while t >= 0:
        if entering:
            entering = False
            nodes += 1
            if nodes > max_nodes:
                return best, best_val, -1
            if t == m:
                v = post_attack(x, keep)
                if v > best_val + 1e-12:
                    best_val = v
                    best[:] = choice[:m]
                t -= 1
                continue
            navail = 0
            for w in range(n):
                if cnt[w] < c[w]:
                    order[navail] = w
                    navail += 1
            b = waterfill(x, suffix[t] * p[order[0]], keep)
            if b > best_val + 1e-12:
                b = min(b, frac_bound(x, p, order, navail, suffix[t], tau, 20))
            if b <= best_val + 1e-12:
                t -= 1
                continue
            choice[t] = -1
        # undo the previous child at depth t, then try the next worker
        w = choice[t]
        if w >= 0:
            x[w] -= p[w] * u[t]
            cnt[w] -= 1
        w += 1
        while w < n:
            if cnt[w] < c[w]:
                dup = False
                # skip workers indistinguishable from one already tried
                for v in range(w):
                    if cnt[v] < c[v] and p[v] == p[w] and c[v] - cnt[v] == c[w] - cnt[w] and x[v] == x[w]:
                        dup = True
                        break
                if not dup:
                    break
            w += 1
        if w >= n:
            choice[t] = -1
            t -= 1
            continue
        choice[t] = w
        x[w] += p[w] * u[t]
        cnt[w] += 1
        t += 1
        entering = True
    return best, best_val, nodes
