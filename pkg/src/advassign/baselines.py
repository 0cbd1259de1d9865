"""Comparison baselines and the exhaustive optimum used as a correctness oracle."""

from __future__ import annotations

import itertools
from math import ceil

import numpy as np

from .attacker import enumerate_best_response
from .homogeneous import sum_unattacked
from .model import (
    TOL,
    Assignment,
    DecisionRule,
    GameInstance,
    InstanceError,
    evaluate_majority_exact,
    worker_contributions,
)
from .seeding import rng_for

MAX_BRUTE_FORCE = 10**7


def split_k(instance: GameInstance, k: int) -> Assignment:
    """Divide the budgeted tasks equally among the ``k`` most proficient workers.

    The ``m mod k`` leftover tasks go one each to the top-k workers starting
    from the least proficient.  Tasks beyond a worker's capacity pass to the
    next worker in that same order.
    """
    if not 1 <= k <= instance.n:
        raise InstanceError(f"k must lie in [1, n={instance.n}], got {k}")
    m = instance.budget
    c = instance.capacities
    want = np.full(k, m // k)
    want[k - (m % k) :] += 1
    counts = np.zeros(instance.n, dtype=int)
    carry = 0
    # least proficient first, so overflow walks upwards
    for w in range(k - 1, -1, -1):
        take = min(want[w] + carry, c[w])
        carry = want[w] + carry - take
        counts[w] = take
    for w in range(k - 1, -1, -1):
        if not carry:
            break
        more = min(carry, c[w] - counts[w])
        counts[w] += more
        carry -= more
    if carry:
        raise InstanceError(f"top-{k} capacities cannot absorb {m} tasks")
    return Assignment.from_counts(counts, instance.m)


def monte_carlo(instance: GameInstance, seed: int, top_half_only: bool = False, trial: int = 0) -> Assignment:
    """Give each budgeted task to a uniformly random eligible worker with spare capacity.

    The pool is every worker, or the ``ceil(n/2)`` most proficient.
    """
    pool = ceil(instance.n / 2) if top_half_only else instance.n
    rng = rng_for(seed, "top-mc" if top_half_only else "mc", trial)
    spare = instance.capacities[:pool].copy()
    s = np.zeros((instance.n, instance.m), dtype=np.int8)
    for t in range(instance.budget):
        open_ = np.flatnonzero(spare > 0)
        if open_.size == 0:
            raise InstanceError("worker pool ran out of capacity")
        w = open_[rng.integers(open_.size)]
        s[w, t] = 1
        spare[w] -= 1
    return Assignment(s)


def nonadversarial_optimal(instance: GameInstance) -> tuple[Assignment, float]:
    """Best assignment when nobody attacks: fill the most proficient workers first."""
    counts = np.zeros(instance.n, dtype=int)
    left = instance.budget
    for w, cap in enumerate(instance.capacities):
        counts[w] = min(cap, left)
        left -= counts[w]
    s = np.zeros((instance.n, instance.m), dtype=np.int8)
    t = 0
    for w, k in enumerate(counts):
        s[w, t : t + k] = 1
        t += k
    a = Assignment(s)
    return a, float(worker_contributions(a, instance).sum())


def _task_maps(instance: GameInstance) -> np.ndarray:
    """Every map task -> worker (-1 = unassigned) respecting budget and capacities."""
    n, m = instance.n, instance.m
    size = (n + 1) ** m
    if size > MAX_BRUTE_FORCE:
        raise InstanceError(f"{size} single-worker assignments exceed the brute-force bound")
    maps = np.array(list(itertools.product(range(-1, n), repeat=m)), dtype=np.int64).reshape(-1, m)
    loads = np.stack([(maps == w).sum(axis=1) for w in range(n)], axis=1)
    ok = ((maps >= 0).sum(axis=1) <= instance.budget) & (loads <= instance.capacities).all(axis=1)
    return maps[ok]


def _count_vectors(instance: GameInstance) -> np.ndarray:
    n = instance.n
    ranges = [range(min(int(c), instance.budget) + 1) for c in instance.capacities]
    size = int(np.prod([len(r) for r in ranges], dtype=float))
    if size > MAX_BRUTE_FORCE:
        raise InstanceError(f"{size} count vectors exceed the brute-force bound")
    counts = np.array(list(itertools.product(*ranges)), dtype=np.int64).reshape(-1, n)
    return counts[counts.sum(axis=1) <= instance.budget]


def _lexmin(matrices: list[np.ndarray]) -> np.ndarray:
    return min(matrices, key=lambda a: tuple(a.ravel().tolist()))


def brute_force_optimal(
    instance: GameInstance, allow_multiworker: bool = False, rule: DecisionRule | None = None
) -> tuple[Assignment, float]:
    """Exhaustive optimum over every valid assignment, attacker best-responding.

    Single-worker search scores with additive contributions.  On homogeneous
    instances it enumerates task counts per worker, which covers every
    assignment up to relabelling of identical tasks.  Multi-worker search
    enumerates every binary matrix within budget and capacities.  It scores
    with the exact weighted-majority evaluator against an exhaustive attacker.
    Ties go to the lexicographically smallest flattened incidence matrix.
    """
    n, m, tau = instance.n, instance.m, instance.tau
    if allow_multiworker:
        if 2 ** (n * m) > MAX_BRUTE_FORCE:
            raise InstanceError(f"2^{n * m} multi-worker assignments exceed the brute-force bound")
        rule = rule or DecisionRule.proficiency_weighted(instance)
        best_val, best = -np.inf, []
        for bits in itertools.product((0, 1), repeat=n * m):
            s = np.array(bits, dtype=np.int8).reshape(n, m)
            if s.sum() > instance.budget or (s.sum(axis=1) > instance.capacities).any():
                continue
            a = Assignment(s)
            _, val = enumerate_best_response(n, tau, lambda atk: evaluate_majority_exact(a, atk, instance, rule))
            if val > best_val + TOL:
                best_val, best = val, [s]
            elif val >= best_val - TOL:
                best.append(s)
        return Assignment(_lexmin(best)), float(best_val)

    p, u = instance.proficiencies, instance.utilities
    if instance.is_homogeneous:
        counts = _count_vectors(instance)
        vals = sum_unattacked(counts * p[None, :], tau) * u[0]
        top = np.flatnonzero(vals >= vals.max() - TOL)
        cands = [Assignment.from_counts(counts[i], m).matrix for i in top]
        return Assignment(_lexmin(cands)), float(vals.max())

    maps = _task_maps(instance)
    gain = np.where(maps >= 0, p[np.maximum(maps, 0)] * u[None, :], 0.0)
    contrib = np.zeros((maps.shape[0], n))
    for w in range(n):
        contrib[:, w] = np.where(maps == w, gain, 0.0).sum(axis=1)
    vals = sum_unattacked(contrib, tau)
    top = np.flatnonzero(vals >= vals.max() - TOL)
    cands = [Assignment.from_task_map(maps[i], n).matrix for i in top[:10000]]
    return Assignment(_lexmin(cands)), float(vals.max())


def brute_force_single_worker_complete(instance: GameInstance) -> tuple[Assignment, float]:
    """Exhaustive optimum over assignments giving every task exactly one worker."""
    n, m = instance.n, instance.m
    if n**m > MAX_BRUTE_FORCE:
        raise InstanceError(f"{n}^{m} assignments exceed the brute-force bound")
    p, u = instance.proficiencies, instance.utilities
    maps = np.array(list(itertools.product(range(n), repeat=m)), dtype=np.int64).reshape(-1, m)
    loads = np.stack([(maps == w).sum(axis=1) for w in range(n)], axis=1)
    maps = maps[(loads <= instance.capacities).all(axis=1)]
    if maps.size == 0:
        raise InstanceError("no complete assignment fits the capacities")
    contrib = np.stack([np.where(maps == w, u[None, :], 0.0).sum(axis=1) * p[w] for w in range(n)], axis=1)
    vals = sum_unattacked(contrib, instance.tau)
    best = int(np.argmax(vals))
    return Assignment.from_task_map(maps[best], n), float(vals[best])
