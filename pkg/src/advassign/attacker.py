"""Attacker best responses to a committed assignment."""

from __future__ import annotations

import itertools
from math import comb
from typing import Callable

import numpy as np

from .model import TOL, Assignment, Attack, GameInstance, InstanceError, worker_contributions

MAX_ENUMERATED_ATTACKS = 10**6


def top_k_indices(values, k: int) -> np.ndarray:
    """Indices of the ``k`` largest values; equal values go to the lower index."""
    values = np.asarray(values, dtype=float)
    return np.sort(np.argsort(-values, kind="stable")[:k])


def best_response_additive(assignment: Assignment, instance: GameInstance) -> Attack:
    """Disable the ``min(tau, n)`` workers with the largest contributions."""
    if not assignment.is_single_worker:
        raise InstanceError("additive best response needs at most one worker per task")
    x = worker_contributions(assignment, instance)
    return Attack.from_indices(top_k_indices(x, min(instance.tau, instance.n)), instance.n)


def attacker_dual(contributions, tau: int) -> tuple[float, np.ndarray]:
    """Optimal ``(lambda, beta)`` of the relaxed attacker program's dual.

    The dual is ``min lambda*tau + sum(beta)`` subject to
    ``lambda + beta_w >= x_w`` and ``beta >= 0``.  Its optimum puts ``lambda``
    at the ``tau``-th largest contribution.
    """
    x = np.asarray(contributions, dtype=float)
    if tau >= x.size:
        return 0.0, x.copy()
    lam = float(np.sort(x)[::-1][tau - 1])
    return lam, np.maximum(0.0, x - lam)


def dual_value(contributions, tau: int) -> float:
    lam, beta = attacker_dual(contributions, tau)
    return lam * min(tau, len(beta)) + float(beta.sum())


def enumerate_best_response(
    n: int, k: int, evaluator: Callable[[Attack], float]
) -> tuple[Attack, float]:
    """Minimise ``evaluator`` over every ``k``-subset of ``n`` workers.

    Subsets are visited in lexicographic order and only a strictly better
    value (by more than the repo tolerance) replaces the incumbent.
    """
    k = min(k, n)
    if comb(n, k) > MAX_ENUMERATED_ATTACKS:
        raise InstanceError(f"C({n}, {k}) attacks exceed the enumeration bound")
    best, best_val = None, np.inf
    for subset in itertools.combinations(range(n), k):
        attack = Attack.from_indices(subset, n)
        val = evaluator(attack)
        if val < best_val - TOL:
            best, best_val = attack, val
    return best, float(best_val)


def best_response_enumerative(
    assignment: Assignment, instance: GameInstance, evaluator: Callable[[Assignment, Attack], float]
) -> Attack:
    """Exhaustive best response for any defender-utility evaluator.

    ``evaluator(assignment, attack)`` returns the defender's utility; the
    attacker picks the subset minimising it.
    """
    if assignment.shape != (instance.n, instance.m):
        raise InstanceError("assignment does not match instance")
    attack, _ = enumerate_best_response(instance.n, instance.tau, lambda a: evaluator(assignment, a))
    return attack
