"""Optimal robust assignment when every task has the same utility.

Only the number of tasks per worker matters, and one worker per task is
enough.  The solver tries every worker ``i`` as the pivot of the attack with
every load ``s_i``.  That fixes the level ``lam = s_i * p_i`` that no
unattacked worker should exceed.  The remaining budget is then filled in
proficiency order with ``floor(lam / p_j)`` tasks each, and partial top-ups
are placed where they add the most.  Candidates are scored exactly (sum of
the ``n - tau`` smallest contributions) in order of a fractional bound on
their level, stopping once the bound falls below the best score.
"""

from __future__ import annotations

import numpy as np

from .model import TOL, Assignment, GameInstance, InstanceError

_CHUNK = 128


def normalize_homogeneous(instance: GameInstance) -> GameInstance:
    """Keep the first ``budget`` tasks; they are interchangeable."""
    if not instance.is_homogeneous:
        raise InstanceError("task utilities are not all equal")
    return instance.replace(tasks=instance.tasks[: instance.budget], budget=instance.budget)


def sum_unattacked(contrib: np.ndarray, tau: int) -> np.ndarray:
    """Row-wise sum of the ``n - tau`` smallest contributions."""
    keep = contrib.shape[-1] - tau
    if keep <= 0:
        return np.zeros(contrib.shape[:-1])
    return np.sort(contrib, axis=-1)[..., :keep].sum(axis=-1)


def _candidates(c: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Every (pivot worker, pivot load) pair: pivot ascending, then load ascending."""
    pivots = np.repeat(np.arange(c.size), np.minimum(c, m))
    loads = np.concatenate([np.arange(1, min(ci, m) + 1) for ci in c])
    return pivots, loads


def _level_bounds(p: np.ndarray, lam: np.ndarray, m: int, tau: int) -> np.ndarray:
    """Upper bound on ``sum_w min(x_w, lam) - tau * lam`` with ``m`` divisible tasks.

    Filling worker ``j`` up to ``lam`` costs ``lam / p_j`` tasks, so the most
    proficient workers are filled first.
    """
    cost = lam[:, None] * np.cumsum(1.0 / p)[None, :]
    k = (cost <= m).sum(axis=1)
    spent = np.where(k > 0, cost[np.arange(lam.size), np.maximum(k - 1, 0)], 0.0)
    partial = np.where(k < p.size, p[np.minimum(k, p.size - 1)] * (m - spent), 0.0)
    return lam * k + partial - tau * lam


def _candidate_counts(p: np.ndarray, c: np.ndarray, m: int, pivots: np.ndarray, loads: np.ndarray) -> np.ndarray:
    """Task counts, one row per (pivot, load) candidate."""
    n = p.size
    rows = np.arange(pivots.size)
    lam = loads * p[pivots]

    # whole tasks that keep worker j at or below the pivot's contribution
    full = np.minimum(np.floor(lam[:, None] / p[None, :] + TOL).astype(int), c[None, :])
    # value of one more task beyond that, capped at lam
    topup = np.where(full < c[None, :], lam[:, None] - full * p[None, :], 0.0)
    topup[topup <= TOL] = 0.0
    full[rows, pivots] = 0
    topup[rows, pivots] = 0.0

    # greedy over marginal values: p_j per whole task, topup_j for the extra one
    values = np.concatenate([np.broadcast_to(p, full.shape), topup], axis=1)
    amounts = np.concatenate([full, (topup > 0).astype(int)], axis=1)
    order = np.argsort(-values, axis=1)
    sorted_amounts = np.take_along_axis(amounts, order, axis=1)
    remaining = (m - loads)[:, None]
    taken_before = np.cumsum(sorted_amounts, axis=1) - sorted_amounts
    taken = np.empty_like(sorted_amounts)
    np.put_along_axis(taken, order, np.clip(remaining - taken_before, 0, sorted_amounts), axis=1)
    counts = taken[:, :n] + taken[:, n:]
    counts[rows, pivots] = loads

    # leftover budget never hurts: hand it out in proficiency order
    spare = c[None, :] - counts
    left = (m - counts.sum(axis=1))[:, None]
    before = np.cumsum(spare, axis=1) - spare
    counts += np.clip(left - before, 0, spare)
    return counts


def solve_homogeneous(instance: GameInstance) -> tuple[Assignment, float]:
    """Optimal single-worker-per-task assignment and its post-attack utility.

    ``instance`` must be homogeneous.  Only ``budget`` tasks are used; the
    rest stay unassigned.
    """
    if not instance.is_homogeneous:
        raise InstanceError("task utilities are not all equal")
    total_m = instance.m
    if instance.m != instance.budget:
        instance = normalize_homogeneous(instance)
    p, c, m = instance.proficiencies, instance.capacities, instance.m
    u = float(instance.utilities[0])
    tau = instance.tau
    pivots, loads = _candidates(c, m)
    lam = loads * p[pivots]
    # Exact scoring in chunks of decreasing bound.  Once the bound drops below
    # the best exact score no unscored candidate can carry the optimal level.
    bounds = _level_bounds(p, lam, m, tau)
    order = np.argsort(-bounds, kind="stable")
    bounds = bounds[order]
    best_val, scored, scores, rows = -np.inf, [], [], []
    for start in range(0, order.size, _CHUNK):
        if bounds[start] < best_val - TOL:
            break
        idx = order[start : start + _CHUNK]
        counts = _candidate_counts(p, c, m, pivots[idx], loads[idx])
        vals = sum_unattacked(counts * p[None, :], tau)
        best_val = max(best_val, float(vals.max()))
        scored.append(idx)
        scores.append(vals)
        rows.append(counts)
    idx, vals, counts = np.concatenate(scored), np.concatenate(scores), np.concatenate(rows)
    # first candidate in loop order among the optimal ones
    top = np.flatnonzero(vals >= best_val - TOL)
    pick = top[np.argmin(idx[top])]
    return Assignment.from_counts(counts[pick], total_m), float(vals[pick]) * u
