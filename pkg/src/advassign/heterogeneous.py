"""Robust assignment for tasks with different utilities.

:func:`solve_single_worker_exact` solves the single-worker-per-task problem
(the mixed-integer program with the attacker's dual embedded) by
depth-first branch and bound.  :func:`greedy_multiworker_improve` then moves
workers onto higher-utility tasks when that raises the sample-average utility
under the attacker's best response.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import _bnb
from .attacker import attacker_dual, dual_value
from .model import TOL, Assignment, DecisionRule, GameInstance, InstanceError, worker_contributions
from .saa import OutcomeSamples


def restrict_top_b_tasks(instance: GameInstance) -> GameInstance:
    """Drop every task outside the ``budget`` highest utilities."""
    return instance.replace(tasks=instance.tasks[: instance.budget], budget=instance.budget)


@dataclass(frozen=True)
class MilpFormulation:
    """The single-worker program with the attacker's dual folded in.

    Variables are ``s`` (n x m binary), ``gamma``, ``lam`` and ``beta`` (n).
    Objective: ``sum_wt p_w u_t s_wt - gamma``.
    """

    instance: GameInstance

    @property
    def objective_coefficients(self) -> np.ndarray:
        inst = self.instance
        return np.outer(inst.proficiencies, inst.utilities)

    def objective(self, assignment: Assignment, gamma: float) -> float:
        return float((self.objective_coefficients * assignment.matrix).sum() - gamma)

    def certificate(self, assignment: Assignment) -> tuple[float, float, np.ndarray]:
        """Cheapest ``(gamma, lam, beta)`` completing a feasible point for ``assignment``."""
        x = worker_contributions(assignment, self.instance)
        lam, beta = attacker_dual(x, self.instance.tau)
        return dual_value(x, self.instance.tau), lam, beta

    def violations(self, assignment: Assignment, gamma: float, lam: float, beta, tol: float = TOL) -> list[str]:
        """Names of the constraints the point breaks (empty when feasible)."""
        inst = self.instance
        s = assignment.matrix
        beta = np.asarray(beta, dtype=float)
        x = worker_contributions(assignment, inst)
        tau = min(inst.tau, inst.n)
        bad = []
        if s.shape != (inst.n, inst.m):
            return ["shape"]
        if gamma < lam * tau + beta.sum() - tol:
            bad.append("attacker value")
        if (lam + beta < x - tol).any():
            bad.append("dual cover")
        if (beta < -tol).any():
            bad.append("dual sign")
        if s.sum() != inst.m:
            bad.append("all tasks")
        if (s.sum(axis=0) != 1).any():
            bad.append("one worker per task")
        if (s.sum(axis=1) > inst.capacities).any():
            bad.append("capacity")
        return bad


def _post_attack(x: list[float], keep: int) -> float:
    return sum(sorted(x)[:keep]) if keep > 0 else 0.0


def _local_search(assign, p, c, u, n, keep):
    """Improve a complete task->worker map by single moves and pairwise swaps."""
    m = len(assign)
    x = [0.0] * n
    cnt = [0] * n
    for t, w in enumerate(assign):
        x[w] += p[w] * u[t]
        cnt[w] += 1
    val = _post_attack(x, keep)
    improved = True
    while improved:
        improved = False
        for t in range(m):
            a = assign[t]
            for b in range(n):
                if b == a or cnt[b] >= c[b]:
                    continue
                x[a] -= p[a] * u[t]
                x[b] += p[b] * u[t]
                v = _post_attack(x, keep)
                if v > val + 1e-12:
                    val, assign[t] = v, b
                    cnt[a] -= 1
                    cnt[b] += 1
                    a = b
                    improved = True
                else:
                    x[a] += p[a] * u[t]
                    x[b] -= p[b] * u[t]
        for t1, t2 in itertools.combinations(range(m), 2):
            a, b = assign[t1], assign[t2]
            if a == b or u[t1] == u[t2]:
                continue
            d_a = p[a] * (u[t2] - u[t1])
            d_b = p[b] * (u[t1] - u[t2])
            x[a] += d_a
            x[b] += d_b
            v = _post_attack(x, keep)
            if v > val + 1e-12:
                val = v
                assign[t1], assign[t2] = b, a
                improved = True
            else:
                x[a] -= d_a
                x[b] -= d_b
    return assign, val


def _greedy_start(p, c, u, n, keep):
    """Place tasks in descending utility where they raise the post-attack value most."""
    x = [0.0] * n
    cnt = [0] * n
    assign = []
    for t in range(len(u)):
        best_w, best_v = -1, -np.inf
        for w in range(n):
            if cnt[w] >= c[w]:
                continue
            x[w] += p[w] * u[t]
            v = _post_attack(x, keep) - 1e-12 * x[w]
            x[w] -= p[w] * u[t]
            if v > best_v:
                best_w, best_v = w, v
        assign.append(best_w)
        x[best_w] += p[best_w] * u[t]
        cnt[best_w] += 1
    return assign


def _fill_capacities(c, m):
    assign, w, used = [], 0, 0
    for _ in range(m):
        while used >= c[w]:
            w, used = w + 1, 0
        assign.append(w)
        used += 1
    return assign


def solve_single_worker_exact(instance: GameInstance, max_nodes: int | None = None) -> tuple[Assignment, float]:
    """Optimal assignment of every task to exactly one worker.

    Depth-first branch and bound over task -> worker choices, tasks by
    descending utility and workers by descending proficiency, started from a
    local-search incumbent.  A node is cut when an admissible upper bound on
    every completion is no better than the incumbent.  Two bounds are used and
    the smaller wins:

    * remaining utility at the best available proficiency, water-filled onto
      the current contributions before the ``tau`` largest are removed;
    * the fractional relaxation where remaining utility is divisible and
      converted at each worker's own proficiency.

    ``max_nodes`` guards against runaway searches (``RuntimeError``).
    """
    inst = instance
    n, m, tau = inst.n, inst.m, inst.tau
    p = inst.proficiencies.tolist()
    c = inst.capacities.tolist()
    u = inst.utilities.tolist()
    if inst.budget < m:
        # the budget goes to the most valuable tasks
        a, v = solve_single_worker_exact(restrict_top_b_tasks(inst), max_nodes)
        return Assignment(np.pad(a.matrix, ((0, 0), (0, m - inst.budget)))), v
    if sum(c) < m:
        raise InstanceError(f"capacities sum to {sum(c)} < {m} tasks")
    keep = n - tau
    if keep <= 0:
        return Assignment.from_task_map(_fill_capacities(c, m), n), 0.0

    start, start_val = _local_search(_greedy_start(p, c, u, n, keep), p, c, u, n, keep)
    task_map, _, nodes = _bnb.search(
        inst.proficiencies.astype(np.float64),
        inst.capacities.astype(np.int64),
        inst.utilities.astype(np.float64),
        tau,
        float(start_val),
        np.asarray(start, dtype=np.int64),
        np.iinfo(np.int64).max if max_nodes is None else int(max_nodes),
    )
    if nodes < 0:
        raise RuntimeError(f"branch and bound exceeded {max_nodes} nodes")
    assignment = Assignment.from_task_map(task_map, n)
    value = _post_attack(worker_contributions(assignment, inst).tolist(), keep)
    return assignment, float(value)


def saa_best_response_value(matrix: np.ndarray, tau: int, rule: DecisionRule, samples: OutcomeSamples, utilities) -> tuple[tuple[int, ...], float]:
    """Attacker's best response under the sample-average evaluator.

    Returns the lexicographically first minimising subset and the defender's
    value there.
    """
    K, n, _ = samples.cube.shape
    per_worker = samples.cube * (matrix * rule.weights[:, None])[None, :, :]
    total = per_worker.sum(axis=1)
    u = np.asarray(utilities, dtype=float)
    best, best_val = (), np.inf
    for subset in itertools.combinations(range(n), min(tau, n)):
        votes = total - per_worker[:, list(subset), :].sum(axis=1) if subset else total
        val = float(u @ np.count_nonzero(votes > 0, axis=0)) / K
        if val < best_val - TOL:
            best, best_val = subset, val
    return best, best_val


def greedy_multiworker_improve(
    start: Assignment, instance: GameInstance, rule: DecisionRule, samples: OutcomeSamples
) -> Assignment:
    """Shift workers onto higher-utility tasks while the SAA utility strictly rises.

    Tasks are visited from lowest to highest utility.  For each worker on the
    current task, every higher-utility task it is not already on is tried,
    starting with the most valuable.  The attacker re-optimises after each
    tentative move, and the single best strictly improving move is committed.
    """
    K, n, m = samples.cube.shape
    if start.shape != (n, m) or (n, m) != (instance.n, instance.m):
        raise InstanceError("samples, assignment and instance dimensions disagree")
    if rule.weights.shape != (n,):
        raise InstanceError("decision rule has the wrong number of weights")
    s = start.matrix.astype(np.int8).copy()
    u = instance.utilities
    tau = instance.tau

    def value(mat):
        return saa_best_response_value(mat, tau, rule, samples, u)[1]

    util = value(s)
    # ascending utility; equal utilities in ascending index
    task_order = sorted(range(m), key=lambda t: (u[t], t))
    for t in task_order:
        higher = sorted((t2 for t2 in range(m) if (u[t2], t2) > (u[t], t)), key=lambda t2: (-u[t2], t2))
        for w in range(n):
            if not s[w, t]:
                continue
            target = t
            for t2 in higher:
                if s[w, t2]:
                    continue
                s[w, t2], s[w, t] = 1, 0
                v = value(s)
                if v > util + TOL:
                    target, util = t2, v
                s[w, t2], s[w, t] = 0, 1
            s[w, t] = 0
            s[w, target] = 1
    return Assignment(s)
