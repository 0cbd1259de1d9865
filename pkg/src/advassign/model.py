"""Problem data and the two exact utility evaluators.

Workers are indexed by non-increasing proficiency and tasks by non-increasing
utility.  Instances built through :meth:`GameInstance.from_arrays` or
:func:`load_instance` are sorted automatically and remember the permutation
back to the caller's original order.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from pathlib import Path

import numpy as np

TOL = 1e-9
MAX_EXACT_VOTERS = 20


class InstanceError(ValueError):
    """Raised for malformed instances, assignments or attacks."""


@dataclass(frozen=True)
class Worker:
    id: int
    proficiency: float
    capacity: int

    def __post_init__(self):
        if not 0.0 < self.proficiency <= 1.0:
            raise InstanceError(f"proficiency must lie in (0, 1], got {self.proficiency}")
        if self.capacity < 1:
            raise InstanceError(f"capacity must be >= 1, got {self.capacity}")


@dataclass(frozen=True)
class Task:
    id: int
    utility: float

    def __post_init__(self):
        if self.utility < 0:
            raise InstanceError(f"utility must be >= 0, got {self.utility}")


@dataclass(frozen=True)
class GameInstance:
    """Workers, tasks, attack size ``tau`` and assignment budget.

    ``worker_order[i]`` / ``task_order[j]`` give the position of sorted worker
    ``i`` / task ``j`` in the input the instance was built from.
    """

    workers: tuple[Worker, ...]
    tasks: tuple[Task, ...]
    tau: int
    budget: int
    worker_order: tuple[int, ...] = field(default=(), compare=False)
    task_order: tuple[int, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not self.workers:
            raise InstanceError("instance needs at least one worker")
        if not self.tasks:
            raise InstanceError("instance needs at least one task")
        if self.tau < 1:
            raise InstanceError("tau must be >= 1")
        if not 1 <= self.budget <= len(self.tasks):
            raise InstanceError(f"budget must lie in [1, m={len(self.tasks)}], got {self.budget}")
        p = [w.proficiency for w in self.workers]
        u = [t.utility for t in self.tasks]
        if any(a < b for a, b in zip(p, p[1:])):
            raise InstanceError("workers must be sorted by non-increasing proficiency")
        if any(a < b for a, b in zip(u, u[1:])):
            raise InstanceError("tasks must be sorted by non-increasing utility")
        if not self.worker_order:
            object.__setattr__(self, "worker_order", tuple(range(len(self.workers))))
        if not self.task_order:
            object.__setattr__(self, "task_order", tuple(range(len(self.tasks))))

    @classmethod
    def from_arrays(cls, proficiencies, utilities, tau, budget=None, capacities=None):
        """Build a sorted instance from unsorted per-worker / per-task values.

        Capacities default to ``m`` (never binding) and the budget to ``m``.
        """
        p = np.asarray(proficiencies, dtype=float)
        u = np.asarray(utilities, dtype=float)
        m = len(u)
        c = np.full(len(p), m, dtype=int) if capacities is None else np.asarray(capacities, dtype=int)
        if len(c) != len(p):
            raise InstanceError("capacities and proficiencies differ in length")
        w_order = np.argsort(-p, kind="stable")
        t_order = np.argsort(-u, kind="stable")
        workers = tuple(Worker(i, float(p[k]), int(c[k])) for i, k in enumerate(w_order))
        tasks = tuple(Task(j, float(u[k])) for j, k in enumerate(t_order))
        return cls(
            workers,
            tasks,
            int(tau),
            m if budget is None else int(budget),
            tuple(int(k) for k in w_order),
            tuple(int(k) for k in t_order),
        )

    @property
    def n(self) -> int:
        return len(self.workers)

    @property
    def m(self) -> int:
        return len(self.tasks)

    @cached_property
    def proficiencies(self) -> np.ndarray:
        a = np.array([w.proficiency for w in self.workers])
        a.flags.writeable = False
        return a

    @cached_property
    def capacities(self) -> np.ndarray:
        a = np.array([w.capacity for w in self.workers], dtype=int)
        a.flags.writeable = False
        return a

    @cached_property
    def utilities(self) -> np.ndarray:
        a = np.array([t.utility for t in self.tasks])
        a.flags.writeable = False
        return a

    @property
    def is_homogeneous(self) -> bool:
        u = self.utilities
        return bool(np.all(u == u[0]))

    def replace(self, *, tasks=None, tau=None, budget=None, workers=None) -> GameInstance:
        """Copy with some fields swapped; orders are truncated to match."""
        tasks = self.tasks if tasks is None else tuple(tasks)
        workers = self.workers if workers is None else tuple(workers)
        return GameInstance(
            workers,
            tasks,
            self.tau if tau is None else tau,
            min(self.budget, len(tasks)) if budget is None else budget,
            self.worker_order[: len(workers)],
            self.task_order[: len(tasks)],
        )

    def to_json(self) -> dict:
        return {
            "workers": [{"p": w.proficiency, "c": w.capacity} for w in self.workers],
            "tasks": [{"u": t.utility} for t in self.tasks],
            "tau": self.tau,
            "budget": self.budget,
        }

    @classmethod
    def from_json(cls, obj: dict) -> GameInstance:
        try:
            p = [w["p"] for w in obj["workers"]]
            c = [w.get("c", len(obj["tasks"])) for w in obj["workers"]]
            u = [t["u"] for t in obj["tasks"]]
            return cls.from_arrays(p, u, obj["tau"], obj.get("budget"), c)
        except (KeyError, TypeError) as exc:
            raise InstanceError(f"malformed instance JSON: {exc}") from exc


def load_instance(path) -> GameInstance:
    return GameInstance.from_json(json.loads(Path(path).read_text()))


def save_instance(instance: GameInstance, path) -> None:
    Path(path).write_text(json.dumps(instance.to_json(), indent=2) + "\n")


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Assignment:
    """Binary worker x task incidence matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.matrix)
        if a.ndim != 2:
            raise InstanceError("assignment must be a 2-d incidence matrix")
        if not np.isin(a, (0, 1)).all():
            raise InstanceError("assignment entries must be 0 or 1")
        object.__setattr__(self, "matrix", _frozen(a.astype(np.int8)))

    def __eq__(self, other):
        return isinstance(other, Assignment) and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash((self.matrix.shape, self.matrix.tobytes()))

    @classmethod
    def empty(cls, n: int, m: int) -> Assignment:
        return cls(np.zeros((n, m), dtype=np.int8))

    @classmethod
    def from_counts(cls, counts, m: int) -> Assignment:
        """Single-worker assignment giving worker ``w`` the next ``counts[w]`` tasks."""
        counts = [int(k) for k in counts]
        if sum(counts) > m or min(counts, default=0) < 0:
            raise InstanceError(f"counts {counts} do not fit {m} tasks")
        s = np.zeros((len(counts), m), dtype=np.int8)
        t = 0
        for w, k in enumerate(counts):
            s[w, t : t + k] = 1
            t += k
        return cls(s)

    @classmethod
    def from_task_map(cls, task_to_worker, n: int) -> Assignment:
        """``task_to_worker[t]`` is a worker index, or -1 for an unassigned task."""
        s = np.zeros((n, len(task_to_worker)), dtype=np.int8)
        for t, w in enumerate(task_to_worker):
            if w >= 0:
                s[w, t] = 1
        return cls(s)

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    @property
    def counts(self) -> np.ndarray:
        return self.matrix.sum(axis=1)

    @property
    def size(self) -> int:
        return int(self.matrix.sum())

    @property
    def is_single_worker(self) -> bool:
        return bool((self.matrix.sum(axis=0) <= 1).all())

    def check(self, instance: GameInstance) -> None:
        if self.shape != (instance.n, instance.m):
            raise InstanceError(f"assignment shape {self.shape} != ({instance.n}, {instance.m})")
        over = np.flatnonzero(self.counts > instance.capacities)
        if over.size:
            raise InstanceError(f"capacity exceeded for workers {over.tolist()}")
        if self.size > instance.budget:
            raise InstanceError(f"{self.size} assignments exceed budget {instance.budget}")

    def moved(self, worker: int, src: int, dst: int) -> Assignment:
        s = self.matrix.copy()
        s[worker, src] = 0
        s[worker, dst] = 1
        return Assignment(s)


@dataclass(frozen=True, eq=False)
class Attack:
    """Boolean mask of disabled workers."""

    attacked: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "attacked", _frozen(np.asarray(self.attacked, dtype=bool)))

    def __eq__(self, other):
        return isinstance(other, Attack) and np.array_equal(self.attacked, other.attacked)

    def __hash__(self):
        return hash(self.attacked.tobytes())

    @classmethod
    def from_indices(cls, indices, n: int) -> Attack:
        mask = np.zeros(n, dtype=bool)
        mask[list(indices)] = True
        return cls(mask)

    @classmethod
    def none(cls, n: int) -> Attack:
        return cls(np.zeros(n, dtype=bool))

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(int(w) for w in np.flatnonzero(self.attacked))

    def check(self, instance: GameInstance, *, exact_size: bool = True) -> None:
        if self.attacked.shape != (instance.n,):
            raise InstanceError(f"attack length {self.attacked.size} != n={instance.n}")
        if exact_size and self.attacked.sum() != min(instance.tau, instance.n):
            raise InstanceError(
                f"attack disables {int(self.attacked.sum())} workers, expected {min(instance.tau, instance.n)}"
            )


@dataclass(frozen=True, eq=False)
class DecisionRule:
    """Weighted majority: a task succeeds iff the weighted label sum of the
    surviving assigned workers is strictly positive (ties fail)."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or (w <= 0).any():
            raise InstanceError("decision weights must be a vector of positive reals")
        object.__setattr__(self, "weights", _frozen(w))

    @classmethod
    def proficiency_weighted(cls, instance: GameInstance) -> DecisionRule:
        return cls(instance.proficiencies)

    @classmethod
    def uniform(cls, n: int) -> DecisionRule:
        return cls(np.ones(n))


def _check_pair(assignment: Assignment, attack: Attack, instance: GameInstance) -> None:
    if assignment.shape != (instance.n, instance.m):
        raise InstanceError(f"assignment shape {assignment.shape} != ({instance.n}, {instance.m})")
    attack.check(instance, exact_size=False)


def worker_contributions(assignment: Assignment, instance: GameInstance) -> np.ndarray:
    """``p_w * sum_t s_wt u_t`` for every worker."""
    if assignment.shape != (instance.n, instance.m):
        raise InstanceError(f"assignment shape {assignment.shape} != ({instance.n}, {instance.m})")
    return instance.proficiencies * (assignment.matrix @ instance.utilities)


def evaluate_additive(assignment: Assignment, attack: Attack, instance: GameInstance) -> float:
    """Defender utility when every task has at most one worker."""
    _check_pair(assignment, attack, instance)
    if not assignment.is_single_worker:
        raise InstanceError("additive evaluation needs at most one worker per task; use evaluate_majority_exact")
    x = worker_contributions(assignment, instance)
    return float(x[~attack.attacked].sum())


@lru_cache(maxsize=None)
def _label_outcomes(k: int) -> np.ndarray:
    """All 2**k vectors over {+1, -1}, one per row."""
    return np.array(list(itertools.product((1, -1), repeat=k)), dtype=np.int8).reshape(-1, k)


def success_probability(p, theta) -> float:
    """Probability that the weighted vote of independent voters is positive."""
    p = np.asarray(p, dtype=float)
    k = p.size
    if k == 0:
        return 0.0
    if k > MAX_EXACT_VOTERS:
        raise InstanceError(f"{k} voters exceed the exact enumeration bound of {MAX_EXACT_VOTERS}")
    if k == 1:
        return float(p[0])
    labels = _label_outcomes(k)
    probs = np.where(labels > 0, p, 1.0 - p).prod(axis=1)
    return float(probs[labels @ np.asarray(theta, dtype=float) > 0].sum())


def evaluate_majority_exact(
    assignment: Assignment, attack: Attack, instance: GameInstance, rule: DecisionRule
) -> float:
    """Exact expected utility under weighted majority, attacked workers removed."""
    _check_pair(assignment, attack, instance)
    if rule.weights.shape != (instance.n,):
        raise InstanceError("decision rule has the wrong number of weights")
    alive = assignment.matrix.astype(bool) & ~attack.attacked[:, None]
    p, theta, u = instance.proficiencies, rule.weights, instance.utilities
    total = 0.0
    for t in range(instance.m):
        voters = np.flatnonzero(alive[:, t])
        if voters.size:
            total += u[t] * success_probability(p[voters], theta[voters])
    return total
