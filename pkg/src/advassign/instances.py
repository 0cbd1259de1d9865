"""Random instances with the experimental distributions.

Proficiencies are either ``U[0.5, 1]`` or ``0.5 + Exp(mean 0.25)``.  The
exponential draws are rejection-sampled until they land in ``[0.5, 1]``.
Task utilities are ``U[0, 1]``, ``U[0, 100]`` or constant 1.
"""

from __future__ import annotations

from typing import Iterator

import numpy as np

from .model import GameInstance, InstanceError
from .seeding import rng_for

PROFICIENCY_DISTS = ("uniform", "exponential")
UTILITY_DISTS = ("uniform-01", "uniform-0-100", "constant")
EXP_MEAN = 0.25


def _draw_proficiency(rng: np.random.Generator, dist: str) -> float:
    if dist == "uniform":
        return float(rng.uniform(0.5, 1.0))
    if dist == "exponential":
        while True:
            v = 0.5 + float(rng.exponential(EXP_MEAN))
            if v <= 1.0:
                return v
    raise InstanceError(f"unknown proficiency distribution {dist!r}")


def incremental_worker_stream(seed: int, dist: str = "uniform", trial: int = 0) -> Iterator[float]:
    """Endless proficiencies; the first k of one stream are the first k of any
    stream built with the same arguments."""
    if dist not in PROFICIENCY_DISTS:
        raise InstanceError(f"unknown proficiency distribution {dist!r}")
    rng = rng_for(seed, "workers", trial)
    while True:
        yield _draw_proficiency(rng, dist)


def sample_proficiencies(n: int, dist: str = "uniform", seed: int = 0, trial: int = 0) -> np.ndarray:
    """``n`` proficiencies from the stream, sorted descending."""
    if n < 1:
        raise InstanceError("n must be >= 1")
    stream = incremental_worker_stream(seed, dist, trial)
    return np.sort([next(stream) for _ in range(n)])[::-1]


def sample_task_utilities(m: int, dist: str = "uniform-01", seed: int = 0, trial: int = 0) -> np.ndarray:
    if m < 1:
        raise InstanceError("m must be >= 1")
    if dist == "constant":
        return np.ones(m)
    rng = rng_for(seed, "tasks", trial)
    if dist == "uniform-01":
        u = rng.uniform(0.0, 1.0, m)
    elif dist == "uniform-0-100":
        u = rng.uniform(0.0, 100.0, m)
    else:
        raise InstanceError(f"unknown utility distribution {dist!r}")
    return np.sort(u)[::-1]


def random_instance(
    n: int,
    m: int,
    tau: int,
    prof_dist: str = "uniform",
    util_dist: str = "constant",
    seed: int = 0,
    trial: int = 0,
    budget: int | None = None,
    capacities=None,
) -> GameInstance:
    """Instance with capacities ``m`` unless given and budget ``m`` unless given."""
    p = sample_proficiencies(n, prof_dist, seed, trial)
    u = sample_task_utilities(m, util_dist, seed, trial)
    return GameInstance.from_arrays(p, u, tau, budget, capacities)
