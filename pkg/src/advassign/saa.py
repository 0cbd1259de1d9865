"""Monte-Carlo outcome cubes and the sample-average utility estimator."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Assignment, Attack, DecisionRule, GameInstance, InstanceError
from .seeding import rng_for

DEFAULT_K = 2500


@dataclass(frozen=True, eq=False)
class OutcomeSamples:
    """``cube[k, w, t]`` is +1 if worker ``w`` would get task ``t`` right in sample ``k``, else -1."""

    cube: np.ndarray
    seed: int

    def __post_init__(self):
        cube = np.asarray(self.cube)
        if cube.ndim != 3 or not np.isin(cube, (-1, 1)).all():
            raise InstanceError("outcome cube must be K x n x m over {+1, -1}")
        cube = cube.astype(np.int8)
        cube.flags.writeable = False
        object.__setattr__(self, "cube", cube)

    @property
    def K(self) -> int:
        return self.cube.shape[0]


def sample_outcomes(instance: GameInstance, K: int = DEFAULT_K, seed: int = 0, trial: int = 0) -> OutcomeSamples:
    """Draw ``K`` independent outcome matrices; entry (w, t) is +1 with probability ``p_w``."""
    if K < 1:
        raise InstanceError("K must be a positive integer")
    rng = rng_for(seed, "outcomes", trial)
    draws = rng.random((K, instance.n, instance.m))
    cube = np.where(draws < instance.proficiencies[None, :, None], 1, -1).astype(np.int8)
    return OutcomeSamples(cube, int(seed))


def evaluate_saa(
    assignment: Assignment,
    attack: Attack,
    samples: OutcomeSamples,
    rule: DecisionRule,
    instance: GameInstance,
) -> float:
    """Sample-average weighted-majority utility, attacked workers removed."""
    K, n, m = samples.cube.shape
    if assignment.shape != (n, m) or (n, m) != (instance.n, instance.m):
        raise InstanceError("samples, assignment and instance dimensions disagree")
    if attack.attacked.shape != (n,) or rule.weights.shape != (n,):
        raise InstanceError("attack or decision rule has the wrong length")
    weights = assignment.matrix * (rule.weights * ~attack.attacked)[:, None]
    votes = np.einsum("wt,kwt->kt", weights, samples.cube)
    hits = np.count_nonzero(votes > 0, axis=0)
    return float(instance.utilities @ hits) / K
