from __future__ import annotations

import numpy as np
import pytest

from advassign.model import Assignment, Attack, DecisionRule, InstanceError, evaluate_majority_exact
from advassign.saa import OutcomeSamples, evaluate_saa, sample_outcomes

from conftest import make_instance


def test_shape_and_degenerate_worker():
    inst = make_instance([1.0, 0.6], [0.5, 0.3, 0.2])
    s = sample_outcomes(inst, 50, seed=4)
    assert s.cube.shape == (50, 2, 3) and s.K == 50
    assert (s.cube[:, 0, :] == 1).all()
    with pytest.raises(InstanceError):
        sample_outcomes(inst, 0)
    with pytest.raises(InstanceError):
        OutcomeSamples(np.zeros((2, 2, 2)), 0)


def test_success_rate_concentrates():
    inst = make_instance([0.9, 0.7, 0.55], [1.0] * 4)
    K = 2500
    cube = sample_outcomes(inst, K, seed=11).cube
    for w, p in enumerate(inst.proficiencies):
        rate = (cube[:, w, :] == 1).mean()
        assert abs(rate - p) <= 4 * np.sqrt(p * (1 - p) / (K * 4))


def test_deterministic_and_seed_sensitive():
    inst = make_instance([0.8, 0.7], [1.0, 0.5])
    a = sample_outcomes(inst, 20, seed=3).cube
    assert np.array_equal(a, sample_outcomes(inst, 20, seed=3).cube)
    assert not np.array_equal(a, sample_outcomes(inst, 20, seed=4).cube)
    assert not np.array_equal(a, sample_outcomes(inst, 20, seed=3, trial=1).cube)


def test_trivial_values():
    inst = make_instance([0.8, 0.7], [1.0, 0.5])
    rule = DecisionRule.proficiency_weighted(inst)
    ones = OutcomeSamples(np.ones((5, 2, 2), dtype=np.int8), 0)
    a = Assignment(np.array([[1, 0], [1, 1]]))
    assert evaluate_saa(a, Attack.none(2), ones, rule, inst) == pytest.approx(1.5)
    assert evaluate_saa(a, Attack.from_indices([0, 1], 2), ones, rule, inst) == 0.0
    with pytest.raises(InstanceError):
        evaluate_saa(Assignment.empty(3, 2), Attack.none(2), ones, rule, inst)


def test_close_to_exact_for_single_worker_assignment():
    inst = make_instance([0.9, 0.75, 0.6], [1.0, 0.7, 0.4])
    rule = DecisionRule.proficiency_weighted(inst)
    a = Assignment.from_task_map([2, 0, 1], 3)
    K = 2500
    est = evaluate_saa(a, Attack.none(3), sample_outcomes(inst, K, seed=2), rule, inst)
    exact = evaluate_majority_exact(a, Attack.none(3), inst, rule)
    # independent tasks: variance of the sum of per-task Bernoulli indicators
    p_t = np.array([inst.proficiencies[w] for w in [2, 0, 1]])
    var = float((inst.utilities**2 * p_t * (1 - p_t)).sum())
    assert abs(est - exact) <= 3 * np.sqrt(var / K)
    assert 0 <= est <= inst.utilities.sum()
