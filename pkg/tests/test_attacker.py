from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from advassign.attacker import (
    attacker_dual,
    best_response_additive,
    best_response_enumerative,
    dual_value,
    enumerate_best_response,
    top_k_indices,
)
from advassign.model import (
    Assignment,
    Attack,
    DecisionRule,
    InstanceError,
    evaluate_additive,
    evaluate_majority_exact,
    worker_contributions,
)

from conftest import make_instance


def test_top_k_ties_prefer_low_index():
    assert top_k_indices([1.0, 1.0, 1.0], 2).tolist() == [0, 1]
    assert top_k_indices([0.0, 2.0, 1.0], 1).tolist() == [1]


def test_additive_examples():
    inst = make_instance([0.9, 0.8, 0.6], [1] * 5)
    assert best_response_additive(Assignment.from_counts([3, 2, 0], 5), inst).indices == (0,)
    equal = make_instance([0.5, 0.5, 0.5], [1] * 3, tau=2)
    assert best_response_additive(Assignment.from_counts([1, 1, 1], 3), equal).indices == (0, 1)
    with pytest.raises(InstanceError):
        best_response_additive(Assignment(np.ones((3, 5), dtype=int)), inst)


def test_tau_at_least_n_disables_everyone():
    inst = make_instance([0.9, 0.8], [1.0, 0.5], tau=3)
    a = Assignment.from_task_map([0, 1], 2)
    atk = best_response_enumerative(a, inst, lambda s, atk: evaluate_additive(s, atk, inst))
    assert atk.indices == (0, 1)
    assert evaluate_additive(a, atk, inst) == 0.0
    assert attacker_dual(worker_contributions(a, inst), 3)[0] == 0.0


def test_enumeration_bound():
    with pytest.raises(InstanceError):
        enumerate_best_response(60, 10, lambda a: 0.0)


def test_enumerative_on_three_worker_majority():
    inst = make_instance([0.9, 0.8, 0.6], [1.0, 0.5])
    rule = DecisionRule.proficiency_weighted(inst)
    a = Assignment(np.array([[1, 0], [1, 1], [1, 0]]))
    by_hand = [evaluate_majority_exact(a, Attack.from_indices([w], 3), inst, rule) for w in range(3)]
    atk = best_response_enumerative(a, inst, lambda s, x: evaluate_majority_exact(s, x, inst, rule))
    assert atk.indices == (int(np.argmin(by_hand)),)


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(1, 4), st.integers(0, 10**6))
def test_additive_matches_enumeration_and_dual(n, m, tau, seed):
    rng = np.random.default_rng(seed)
    inst = make_instance(rng.uniform(0.5, 1, n), rng.uniform(0, 1, m), tau=tau)
    a = Assignment.from_task_map(rng.integers(-1, n, m), n)
    atk = best_response_additive(a, inst)
    atk.check(inst)
    val = evaluate_additive(a, atk, inst)
    k = min(tau, n)
    brute = min(evaluate_additive(a, Attack.from_indices(c, n), inst) for c in itertools.combinations(range(n), k))
    assert val == pytest.approx(brute, abs=1e-12)
    x = worker_contributions(a, inst)
    assert dual_value(x, tau) == pytest.approx(x.sum() - val, abs=1e-9)
    lam, beta = attacker_dual(x, tau)
    assert (lam + beta >= x - 1e-12).all() and (beta >= 0).all()
