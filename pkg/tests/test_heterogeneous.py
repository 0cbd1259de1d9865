from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from advassign.attacker import best_response_additive
from advassign.baselines import brute_force_optimal, brute_force_single_worker_complete
from advassign.heterogeneous import (
    MilpFormulation,
    greedy_multiworker_improve,
    restrict_top_b_tasks,
    saa_best_response_value,
    solve_single_worker_exact,
)
from advassign.model import (
    Assignment,
    Attack,
    DecisionRule,
    InstanceError,
    evaluate_additive,
    evaluate_majority_exact,
)
from advassign.saa import sample_outcomes

from conftest import make_instance


def test_restrict_top_b():
    inst = make_instance([0.9], [0.1, 0.7, 0.4, 0.9], budget=2)
    small = restrict_top_b_tasks(inst)
    assert small.m == 2 and small.utilities.tolist() == [0.9, 0.7]


@settings(max_examples=120, deadline=None)
@given(st.integers(1, 4), st.integers(1, 5), st.integers(1, 2), st.integers(0, 10**6))
def test_matches_brute_force(n, m, tau, seed):
    rng = np.random.default_rng(seed)
    inst = make_instance(rng.uniform(0.5, 1, n), rng.uniform(0, 1, m), tau=tau)
    a, v = solve_single_worker_exact(inst)
    a.check(inst)
    assert a.is_single_worker and (a.matrix.sum(axis=0) == 1).all()
    assert v == pytest.approx(evaluate_additive(a, best_response_additive(a, inst), inst), abs=1e-12)
    assert v == pytest.approx(brute_force_single_worker_complete(inst)[1], abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 4), st.integers(2, 5), st.integers(0, 10**6))
def test_binding_capacities(n, m, seed):
    rng = np.random.default_rng(seed)
    caps = rng.integers(1, m + 1, n)
    if caps.sum() < m:
        caps[0] += m - caps.sum()
    inst = make_instance(rng.uniform(0.5, 1, n), rng.uniform(0, 1, m), capacities=caps)
    a, v = solve_single_worker_exact(inst)
    a.check(inst)
    assert v == pytest.approx(brute_force_single_worker_complete(inst)[1], abs=1e-9)


def test_budget_below_m_uses_top_tasks():
    inst = make_instance([0.9, 0.8, 0.7], [0.9, 0.5, 0.4, 0.1], budget=3)
    a, v = solve_single_worker_exact(inst)
    assert a.shape == (3, 4) and a.matrix[:, 3].sum() == 0
    assert v == pytest.approx(brute_force_optimal(inst)[1], abs=1e-9)


def test_infeasible_capacities_and_node_guard():
    with pytest.raises(InstanceError):
        solve_single_worker_exact(make_instance([0.9, 0.8], [0.5, 0.4, 0.3], capacities=[1, 1]))
    rng = np.random.default_rng(3)
    inst = make_instance(rng.uniform(0.5, 1, 8), rng.uniform(0, 1, 10))
    with pytest.raises(RuntimeError):
        solve_single_worker_exact(inst, max_nodes=5)


def test_everyone_attacked_gives_zero():
    a, v = solve_single_worker_exact(make_instance([0.9, 0.8], [0.5, 0.4, 0.3], tau=2))
    assert v == 0.0 and (a.matrix.sum(axis=0) == 1).all()


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.integers(1, 6), st.integers(1, 3), st.integers(0, 10**6))
def test_milp_certificate(n, m, tau, seed):
    rng = np.random.default_rng(seed)
    inst = make_instance(rng.uniform(0.5, 1, n), rng.uniform(0, 1, m), tau=tau)
    form = MilpFormulation(inst)
    a = Assignment.from_task_map(rng.integers(0, n, m), n)
    gamma, lam, beta = form.certificate(a)
    assert form.violations(a, gamma, lam, beta) == []
    value = evaluate_additive(a, best_response_additive(a, inst), inst)
    assert form.objective(a, gamma) == pytest.approx(value, abs=1e-9)
    # a smaller gamma is infeasible
    assert "attacker value" in form.violations(a, gamma - 1e-3, lam, beta)


def test_milp_violation_names():
    inst = make_instance([0.9, 0.8], [0.5, 0.4])
    form = MilpFormulation(inst)
    double = Assignment(np.ones((2, 2), dtype=int))
    gamma, lam, beta = form.certificate(Assignment.from_task_map([0, 1], 2))
    bad = form.violations(double, gamma, lam, beta)
    assert "one worker per task" in bad and "all tasks" in bad
    assert "dual sign" in form.violations(Assignment.from_task_map([0, 1], 2), gamma, lam, -np.ones(2))


def test_saa_best_response_matches_enumeration():
    inst = make_instance([0.9, 0.8, 0.7], [1.0, 0.6, 0.2], tau=1)
    rule = DecisionRule.proficiency_weighted(inst)
    samples = sample_outcomes(inst, 400, seed=1)
    s = np.array([[1, 1, 0], [1, 0, 1], [0, 1, 1]])
    subset, val = saa_best_response_value(s, 1, rule, samples, inst.utilities)
    from advassign.saa import evaluate_saa

    vals = [evaluate_saa(Assignment(s), Attack.from_indices([w], 3), samples, rule, inst) for w in range(3)]
    assert val == pytest.approx(min(vals)) and subset == (int(np.argmin(vals)),)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 4), st.integers(2, 5), st.integers(1, 2), st.integers(0, 10**6))
def test_greedy_never_degrades_on_its_samples(n, m, tau, seed):
    if tau >= n:
        tau = 1
    rng = np.random.default_rng(seed)
    inst = make_instance(rng.uniform(0.5, 1, n), rng.uniform(0, 1, m), tau=tau)
    rule = DecisionRule.proficiency_weighted(inst)
    samples = sample_outcomes(inst, 300, seed=seed)
    start, _ = solve_single_worker_exact(inst)
    out = greedy_multiworker_improve(start, inst, rule, samples)
    out.check(inst)
    assert out.size == start.size
    before = saa_best_response_value(start.matrix, tau, rule, samples, inst.utilities)[1]
    after = saa_best_response_value(out.matrix, tau, rule, samples, inst.utilities)[1]
    assert after >= before - 1e-12
    # same inputs, same output
    assert greedy_multiworker_improve(start, inst, rule, samples) == out


def test_greedy_checks_dimensions():
    inst = make_instance([0.9, 0.8], [0.5, 0.4])
    samples = sample_outcomes(make_instance([0.9, 0.8, 0.7], [0.5, 0.4]), 10)
    with pytest.raises(InstanceError):
        greedy_multiworker_improve(Assignment.empty(2, 2), inst, DecisionRule.proficiency_weighted(inst), samples)


@pytest.mark.parametrize("pi,pj,ut1,ut2", [(0.9, 0.8, 1.0, 0.5), (0.7, 0.6, 0.9, 0.1), (0.95, 0.55, 0.6, 0.59)])
def test_duplicating_on_the_top_task_can_pay(pi, pj, ut1, ut2):
    inst = make_instance([pi, pj], [ut1, ut2], tau=1)
    rule = DecisionRule.proficiency_weighted(inst)

    def worst(a):
        return min(evaluate_majority_exact(a, Attack.from_indices([w], 2), inst, rule) for w in range(2))

    dup = worst(Assignment(np.array([[1, 0], [1, 0]])))
    split = max(worst(Assignment.from_task_map([0, 1], 2)), worst(Assignment.from_task_map([1, 0], 2)))
    assert dup == pytest.approx(min(pi, pj) * ut1)
    assert dup >= min(pi * ut1, pj * ut2) - 1e-12
    assert dup >= split - 1e-12
