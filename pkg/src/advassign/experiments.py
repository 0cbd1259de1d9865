"""Experiment harness: baseline comparison, robustness loss, multi-worker gain.

Every runner yields :class:`ExperimentRecord` rows ordered by trial, then by
attack size, then by method.  All randomness comes from streams derived from
``(seed, trial, purpose)``, so a run is reproducible bit for bit.  Wall time
is only recorded when ``timing`` is switched on, since it is the one field
that differs between otherwise identical runs.
"""

from __future__ import annotations

import csv
import io
import time
from collections import defaultdict
from dataclasses import dataclass, fields
from typing import Iterable, Iterator

import numpy as np

from .attacker import best_response_additive, enumerate_best_response
from .baselines import monte_carlo, nonadversarial_optimal, split_k
from .heterogeneous import greedy_multiworker_improve, solve_single_worker_exact
from .homogeneous import solve_homogeneous
from .instances import PROFICIENCY_DISTS, UTILITY_DISTS, incremental_worker_stream, random_instance
from .model import (
    Assignment,
    Attack,
    DecisionRule,
    GameInstance,
    InstanceError,
    evaluate_additive,
    evaluate_majority_exact,
    worker_contributions,
)
from .saa import DEFAULT_K, sample_outcomes

CSV_HEADER = ("trial", "seed", "n", "m", "tau", "dist", "method", "utility", "utility_noattack", "ms")
METHODS = frozenset({"opt-hom", "opt-het-milp", "opt-het-greedy", "split-k", "mc", "top-mc", "nonadv"})
BASELINE_METHODS = ("split-k", "mc", "top-mc", "nonadv")
GAP_BASELINES = ("split-k", "mc", "top-mc")


@dataclass(frozen=True)
class ExperimentRecord:
    trial: int
    seed: int
    n: int
    m: int
    tau: int
    dist: str
    method: str
    utility: float
    utility_noattack: float
    ms: float

    def __post_init__(self):
        for f in fields(self):
            cast = {"int": int, "float": float, "str": str}[f.type]
            object.__setattr__(self, f.name, cast(getattr(self, f.name)))
        if self.method not in METHODS:
            raise InstanceError(f"unknown method {self.method!r}")
        if self.utility < 0 or self.utility_noattack < 0:
            raise InstanceError("utilities must be non-negative")


def emit_csv(records: Iterable[ExperimentRecord], stream=None) -> str | None:
    """Write records with the fixed header; returns the text when ``stream`` is None."""
    out = io.StringIO() if stream is None else stream
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in records:
        writer.writerow(
            [r.trial, r.seed, r.n, r.m, r.tau, r.dist, r.method, repr(r.utility), repr(r.utility_noattack), repr(r.ms)]
        )
    return out.getvalue() if stream is None else None


def parse_csv(text: str) -> list[ExperimentRecord]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise InstanceError("missing or unexpected CSV header")
    return [ExperimentRecord(*row) for row in rows[1:]]


def _dist(prof_dist: str, util_dist: str) -> str:
    return f"{prof_dist}/{util_dist}"


def _score_additive(assignment: Assignment, instance: GameInstance) -> tuple[float, float]:
    """Post-attack and no-attack utility of a single-worker assignment."""
    attack = best_response_additive(assignment, instance)
    return evaluate_additive(assignment, attack, instance), float(worker_contributions(assignment, instance).sum())


def _score_majority(assignment: Assignment, instance: GameInstance, rule: DecisionRule) -> tuple[float, float]:
    """Exact weighted-majority utility under an exhaustive attacker, and without attack."""
    _, val = enumerate_best_response(
        instance.n, instance.tau, lambda atk: evaluate_majority_exact(assignment, atk, instance, rule)
    )
    return val, evaluate_majority_exact(assignment, Attack.none(instance.n), instance, rule)


class _Clock:
    def __init__(self, enabled: bool):
        self.enabled = enabled
        self.start = 0.0

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.ms = (time.perf_counter() - self.start) * 1e3 if self.enabled else 0.0


def _check_dists(prof_dist: str, util_dist: str) -> None:
    if prof_dist not in PROFICIENCY_DISTS:
        raise InstanceError(f"unknown proficiency distribution {prof_dist!r}")
    if util_dist not in UTILITY_DISTS:
        raise InstanceError(f"unknown utility distribution {util_dist!r}")


@dataclass(frozen=True)
class BaselineConfig:
    """Defaults reproduce the homogeneous comparison; see :meth:`heterogeneous_defaults`."""

    heterogeneous: bool = False
    n: int = 50
    m: int = 50
    taus: tuple[int, ...] = (1, 2, 3, 4, 5)
    prof_dist: str = "uniform"
    util_dist: str = "constant"
    trials: int = 2000
    seed: int = 0
    timing: bool = False

    @classmethod
    def heterogeneous_defaults(cls, **overrides) -> BaselineConfig:
        base = dict(heterogeneous=True, n=10, m=15, util_dist="uniform-01", trials=1000)
        base.update(overrides)
        return cls(**base)

    def validate(self) -> None:
        _check_dists(self.prof_dist, self.util_dist)
        if self.n < 1 or self.m < 1 or self.trials < 1:
            raise InstanceError("n, m and trials must be positive")
        if not self.taus or min(self.taus) < 1 or max(self.taus) >= self.n:
            raise InstanceError(f"every tau must lie in [1, n-1={self.n - 1}]")
        if self.heterogeneous == (self.util_dist == "constant"):
            raise InstanceError("heterogeneous runs need non-constant utilities and vice versa")


def _best_split_k(instance: GameInstance) -> tuple[Assignment, float, float]:
    best = None
    for k in range(1, instance.n + 1):
        try:
            a = split_k(instance, k)
        except InstanceError:
            continue
        val, free = _score_additive(a, instance)
        if best is None or val > best[1]:
            best = (a, val, free)
    if best is None:
        raise InstanceError("no split-k assignment fits the capacities")
    return best


def run_baseline_comparison(config: BaselineConfig) -> Iterator[ExperimentRecord]:
    """Optimal robust assignment against every baseline, all attacked by a best response.

    Split-k reports the best ``k`` for each instance.
    """
    config.validate()
    opt_name = "opt-het-milp" if config.heterogeneous else "opt-hom"
    dist = _dist(config.prof_dist, config.util_dist)
    for trial in range(config.trials):
        for tau in config.taus:
            inst = random_instance(config.n, config.m, tau, config.prof_dist, config.util_dist, config.seed, trial)

            def record(method, utility, free, ms):
                return ExperimentRecord(trial, config.seed, inst.n, inst.m, tau, dist, method, utility, free, ms)

            with _Clock(config.timing) as clk:
                if config.heterogeneous:
                    a, _ = solve_single_worker_exact(inst)
                else:
                    a, _ = solve_homogeneous(inst)
                val, free = _score_additive(a, inst)
            yield record(opt_name, val, free, clk.ms)

            with _Clock(config.timing) as clk:
                _, val, free = _best_split_k(inst)
            yield record("split-k", val, free, clk.ms)

            for name, top in (("mc", False), ("top-mc", True)):
                with _Clock(config.timing) as clk:
                    val, free = _score_additive(monte_carlo(inst, config.seed, top, trial), inst)
                yield record(name, val, free, clk.ms)

            with _Clock(config.timing) as clk:
                val, free = _score_additive(nonadversarial_optimal(inst)[0], inst)
            yield record("nonadv", val, free, clk.ms)


@dataclass(frozen=True)
class LossConfig:
    n_values: tuple[int, ...] = (5, 10, 15, 20, 25, 30, 35, 40, 45, 50)
    m: int = 100
    tau: int = 1
    prof_dist: str = "uniform"
    trials: int = 2000
    seed: int = 0
    timing: bool = False

    def validate(self) -> None:
        _check_dists(self.prof_dist, "constant")
        if self.m < 1 or self.trials < 1 or not self.n_values:
            raise InstanceError("m, trials and n_values must be positive / non-empty")
        if min(self.n_values) <= self.tau:
            raise InstanceError("every n must exceed tau")


def run_robustness_loss(config: LossConfig) -> Iterator[ExperimentRecord]:
    """No-attack utility of the robust assignment next to the non-adversarial optimum.

    Within a trial the worker populations are nested: the population for a
    larger ``n`` extends the one for a smaller ``n``.
    """
    config.validate()
    dist = _dist(config.prof_dist, "constant")
    u = np.ones(config.m)
    for trial in range(config.trials):
        stream = incremental_worker_stream(config.seed, config.prof_dist, trial)
        pool = [next(stream) for _ in range(max(config.n_values))]
        for n in config.n_values:
            inst = GameInstance.from_arrays(pool[:n], u, config.tau)
            with _Clock(config.timing) as clk:
                a, _ = solve_homogeneous(inst)
                val, free = _score_additive(a, inst)
            yield ExperimentRecord(trial, config.seed, n, config.m, config.tau, dist, "opt-hom", val, free, clk.ms)
            with _Clock(config.timing) as clk:
                val, free = _score_additive(nonadversarial_optimal(inst)[0], inst)
            yield ExperimentRecord(trial, config.seed, n, config.m, config.tau, dist, "nonadv", val, free, clk.ms)


def mean_loss(records: Iterable[ExperimentRecord]) -> dict[int, float]:
    """Mean of ``1 - robust / optimal`` no-attack utility, keyed by ``n``."""
    pairs: dict[tuple[int, int], dict[str, float]] = defaultdict(dict)
    for r in records:
        pairs[(r.n, r.trial)][r.method] = r.utility_noattack
    losses: dict[int, list[float]] = defaultdict(list)
    for (n, _), d in pairs.items():
        losses[n].append(1.0 - d["opt-hom"] / d["nonadv"])
    return {n: float(np.mean(v)) for n, v in sorted(losses.items())}


@dataclass(frozen=True)
class MultiworkerConfig:
    workers: tuple[int, ...] = (2, 3, 4, 5, 6)
    tasks: tuple[int, ...] = (3, 4, 5, 6)
    taus: tuple[int, ...] = (1, 2)
    util_dist: str = "uniform-01"
    prof_dist: str = "uniform"
    K: int = DEFAULT_K
    trials: int = 1000
    seed: int = 0
    timing: bool = False

    def validate(self) -> None:
        _check_dists(self.prof_dist, self.util_dist)
        if self.util_dist == "constant":
            raise InstanceError("multi-worker runs need heterogeneous utilities")
        if self.K < 1 or self.trials < 1:
            raise InstanceError("K and trials must be positive")
        if not self.cells():
            raise InstanceError("no (workers, tasks, tau) cell with tau < workers")

    def cells(self) -> list[tuple[int, int, int]]:
        """Grid cells in run order; cells where every worker can be attacked are skipped."""
        return [(n, m, tau) for n in self.workers for m in self.tasks for tau in self.taus if tau < n]


def run_multiworker_improvement(config: MultiworkerConfig) -> Iterator[ExperimentRecord]:
    """Single-worker optimum against its multi-worker greedy refinement.

    The refinement is driven by a fixed sample set of ``K`` outcome matrices;
    both assignments are then scored exactly with proficiency-weighted
    majority under an exhaustive attacker.
    """
    config.validate()
    dist = _dist(config.prof_dist, config.util_dist)
    for trial in range(config.trials):
        for n, m, tau in config.cells():
            inst = random_instance(n, m, tau, config.prof_dist, config.util_dist, config.seed, trial)
            rule = DecisionRule.proficiency_weighted(inst)

            def record(method, utility, free, ms):
                return ExperimentRecord(trial, config.seed, n, m, tau, dist, method, utility, free, ms)

            with _Clock(config.timing) as clk:
                start, _ = solve_single_worker_exact(inst)
                val, free = _score_majority(start, inst, rule)
            yield record("opt-het-milp", val, free, clk.ms)
            with _Clock(config.timing) as clk:
                samples = sample_outcomes(inst, config.K, config.seed, trial)
                improved = greedy_multiworker_improve(start, inst, rule, samples)
                val, free = _score_majority(improved, inst, rule)
            yield record("opt-het-greedy", val, free, clk.ms)


def relative_improvement(single: float, multi: float) -> float:
    if single > 0:
        return (multi - single) / single
    return 0.0 if multi <= 0 else float("inf")


def mean_improvement(records: Iterable[ExperimentRecord]) -> dict[tuple[int, int, int], float]:
    """Mean per-trial relative improvement, keyed by ``(workers, tasks, tau)``."""
    pairs: dict[tuple[int, int, int, int], dict[str, float]] = defaultdict(dict)
    for r in records:
        pairs[(r.n, r.m, r.tau, r.trial)][r.method] = r.utility
    gains: dict[tuple[int, int, int], list[float]] = defaultdict(list)
    for (n, m, tau, _), d in pairs.items():
        gains[(n, m, tau)].append(relative_improvement(d["opt-het-milp"], d["opt-het-greedy"]))
    return {k: float(np.mean(v)) for k, v in sorted(gains.items())}


def mean_utilities(records: Iterable[ExperimentRecord]) -> dict[tuple[int, str], float]:
    """Mean post-attack utility keyed by ``(tau, method)``."""
    acc: dict[tuple[int, str], list[float]] = defaultdict(list)
    for r in records:
        acc[(r.tau, r.method)].append(r.utility)
    return {k: float(np.mean(v)) for k, v in sorted(acc.items())}


def baseline_gaps(records: Iterable[ExperimentRecord]) -> dict[int, float]:
    """Mean of ``opt - baseline`` over trials and the adversarial baselines, keyed by ``tau``.

    The adversarial baselines are split-k, mc and top-mc; the attack-unaware
    assignment is left out because it is not a robust strategy.
    """
    per: dict[tuple[int, int], dict[str, float]] = defaultdict(dict)
    for r in records:
        per[(r.trial, r.tau)][r.method] = r.utility
    gaps: dict[int, list[float]] = defaultdict(list)
    for (_, tau), d in per.items():
        opt = d.get("opt-hom", d.get("opt-het-milp"))
        gaps[tau].extend(opt - d[b] for b in GAP_BASELINES)
    return {tau: float(np.mean(v)) for tau, v in sorted(gaps.items())}
