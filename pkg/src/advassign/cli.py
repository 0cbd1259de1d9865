"""Command-line interface.

Instances and assignments are JSON.  Worker and task indices on the command
line and in every output refer to the order of the input file; the solvers
work on a copy sorted by proficiency and utility.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import experiments as ex
from .attacker import best_response_additive, enumerate_best_response
from .baselines import monte_carlo, split_k
from .heterogeneous import greedy_multiworker_improve, solve_single_worker_exact
from .homogeneous import solve_homogeneous
from .instances import PROFICIENCY_DISTS, UTILITY_DISTS, random_instance
from .model import (
    Assignment,
    Attack,
    DecisionRule,
    GameInstance,
    InstanceError,
    evaluate_additive,
    evaluate_majority_exact,
    load_instance,
)
from .saa import DEFAULT_K, evaluate_saa, sample_outcomes


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(obj, out: str | None) -> None:
    _write(json.dumps(obj) + "\n", out)


def _to_input_order(a: Assignment, inst: GameInstance) -> list[list[int]]:
    s = np.zeros(a.shape, dtype=int)
    s[np.ix_(inst.worker_order, inst.task_order)] = a.matrix
    return s.tolist()


def _from_input_order(rows, inst: GameInstance) -> Assignment:
    s = np.asarray(rows, dtype=np.int8)
    if s.shape != (inst.n, inst.m):
        raise InstanceError(f"assignment has shape {s.shape}, instance is {inst.n} x {inst.m}")
    return Assignment(s[np.ix_(inst.worker_order, inst.task_order)])


def _attack_from_input(indices, inst: GameInstance) -> Attack:
    pos = {orig: i for i, orig in enumerate(inst.worker_order)}
    try:
        return Attack.from_indices([pos[int(w)] for w in indices], inst.n)
    except KeyError as exc:
        raise InstanceError(f"no worker {exc.args[0]}") from exc


def _attack_to_input(attack: Attack, inst: GameInstance) -> list[int]:
    return sorted(inst.worker_order[i] for i in attack.indices)


def _load_assignment(path: str, inst: GameInstance) -> Assignment:
    obj = json.loads(Path(path).read_text())
    return _from_input_order(obj["assignment"] if isinstance(obj, dict) else obj, inst)


def _best_response(a: Assignment, inst: GameInstance, rule: DecisionRule | None) -> tuple[Attack, float]:
    """Additive best response for single-worker assignments, exhaustive otherwise."""
    if a.is_single_worker and rule is None:
        atk = best_response_additive(a, inst)
        return atk, evaluate_additive(a, atk, inst)
    rule = rule or DecisionRule.proficiency_weighted(inst)
    return enumerate_best_response(inst.n, inst.tau, lambda atk: evaluate_majority_exact(a, atk, inst, rule))


def _report(a: Assignment, inst: GameInstance, rule: DecisionRule | None = None) -> dict:
    atk, val = _best_response(a, inst, rule)
    return {"assignment": _to_input_order(a, inst), "attack": _attack_to_input(atk, inst), "utility": val}


def cmd_gen(args) -> None:
    inst = random_instance(args.n, args.m, args.tau, args.dist, args.util_dist, args.seed, budget=args.budget)
    _dump(inst.to_json(), args.out)


def cmd_solve(args) -> None:
    inst = load_instance(args.instance)
    if args.mode == "homogeneous":
        if args.multiworker:
            raise InstanceError("--multiworker needs --mode heterogeneous")
        a, _ = solve_homogeneous(inst)
        _dump(_report(a, inst), args.out)
        return
    a, _ = solve_single_worker_exact(inst)
    if not args.multiworker:
        _dump(_report(a, inst), args.out)
        return
    rule = DecisionRule.proficiency_weighted(inst)
    improved = greedy_multiworker_improve(a, inst, rule, sample_outcomes(inst, args.saa_k, args.seed))
    _dump(_report(improved, inst, rule), args.out)


def cmd_attack(args) -> None:
    inst = load_instance(args.instance)
    a = _load_assignment(args.assignment, inst)
    rule = DecisionRule.proficiency_weighted(inst) if args.majority or not a.is_single_worker else None
    atk, val = _best_response(a, inst, rule)
    _dump({"attack": _attack_to_input(atk, inst), "utility": val}, args.out)


def cmd_evaluate(args) -> None:
    inst = load_instance(args.instance)
    a = _load_assignment(args.assignment, inst)
    atk = _attack_from_input(args.attack or (), inst)
    rule = DecisionRule.proficiency_weighted(inst)
    if args.evaluator == "additive":
        val = evaluate_additive(a, atk, inst)
    elif args.evaluator == "majority":
        val = evaluate_majority_exact(a, atk, inst, rule)
    else:
        val = evaluate_saa(a, atk, sample_outcomes(inst, args.saa_k, args.seed), rule, inst)
    _dump({"utility": val}, args.out)


def cmd_baseline(args) -> None:
    inst = load_instance(args.instance)
    if args.method == "split-k":
        if args.k is None:
            a = ex._best_split_k(inst)[0]
        else:
            a = split_k(inst, args.k)
    else:
        a = monte_carlo(inst, args.seed, args.method == "top-mc")
    _dump(_report(a, inst), args.out)


def _summary(kind: str, records: list[ex.ExperimentRecord]) -> str:
    lines = []
    if kind == "baselines":
        for (tau, method), v in ex.mean_utilities(records).items():
            lines.append(f"tau={tau} {method:<14} mean utility {v:.6g}")
        for tau, g in ex.baseline_gaps(records).items():
            lines.append(f"tau={tau} mean gap to baselines {g:.6g}")
    elif kind == "loss":
        for n, loss in ex.mean_loss(records).items():
            lines.append(f"n={n:<3} mean robustness loss {100 * loss:.2f}%")
    else:
        for (n, m, tau), g in ex.mean_improvement(records).items():
            lines.append(f"workers={n} tasks={m} tau={tau} mean improvement {100 * g:.2f}%")
    return "\n".join(lines) + "\n"


def cmd_experiment(args) -> None:
    common = dict(seed=args.seed, timing=args.timing)
    if args.kind == "baselines":
        if args.heterogeneous:
            cfg = ex.BaselineConfig.heterogeneous_defaults(
                **common,
                n=args.n or 10,
                m=args.m or 15,
                taus=args.tau or (1, 2, 3, 4, 5),
                prof_dist=args.dist,
                util_dist=args.util_dist or "uniform-01",
                trials=args.trials or 1000,
            )
        else:
            cfg = ex.BaselineConfig(
                **common,
                trials=args.trials or 2000,
                n=args.n or 50,
                m=args.m or 50,
                taus=args.tau or (1, 2, 3, 4, 5),
                prof_dist=args.dist,
            )
        records = list(ex.run_baseline_comparison(cfg))
    elif args.kind == "loss":
        taus = args.tau or (1,)
        if len(taus) != 1:
            raise InstanceError("the loss experiment takes a single --tau")
        cfg = ex.LossConfig(
            **common,
            trials=args.trials or 2000,
            m=args.m or 100,
            tau=taus[0],
            prof_dist=args.dist,
            **({"n_values": args.n_values} if args.n_values else {}),
        )
        records = list(ex.run_robustness_loss(cfg))
    else:
        cfg = ex.MultiworkerConfig(
            **common,
            trials=args.trials or 1000,
            workers=args.workers or (2, 3, 4, 5, 6),
            tasks=args.tasks or (3, 4, 5, 6),
            taus=args.tau or (1, 2),
            util_dist=args.util_dist or "uniform-01",
            prof_dist=args.dist,
            K=args.saa_k,
        )
        records = list(ex.run_multiworker_improvement(cfg))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            ex.emit_csv(records, fh)
    else:
        ex.emit_csv(records, sys.stdout)
    if not args.quiet:
        sys.stderr.write(_summary(args.kind, records))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="advassign", description="Robust task assignment against worker-disabling attacks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_out(p):
        p.add_argument("--out", help="output path (default: stdout)")

    def add_seed(p):
        p.add_argument("--seed", type=int, default=0)

    g = sub.add_parser("gen", help="random instance as JSON")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--tau", type=int, default=1)
    g.add_argument("--budget", type=int)
    g.add_argument("--dist", choices=PROFICIENCY_DISTS, default="uniform")
    g.add_argument("--util-dist", choices=UTILITY_DISTS, default="constant")
    add_seed(g)
    add_out(g)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="optimal robust assignment")
    s.add_argument("instance")
    s.add_argument("--mode", choices=("homogeneous", "heterogeneous"), required=True)
    s.add_argument("--multiworker", action="store_true", help="refine with multiple workers per task")
    s.add_argument("--saa-k", type=int, default=DEFAULT_K)
    add_seed(s)
    add_out(s)
    s.set_defaults(func=cmd_solve)

    a = sub.add_parser("attack", help="attacker best response to an assignment")
    a.add_argument("instance")
    a.add_argument("assignment")
    a.add_argument("--majority", action="store_true", help="score with weighted majority even for one worker per task")
    add_out(a)
    a.set_defaults(func=cmd_attack)

    e = sub.add_parser("evaluate", help="defender utility of an assignment under a given attack")
    e.add_argument("instance")
    e.add_argument("assignment")
    e.add_argument("--attack", type=_ints, help="comma-separated attacked workers")
    e.add_argument("--evaluator", choices=("additive", "majority", "saa"), default="additive")
    e.add_argument("--saa-k", type=int, default=DEFAULT_K)
    add_seed(e)
    add_out(e)
    e.set_defaults(func=cmd_evaluate)

    b = sub.add_parser("baseline", help="baseline assignment and its post-attack utility")
    b.add_argument("instance")
    b.add_argument("--method", choices=("split-k", "mc", "top-mc"), required=True)
    b.add_argument("--k", type=int, help="split-k width (default: best k)")
    add_seed(b)
    add_out(b)
    b.set_defaults(func=cmd_baseline)

    x = sub.add_parser("experiment", help="run an experiment and write CSV records")
    x.add_argument("kind", choices=("baselines", "loss", "multiworker"))
    x.add_argument("--trials", type=int)
    x.add_argument("--tau", type=_ints, help="comma-separated attack sizes")
    x.add_argument("--n", type=int, help="workers (baselines)")
    x.add_argument("--m", type=int, help="tasks (baselines, loss)")
    x.add_argument("--n-values", type=_ints, help="worker counts (loss)")
    x.add_argument("--workers", type=_ints, help="worker counts (multiworker)")
    x.add_argument("--tasks", type=_ints, help="task counts (multiworker)")
    x.add_argument("--heterogeneous", action="store_true", help="baselines on heterogeneous tasks")
    x.add_argument("--dist", choices=PROFICIENCY_DISTS, default="uniform")
    x.add_argument("--util-dist", choices=UTILITY_DISTS)
    x.add_argument("--saa-k", type=int, default=DEFAULT_K)
    x.add_argument("--timing", action="store_true", help="record wall time (makes output run-dependent)")
    x.add_argument("--quiet", action="store_true", help="no summary on stderr")
    add_seed(x)
    add_out(x)
    x.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (InstanceError, RuntimeError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
