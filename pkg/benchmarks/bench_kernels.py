#!/usr/bin/env python3
"""Compare the compiled and pure-Python evaluation kernels.

Two workloads:
  * cascade  — repeated manual writes driving derivations (the engine's
               hot path end to end);
  * actions  — availability queries (pure condition evaluation).

Usage: python benchmarks/bench_kernels.py [--agents N] [--rounds K]
"""

import argparse
import time

from ontoflow.bench import build_bench_engine, agent_name
from ontoflow.kernel import available_backends


def cascade_workload(engine, rounds: int) -> int:
    target = agent_name(0)
    evaluations = 0
    for k in range(rounds):
        res = engine.set_property(target, "energy", 20 if k % 2 == 0 else 50, actor="bench")
        evaluations += res.evaluations
        res = engine.set_property(target, "warmth", 20 if k % 2 == 0 else 50, actor="bench")
        evaluations += res.evaluations
    return evaluations


def actions_workload(engine, rounds: int) -> int:
    target = agent_name(0)
    n = 0
    for _ in range(rounds):
        n += len(engine.available_actions(target))
    return n


def run(backend: str, agents: int, rounds: int) -> dict:
    engine = build_bench_engine(agents, kernel=backend)
    t0 = time.perf_counter()
    evaluations = cascade_workload(engine, rounds)
    t_cascade = time.perf_counter() - t0
    t0 = time.perf_counter()
    actions_workload(engine, rounds)
    t_actions = time.perf_counter() - t0
    return {
        "backend": backend,
        "cascade_s": t_cascade,
        "actions_s": t_actions,
        "evaluations": evaluations,
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--agents", type=int, default=100)
    parser.add_argument("--rounds", type=int, default=2000)
    args = parser.parse_args()

    results = [run(b, args.agents, args.rounds) for b in available_backends()]
    width = max(len(r["backend"]) for r in results)
    print(f"{args.agents} agents, {args.rounds} rounds per workload\n")
    print(f"{'kernel':<{width}}  {'cascade':>10}  {'actions':>10}  {'evaluations':>12}")
    for r in results:
        print(
            f"{r['backend']:<{width}}  {r['cascade_s'] * 1000:>8.1f}ms  "
            f"{r['actions_s'] * 1000:>8.1f}ms  {r['evaluations']:>12}"
        )
    if len(results) == 2:
        py = next(r for r in results if r["backend"] == "py")
        c = next(r for r in results if r["backend"] == "c")
        print(
            f"\nspeedup (py/c): cascade {py['cascade_s'] / c['cascade_s']:.2f}x, "
            f"actions {py['actions_s'] / c['actions_s']:.2f}x"
        )
        assert py["evaluations"] == c["evaluations"], "backends disagree on work done"


if __name__ == "__main__":
    main()
