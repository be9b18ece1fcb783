"""Idle-agent cost measurements.

The point under test: with subscription-indexed dataflow, touching one
agent costs the same no matter how many idle clones share the world —
evaluation counts come from the cascade results, so they are exact, not
sampled.
"""

from __future__ import annotations

from time import perf_counter

from . import packaged_bsl
from .bsl.nodes import Document, IndividualDecl
from .bsl.parser import parse_document
from .engine import Engine


def agent_name(k: int) -> str:
    return f"agent_{k:05d}"


def build_bench_engine(agents: int, kernel: str | None = None) -> Engine:
    """One shared location plus N survivor clones at full comfort."""
    eng = Engine(kernel=kernel)
    scenario = parse_document(packaged_bsl("winter_feast.bsl"))
    tbox = Document([d for d in scenario.declarations if not isinstance(d, IndividualDecl)])
    result = eng.load_document(tbox)
    if not result.ok:  # pragma: no cover - packaged data is valid
        raise RuntimeError(result.report.render())
    lines = [
        "Location: Individual: Camp",
        ": SetModel: Model Location",
        ": hasTree: 1",
        ": hasDeer: 1",
        ": hasFire: 0",
    ]
    for k in range(agents):
        lines += [
            f"Survivor: Individual: {agent_name(k)}",
            ": SetModel: Model Survivor",
            ": location: Camp",
            ": energy: 50",
            ": warmth: 50",
            ": hasWood: 0",
            ": hasRawMeat: 0",
            ": hasCookedMeat: 0",
        ]
    result = eng.load_text("\n".join(lines))
    if not result.ok:  # pragma: no cover
        raise RuntimeError(result.report.render())
    return eng


def bench_idle(agents: int, touches: int, kernel: str | None = None) -> dict:
    """Touch one agent `touches` times while the rest stand idle."""
    eng = build_bench_engine(agents, kernel)
    evaluations = 0
    derived = 0
    start = perf_counter()
    if agents > 0:
        target = agent_name(0)
        for t in range(touches):
            res = eng.set_property(target, "energy", 20 if t % 2 == 0 else 50, actor="bench")
            evaluations += res.evaluations
            derived += len(res.derived)
    wall = perf_counter() - start
    return {
        "agents": agents,
        "touches": touches if agents > 0 else 0,
        "evaluations": evaluations,
        "derived_events": derived,
        "wall_time_s": round(wall, 6),
        "kernel": eng.kernel_backend,
    }


def bench_touch_all(agents: int, kernel: str | None = None) -> dict:
    """Touch every agent once; cost should scale linearly with N."""
    eng = build_bench_engine(agents, kernel)
    evaluations = 0
    derived = 0
    start = perf_counter()
    for k in range(agents):
        res = eng.set_property(agent_name(k), "energy", 20, actor="bench")
        evaluations += res.evaluations
        derived += len(res.derived)
    wall = perf_counter() - start
    return {
        "agents": agents,
        "touches": agents,
        "evaluations": evaluations,
        "derived_events": derived,
        "wall_time_s": round(wall, 6),
        "kernel": eng.kernel_backend,
    }
