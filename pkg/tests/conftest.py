import pytest

from ontoflow import packaged_bsl
from ontoflow.engine import Engine
from ontoflow.kernel import available_backends


@pytest.fixture(scope="session")
def winter_text() -> str:
    return packaged_bsl("winter_feast.bsl")


@pytest.fixture(scope="session")
def quest_text() -> str:
    return packaged_bsl("winter_quest.bsl")


@pytest.fixture(params=available_backends())
def kernel_backend(request) -> str:
    return request.param


@pytest.fixture
def engine(winter_text) -> Engine:
    eng = Engine()
    result = eng.load_text(winter_text)
    assert result.ok, result.report.render()
    return eng


@pytest.fixture
def figure2_engine(engine) -> Engine:
    """Cold and hungry: energy=20, warmth=20, empty inventory."""
    engine.set_property("John Doe", "energy", 20)
    engine.set_property("John Doe", "warmth", 20)
    return engine


def run_table2(engine: Engine) -> list:
    """Drive the seven golden-trace steps; returns per-step cascade results."""
    results = [
        engine.set_property("John Doe", "energy", 20, actor="script"),
        engine.trigger_action("John Doe", "action_hunt"),
        engine.set_property("John Doe", "warmth", 20, actor="script"),
        engine.trigger_action("John Doe", "action_gather"),
        engine.trigger_action("John Doe", "action_light_fire"),
        engine.trigger_action("John Doe", "action_cook"),
        engine.trigger_action("John Doe", "action_eat"),
    ]
    return results


def value_triples(graph) -> list:
    """(individual, property, value) sequence of value events — the
    id/timestamp-free shape used for determinism comparisons."""
    from ontoflow.graph import STRUCTURAL_TYPES

    out = []
    for ev in graph.events:
        owner = graph.owner.get(ev.id)
        if owner is None or ev.type in STRUCTURAL_TYPES:
            continue
        out.append((owner, ev.type, ev.value))
    return out
