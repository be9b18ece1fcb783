"""Engine tests: genesis, evaluation, cascades, actions, determinism."""

import random

import pytest

from conftest import run_table2, value_triples
from ontoflow.bsl.parser import parse_expression
from ontoflow.engine import Engine, EvalContext
from ontoflow.engine.subscriptions import build_subscription_index
from ontoflow.errors import (
    ActionUnavailable,
    InvalidValue,
    NotEditable,
    UnknownAction,
    UnknownIndividual,
)
from ontoflow.models import build_dependency_graph


# -- genesis --------------------------------------------------------------------


def test_genesis_matches_initial_scenario_state(engine):
    assert engine.current_value("John Doe", "energy") == 50
    assert engine.current_value("John Doe", "warmth") == 50
    assert engine.current_value("John Doe", "energyMin") == 30
    assert engine.current_value("John Doe", "location") == "Forest Clearing"
    assert engine.current_value("Forest Clearing", "hasTree") == 1
    assert engine.current_value("Forest Clearing", "hasDeer") == 1
    assert engine.current_value("Forest Clearing", "hasFire") == 0
    # derived at genesis by the cascade, not written by anyone
    assert engine.current_value("John Doe", "energyLow") == 0
    assert engine.current_value("John Doe", "warmthLow") == 0
    assert engine.current_value("John Doe", "isSafe") == 1
    assert engine.current_value("John Doe", "_reaction_warm_up") == 0


def test_defaults_materialize_as_engine_events(engine):
    engine.load_text(
        "Survivor: Individual: Jane\n"
        ": SetModel: Model Survivor\n"
        ": location: Forest Clearing\n"
        ": energy: 40\n"
        ": warmth: 40\n"
    )
    assert engine.current_value("Jane", "energyMin") == 30
    head = engine.graph.head_event("Jane", "energyMin")
    assert head.actor == "engine"


# -- evaluate ------------------------------------------------------------------------


def test_evaluate_threshold(engine):
    engine.set_property("John Doe", "warmth", 20)
    ctx = EvalContext("John Doe")
    value = engine.evaluate(parse_expression("+$.warmth < +$.warmthMin"), ctx)
    assert value == 1
    heads = {engine.graph.head_event("John Doe", p).id for p in ("warmth", "warmthMin")}
    assert heads <= ctx.reads


def test_evaluate_issafe_conjunction(engine):
    ctx = EvalContext("John Doe")
    assert engine.evaluate(parse_expression("$.energyLow == 0 && $.warmthLow == 0"), ctx) == 1


def test_evaluate_deref_of_unset_relation_is_zero(engine):
    engine.load_text(
        "Survivor: Individual: Drifter\n: SetModel: Model Survivor\n: energy: 50\n: warmth: 50\n"
    )
    ctx = EvalContext("Drifter")
    assert engine.evaluate(parse_expression("$($.location).hasTree == 1"), ctx) == 0


def test_evaluate_trigger_canonicalization(engine):
    ctx = EvalContext("John Doe", trigger_value=1)
    assert engine.evaluate(parse_expression('$Value === "1"'), ctx) == 1


# -- figure-2 availability ---------------------------------------------------------------


def test_initial_availability_only_gather(figure2_engine):
    states = figure2_engine.available_actions("John Doe")
    byname = {s.property: s.condition_value for s in states}
    assert byname == {
        "action_gather": 1,
        "action_light_fire": 0,
        "action_hunt": 0,
        "action_cook": 0,
        "action_eat": 0,
    }
    assert figure2_engine.available_set("John Doe") == ["action_gather"]


# -- golden trace at API level -----------------------------------------------------------


TABLE2_AVAILABLE = [
    ["action_hunt"],
    [],
    ["action_gather"],
    ["action_light_fire"],
    ["action_cook"],
    ["action_eat"],
    [],
]


def test_table2_step_by_step(engine):
    steps = [
        (lambda: engine.set_property("John Doe", "energy", 20), "energyLow", 1),
        (lambda: engine.trigger_action("John Doe", "action_hunt"), "hasRawMeat", 1),
        (lambda: engine.set_property("John Doe", "warmth", 20), "warmthLow", 1),
        (lambda: engine.trigger_action("John Doe", "action_gather"), "hasWood", 1),
        (lambda: engine.trigger_action("John Doe", "action_light_fire"), "warmth", 70),
        (lambda: engine.trigger_action("John Doe", "action_cook"), "hasCookedMeat", 1),
        (lambda: engine.trigger_action("John Doe", "action_eat"), "isSafe", 1),
    ]
    for step, ((run, prop, expected), avail) in enumerate(
        zip(steps, TABLE2_AVAILABLE), start=1
    ):
        res = run()
        assert res.status == "quiescent"
        assert res.evaluations <= 50, f"step {step} used {res.evaluations} evaluations"
        assert engine.current_value("John Doe", prop) == expected, f"step {step}"
        assert engine.available_set("John Doe") == avail, f"step {step}"


def test_no_preemption_is_observable_not_coded(engine):
    engine.set_property("John Doe", "energy", 20)
    assert engine.available_set("John Doe") == ["action_hunt"]
    # dropping warmth flips availability purely through evaluation
    engine.set_property("John Doe", "warmth", 20)
    assert engine.available_set("John Doe") == ["action_gather"]
    with pytest.raises(ActionUnavailable):
        engine.trigger_action("John Doe", "action_hunt")


def test_reaction_cascade_from_raw_ingest(engine):
    # reach the step-5 precondition state: cold, wood in hand, no fire
    engine.set_property("John Doe", "energy", 20)
    engine.trigger_action("John Doe", "action_hunt")
    engine.set_property("John Doe", "warmth", 20)
    engine.trigger_action("John Doe", "action_gather")
    ev = engine.graph.append(
        "hasFire", 1, "engine",
        base=engine.graph.individuals["Forest Clearing"],
        model="Model Location",
    )
    res = engine.ingest(ev)
    derived = {
        (engine.graph.by_id[i].type, engine.graph.by_id[i].value) for i in res.derived
    }
    assert derived == {
        ("_reaction_warm_up", 1),
        ("hasWood", 0),
        ("warmth", 70),
        ("warmthLow", 0),
        ("_reaction_warm_up", 0),
    }
    assert res.status == "quiescent"
    assert res.evaluations <= 50


def test_cause_lists_carry_provenance(engine):
    run_table2(engine)
    warm = engine.graph.head_event("John Doe", "warmth")
    trace = engine.graph.causal_trace(warm.id, max_depth=3)
    types = {engine.graph.by_id[eid].type for eid in trace.events}
    assert "_reaction_warm_up" in types
    assert "hasFire" in types


# -- ingest accounting ---------------------------------------------------------------


def test_ingest_on_unsubscribed_property_costs_nothing(engine):
    ev = engine.graph.append(
        "ConceptPage", "Survivor", "user",
        base=engine.graph.individuals["View Survivor"],
        model="Model View Individual",
    )
    res = engine.ingest(ev)
    assert res.evaluations == 0
    assert res.derived == []


def test_exact_evaluation_counts_for_energy_touch(engine):
    # dependents of energy: energyLow (recompute); a change then reaches isSafe
    res = engine.set_property("John Doe", "energy", 20)
    assert res.evaluations == 2
    assert [engine.graph.by_id[i].type for i in res.derived] == ["energyLow", "isSafe"]
    # unchanged recomputation stops at energyLow
    res = engine.set_property("John Doe", "energy", 25)
    assert res.evaluations == 1
    assert res.derived == []


def test_change_detection_suppresses_duplicate_derivations(engine):
    first = engine.set_property("John Doe", "energy", 20)
    again = engine.set_property("John Doe", "energy", 20)
    assert len(first.derived) == 2
    assert again.derived == []
    # the manual event itself is still appended: events are occurrences
    assert len(engine.graph.history("John Doe", "energy")) == 3


def test_quiescence_means_reingest_derives_nothing(engine):
    res = engine.set_property("John Doe", "warmth", 20)
    assert res.status == "quiescent"
    last = engine.graph.by_id[res.derived[-1]]
    res2 = engine.ingest(last)
    assert res2.derived == []


# -- guard rails -------------------------------------------------------------------------


def test_set_derived_property_is_rejected(engine):
    with pytest.raises(NotEditable):
        engine.set_property("John Doe", "warmthLow", 0)


def test_set_wrong_type_is_rejected(engine):
    with pytest.raises(InvalidValue):
        engine.set_property("John Doe", "energy", "plenty")


def test_unknown_individual_and_action(engine):
    with pytest.raises(UnknownIndividual):
        engine.set_property("Nobody", "energy", 1)
    with pytest.raises(UnknownAction):
        engine.trigger_action("John Doe", "warmth")  # not an action
    with pytest.raises(UnknownAction):
        engine.trigger_action("John Doe", "action_fly")


def test_trigger_unavailable_appends_nothing(engine):
    before = len(engine.graph.events)
    with pytest.raises(ActionUnavailable):
        engine.trigger_action("John Doe", "action_eat")
    assert len(engine.graph.events) == before


# -- relation retargeting ------------------------------------------------------------------


FROZEN_LAKE = (
    "Location: Individual: Frozen Lake\n"
    ": SetModel: Model Location\n"
    ": hasTree: 1\n"
    ": hasDeer: 0\n"
    ": hasFire: 0\n"
)


def test_relation_retarget_flips_hunt_availability(engine):
    engine.load_text(FROZEN_LAKE)
    engine.set_property("John Doe", "energy", 20)
    assert "action_hunt" in engine.available_set("John Doe")
    engine.set_property("John Doe", "location", "Frozen Lake")
    assert "action_hunt" not in engine.available_set("John Doe")
    engine.set_property("John Doe", "location", "Forest Clearing")
    assert "action_hunt" in engine.available_set("John Doe")


def test_relation_retarget_rewires_reaction_subscription(engine):
    engine.load_text(FROZEN_LAKE)
    engine.set_property("John Doe", "warmth", 20)
    engine.trigger_action("John Doe", "action_gather")
    engine.set_property("John Doe", "location", "Frozen Lake")
    # fire at the old location must not warm him up any more
    res = engine.set_property("Forest Clearing", "hasFire", 1)
    assert engine.current_value("John Doe", "warmth") == 20
    # fire at the new location does
    engine.set_property("Frozen Lake", "hasFire", 1)
    assert engine.current_value("John Doe", "warmth") == 70


# -- subscription index ----------------------------------------------------------------------


def test_subscription_index_mirrors_dependency_graph(engine):
    index = build_subscription_index(engine.registry)
    assert ("Model Survivor", "warmthLow", "SetValue") in index.by_property["warmth"]
    assert "ConceptPage" not in index.by_property
    dep = build_dependency_graph(engine.registry)
    # every dependency edge has a matching subscription entry...
    for edge in dep.edges:
        entries = {
            (model, prop) for model, prop, _ in index.by_property.get(edge.via, ())
        }
        assert edge.consumer in entries
    # ...and for properties that have producers at all, the projections match
    produced = {e.via for e in dep.edges}
    dep_proj = {(e.via, *e.consumer) for e in dep.edges}
    sub_proj = {t for t in index.edge_set() if t[0] in produced}
    assert sub_proj == dep_proj


# -- quest extension ------------------------------------------------------------------------


def test_quest_gated_derivation(engine, quest_text):
    before = engine.graph.state_items()
    result = engine.load_text(quest_text)
    assert result.ok
    after = engine.graph.state_items()
    for key, value in before.items():
        assert after[key] == value, f"{key} changed during extension"
    # hours accumulate but day1 stays gated: not safe yet (isSafe=1 at genesis)
    # genesis is safe, so the gate is already open; the derivation waits on hours
    assert engine.current_value("John Doe", "day1_complete") in (None, 0)
    engine.set_property("John Doe", "hours_passed", 24)
    assert engine.current_value("John Doe", "day1_complete") == 1
    assert engine.current_value("John Doe", "day2_complete") in (None, 0)
    engine.set_property("John Doe", "hours_passed", 48)
    assert engine.current_value("John Doe", "day2_complete") == 1


def test_quest_condition_blocks_derivation_while_unsafe(engine, quest_text):
    engine.set_property("John Doe", "energy", 20)  # unsafe now
    engine.load_text(quest_text)
    engine.set_property("John Doe", "hours_passed", 24)
    # gate closed: isSafe == 0, so no day1 event may be created
    assert engine.current_value("John Doe", "day1_complete") is None
    # finishing the scenario opens the gate and the derivation fires
    engine.trigger_action("John Doe", "action_hunt")
    engine.set_property("John Doe", "warmth", 20)
    engine.trigger_action("John Doe", "action_gather")
    engine.trigger_action("John Doe", "action_light_fire")
    engine.trigger_action("John Doe", "action_cook")
    engine.trigger_action("John Doe", "action_eat")
    assert engine.current_value("John Doe", "isSafe") == 1
    assert engine.current_value("John Doe", "day1_complete") == 1


# -- determinism / replay ----------------------------------------------------------------------


def test_two_engines_produce_identical_value_sequences(winter_text):
    def run():
        eng = Engine()
        eng.load_text(winter_text)
        run_table2(eng)
        return value_triples(eng.graph)

    assert run() == run()


def test_fork_and_replay_matches_straight_run(engine, winter_text):
    straight = Engine()
    straight.load_text(winter_text)
    run_table2(straight)

    results = []
    results.append(engine.set_property("John Doe", "energy", 20, actor="script"))
    results.append(engine.trigger_action("John Doe", "action_hunt"))
    results.append(engine.set_property("John Doe", "warmth", 20, actor="script"))
    results.append(engine.trigger_action("John Doe", "action_gather"))
    cut = engine.graph.events[-1].id
    results.append(engine.trigger_action("John Doe", "action_light_fire"))
    results.append(engine.trigger_action("John Doe", "action_cook"))
    results.append(engine.trigger_action("John Doe", "action_eat"))

    fork = engine.fork_at(cut)
    fork.trigger_action("John Doe", "action_light_fire")
    fork.trigger_action("John Doe", "action_cook")
    fork.trigger_action("John Doe", "action_eat")

    assert fork.graph.state_items() == straight.graph.state_items()
    assert value_triples(fork.graph) == value_triples(straight.graph)


def test_kernels_agree_on_golden_trace(winter_text, kernel_backend):
    eng = Engine(kernel=kernel_backend)
    eng.load_text(winter_text)
    run_table2(eng)
    assert eng.current_value("John Doe", "isSafe") == 1
    assert eng.available_set("John Doe") == []


# -- depth cap ------------------------------------------------------------------------------------


CHAIN_BSL = ["Concept: Instance: Thing"]
for _k in range(8):
    CHAIN_BSL += [f"Attribute: Individual: p{_k}", ": DataType: Boolean"]
CHAIN_BSL += ["Thing: Model: Model Chain", ": Attribute: p0"]
for _k in range(1, 8):
    CHAIN_BSL += [f": Attribute: p{_k}", f":: SetValue: $.p{_k - 1} == 1"]
CHAIN_BSL += ["Thing: Individual: t", ": SetModel: Model Chain", ": p0: 0"]
CHAIN_BSL = "\n".join(CHAIN_BSL)


def test_depth_cap_returns_partial_result_and_engine_survives():
    eng = Engine(eval_cap=3)
    assert eng.load_text(CHAIN_BSL).ok
    res = eng.set_property("t", "p0", 1)
    assert res.status == "depth-exceeded"
    assert 0 < len(res.derived) < 7
    # engine still usable
    res2 = eng.set_property("t", "p0", 0)
    assert res2.status in ("quiescent", "depth-exceeded")


def test_chain_runs_to_quiescence_without_cap():
    eng = Engine()
    assert eng.load_text(CHAIN_BSL).ok
    res = eng.set_property("t", "p0", 1)
    assert res.status == "quiescent"
    assert [eng.graph.by_id[i].type for i in res.derived] == [f"p{k}" for k in range(1, 8)]


# -- randomized priority property (engine-level spot check) -----------------------------------


def test_hunt_never_available_while_cold_spot_check(engine):
    rng = random.Random(42)
    editable = [
        ("John Doe", "energy", [10, 25, 40, 60]),
        ("John Doe", "warmth", [10, 25, 40, 60]),
        ("John Doe", "hasWood", [0, 1]),
        ("John Doe", "hasRawMeat", [0, 1]),
        ("John Doe", "hasCookedMeat", [0, 1]),
        ("Forest Clearing", "hasFire", [0, 1]),
        ("Forest Clearing", "hasDeer", [0, 1]),
    ]
    for _ in range(200):
        ind, prop, choices = editable[rng.randrange(len(editable))]
        engine.set_property(ind, prop, rng.choice(choices))
        if engine.current_value("John Doe", "warmthLow") == 1:
            assert "action_hunt" not in engine.available_set("John Doe")


# -- history / export / reduction over the real trace -----------------------------


def test_warmth_history_after_golden_trace(engine):
    run_table2(engine)
    values = [e.value for e in engine.graph.history("John Doe", "warmth")]
    assert values == [50, 20, 70]


def test_export_closure_of_goal_state_covers_its_ancestry(engine):
    run_table2(engine)
    safe = engine.graph.head_event("John Doe", "isSafe")
    doc = engine.graph.export_subgraph(roots=[safe.id], closure=True)
    exported = {rec["id"] for rec in doc["events"]}

    # independent ancestor oracle over raw cause/base links
    raw = engine.graph.by_id
    want = {safe.id}
    changed = True
    while changed:
        changed = False
        for eid in list(want):
            ev = raw[eid]
            for nxt in list(ev.cause) + ([ev.base] if ev.base else []):
                if nxt not in want:
                    want.add(nxt)
                    changed = True
    assert exported == want
    # the goal's ancestry spans the whole causal story
    types = {raw[eid].type for eid in exported}
    assert {"energy", "warmth", "hasFire", "_reaction_warm_up", "warmthLow"} <= types


def test_transitive_reduce_of_real_warming_cascade(engine):
    engine.set_property("John Doe", "energy", 20)
    engine.trigger_action("John Doe", "action_hunt")
    engine.set_property("John Doe", "warmth", 20)
    engine.trigger_action("John Doe", "action_gather")
    res = engine.trigger_action("John Doe", "action_light_fire")

    by_id = engine.graph.by_id
    intent = by_id[res.root]
    assert intent.type == "action_light_fire"
    fire = next(by_id[i] for i in res.derived if by_id[i].type == "hasFire")
    reaction = next(
        by_id[i] for i in res.derived
        if by_id[i].type == "_reaction_warm_up" and by_id[i].value == 1
    )
    warm = next(by_id[i] for i in res.derived if by_id[i].type == "warmth")
    chain = [intent.id, fire.id, reaction.id, warm.id]

    reduced = engine.graph.transitive_reduce(chain, (intent.id, warm.id))
    assert reduced.archived == {fire.id, reaction.id}
    # state queries unchanged, including heads that point into the archive
    assert reduced.state_items() == engine.graph.state_items()
    assert reduced.current_value("Forest Clearing", "hasFire") == 1
    # tracing the result jumps straight to the intent
    trace = reduced.causal_trace(warm.id, max_depth=6)
    assert (warm.id, intent.id) in trace.edges
    assert fire.id not in trace.events
    assert reaction.id not in trace.events


# -- locality bound: evaluations vs reachable restriction pairs --------------------


def _reachable_pairs(engine, start_prop):
    """(model, prop, restriction) pairs reachable from events on start_prop,
    threading through SetValue recomputation and SetDo production."""
    subs = build_subscription_index(engine.registry)
    pairs = set()
    frontier = [start_prop]
    produced = set()
    while frontier:
        prop = frontier.pop()
        if prop in produced:
            continue
        produced.add(prop)
        # events on `prop` run that property's own SetDo acts
        for spec in engine.registry.models.values():
            rules = spec.flat.get(prop)
            if rules is None:
                continue
            for i, action in enumerate(rules.setdo):
                pairs.add((spec.name, prop, f"SetDo[{i}]"))
                for assigned, _ in action.assignments:
                    frontier.append(assigned)
        # ...and wake every subscribed restriction
        for model, dep, kind in subs.by_property.get(prop, ()):
            rules = engine.registry.models[model].flat[dep]
            if rules.condition is not None:
                pairs.add((model, dep, "Condition"))
            if rules.setvalue is not None:
                pairs.add((model, dep, "SetValue"))
                frontier.append(dep)
    return pairs


def test_evaluations_bounded_by_reachable_pairs(engine):
    steps = [
        ("set", "energy", 20),
        ("click", "action_hunt", None),
        ("set", "warmth", 20),
        ("click", "action_gather", None),
        ("click", "action_light_fire", None),
        ("click", "action_cook", None),
        ("click", "action_eat", None),
    ]
    for op, prop, value in steps:
        bound = len(_reachable_pairs(engine, prop))
        if op == "set":
            res = engine.set_property("John Doe", prop, value)
        else:
            res = engine.trigger_action("John Doe", prop)
            bound += 1  # the trigger's own availability check
        assert res.evaluations <= bound, (
            f"{prop}: {res.evaluations} evaluations > {bound} reachable pairs"
        )
