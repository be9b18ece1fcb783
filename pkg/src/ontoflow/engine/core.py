"""The dataflow engine.

One engine owns a registry, an event graph, and the interned slot table.
Every mutation (manual set, action trigger, genesis) appends events and
then runs the ingest cascade to quiescence:

* an event on (individual, property) first fires any SetDo attached to
  that property whose guard (evaluated with ``$Value`` = the event value)
  holds — each assignment appends a further event;
* then every SetValue-bearing property subscribed to it recomputes; a new
  value event is appended only when the value actually changed (change
  detection is what makes reaction loops settle), gated by the property's
  own Condition when it has one;
* derived events re-enter the same FIFO worklist until nothing changes.

Cause lists of derived events are {seed event} plus the head events read
during evaluation, so provenance falls out of evaluation itself.

Concurrency: one logical event loop. Callers serialize mutations; reads
(available_actions, evaluate) see consistent snapshots between them.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .. import packaged_bsl
from ..bsl.nodes import (
    Assignment,
    ConceptDecl,
    ContextRef,
    Document,
    Expression,
    IndividualDecl,
    ModelDecl,
    PropertyDecl,
    PropertyKind,
    PropertyUse,
    PropRef,
    RestrictionKind,
)
from ..bsl.parser import parse_document
from ..bsl.printer import expr_text
from ..errors import (
    ActionUnavailable,
    CoercionError,
    InvalidValue,
    NotEditable,
    UnknownAction,
    UnknownIndividual,
    UnknownProperty,
)
from ..graph import STRUCTURAL_TYPES, Event, EventGraph
from ..models.registry import (
    ModelSpec,
    RegistrationResult,
    Registry,
    Violation,
    defaults_for,
    register,
    _value_matches,
)
from ..kernel import get_kernel
from ..scalars import Scalar, same
from .programs import Program, compile_expression
from .state import TAG_NULL, StateStore
from .subscriptions import SubscriptionIndex, build_subscription_index

QUIESCENT = "quiescent"
DEPTH_EXCEEDED = "depth-exceeded"

ENGINE_ACTOR = "engine"
DEFAULT_EVAL_CAP = 10_000


@dataclass
class CascadeResult:
    """Outcome of one ingested trigger: ordered derived events, the number
    of condition/derivation evaluations spent, and whether the cascade ran
    to quiescence or hit the depth cap."""

    derived: list[str] = field(default_factory=list)
    evaluations: int = 0
    status: str = QUIESCENT
    root: Optional[str] = None


@dataclass
class ActionState:
    property: str
    condition_value: Scalar

    @property
    def available(self) -> bool:
        return self.condition_value == 1


@dataclass
class EvalContext:
    """Evaluation context for the public ``evaluate``: the individual that
    ``$.`` resolves against, the ``$Value`` trigger, and the set of head
    event ids consulted (filled during evaluation)."""

    individual: str
    trigger_value: Scalar = None
    reads: set[str] = field(default_factory=set)


class Engine:
    def __init__(
        self,
        kernel: Optional[str] = None,
        eval_cap: int = DEFAULT_EVAL_CAP,
        genesis: bool = True,
    ):
        self.kernel_backend, self._kernel = get_kernel(kernel)
        self.eval_cap = eval_cap
        self.registry = Registry()
        self.graph = EventGraph()
        self.store = StateStore()
        self.subs = SubscriptionIndex()
        self.individual_models: dict[str, list[str]] = {}
        # reverse relation index: target individual -> {(source, relation): None}
        self.rev: dict[str, dict[tuple[str, str], None]] = {}
        self._programs: dict[Expression, Program] = {}
        self._reads_buf = None
        self._concept_events: dict[str, str] = {}
        self._property_events: dict[str, str] = {}
        self._model_events: dict[str, str] = {}
        self.evaluation_count = 0  # lifetime, queries included
        self.graph.add_listener(self._on_append)
        if genesis:
            result = self.load_text(packaged_bsl("view_genesis.bsl"))
            if not result.ok:  # pragma: no cover - packaged data is valid
                raise RuntimeError(f"genesis failed: {result.report.render()}")

    # ------------------------------------------------------------------
    # loading
    # ------------------------------------------------------------------

    def load_text(self, text: str) -> RegistrationResult:
        return self.load_document(parse_document(text))

    def load_document(self, document: Document) -> RegistrationResult:
        """Register a document and materialize its individuals as events,
        running cascades. On a failed registration nothing is mutated."""
        result = register(self.registry, document)
        if not result.ok:
            return result
        self.registry = result.registry
        self.store.ensure_props(self.registry.properties)
        for prop in self.registry.multiple_props():
            self.graph.mark_multiple(prop)
        self.subs = build_subscription_index(self.registry)
        self._compile_model_programs()
        self._append_schema_events(document)
        self._materialize(result.staged, result.new_individuals)
        return result

    def _compile_model_programs(self) -> None:
        for spec in self.registry.models.values():
            for rules in spec.flat.values():
                for expr in (rules.condition, rules.setvalue):
                    if expr is not None and expr not in self._programs:
                        self._programs[expr] = compile_expression(expr, self.store)
                for action in rules.setdo:
                    if action.guard not in self._programs:
                        self._programs[action.guard] = compile_expression(
                            action.guard, self.store
                        )

    def _append_schema_events(self, document: Document) -> None:
        for decl in document.declarations:
            if isinstance(decl, ConceptDecl):
                ev = self.graph.append("Concept", decl.name, ENGINE_ACTOR)
                self._concept_events[decl.name] = ev.id
            elif isinstance(decl, PropertyDecl):
                ev = self.graph.append("Property", decl.name, ENGINE_ACTOR)
                self._property_events[decl.name] = ev.id
            elif isinstance(decl, ModelDecl):
                base = self._concept_events.get(decl.concept)
                ev = self.graph.append("Model", decl.name, ENGINE_ACTOR, base=base)
                self._model_events[decl.name] = ev.id
                self._append_model_property_events(decl.properties, ev.id, decl.name)

    def _append_model_property_events(
        self, uses: list[PropertyUse], base: str, model: str
    ) -> None:
        for use in uses:
            pev = self.graph.append(
                "ModelProperty", use.name, ENGINE_ACTOR, base=base, model=model
            )
            for r in use.restrictions:
                if r.kind in (RestrictionKind.CONDITION, RestrictionKind.SET_VALUE):
                    payload: Scalar = expr_text(r.expr)
                elif r.kind is RestrictionKind.SET_DO:
                    payload = f"{len(r.actions)} act(s)"
                elif r.kind is RestrictionKind.DEFAULT:
                    payload = r.value
                elif r.kind is RestrictionKind.UNSUPPORTED:
                    payload = r.raw
                else:
                    payload = 1 if r.flag else 0
                kind = r.keyword if r.kind is RestrictionKind.UNSUPPORTED else r.kind.value
                self.graph.append(kind, payload, ENGINE_ACTOR, base=pev.id, model=model)
            if use.nested:
                self._append_model_property_events(use.nested, pev.id, model)

    def _materialize(self, staged: list[IndividualDecl], new_names: list[str]) -> None:
        created = set()
        for decl in staged:
            if decl.name in new_names and decl.name not in created:
                base = self._concept_events.get(decl.concept)
                self.graph.append("Individual", decl.name, ENGINE_ACTOR, base=base)
                created.add(decl.name)
        for decl in staged:
            init_id = self.graph.individuals[decl.name]
            pending: list[Event] = []
            for m in decl.models:
                self.graph.append(
                    "SetModel", m, ENGINE_ACTOR, base=init_id, model=m
                )
            for prop, value, model in defaults_for(self.registry, decl):
                pending.append(
                    self.graph.append(
                        prop, value, ENGINE_ACTOR, base=init_id, model=model
                    )
                )
            for a in decl.assignments:
                self._append_assignment(decl.name, a, init_id, pending)
            for ev in pending:
                self.ingest(ev)

    def _append_assignment(
        self, individual: str, a: Assignment, base: str, out: list[Event]
    ) -> None:
        model = self._declaring_model(individual, a.prop)
        ev = self.graph.append(
            a.prop, a.value, ENGINE_ACTOR, base=base, model=model
        )
        out.append(ev)
        for child in a.children:
            self._append_assignment(individual, child, ev.id, out)

    def _declaring_model(self, individual: str, prop: str) -> Optional[str]:
        for name in self.individual_models.get(individual, ()):
            spec = self.registry.models.get(name)
            if spec is not None and prop in spec.flat:
                return name
        return None

    # ------------------------------------------------------------------
    # graph listener: slots, model attachments, reverse relation index
    # ------------------------------------------------------------------

    def _on_append(self, event: Event, prev_head: Optional[Event]) -> None:
        if event.type == "Individual" and isinstance(event.value, str):
            self.store.intern_individual(event.value)
            self.individual_models.setdefault(event.value, [])
            return
        if event.type == "SetModel":
            owner = self.graph.owner.get(event.id)
            if owner is not None and isinstance(event.value, str):
                self.individual_models.setdefault(owner, []).append(event.value)
            return
        if event.type in STRUCTURAL_TYPES:
            return
        owner = self.graph.owner.get(event.id)
        if owner is None or event.base != self.graph.individuals.get(owner):
            return  # nested sub-property: stays graph-only
        pspec = self.registry.properties.get(event.type)
        if pspec is None:
            return
        i = self.store.intern_individual(owner)
        self.store.ensure_props((event.type,))
        p = self.store.prop_ids[event.type]
        is_rel = pspec.kind is PropertyKind.RELATION
        if is_rel:
            if prev_head is not None and isinstance(prev_head.value, str):
                old = self.rev.get(prev_head.value)
                if old is not None:
                    old.pop((owner, event.type), None)
            if isinstance(event.value, str):
                self.rev.setdefault(event.value, {})[(owner, event.type)] = None
        self.store.set_slot(i, p, event.value, is_rel, event.id)

    # ------------------------------------------------------------------
    # evaluation
    # ------------------------------------------------------------------

    def _program(self, expr: Expression) -> Program:
        prog = self._programs.get(expr)
        if prog is None:
            prog = compile_expression(expr, self.store)
            self._programs[expr] = prog
        return prog

    def _trigger_quad(self, value: Scalar):
        if value is None:
            return (TAG_NULL, 0.0, 0, 0, 0)
        quad = self.store.quad(value)
        return quad

    def _run_program(
        self, prog: Program, individual: str, trigger: Scalar = None
    ) -> tuple[Scalar, list[str]]:
        cur = self.store.ind_ids.get(individual)
        if cur is None:
            raise UnknownIndividual(f"unknown individual {individual!r}")
        if self._reads_buf is None or len(self._reads_buf) < prog.max_reads:
            self._reads_buf = np.zeros(max(prog.max_reads, 64), dtype=np.int64)
        t_tag, t_num, t_canon, t_ref, t_flg = self._trigger_quad(trigger)
        st = self.store
        tag, num, canon, ref, err, n_reads = self._kernel(
            prog.code,
            prog.c_tag, prog.c_num, prog.c_canon, prog.c_ref, prog.c_flg,
            st.tag, st.num, st.canon, st.ref, st.flg,
            cur,
            st.intern_string(individual),
            t_tag, t_num, t_canon, t_ref, t_flg,
            self._reads_buf,
        )
        self.evaluation_count += 1
        if err:
            raise CoercionError(
                f"numeric coercion failed evaluating `{expr_text(prog.source)}` "
                f"on {individual!r}"
            )
        width = st.width
        reads: list[str] = []
        for k in range(n_reads):
            slot = int(self._reads_buf[k])
            eid = st.head_ids.get(divmod(slot, width))
            if eid is not None and eid not in reads:
                reads.append(eid)
        return st.materialize(int(tag), float(num), int(canon), int(ref)), reads

    def evaluate(self, expr: Expression, ctx: EvalContext) -> Scalar:
        """Evaluate an expression against current state for ctx.individual.

        Null propagation: comparisons with a null operand yield 0, and a
        dangling relation makes the navigated term null (no error). Reads
        are recorded into ctx.reads as head event ids.
        """
        value, reads = self._run_program(
            self._program(expr), ctx.individual, ctx.trigger_value
        )
        ctx.reads.update(reads)
        return value

    # ------------------------------------------------------------------
    # cascade
    # ------------------------------------------------------------------

    def ingest(self, event: Event) -> CascadeResult:
        """Propagate one already-appended event through the dataflow."""
        result = CascadeResult(root=event.id)
        self._cascade(event, result)
        return result

    def _cascade(self, seed: Event, result: CascadeResult) -> None:
        queue: deque[Event] = deque([seed])
        while queue:
            ev = queue.popleft()
            owner = self.graph.owner.get(ev.id)
            if owner is None or ev.type in STRUCTURAL_TYPES:
                continue
            if ev.base != self.graph.individuals.get(owner):
                continue
            models = self.individual_models.get(owner, [])
            for mname in models:
                spec = self.registry.models[mname]
                rules = spec.flat.get(ev.type)
                if rules is None or not rules.setdo:
                    continue
                for action in rules.setdo:
                    if result.evaluations >= self.eval_cap:
                        result.status = DEPTH_EXCEEDED
                        return
                    queue.extend(self._run_setdo(owner, action, ev, result))
            for j, q, spec in self._dependents(owner, ev.type):
                if result.evaluations >= self.eval_cap:
                    result.status = DEPTH_EXCEEDED
                    return
                derived = self._recompute(j, q, spec, ev, result)
                if derived is not None:
                    queue.append(derived)

    def _dependents(self, owner: str, prop: str):
        """(individual, property, model) recompute targets of an event,
        in deterministic registration order."""
        out: list[tuple[str, str, ModelSpec]] = []
        seen: set[tuple[str, str]] = set()
        models = self.individual_models.get(owner, [])
        for model, dep in self.subs.recompute.get(prop, ()):
            if model in models and (owner, dep) not in seen:
                seen.add((owner, dep))
                out.append((owner, dep, self.registry.models[model]))
        for (src, rel) in self.rev.get(owner, {}):
            src_models = self.individual_models.get(src, [])
            for model, dep in self.subs.recompute_deref.get((rel, prop), ()):
                if model in src_models and (src, dep) not in seen:
                    seen.add((src, dep))
                    out.append((src, dep, self.registry.models[model]))
        return out

    def _run_setdo(self, owner: str, action, ev: Event, result: CascadeResult) -> list[Event]:
        result.evaluations += 1
        guard_val, guard_reads = self._run_program(
            self._program(action.guard), owner, trigger=ev.value
        )
        if not self._truthy(guard_val):
            return []  # guard misses are normal operation, not errors
        target_reads: list[str] = []
        if isinstance(action.target, ContextRef):
            target = owner
        elif isinstance(action.target, PropRef):
            head = self.graph.head_event(owner, action.target.name)
            if head is None or not isinstance(head.value, str):
                return []  # dangling target: the act cannot apply
            target = head.value
            target_reads.append(head.id)
        else:  # pragma: no cover - parser restricts target shapes
            return []
        if target not in self.graph.individuals:
            return []
        events: list[Event] = []
        init_id = self.graph.individuals[target]
        cause = [ev.id, *guard_reads, *target_reads]
        for prop, value in action.assignments:
            model = self._declaring_model(target, prop)
            if model is None:
                raise InvalidValue(
                    [Violation(prop, "not-in-model", f"no model of {target!r} declares it")]
                )
            pspec = self.registry.properties[prop]
            if not _value_matches(pspec, value, self.registry):
                raise InvalidValue(
                    [Violation(prop, "type", f"{value!r} does not fit {prop!r}")]
                )
            appended = self.graph.append(
                prop, value, ENGINE_ACTOR, base=init_id, cause=cause, model=model
            )
            result.derived.append(appended.id)
            events.append(appended)
        return events

    def _recompute(
        self, individual: str, prop: str, spec: ModelSpec, seed: Event, result: CascadeResult
    ) -> Optional[Event]:
        rules = spec.flat[prop]
        cond_reads: list[str] = []
        if rules.condition is not None:
            result.evaluations += 1
            ok, cond_reads = self._run_program(self._program(rules.condition), individual)
            if ok != 1:
                return None
        result.evaluations += 1
        value, reads = self._run_program(self._program(rules.setvalue), individual)
        i = self.store.ind_ids[individual]
        p = self.store.prop_ids[prop]
        current = self.store.slot_scalar(i, p)
        if same(value, current):
            return None
        init_id = self.graph.individuals[individual]
        ev = self.graph.append(
            prop,
            value,
            ENGINE_ACTOR,
            base=init_id,
            cause=[seed.id, *cond_reads, *reads],
            model=spec.name,
        )
        result.derived.append(ev.id)
        return ev

    @staticmethod
    def _truthy(value: Scalar) -> bool:
        if value is None:
            return False
        if isinstance(value, (int, float)):
            return value != 0
        return True

    # ------------------------------------------------------------------
    # public operations
    # ------------------------------------------------------------------

    def _models_of(self, individual: str) -> list[str]:
        models = self.individual_models.get(individual)
        if models is None:
            raise UnknownIndividual(f"unknown individual {individual!r}")
        return models

    def available_actions(self, individual: str) -> list[ActionState]:
        """Condition state of every action property (Condition-gated, not
        derived) of the individual's models, in declaration order."""
        models = self._models_of(individual)
        out: list[ActionState] = []
        seen: set[str] = set()
        for mname in models:
            spec = self.registry.models[mname]
            for pname, rules in spec.flat.items():
                if rules.is_action and pname not in seen:
                    seen.add(pname)
                    value, _ = self._run_program(self._program(rules.condition), individual)
                    out.append(ActionState(pname, value))
        return out

    def available_set(self, individual: str) -> list[str]:
        return [a.property for a in self.available_actions(individual) if a.available]

    def trigger_action(
        self, individual: str, action: str, value: Scalar = 1, actor: str = "player"
    ) -> CascadeResult:
        """Create an action event if its Condition holds, then cascade.

        The action's SetDo runs inside the cascade with ``$Value`` bound to
        the trigger value.
        """
        models = self._models_of(individual)
        pair = None
        for mname in models:
            spec = self.registry.models[mname]
            rules = spec.flat.get(action)
            if rules is not None and rules.is_action:
                pair = (spec, rules)
                break
        if pair is None:
            raise UnknownAction(f"{action!r} is not an action of {individual!r}")
        spec, rules = pair
        ok, reads = self._run_program(self._program(rules.condition), individual)
        if ok != 1:
            raise ActionUnavailable(
                f"{action!r} is not available for {individual!r} (condition is {ok!r})"
            )
        ev = self.graph.append(
            action,
            value,
            actor,
            base=self.graph.individuals[individual],
            cause=reads,
            model=spec.name,
        )
        result = self.ingest(ev)
        result.evaluations += 1  # the availability check above
        result.root = ev.id
        return result

    def set_property(
        self, individual: str, prop: str, value: Scalar, actor: str = "user"
    ) -> CascadeResult:
        """Manual write of an editable property, then cascade."""
        models = self._models_of(individual)
        declaring = self.registry.rules_for(models, prop)
        if not declaring:
            raise UnknownProperty(
                f"{prop!r} is not declared by any model of {individual!r}"
            )
        if any(r.setvalue is not None for _, r in declaring):
            raise NotEditable(f"{prop!r} is derived and cannot be set manually")
        pspec = self.registry.properties[prop]
        if not _value_matches(pspec, value, self.registry):
            raise InvalidValue([Violation(prop, "type", f"{value!r} does not fit {prop!r}")])
        ev = self.graph.append(
            prop,
            value,
            actor,
            base=self.graph.individuals[individual],
            model=declaring[0][0].name,
        )
        result = self.ingest(ev)
        result.root = ev.id
        return result

    def current_value(self, individual: str, prop: str) -> Scalar:
        return self.graph.current_value(individual, prop)

    def is_editable(self, individual: str, prop: str) -> bool:
        declaring = self.registry.rules_for(
            self.individual_models.get(individual, []), prop
        )
        return bool(declaring) and all(r.setvalue is None for _, r in declaring)

    # ------------------------------------------------------------------
    # rebuild / fork
    # ------------------------------------------------------------------

    @classmethod
    def from_graph(
        cls, graph: EventGraph, registry: Registry, kernel: Optional[str] = None
    ) -> "Engine":
        """Wrap an existing graph (a branch or an import) with a fresh
        engine sharing the given registry snapshot."""
        eng = cls(kernel=kernel, genesis=False)
        eng.registry = registry.copy()
        eng.graph = graph
        eng.store = StateStore()
        eng.individual_models = {}
        eng.rev = {}
        eng._programs = {}
        eng.subs = build_subscription_index(eng.registry)
        eng.store.ensure_props(eng.registry.properties)
        eng._compile_model_programs()
        for prop in eng.registry.multiple_props():
            graph.mark_multiple(prop)
        for name in graph.individuals:
            eng.store.intern_individual(name)
            eng.individual_models.setdefault(name, [])
        for ev in graph.events:
            if ev.type == "SetModel":
                owner = graph.owner.get(ev.id)
                if owner is not None and isinstance(ev.value, str):
                    eng.individual_models.setdefault(owner, []).append(ev.value)
        for (ind, prop), bucket in graph.heads.items():
            if not bucket:
                continue
            head = bucket[-1]
            pspec = eng.registry.properties.get(prop)
            if pspec is None:
                continue
            i = eng.store.intern_individual(ind)
            eng.store.ensure_props((prop,))
            p = eng.store.prop_ids[prop]
            is_rel = pspec.kind is PropertyKind.RELATION
            eng.store.set_slot(i, p, head.value, is_rel, head.id)
            if is_rel and isinstance(head.value, str):
                eng.rev.setdefault(head.value, {})[(ind, prop)] = None
        graph.add_listener(eng._on_append)
        return eng

    def fork_at(self, event_id: str) -> "Engine":
        """Engine over a branch of this graph cut at `event_id`."""
        return Engine.from_graph(
            self.graph.branch(event_id), self.registry, kernel=self.kernel_backend
        )
