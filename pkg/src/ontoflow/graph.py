"""The immutable, append-only causal event graph.

Every piece of world history — schema registration, individual creation,
property writes, derived values — is one `Event`. Events are never mutated
or deleted; "current state" is an index over the latest value event per
(individual, property). Timestamps are carried for display only and never
participate in ordering or evaluation: append order within one graph is
the total order, and causality is explicit via the `cause` id list.

Structural event types (they carry the two-level schema into the graph):

    Concept        value = concept name,     base = None
    Property       value = property name,    base = None
    Model          value = model name,       base = concept initiation
    ModelProperty  value = property name,    base = model event
    <Restriction>  value = payload text,     base = ModelProperty event
    Individual     value = individual name,  base = concept initiation
    SetModel       value = model name,       base = individual initiation

Anything else is a property value event whose base is either the owning
individual's initiation event or — for nested sub-properties — the parent
property event (properties on properties).
"""

from __future__ import annotations

import json
import time
import uuid
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from .errors import (
    CorruptDocument,
    DanglingCause,
    NotAPath,
    UnknownBase,
    UnknownCause,
    UnknownEvent,
    UnknownIndividual,
)
from .scalars import Scalar, same

STRUCTURAL_TYPES = frozenset(
    {
        "Concept",
        "Property",
        "Model",
        "ModelProperty",
        "SetModel",
        "Condition",
        "SetValue",
        "SetDo",
        "Default",
        "Multiple",
        "Required",
        "Unsupported",
    }
)

EXPORT_FORMAT = "eo-graph/1"


@dataclass(frozen=True)
class Event:
    id: str
    base: Optional[str]
    type: str
    value: Scalar
    actor: str
    cause: tuple[str, ...]
    model: Optional[str]
    ts: float

    def record(self) -> dict:
        """Portable wire form: one JSON object per event."""
        return {
            "id": self.id,
            "base": self.base,
            "type": self.type,
            "value": self.value,
            "actor": self.actor,
            "cause": list(self.cause),
            "model": self.model,
            "ts": self.ts,
        }


@dataclass(frozen=True)
class Retract:
    """Tombstone payload removing one value of a Multiple property."""

    value: Scalar


@dataclass
class Reduction:
    """A compacted action chain: interior events archived, intent->result."""

    intent: str
    result: str
    interior: frozenset[str]


@dataclass(frozen=True)
class CausalTrace:
    root: str
    depth: int
    edges: tuple[tuple[str, str], ...]  # (event, direct cause)
    events: tuple[str, ...]             # every id reached, BFS order


def _new_id() -> str:
    return uuid.uuid4().hex


class EventGraph:
    """Append-only store plus the indexes derived from it.

    Single-writer: callers serialize appends (the engine funnels every
    mutation through one logical loop). Readers see a consistent snapshot
    because indexes update atomically with the append.
    """

    def __init__(self, multiple_props: Iterable[str] = ()):
        self.events: list[Event] = []
        self.by_id: dict[str, Event] = {}
        self.position: dict[str, int] = {}
        self.individuals: dict[str, str] = {}      # name -> initiation event id
        self.owner: dict[str, str] = {}            # value-event id -> individual
        self.heads: dict[tuple[str, str], list[Event]] = {}
        self.histories: dict[tuple[str, str], list[Event]] = {}
        self.children: dict[str, list[Event]] = {}  # parent event -> sub-events
        self.by_individual: dict[str, list[Event]] = {}
        self.multiple_props: set[str] = set(multiple_props)
        self.archived: set[str] = set()
        self.reductions: list[Reduction] = []
        self._interior: dict[str, Reduction] = {}
        self.listeners: list[Callable[[Event, Optional[Event]], None]] = []

    # -- appends -----------------------------------------------------------

    def mark_multiple(self, prop: str) -> None:
        self.multiple_props.add(prop)

    def add_listener(self, fn: Callable[[Event, Optional[Event]], None]) -> None:
        self.listeners.append(fn)

    def append(
        self,
        type: str,
        value: Scalar,
        actor: str,
        base: Optional[str] = None,
        cause: Iterable[str] = (),
        model: Optional[str] = None,
        ts: Optional[float] = None,
        _id: Optional[str] = None,
    ) -> Event:
        """Validate and store a new event; returns it with its fresh id."""
        cause = tuple(dict.fromkeys(cause))
        for c in cause:
            if c not in self.by_id:
                raise UnknownCause(f"cause event {c!r} does not exist")
        if base is not None and base not in self.by_id:
            raise UnknownBase(f"base event {base!r} does not exist")
        event = Event(
            id=_id or _new_id(),
            base=base,
            type=type,
            value=value,
            actor=actor,
            cause=cause,
            model=model,
            ts=time.time() if ts is None else ts,
        )
        prev_head = self._index(event)
        for fn in self.listeners:
            fn(event, prev_head)
        return event

    def _index(self, event: Event) -> Optional[Event]:
        """Update all indexes for one event; returns the superseded head."""
        self.position[event.id] = len(self.events)
        self.events.append(event)
        self.by_id[event.id] = event

        if event.type == "Individual" and isinstance(event.value, str):
            self.individuals[event.value] = event.id
            self.owner[event.id] = event.value
            self.by_individual.setdefault(event.value, [])
            return None
        if event.type in STRUCTURAL_TYPES and event.type != "SetModel":
            return None

        owner = self.owner.get(event.base) if event.base else None
        if owner is None:
            return None
        self.owner[event.id] = owner
        self.by_individual.setdefault(owner, []).append(event)
        if event.type == "SetModel":
            return None

        if event.base != self.individuals.get(owner):
            # nested sub-property: tracked under its parent event
            self.children.setdefault(event.base, []).append(event)
            return None

        key = (owner, event.type)
        self.histories.setdefault(key, []).append(event)
        bucket = self.heads.setdefault(key, [])
        prev = bucket[-1] if bucket else None
        if event.type in self.multiple_props:
            if isinstance(event.value, Retract):
                for i, e in enumerate(bucket):
                    if same(e.value, event.value.value):
                        del bucket[i]
                        break
            else:
                bucket.append(event)
        else:
            bucket.clear()
            bucket.append(event)
        return prev

    # -- reads -------------------------------------------------------------

    def has_individual(self, name: str) -> bool:
        return name in self.individuals

    def _check_individual(self, name: str) -> None:
        if name not in self.individuals:
            raise UnknownIndividual(f"unknown individual {name!r}")

    def current_value(self, individual: str, prop: str):
        """Latest value for (individual, property); tuple for Multiple
        properties; None when never set."""
        self._check_individual(individual)
        bucket = self.heads.get((individual, prop))
        if not bucket:
            return None
        if prop in self.multiple_props:
            return tuple(e.value for e in bucket)
        return bucket[-1].value

    def head_event(self, individual: str, prop: str) -> Optional[Event]:
        bucket = self.heads.get((individual, prop))
        return bucket[-1] if bucket else None

    def head_events(self, individual: str, prop: str) -> list[Event]:
        return list(self.heads.get((individual, prop), ()))

    def history(self, individual: str, prop: str) -> list[Event]:
        self._check_individual(individual)
        return list(self.histories.get((individual, prop), ()))

    def events_of(self, individual: str) -> list[Event]:
        self._check_individual(individual)
        return list(self.by_individual.get(individual, ()))

    def state_items(self) -> dict[tuple[str, str], Scalar]:
        """Snapshot of every (individual, property) current value."""
        out = {}
        for (ind, prop) in self.heads:
            out[(ind, prop)] = self.current_value(ind, prop)
        return out

    # -- causality ----------------------------------------------------------

    def effective_causes(self, event_id: str) -> list[str]:
        """Cause list with archived chain interiors collapsed to the chain
        intent, which is what makes traces follow the summary edge."""
        event = self.by_id[event_id]
        out: list[str] = []
        for c in event.cause:
            red = self._interior.get(c)
            out.append(red.intent if red is not None else c)
        return list(dict.fromkeys(out))

    def causal_trace(self, event_id: str, max_depth: int = 10) -> CausalTrace:
        if event_id not in self.by_id:
            raise UnknownEvent(f"unknown event {event_id!r}")
        edges: list[tuple[str, str]] = []
        seen = {event_id}
        order = [event_id]
        frontier = [event_id]
        depth = 0
        while frontier and depth < max_depth:
            nxt: list[str] = []
            for eid in frontier:
                for c in self.effective_causes(eid):
                    edges.append((eid, c))
                    if c not in seen:
                        seen.add(c)
                        order.append(c)
                        nxt.append(c)
            frontier = nxt
            if nxt:
                depth += 1
        return CausalTrace(event_id, depth, tuple(edges), tuple(order))

    def ancestors(self, roots: Iterable[str]) -> set[str]:
        """Transitive closure over cause and base links (raw, not reduced)."""
        todo = list(roots)
        seen: set[str] = set()
        while todo:
            eid = todo.pop()
            if eid in seen:
                continue
            seen.add(eid)
            ev = self.by_id[eid]
            todo.extend(ev.cause)
            if ev.base is not None:
                todo.append(ev.base)
        return seen

    # -- export / import / branch / reduce -----------------------------------

    def export_subgraph(self, roots: Optional[Iterable[str]] = None, closure: bool = True) -> dict:
        """Self-contained portable document; events stay in causal order."""
        if roots is None:
            selected = set(self.by_id)
        else:
            roots = list(roots)
            for r in roots:
                if r not in self.by_id:
                    raise UnknownEvent(f"unknown event {r!r}")
            selected = self.ancestors(roots) if closure else set(roots)
        ordered = [e for e in self.events if e.id in selected]
        doc = {
            "format": EXPORT_FORMAT,
            "events": [e.record() for e in ordered],
        }
        if self.multiple_props:
            doc["multiple"] = sorted(self.multiple_props)
        if self.reductions:
            doc["reductions"] = [
                {"intent": r.intent, "result": r.result, "interior": sorted(r.interior)}
                for r in self.reductions
            ]
        return doc

    def export_json(self, roots=None, closure=True) -> str:
        return json.dumps(self.export_subgraph(roots, closure), indent=2)

    def branch(self, at: str) -> "EventGraph":
        """Independent handle holding exactly the events appended at or
        before `at`; this graph is untouched."""
        if at not in self.by_id:
            raise UnknownEvent(f"unknown event {at!r}")
        cut = self.position[at]
        g = EventGraph(self.multiple_props)
        for e in self.events[: cut + 1]:
            g._index(e)
        return g

    def transitive_reduce(self, chain: list[str], summary: tuple[str, str]) -> "EventGraph":
        """Archive the interior of a completed causal chain, leaving a
        direct intent -> result summary. State queries are unchanged."""
        if len(chain) < 2:
            raise NotAPath("a chain needs at least two events")
        for eid in chain:
            if eid not in self.by_id:
                raise UnknownEvent(f"unknown event {eid!r}")
        if summary != (chain[0], chain[-1]):
            raise NotAPath("summary endpoints must be the chain's first and last events")
        for prev, cur in zip(chain, chain[1:]):
            if prev not in self.by_id[cur].cause:
                raise NotAPath(f"{cur!r} is not directly caused by {prev!r}")
        g = EventGraph(self.multiple_props)
        for e in self.events:
            g._index(e)
        g.archived = set(self.archived)
        g.reductions = list(self.reductions)
        interior = frozenset(chain[1:-1])
        red = Reduction(chain[0], chain[-1], interior)
        g.reductions.append(red)
        g.archived |= interior
        g._interior = dict(self._interior)
        for eid in interior:
            g._interior[eid] = red
        return g

    def active_events(self) -> list[Event]:
        return [e for e in self.events if e.id not in self.archived]


def import_subgraph(document: dict) -> EventGraph:
    """Rebuild a graph from a portable document with fresh ids.

    The id remapping is injective and kept on the handle as `import_id_map`
    (old id -> new id).
    """
    if not isinstance(document, dict) or document.get("format") != EXPORT_FORMAT:
        raise CorruptDocument("not a portable graph document")
    records = document.get("events")
    if not isinstance(records, list):
        raise CorruptDocument("document has no event list")
    g = EventGraph(document.get("multiple", ()))
    idmap: dict[str, str] = {}
    fields = ("id", "base", "type", "value", "actor", "cause", "model", "ts")
    for rec in records:
        for f in fields:
            if not isinstance(rec, dict) or f not in rec:
                raise CorruptDocument(f"event record missing field {f!r}")
        old_id = rec["id"]
        if old_id in idmap:
            raise CorruptDocument(f"duplicate event id {old_id!r}")
        base = rec["base"]
        if base is not None and base not in idmap:
            raise DanglingCause(f"event {old_id!r} references base {base!r} before it is defined")
        for c in rec["cause"]:
            if c not in idmap:
                raise DanglingCause(f"event {old_id!r} references cause {c!r} before it is defined")
        event = Event(
            id=_new_id(),
            base=None if base is None else idmap[base],
            type=rec["type"],
            value=rec["value"],
            actor=rec["actor"],
            cause=tuple(idmap[c] for c in rec["cause"]),
            model=rec["model"],
            ts=rec["ts"],
        )
        idmap[old_id] = event.id
        g._index(event)
    g.import_id_map = idmap  # type: ignore[attr-defined]
    for red in document.get("reductions", ()):
        try:
            reduction = Reduction(
                idmap[red["intent"]],
                idmap[red["result"]],
                frozenset(idmap[e] for e in red["interior"]),
            )
        except KeyError as exc:
            raise DanglingCause(f"reduction references unknown event {exc.args[0]!r}") from exc
        g.reductions.append(reduction)
        g.archived |= reduction.interior
        for eid in reduction.interior:
            g._interior[eid] = reduction
    return g


__all__ = [
    "Event",
    "EventGraph",
    "CausalTrace",
    "Retract",
    "Reduction",
    "import_subgraph",
    "STRUCTURAL_TYPES",
    "EXPORT_FORMAT",
]
