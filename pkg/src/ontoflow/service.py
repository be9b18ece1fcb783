"""HTTP facade over one engine.

Endpoints (documents are JSON; the event wire format is the graph's
portable record — id, base, type, value, actor, cause[], model, ts):

    GET  /api/views/{name}                                  ViewState
    POST /api/individuals/{name}/actions/{property}         trigger, body {"value": 1}
    POST /api/individuals/{name}/properties/{property}      manual set, body {"value": v}
    GET  /api/events?since={id}&limit={n}                   SSE stream, resume by id
    GET  /api/trace/{event_id}?depth=N                      causal trace
    GET  /api/analysis                                      static-analysis report
    POST /api/load                                          body = BSL text
    GET  /api/graph                                         full portable export

Mutations funnel through one asyncio lock (the engine's single-writer
loop); the stream fans out per subscriber with no shared cursor.
"""

from __future__ import annotations

import asyncio
import json
from typing import Optional

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse, StreamingResponse

from .engine import CascadeResult, Engine
from .errors import (
    ActionUnavailable,
    InvalidValue,
    NotEditable,
    OntoflowError,
    ParseError,
    UnknownAction,
    UnknownEvent,
    UnknownIndividual,
    UnknownProperty,
    UnknownView,
)
from .models import VIEW_MODEL, analyze
from .scalars import Scalar


def resolve_view(engine: Engine, name: str) -> dict:
    """Materialize a View individual into renderable state: property rows
    (minus exclusions and control-bound properties) and controls whose
    enabled flag mirrors available_actions at this snapshot."""
    if name not in engine.graph.individuals:
        raise UnknownView(f"unknown view {name!r}")
    if VIEW_MODEL not in engine.individual_models.get(name, []):
        raise UnknownView(f"{name!r} is not a View individual")

    concept_page = individual = mode = None
    excludes: set[str] = set()
    includes: set[str] = set()
    controls: list[dict] = []
    current: Optional[dict] = None
    for ev in engine.graph.events_of(name):
        if ev.type == "ConceptPage":
            concept_page = ev.value
        elif ev.type == "IndividualID":
            individual = ev.value
        elif ev.type == "ViewMode":
            mode = ev.value
        elif ev.type == "Exclude":
            excludes.add(ev.value)
        elif ev.type == "Include":
            includes.add(ev.value)
        elif ev.type == "Control":
            current = {
                "property": ev.value,
                "title": ev.value,
                "control_type": "button",
                "send_value": 1,
                "enabled": False,
            }
            controls.append(current)
        elif ev.type == "Title" and current is not None:
            current["title"] = ev.value
        elif ev.type == "ControlType" and current is not None:
            current["control_type"] = ev.value
        elif ev.type == "Value" and current is not None:
            current["send_value"] = ev.value

    rows: list[dict] = []
    if individual and individual in engine.graph.individuals:
        control_props = {c["property"] for c in controls}
        seen: set[str] = set()
        for mname in engine.individual_models.get(individual, []):
            spec = engine.registry.models[mname]
            for pname in spec.flat:
                if pname in seen or pname in excludes or pname in control_props:
                    continue
                if includes and pname not in includes:
                    continue
                seen.add(pname)
                value = engine.current_value(individual, pname)
                if value is None:
                    continue
                rows.append(
                    {
                        "property": pname,
                        "value": value,
                        "excluded": False,
                        "editable": engine.is_editable(individual, pname),
                    }
                )
        available = set(engine.available_set(individual))
        for c in controls:
            c["enabled"] = c["property"] in available
    return {
        "view_id": name,
        "concept_page": concept_page,
        "individual": individual,
        "mode": mode or "showcase",
        "rows": rows,
        "controls": controls,
    }


def view_for_individual(engine: Engine, individual: str) -> Optional[str]:
    for name, models in engine.individual_models.items():
        if VIEW_MODEL not in models:
            continue
        head = engine.graph.head_event(name, "IndividualID")
        if head is not None and head.value == individual:
            return name
    return None


def _summary(res: CascadeResult) -> dict:
    return {
        "root": res.root,
        "derived": res.derived,
        "evaluations": res.evaluations,
        "status": res.status,
    }


def create_app(engine: Engine) -> FastAPI:
    app = FastAPI(title="executable-ontology runtime", version="0.1.0")
    lock = asyncio.Lock()
    subscribers: set[asyncio.Queue] = set()

    def broadcast(event, prev_head) -> None:
        for q in list(subscribers):
            q.put_nowait(event.record())

    engine.graph.add_listener(broadcast)

    @app.exception_handler(OntoflowError)
    async def _on_error(request: Request, exc: OntoflowError):
        status = 500
        if isinstance(
            exc, (UnknownIndividual, UnknownAction, UnknownProperty, UnknownView, UnknownEvent)
        ):
            status = 404
        elif isinstance(exc, (ActionUnavailable, NotEditable)):
            status = 409
        elif isinstance(exc, (InvalidValue, ParseError)):
            status = 422
        return JSONResponse(
            {"error": type(exc).__name__, "detail": str(exc)}, status_code=status
        )

    @app.get("/api/views/{name}")
    async def get_view(name: str):
        async with lock:
            return resolve_view(engine, name)

    @app.post("/api/individuals/{name}/actions/{prop}")
    async def trigger(name: str, prop: str, body: dict | None = None):
        value: Scalar = 1 if not body else body.get("value", 1)
        async with lock:
            res = engine.trigger_action(name, prop, value=value, actor="player")
            view_name = view_for_individual(engine, name)
            view = resolve_view(engine, view_name) if view_name else None
            return {"result": _summary(res), "view": view}

    @app.post("/api/individuals/{name}/properties/{prop}")
    async def set_prop(name: str, prop: str, body: dict):
        async with lock:
            res = engine.set_property(name, prop, body.get("value"), actor="user")
            view_name = view_for_individual(engine, name)
            view = resolve_view(engine, view_name) if view_name else None
            return {"result": _summary(res), "view": view}

    @app.get("/api/events")
    async def events(
        since: Optional[str] = Query(default=None),
        limit: Optional[int] = Query(default=None),
    ):
        queue: asyncio.Queue = asyncio.Queue()
        async with lock:
            start = 0
            if since is not None:
                if since not in engine.graph.position:
                    raise UnknownEvent(f"unknown event {since!r}")
                start = engine.graph.position[since] + 1
            backlog = [e.record() for e in engine.graph.events[start:]]
            subscribers.add(queue)

        async def gen():
            sent = 0
            try:
                for rec in backlog:
                    yield _sse(rec)
                    sent += 1
                    if limit is not None and sent >= limit:
                        return
                while limit is None or sent < limit:
                    rec = await queue.get()
                    yield _sse(rec)
                    sent += 1
            finally:
                subscribers.discard(queue)

        return StreamingResponse(gen(), media_type="text/event-stream")

    @app.get("/api/trace/{event_id}")
    async def trace(event_id: str, depth: int = Query(default=10, ge=0)):
        async with lock:
            t = engine.graph.causal_trace(event_id, max_depth=depth)
            return {
                "root": t.root,
                "depth": t.depth,
                "edges": [list(e) for e in t.edges],
                "events": [engine.graph.by_id[eid].record() for eid in t.events],
            }

    @app.get("/api/analysis")
    async def analysis():
        async with lock:
            return analyze(engine.registry).as_dict()

    @app.post("/api/load")
    async def load(request: Request):
        text = (await request.body()).decode("utf-8")
        async with lock:
            before = len(engine.graph.events)
            result = engine.load_text(text)
            payload = result.report.as_dict()
            payload["events_appended"] = len(engine.graph.events) - before
            payload["individuals"] = result.new_individuals
            status = 200 if result.ok else 422
            return JSONResponse(payload, status_code=status)

    @app.get("/api/graph")
    async def graph_export():
        async with lock:
            return engine.graph.export_subgraph()

    return app


def _sse(record: dict) -> str:
    return f"id: {record['id']}\ndata: {json.dumps(record)}\n\n"
