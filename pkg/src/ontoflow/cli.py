"""`eo` — operator console.

Exit codes: 0 ok, 1 expectation/analysis failure, 2 usage or parse error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .bench import bench_idle, bench_touch_all
from .bsl.parser import parse_document
from .engine import Engine
from .errors import OntoflowError, ParseError
from .graph import Event
from .models import Registry, analyze, register
from .scenario import ExpectationFailed, ScriptError, parse_script, run_script


class AnalysisFailure(click.ClickException):
    exit_code = 1


def _load_files(engine: Engine, paths: tuple[str, ...]) -> None:
    for path in paths:
        text = Path(path).read_text(encoding="utf-8")
        try:
            result = engine.load_text(text)
        except ParseError as exc:
            raise click.UsageError(f"{path}: {exc}") from exc
        if not result.ok:
            raise AnalysisFailure(f"{path} failed validation:\n{result.report.render()}")
        click.echo(
            f"loaded {path}: {len(result.registry.models)} model(s) registered, "
            f"{len(engine.graph.events)} events in graph"
        )


@click.group()
def main():
    """Executable-ontology runtime: load models, run scenarios, inspect causality."""


@main.command("load")
@click.argument("files", nargs=-1, required=True, type=click.Path(exists=True))
def cmd_load(files):
    """Load and validate BSL files, then print the static-analysis report."""
    engine = Engine()
    _load_files(engine, files)
    report = analyze(engine.registry)
    click.echo(report.render())
    if not report.ok:
        raise AnalysisFailure("analysis reported errors")


@main.command("run")
@click.argument("script", type=click.Path(exists=True))
@click.option("--graph-export", type=click.Path(), default=None, help="write the full event graph after the run")
def cmd_run(script, graph_export):
    """Execute a scenario script; failing expectations exit nonzero."""
    path = Path(script)
    try:
        commands = parse_script(path.read_text(encoding="utf-8"))
    except ScriptError as exc:
        raise click.UsageError(str(exc)) from exc
    engine = Engine()
    try:
        run_script(engine, commands, script_dir=path.parent, emit=click.echo)
    except ExpectationFailed as exc:
        raise AnalysisFailure(str(exc)) from exc
    except ParseError as exc:
        raise click.UsageError(str(exc)) from exc
    if graph_export:
        Path(graph_export).write_text(engine.graph.export_json(), encoding="utf-8")
        click.echo(f"graph exported to {graph_export}")


@main.command("autoplay")
@click.argument("individual")
@click.option("--bsl", "bsl_files", multiple=True, type=click.Path(exists=True), help="BSL files to load first")
@click.option("--set", "presets", multiple=True, help="initial writes, e.g. 'John Doe.energy=20'")
@click.option("--max-steps", default=20, show_default=True)
def cmd_autoplay(individual, bsl_files, presets, max_steps):
    """Repeatedly trigger the first available action until safe or stuck."""
    engine = Engine()
    _load_files(engine, bsl_files)
    for preset in presets:
        ref, sep, value = preset.partition("=")
        if not sep or "." not in ref:
            raise click.UsageError(f"--set needs <Individual>.<property>=<value>, got {preset!r}")
        ind, _, prop = ref.rpartition(".")
        engine.set_property(ind.strip(), prop.strip(), _scalar(value.strip()), actor="script")
        click.echo(f"set {ind.strip()}.{prop.strip()} = {value.strip()}")
    for step in range(1, max_steps + 1):
        if engine.current_value(individual, "isSafe") == 1:
            click.echo(f"step {step}: isSafe = 1, goal reached")
            return
        actions = engine.available_set(individual)
        if not actions:
            click.echo(f"step {step}: no actions available, stopping")
            return
        chosen = actions[0]
        res = engine.trigger_action(individual, chosen, actor="autoplay")
        derived = ", ".join(
            f"{engine.graph.by_id[i].type} := {engine.graph.by_id[i].value!r}"
            for i in res.derived
        )
        click.echo(f"step {step}: click {chosen}  ->  {derived or '(nothing)'}")
    click.echo(f"stopped after {max_steps} steps")


@main.command("trace")
@click.argument("selector")
@click.option("--bsl", "bsl_files", multiple=True, type=click.Path(exists=True))
@click.option("--script", "script_file", type=click.Path(exists=True), default=None, help="scenario to run before tracing")
@click.option("--graph", "graph_file", type=click.Path(exists=True), default=None, help="trace inside an exported graph instead")
@click.option("--depth", default=10, show_default=True)
def cmd_trace(selector, bsl_files, script_file, graph_file, depth):
    """Render the causal ancestry of <Individual>.<property>'s current value."""
    if "." not in selector:
        raise click.UsageError("selector must be <Individual>.<property>")
    individual, _, prop = selector.rpartition(".")
    if graph_file:
        from .graph import import_subgraph

        graph = import_subgraph(json.loads(Path(graph_file).read_text(encoding="utf-8")))
    else:
        engine = Engine()
        _load_files(engine, bsl_files)
        if script_file:
            path = Path(script_file)
            try:
                commands = parse_script(path.read_text(encoding="utf-8"))
                run_script(engine, commands, script_dir=path.parent)
            except (ScriptError, ExpectationFailed) as exc:
                raise AnalysisFailure(str(exc)) from exc
        graph = engine.graph
    head = graph.head_event(individual.strip(), prop.strip())
    if head is None:
        raise AnalysisFailure(f"{selector!r} has no value event to trace")
    _render_trace(graph, head, depth)


def _render_trace(graph, head: Event, depth: int) -> None:
    trace = graph.causal_trace(head.id, max_depth=depth)
    children: dict[str, list[str]] = {}
    for src, dst in trace.edges:
        children.setdefault(src, []).append(dst)

    def label(eid: str) -> str:
        ev = graph.by_id[eid]
        model = f" @{ev.model}" if ev.model else ""
        return f"{ev.type} := {ev.value!r}  ({ev.actor}{model}) [{eid[:8]}]"

    seen: set[str] = set()

    def render(eid: str, prefix: str, is_last: bool, is_root: bool) -> None:
        connector = "" if is_root else ("`- " if is_last else "|- ")
        suffix = ""
        if eid in seen:
            suffix = "  (...)"
            click.echo(f"{prefix}{connector}{label(eid)}{suffix}")
            return
        seen.add(eid)
        click.echo(f"{prefix}{connector}{label(eid)}{suffix}")
        kids = children.get(eid, [])
        for i, kid in enumerate(kids):
            ext = "" if is_root else ("   " if is_last else "|  ")
            render(kid, prefix + ext, i == len(kids) - 1, False)

    render(trace.root, "", True, True)


@main.command("analyze")
@click.argument("files", nargs=-1, required=True, type=click.Path(exists=True))
def cmd_analyze(files):
    """Static analysis: registration validity, type safety, reachability."""
    from . import packaged_bsl

    registry = Registry()
    report_total = None
    for source in [packaged_bsl("view_genesis.bsl")] + [
        Path(f).read_text(encoding="utf-8") for f in files
    ]:
        try:
            doc = parse_document(source)
        except ParseError as exc:
            raise click.UsageError(str(exc)) from exc
        result = register(registry, doc)
        if not result.ok:
            click.echo(result.report.render())
            raise AnalysisFailure("registration failed")
        registry = result.registry
    report = analyze(registry)
    click.echo(report.render())
    if not report.ok:
        raise AnalysisFailure("analysis reported errors")


@main.command("bench")
@click.option("--agents", default=1000, show_default=True)
@click.option("--touches", default=100, show_default=True)
@click.option("--kernel", default=None, help="c, py, or auto")
@click.option("--mode", type=click.Choice(["idle", "touch-all"]), default="idle", show_default=True)
def cmd_bench(agents, touches, kernel, mode):
    """Measure evaluation cost: idle clones must not add to it."""
    if mode == "idle":
        result = bench_idle(agents, touches, kernel)
    else:
        result = bench_touch_all(agents, kernel)
    click.echo(json.dumps(result, indent=2))


@main.command("serve")
@click.option("--addr", default="127.0.0.1:8000", show_default=True)
@click.option("--ui", "ui_dir", type=click.Path(exists=True, file_okay=False), default=None, help="static directory to serve at /app")
@click.argument("files", nargs=-1, required=True, type=click.Path(exists=True))
def cmd_serve(addr, ui_dir, files):
    """Load BSL files and serve the HTTP API until interrupted."""
    import uvicorn

    from .service import create_app

    engine = Engine()
    _load_files(engine, files)
    app = create_app(engine)
    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/app", StaticFiles(directory=ui_dir, html=True), name="ui")
    host, _, port = addr.rpartition(":")
    if not host:
        raise click.UsageError("--addr must be host:port")
    uvicorn.run(app, host=host, port=int(port), log_level="warning")


def _scalar(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def run_main() -> None:  # pragma: no cover - console entry
    try:
        main(standalone_mode=True)
    except OntoflowError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":  # pragma: no cover
    run_main()
