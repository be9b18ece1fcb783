"""Scenario scripts: a line-oriented driver format for engine runs.

Commands (one per line, ``#`` comments allowed):

    load <file.bsl>                      resolve relative to the script,
                                         then packaged data
    set <Individual>.<property> <value>
    click <Individual>.<action>
    expect <Individual>.<property> == <value>
    expect-available <Individual> [action_a, action_b]   exact set match

``<Individual>.<property>`` splits on the last dot, so individual names
may contain spaces (``John Doe.energy``).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

from . import packaged_bsl
from .engine import Engine
from .errors import OntoflowError
from .scalars import Scalar, canonical


class ScriptError(OntoflowError):
    """Malformed scenario script."""


class ExpectationFailed(OntoflowError):
    """An expect/expect-available line did not hold."""


@dataclass
class Command:
    line_no: int
    op: str                      # load | set | click | expect | expect-available
    individual: str = ""
    prop: str = ""
    value: Scalar = None
    actions: Optional[list[str]] = None
    path: str = ""


def _split_ref(text: str, line_no: int) -> tuple[str, str]:
    if "." not in text:
        raise ScriptError(f"line {line_no}: expected <Individual>.<property>, got {text!r}")
    ind, _, prop = text.rpartition(".")
    return ind.strip(), prop.strip()


def _parse_value(text: str) -> Scalar:
    text = text.strip()
    if len(text) >= 2 and text[0] in "'\"" and text[-1] == text[0]:
        return text[1:-1]
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def parse_script(text: str) -> list[Command]:
    commands: list[Command] = []
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        op, _, rest = line.partition(" ")
        rest = rest.strip()
        if op == "load":
            if not rest:
                raise ScriptError(f"line {n}: load needs a file path")
            commands.append(Command(n, "load", path=rest))
        elif op == "set":
            ref, _, value = rest.rpartition(" ")
            if not ref:
                raise ScriptError(f"line {n}: set needs <Individual>.<property> <value>")
            ind, prop = _split_ref(ref, n)
            commands.append(Command(n, "set", ind, prop, _parse_value(value)))
        elif op == "click":
            ind, prop = _split_ref(rest, n)
            commands.append(Command(n, "click", ind, prop))
        elif op == "expect":
            ref, sep, value = rest.partition("==")
            if not sep:
                raise ScriptError(f"line {n}: expect needs '=='")
            ind, prop = _split_ref(ref.strip(), n)
            commands.append(Command(n, "expect", ind, prop, _parse_value(value)))
        elif op == "expect-available":
            name, sep, listing = rest.partition("[")
            if not sep or not listing.rstrip().endswith("]"):
                raise ScriptError(f"line {n}: expect-available needs [action, ...]")
            inner = listing.rstrip()[:-1].strip()
            actions = [a.strip() for a in inner.split(",") if a.strip()] if inner else []
            commands.append(
                Command(n, "expect-available", name.strip(), actions=actions)
            )
        else:
            raise ScriptError(f"line {n}: unknown command {op!r}")
    return commands


def resolve_bsl(path: str, script_dir: Optional[Path]) -> str:
    candidates = []
    p = Path(path)
    if script_dir is not None:
        candidates.append(script_dir / p)
    candidates.append(p)
    for c in candidates:
        if c.is_file():
            return c.read_text(encoding="utf-8")
    try:
        return packaged_bsl(p.name)
    except FileNotFoundError:
        raise ScriptError(f"cannot find BSL file {path!r}") from None


def run_script(
    engine: Engine,
    commands: list[Command],
    script_dir: Optional[Path] = None,
    emit: Callable[[str], None] = lambda line: None,
) -> list[str]:
    """Execute a parsed script; returns the transcript lines (also passed
    to `emit` as they happen). Raises ExpectationFailed on the first
    failing expectation."""
    transcript: list[str] = []

    def out(line: str) -> None:
        transcript.append(line)
        emit(line)

    def describe(res) -> None:
        derived = [
            f"{engine.graph.by_id[i].type} := {engine.graph.by_id[i].value!r}"
            for i in res.derived
        ]
        out(f"    derived: {', '.join(derived) if derived else '(nothing)'}")

    for cmd in commands:
        if cmd.op == "load":
            text = resolve_bsl(cmd.path, script_dir)
            result = engine.load_text(text)
            if not result.ok:
                raise ExpectationFailed(
                    f"line {cmd.line_no}: load failed:\n{result.report.render()}"
                )
            out(f"load {cmd.path}  ({len(engine.graph.events)} events in graph)")
        elif cmd.op == "set":
            res = engine.set_property(cmd.individual, cmd.prop, cmd.value, actor="script")
            out(f"set {cmd.individual}.{cmd.prop} {cmd.value}")
            describe(res)
            out(f"    available: {engine.available_set(cmd.individual) or '(none)'}")
        elif cmd.op == "click":
            res = engine.trigger_action(cmd.individual, cmd.prop, actor="player")
            out(f"click {cmd.individual}.{cmd.prop}")
            describe(res)
            out(f"    available: {engine.available_set(cmd.individual) or '(none)'}")
        elif cmd.op == "expect":
            actual = engine.current_value(cmd.individual, cmd.prop)
            if canonical(actual) != canonical(cmd.value):
                raise ExpectationFailed(
                    f"line {cmd.line_no}: expected {cmd.individual}.{cmd.prop} == "
                    f"{cmd.value!r}, found {actual!r}"
                )
            out(f"ok  expect {cmd.individual}.{cmd.prop} == {cmd.value!r}")
        elif cmd.op == "expect-available":
            actual = engine.available_set(cmd.individual)
            if sorted(actual) != sorted(cmd.actions or []):
                raise ExpectationFailed(
                    f"line {cmd.line_no}: expected available set {sorted(cmd.actions or [])}, "
                    f"found {sorted(actual)}"
                )
            out(f"ok  expect-available {cmd.individual} {cmd.actions}")
    return transcript
