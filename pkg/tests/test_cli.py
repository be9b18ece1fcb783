"""CLI tests: run/load/analyze/autoplay/trace/bench, exit codes."""

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from ontoflow.cli import main

SCENARIO = Path(__file__).resolve().parent.parent / "scenarios" / "winter_feast_table2.script"


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def winter_file(tmp_path, winter_text):
    p = tmp_path / "winter_feast.bsl"
    p.write_text(winter_text, encoding="utf-8")
    return p


def test_run_golden_script_exits_zero(runner):
    result = runner.invoke(main, ["run", str(SCENARIO)])
    assert result.exit_code == 0, result.output
    assert "ok  expect-available John Doe []" in result.output
    assert "Hunt" not in result.output  # transcript uses property names


def test_run_empty_script(runner, tmp_path):
    script = tmp_path / "empty.script"
    script.write_text("# nothing\n", encoding="utf-8")
    result = runner.invoke(main, ["run", str(script)])
    assert result.exit_code == 0
    assert result.output == ""


def test_run_failing_expectation_exits_one(runner, tmp_path):
    script = tmp_path / "bad.script"
    script.write_text(
        "load winter_feast.bsl\n"
        "set John Doe.energy 20\n"
        "set John Doe.warmth 20\n"
        "expect-available John Doe [action_hunt]\n",
        encoding="utf-8",
    )
    result = runner.invoke(main, ["run", str(script)])
    assert result.exit_code == 1
    assert "expected available set" in result.output


def test_run_malformed_script_exits_two(runner, tmp_path):
    script = tmp_path / "broken.script"
    script.write_text("warp John Doe\n", encoding="utf-8")
    result = runner.invoke(main, ["run", str(script)])
    assert result.exit_code == 2


def test_run_graph_export_round_trips(runner, tmp_path):
    out = tmp_path / "graph.json"
    result = runner.invoke(main, ["run", str(SCENARIO), "--graph-export", str(out)])
    assert result.exit_code == 0
    from ontoflow.graph import import_subgraph

    restored = import_subgraph(json.loads(out.read_text(encoding="utf-8")))
    assert restored.current_value("John Doe", "isSafe") == 1
    assert restored.current_value("John Doe", "energy") == 70


def test_load_reports_summary(runner, winter_file):
    result = runner.invoke(main, ["load", str(winter_file)])
    assert result.exit_code == 0
    assert "0 error(s), 0 warning(s)" in result.output


def test_load_rejects_malformed_bsl(runner, tmp_path):
    bad = tmp_path / "bad.bsl"
    bad.write_text("Survivor: Model:\n", encoding="utf-8")
    result = runner.invoke(main, ["load", str(bad)])
    assert result.exit_code == 2


def test_autoplay_emits_the_emergent_chain(runner, winter_file):
    result = runner.invoke(
        main,
        [
            "autoplay",
            "John Doe",
            "--bsl",
            str(winter_file),
            "--set",
            "John Doe.energy=20",
            "--set",
            "John Doe.warmth=20",
        ],
    )
    assert result.exit_code == 0, result.output
    clicks = [
        line.split("click ")[1].split(" ")[0].strip()
        for line in result.output.splitlines()
        if "click " in line
    ]
    assert clicks == [
        "action_gather",
        "action_light_fire",
        "action_hunt",
        "action_cook",
        "action_eat",
    ]
    assert "goal reached" in result.output


def test_autoplay_stops_when_stuck(runner, winter_file):
    result = runner.invoke(main, ["autoplay", "John Doe", "--bsl", str(winter_file)])
    assert result.exit_code == 0
    assert "isSafe = 1" in result.output  # safe at genesis: nothing to do


def test_trace_shows_consumption_chain(runner):
    result = runner.invoke(
        main, ["trace", "John Doe.hasWood", "--script", str(SCENARIO), "--depth", "3"]
    )
    assert result.exit_code == 0, result.output
    assert "hasWood := 0" in result.output
    assert "_reaction_warm_up := 1" in result.output
    assert "hasFire := 1" in result.output


def test_analyze_clean_exit_zero(runner, winter_file):
    result = runner.invoke(main, ["analyze", str(winter_file)])
    assert result.exit_code == 0
    assert "0 error(s), 0 warning(s)" in result.output


def test_analyze_broken_model_exit_one(runner, tmp_path, winter_text):
    mutated = "\n".join(
        line
        for line in winter_text.splitlines()
        if line.strip() not in (": Attribute: hasDeer", ": hasDeer: 1")
    )
    bad = tmp_path / "broken.bsl"
    bad.write_text(mutated, encoding="utf-8")
    result = runner.invoke(main, ["analyze", str(bad)])
    assert result.exit_code == 1
    assert "EO-TYPE" in result.output
    assert "action_hunt" in result.output


def test_bench_idle_json(runner):
    result = runner.invoke(main, ["bench", "--agents", "10", "--touches", "4"])
    assert result.exit_code == 0, result.output
    payload = json.loads(result.output)
    assert payload["agents"] == 10
    assert payload["touches"] == 4
    assert payload["evaluations"] == 8  # 2 per alternating touch
    assert payload["kernel"] in ("c", "py")


def test_bench_agents_zero(runner):
    result = runner.invoke(main, ["bench", "--agents", "0", "--touches", "5"])
    payload = json.loads(result.output)
    assert payload["evaluations"] == 0
    assert payload["touches"] == 0


def test_bench_idle_cost_independent_of_population(runner):
    small = json.loads(runner.invoke(main, ["bench", "--agents", "1", "--touches", "6"]).output)
    large = json.loads(runner.invoke(main, ["bench", "--agents", "60", "--touches", "6"]).output)
    assert small["evaluations"] == large["evaluations"]
    assert small["derived_events"] == large["derived_events"]
