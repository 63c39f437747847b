"""CLI surface: generate / selfplay / psp / score / stats round-trips."""

import json

import pytest
from click.testing import CliRunner

from parley.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


def test_generate_writes_world_docs(runner, tmp_path):
    out = tmp_path / "worlds"
    r = runner.invoke(main, ["generate", "--task", "mediation", "--count", "2",
                             "--out", str(out)])
    assert r.exit_code == 0, r.output
    files = sorted(out.glob("*.json"))
    assert [f.name for f in files] == ["mediation-0.json", "mediation-1.json"]
    doc = json.loads(files[0].read_text())
    assert doc["task"] == "mediation" and "world" in doc


def test_selfplay_then_stats_and_score(runner, tmp_path):
    out = tmp_path / "run"
    r = runner.invoke(main, ["selfplay", "--task", "matching", "--count", "2",
                             "--agent", "all=oracle", "--out", str(out)])
    assert r.exit_code == 0, r.output
    summary = json.loads(r.output)
    assert summary["score_mean"] == 1.0 and summary["terminated"] == 2

    logs = sorted(out.glob("*.jsonl"))
    assert len(logs) == 2
    r = runner.invoke(main, ["score", str(logs[0])])
    assert r.exit_code == 0 and "ok" in r.output

    r = runner.invoke(main, ["stats", str(out)])
    assert r.exit_code == 0
    assert json.loads(r.output)["terminated"] == 2


def test_psp_subcommand(runner, tmp_path):
    src = tmp_path / "src"
    r = runner.invoke(main, ["selfplay", "--task", "matching", "--seeds", "3",
                             "--agent", "all=random:4", "--out", str(src)])
    assert r.exit_code == 0, r.output
    log = next(src.glob("*.jsonl"))
    out = tmp_path / "psp"
    r = runner.invoke(main, ["psp", "--task", "matching", "--log", str(log),
                             "--mode", "proposal", "--agent", "all=oracle",
                             "--out", str(out)])
    assert r.exit_code == 0, r.output
    assert json.loads(r.output)["terminated"] == 1


def test_score_flags_tampered_logs(runner, tmp_path):
    out = tmp_path / "run"
    runner.invoke(main, ["selfplay", "--task", "matching", "--seeds", "5",
                         "--agent", "all=oracle", "--out", str(out)])
    log = next(out.glob("*.jsonl"))
    lines = log.read_text().splitlines()
    footer = json.loads(lines[-1])
    footer["normalized_reward"] = 0.5
    lines[-1] = json.dumps(footer, sort_keys=True)
    log.write_text("\n".join(lines) + "\n")
    r = runner.invoke(main, ["score", str(log)])
    assert r.exit_code == 1
    assert "REPLAY FAILED" in r.output


def test_unknown_role_rejected(runner):
    r = runner.invoke(main, ["selfplay", "--task", "matching", "--count", "1",
                             "--agent", "pilot=oracle"])
    assert r.exit_code != 0
