"""Command-line surface: generate worlds, run self-play / PSP, score and
summarize logs, and serve live sessions."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import harness
from .episodes import EpisodeLog, replay
from .worlds import TASKS, generate

ENDPOINT_HELP = "ROLE=SPEC where SPEC is random[:SEED], oracle, cmd:<command>, or tcp:HOST:PORT"


def _parse_seeds(seeds: str | None, count: int | None, start: int) -> list[int]:
    if seeds:
        return [int(s) for s in seeds.split(",")]
    return list(range(start, start + (count or 1)))


def _parse_endpoints(pairs: tuple[str, ...], task: str) -> dict[str, str]:
    roles = {
        "matching": ("agent-0", "agent-1"),
        "itinerary": ("user", "assistant"),
        "mediation": ("user-0", "user-1", "assistant"),
    }[task]
    endpoints = {role: "random" for role in roles}
    for pair in pairs:
        if "=" not in pair:
            raise click.BadParameter(f"expected ROLE=SPEC, got {pair!r}")
        role, spec = pair.split("=", 1)
        if role == "all":
            endpoints = {r: spec for r in roles}
        elif role in endpoints:
            endpoints[role] = spec
        else:
            raise click.BadParameter(f"unknown role {role!r} for task {task}")
    return endpoints


def _print_summary(summary: harness.RunSummary) -> None:
    click.echo(json.dumps(summary.to_doc(), indent=2, sort_keys=True))


@click.group()
def main():
    """Decision dialogue environments: worlds, agents, evaluation, serving."""


@main.command("generate")
@click.option("--task", type=click.Choice(TASKS), required=True)
@click.option("--seeds", help="comma-separated seed list")
@click.option("--count", type=int, help="number of sequential seeds")
@click.option("--start", type=int, default=0, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
def generate_cmd(task, seeds, count, start, out_dir):
    """Write self-describing world documents, one JSON file per seed."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for seed in _parse_seeds(seeds, count, start):
        world = generate(task, seed)
        path = out / f"{task}-{seed}.json"
        path.write_text(json.dumps(world.to_doc(), indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")
        click.echo(str(path))


@main.command("selfplay")
@click.option("--task", type=click.Choice(TASKS), required=True)
@click.option("--seeds", help="comma-separated seed list")
@click.option("--count", type=int, help="number of sequential seeds")
@click.option("--start", type=int, default=0, show_default=True)
@click.option("--agent", "agent_specs", multiple=True, help=ENDPOINT_HELP)
@click.option("--cap", "action_cap", type=int, help="override the episode action cap")
@click.option("--out", "out_dir", type=click.Path())
@click.option("--workers", type=int, default=1, show_default=True)
def selfplay_cmd(task, seeds, count, start, agent_specs, action_cap, out_dir, workers):
    """Run seeded self-play episodes and print the run summary."""
    config = harness.RunConfig(
        task=task, seeds=_parse_seeds(seeds, count, start),
        endpoints=_parse_endpoints(agent_specs, task),
        action_cap=action_cap, out_dir=out_dir, workers=workers)
    _print_summary(harness.run_selfplay(config))


@main.command("psp")
@click.option("--task", type=click.Choice(TASKS), required=True)
@click.option("--log", "prefix_log", type=click.Path(exists=True), required=True,
              help="source episode log (file or directory of .jsonl)")
@click.option("--mode", type=click.Choice(["50", "75", "proposal"]), required=True)
@click.option("--agent", "agent_specs", multiple=True, help=ENDPOINT_HELP)
@click.option("--cap", "action_cap", type=int)
@click.option("--out", "out_dir", type=click.Path())
def psp_cmd(task, prefix_log, mode, agent_specs, action_cap, out_dir):
    """Prompted self-play from recorded episode prefixes."""
    config = harness.RunConfig(
        task=task, seeds=[], endpoints=_parse_endpoints(agent_specs, task),
        mode=f"psp-{mode}", prefix_log=prefix_log, action_cap=action_cap, out_dir=out_dir)
    _print_summary(harness.run_psp(config))


@main.command("score")
@click.argument("paths", nargs=-1, type=click.Path(exists=True))
def score_cmd(paths):
    """Replay logs against their seeds and verify the recorded rewards."""
    failures = 0
    for path in paths:
        log = EpisodeLog.load(path)
        try:
            replay(log)
            click.echo(f"{path}: ok "
                       f"(normalized={log.footer.get('normalized_reward') if log.footer else None})")
        except Exception as exc:  # noqa: BLE001 - report and keep scoring
            failures += 1
            click.echo(f"{path}: REPLAY FAILED: {exc}")
    if failures:
        sys.exit(1)


@main.command("stats")
@click.argument("paths", nargs=-1, type=click.Path(exists=True))
def stats_cmd(paths):
    """Aggregate mean/SEM over stored episode logs."""
    logs = []
    for path in paths:
        p = Path(path)
        files = sorted(p.glob("*.jsonl")) if p.is_dir() else [p]
        logs.extend(EpisodeLog.load(f) for f in files)
    if not logs:
        click.echo(json.dumps({"empty": True}))
        return
    _print_summary(harness.stats(logs))


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--static", "static_dir", type=click.Path(), default=None,
              help="directory with the browser UI bundle to serve at /")
def serve_cmd(host, port, static_dir):
    """Run the live session service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(static_dir=static_dir), host=host, port=port)


if __name__ == "__main__":
    main()
