"""Batch evaluation: self-play, prompted self-play, and summary statistics.

Prompted self-play (PSP) replays a prefix of a source episode against the
same seed and lets live agents finish the dialogue. Prefixes are measured in
messages (50% / 75%, rounded up) or cut just before the final proposal
("proposal" mode). Once the running word total comes within 25 words of the
source dialogue's total, every acting agent is prompted with a forcing
notice and the next full proposal is accepted automatically on behalf of the
responders (a partial one is auto-rejected once).
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import agents as agentlib
from . import rules as task_rules
from .episodes import EpisodeLog, EpisodeRecorder
from .protocol import ActionKind, DialogueAction
from .worlds import generate

FORCING_NOTICE = "You must make your best final proposal now."
FORCING_WORD_MARGIN = 25
PSP_MODES = ("psp-50", "psp-75", "psp-proposal")
THINK_SAFETY_FACTOR = 8  # hard stop for agents that never end their turn


@dataclass
class RunConfig:
    task: str
    seeds: list[int]
    endpoints: dict[str, object]          # role -> endpoint spec / agent
    mode: str = "selfplay"                # selfplay | psp-50 | psp-75 | psp-proposal
    params: dict = field(default_factory=dict)
    action_cap: Optional[int] = None
    prefix_log: Optional[str] = None      # PSP source (path), task must match
    out_dir: Optional[str] = None
    workers: int = 1

    def __post_init__(self):
        if self.mode not in ("selfplay",) + PSP_MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode in PSP_MODES and not self.prefix_log:
            raise ValueError("PSP modes require a prefix source log")


@dataclass
class EpisodeResult:
    seed: int
    status: str                           # accepted | capped | failed
    normalized: Optional[float]
    raw: Optional[float]
    words: int
    actions: int
    log: EpisodeLog


@dataclass
class RunSummary:
    task: str
    mode: str
    rows: list[dict]
    terminated: int
    capped: int
    failed: int
    score_mean: Optional[float]
    score_sem: Optional[float]
    words_mean: Optional[float]
    words_sem: Optional[float]

    @property
    def total(self) -> int:
        return self.terminated + self.capped + self.failed

    def to_doc(self) -> dict:
        return {
            "task": self.task, "mode": self.mode, "episodes": self.rows,
            "terminated": self.terminated, "capped": self.capped, "failed": self.failed,
            "score_mean": self.score_mean, "score_sem": self.score_sem,
            "words_mean": self.words_mean, "words_sem": self.words_sem,
        }


def _mean_sem(values: list[float]) -> tuple[Optional[float], Optional[float]]:
    if not values:
        return None, None
    n = len(values)
    mean = sum(values) / n
    if n < 2:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var / n)


def summarize(results: list[EpisodeResult], task: str, mode: str) -> RunSummary:
    rows = [{
        "seed": r.seed, "status": r.status, "normalized": r.normalized,
        "words": r.words, "actions": r.actions,
    } for r in results]
    scored = [r.normalized for r in results if r.status == "accepted"]
    words = [float(r.words) for r in results if r.status == "accepted"]
    score_mean, score_sem = _mean_sem(scored)
    words_mean, words_sem = _mean_sem(words)
    return RunSummary(
        task=task, mode=mode, rows=rows,
        terminated=sum(1 for r in results if r.status == "accepted"),
        capped=sum(1 for r in results if r.status == "capped"),
        failed=sum(1 for r in results if r.status == "failed"),
        score_mean=score_mean, score_sem=score_sem,
        words_mean=words_mean, words_sem=words_sem,
    )


def stats(logs: list[EpisodeLog]) -> RunSummary:
    """Recompute the run summary from stored logs (footer word definition)."""
    results = []
    for log in logs:
        footer = log.footer or {}
        results.append(EpisodeResult(
            seed=log.seed,
            status=footer.get("status", "failed"),
            normalized=footer.get("normalized_reward"),
            raw=footer.get("raw_reward"),
            words=sum((footer.get("word_counts") or {}).values()),
            actions=footer.get("action_count", 0),
            log=log,
        ))
    task = logs[0].task if logs else "none"
    mode = logs[0].header.get("mode", "selfplay") if logs else "empty"
    return summarize(results, task, mode)


class _Forcing:
    """Word-budget forcing state for PSP episodes."""

    def __init__(self, target_words: Optional[int], immediate: bool = False):
        self.target = target_words
        self.armed = immediate
        self.partial_rejected = False

    def update(self, session) -> None:
        if self.armed or self.target is None:
            return
        # strictly inside the margin: a 150-word source arms at 126 live words
        if self.target - sum(session.word_counts.values()) < FORCING_WORD_MARGIN:
            self.armed = True


def _drive(session, live_agents: dict, recorder: EpisodeRecorder,
           forcing: Optional[_Forcing], session_id: str) -> None:
    """Run the turn loop until the session leaves the live state."""
    think_guard = session.rules.action_cap * THINK_SAFETY_FACTOR
    submitted = 0
    while session.live:
        if forcing is not None:
            forcing.update(session)
        role = session.turn_actor()
        auto = _forced_response(session, role, forcing)
        if auto is not None:
            recorder.on_transition(session.submit(auto))
            continue
        notice = FORCING_NOTICE if (forcing is not None and forcing.armed) else None
        if notice is not None:
            recorder.on_notice(role, notice)
        agent = live_agents[role]
        endpoint = getattr(agent, "endpoint", None)
        retry = endpoint.retry_budget if endpoint is not None else agentlib.DEFAULT_RETRY_BUDGET
        tr = agentlib.request_action(
            agent, session, role, session_id=session_id, retry_budget=retry,
            notice=notice, on_search=recorder.on_search)
        recorder.on_transition(tr)
        submitted += 1
        if submitted > think_guard:
            raise agentlib.ProtocolFailure("session exceeded the think-action safety cap")


def _forced_response(session, role: str, forcing: Optional[_Forcing]) -> Optional[DialogueAction]:
    """Forced endgame: once the notice is armed, responders auto-accept a
    full pending proposal; a partial one is auto-rejected once, after which
    the agents respond themselves until the action cap ends the episode."""
    if forcing is None or not forcing.armed or session.pending is None:
        return None
    pending = session.pending
    if role not in pending.addressed or role in pending.accepts:
        return None
    if session.rules.is_full(pending.payload, session.world):
        return DialogueAction(kind=ActionKind.ACCEPT, sender=role)
    if not forcing.partial_rejected:
        forcing.partial_rejected = True
        return DialogueAction(kind=ActionKind.REJECT, sender=role)
    return None


def run_episode(task: str, seed: int, endpoints: dict, params: dict,
                action_cap: Optional[int] = None,
                prefix: Optional[list[dict]] = None,
                forcing: Optional[_Forcing] = None,
                mode: str = "selfplay") -> EpisodeResult:
    t0 = time.monotonic()
    world = generate(task, seed, params)
    session = task_rules.new_session(world, action_cap)
    recorder = EpisodeRecorder(task, seed, params, session.rules.actors, mode=mode)
    live_agents = {role: agentlib.make_agent(spec, world, role)
                   for role, spec in endpoints.items()}
    status = None
    try:
        for rec in prefix or []:
            tr = session.submit(DialogueAction.from_record(rec))
            recorder.on_transition(tr)
        _drive(session, live_agents, recorder, forcing, session_id=f"{task}-{seed}")
    except (agentlib.ProtocolFailure, agentlib.BridgeError):
        status = "failed"
    score_doc = None
    if session.terminal:
        score = task_rules.final_score(world, session.final_payload)
        score_doc = score.to_doc()
    log = recorder.finish(session, score_doc, time.monotonic() - t0, status=status)
    footer = log.footer
    return EpisodeResult(
        seed=seed,
        status=footer["status"],
        normalized=footer["normalized_reward"],
        raw=footer["raw_reward"],
        words=sum(footer["word_counts"].values()),
        actions=footer["action_count"],
        log=log,
    )


def run_selfplay(config: RunConfig) -> RunSummary:
    def one(seed: int) -> EpisodeResult:
        return run_episode(config.task, seed, config.endpoints, config.params,
                           action_cap=config.action_cap)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(one, config.seeds))
    else:
        results = [one(seed) for seed in config.seeds]
    _write_outputs(config, results)
    return summarize(results, config.task, config.mode)


def psp_prefix(log: EpisodeLog, mode: str) -> list[dict]:
    """The event records to replay verbatim for a PSP mode."""
    events = log.events()
    if mode == "psp-proposal":
        last_propose = max((i for i, e in enumerate(events) if e["kind"] == "propose"),
                           default=None)
        if last_propose is None:
            raise ValueError("source log contains no proposal")
        return events[:last_propose]
    fraction = {"psp-50": 0.5, "psp-75": 0.75}[mode]
    n_messages = sum(1 for e in events if e["kind"] == "message")
    keep = math.ceil(fraction * n_messages)
    out, seen = [], 0
    for e in events:
        if e["kind"] == "message":
            if seen >= keep:
                break
            seen += 1
        out.append(e)
    # never cut between a proposal and its responses
    while len(out) < len(events) and events[len(out)]["kind"] in ("accept", "reject"):
        out.append(events[len(out)])
    return out


def psp_sources(path: str) -> list[EpisodeLog]:
    p = Path(path)
    files = sorted(p.glob("*.jsonl")) if p.is_dir() else [p]
    return [EpisodeLog.load(f) for f in files]


def run_psp(config: RunConfig) -> RunSummary:
    """One PSP episode per source log, on the source's own seed and params."""
    from .episodes import replay

    results = []
    for source in psp_sources(config.prefix_log):
        if source.task != config.task:
            raise ValueError(f"prefix log is for task {source.task!r}, not {config.task!r}")
        replay(source)  # refuse to run from a stale or mismatched source
        prefix = psp_prefix(source, config.mode)
        target_words = sum((source.footer or {}).get("word_counts", {}).values()) or None
        forcing = _Forcing(target_words, immediate=(config.mode == "psp-proposal"))
        results.append(run_episode(
            config.task, source.seed, config.endpoints,
            source.header.get("params") or {},
            action_cap=config.action_cap, prefix=prefix,
            forcing=forcing, mode=config.mode))
    _write_outputs(config, results)
    return summarize(results, config.task, config.mode)


def _write_outputs(config: RunConfig, results: list[EpisodeResult]) -> None:
    if not config.out_dir:
        return
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for r in results:
        r.log.dump(out / f"{config.task}-{config.mode}-{r.seed}.jsonl")
    import json
    summary = summarize(results, config.task, config.mode)
    (out / "summary.json").write_text(
        json.dumps(summary.to_doc(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
