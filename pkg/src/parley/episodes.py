"""Episode logs: line-delimited JSON records with deterministic replay.

A log is one header line, then one line per record (actions, search calls,
injected notices), then one footer line. Replaying the action records through
a fresh session built from the header's (task, seed, params) must reproduce
every feedback snapshot and the final reward exactly; ``replay`` raises on
the first divergence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from . import rules as task_rules
from .protocol import DialogueAction, Session
from .worlds import generate

FORMAT_VERSION = 1


@dataclass
class EpisodeLog:
    header: dict
    records: list[dict] = field(default_factory=list)
    footer: Optional[dict] = None

    @property
    def task(self) -> str:
        return self.header["task"]

    @property
    def seed(self) -> int:
        return self.header["seed"]

    def actions(self) -> list[DialogueAction]:
        return [DialogueAction.from_record(r) for r in self.records if r["record"] == "event"]

    def events(self) -> list[dict]:
        return [r for r in self.records if r["record"] == "event"]

    def to_lines(self) -> list[str]:
        lines = [_dumps(self.header)]
        lines += [_dumps(r) for r in self.records]
        if self.footer is not None:
            lines.append(_dumps(self.footer))
        return lines

    def dump(self, path: str | Path) -> None:
        Path(path).write_text("\n".join(self.to_lines()) + "\n", encoding="utf-8")

    @staticmethod
    def from_lines(lines: Iterable[str]) -> "EpisodeLog":
        rows = [json.loads(line) for line in lines if line.strip()]
        if not rows or rows[0].get("record") != "header":
            raise ValueError("log must start with a header record")
        log = EpisodeLog(header=rows[0])
        for row in rows[1:]:
            if row.get("record") == "footer":
                log.footer = row
            else:
                log.records.append(row)
        return log

    @staticmethod
    def load(path: str | Path) -> "EpisodeLog":
        return EpisodeLog.from_lines(Path(path).read_text(encoding="utf-8").splitlines())


def _dumps(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True)


class EpisodeRecorder:
    """Builds an EpisodeLog alongside a live session."""

    def __init__(self, task: str, seed: int, params: dict, actors: tuple[str, ...],
                 mode: str = "selfplay"):
        self.log = EpisodeLog(header={
            "record": "header",
            "version": FORMAT_VERSION,
            "task": task,
            "seed": seed,
            "params": dict(params),
            "actors": list(actors),
            "mode": mode,
        })

    def on_transition(self, tr) -> None:
        rec = {"record": "event", "index": tr.index}
        rec.update(tr.action.to_record())
        rec["feedback"] = tr.feedback or None
        self.log.records.append(rec)

    def on_search(self, role: str, query: str, result: str) -> None:
        self.log.records.append({"record": "search", "role": role,
                                 "query": query, "result": result})

    def on_notice(self, to: str, text: str) -> None:
        self.log.records.append({"record": "notice", "to": to, "text": text})

    def finish(self, session: Session, score_doc: Optional[dict],
               wall_clock_s: float, status: Optional[str] = None) -> EpisodeLog:
        self.log.footer = {
            "record": "footer",
            "status": status or session.status.value,
            "raw_reward": score_doc["raw"] if score_doc else None,
            "normalized_reward": score_doc["normalized"] if score_doc else None,
            "score": score_doc,
            "word_counts": dict(session.word_counts),
            "action_count": session.action_count,
            "wall_clock_s": wall_clock_s,
        }
        return self.log


def build_session(log: EpisodeLog, action_cap: int | None = None) -> Session:
    world = generate(log.task, log.seed, log.header.get("params") or {})
    return task_rules.new_session(world, action_cap)


class ReplayMismatch(AssertionError):
    pass


def replay(log: EpisodeLog, strict: bool = True) -> Session:
    """Re-drive all logged actions from the seeded world.

    With ``strict``, recorded feedback snapshots and the footer reward must
    match the recomputation exactly.
    """
    session = build_session(log)
    for rec in log.records:
        if rec["record"] != "event":
            continue
        tr = session.submit(DialogueAction.from_record(rec))
        if strict:
            recorded = rec.get("feedback") or None
            recomputed = tr.feedback or None
            if recorded != recomputed:
                raise ReplayMismatch(f"feedback diverged at event {rec['index']}")
    if strict and log.footer is not None and log.footer.get("normalized_reward") is not None:
        if not session.terminal:
            raise ReplayMismatch("log scored a reward but replay did not terminate")
        score = task_rules.final_score(session.world, session.final_payload)
        if score.normalized != log.footer["normalized_reward"]:
            raise ReplayMismatch(
                f"normalized reward diverged: {score.normalized} != {log.footer['normalized_reward']}")
        if dict(session.word_counts) != log.footer["word_counts"]:
            raise ReplayMismatch("word counts diverged")
    return session


def comparable_lines(log: EpisodeLog) -> list[str]:
    """Log lines with volatile timing stripped, for byte-level comparisons."""
    footer = None
    if log.footer is not None:
        footer = {k: v for k, v in log.footer.items() if k != "wall_clock_s"}
    lines = [_dumps(log.header)]
    lines += [_dumps(r) for r in log.records]
    if footer is not None:
        lines.append(_dumps(footer))
    return lines
