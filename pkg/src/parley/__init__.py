"""Turn-based decision dialogue environments with exact scoring oracles.

Three tasks: reviewer-paper matching, itinerary planning, and group flight
mediation. Each couples a seeded procedurally generated hidden world with a
strict turn-based dialogue protocol (message / think / propose / accept /
reject), per-proposal scorecards, and range-normalized rewards backed by
exhaustive solvers. Scripted agents, an external-agent bridge, a self-play /
prompted-self-play harness, and a live session service sit on top.
"""

from .protocol import ActionKind, DialogueAction, ProtocolError, SchemaError, Session
from .rules import final_score, new_session, render_observation, view_for
from .worlds import TASKS, generate, world_from_doc

__all__ = [
    "ActionKind",
    "DialogueAction",
    "ProtocolError",
    "SchemaError",
    "Session",
    "TASKS",
    "final_score",
    "generate",
    "new_session",
    "render_observation",
    "view_for",
    "world_from_doc",
]

__version__ = "0.1.0"
