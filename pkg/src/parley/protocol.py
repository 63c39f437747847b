"""Task-agnostic dialogue session state machine.

A session is a strictly serial turn-based exchange between a fixed roster of
actors. Actors send typed actions (message / think / propose / accept /
reject); proposals go through a pending-response lifecycle, and the session
terminates when a full decision is accepted by every addressed responder.

Transitions depend only on (state, action): no clocks, no RNG. Replaying a
recorded action sequence against the same world reproduces every feedback
snapshot and the final reward bit for bit.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Optional


class ActionKind(str, Enum):
    MESSAGE = "message"
    THINK = "think"
    PROPOSE = "propose"
    ACCEPT = "accept"
    REJECT = "reject"


class ProtocolError(Exception):
    """Action rejected by the state machine.

    ``retriable`` errors are surfaced back to the acting agent so it can
    revise its reply; non-retriable ones indicate harness bugs (acting out of
    turn, acting on a finished session).
    """

    def __init__(self, message: str, retriable: bool = True):
        super().__init__(message)
        self.retriable = retriable


class SchemaError(ProtocolError):
    """Proposal payload failed task schema validation."""


def word_count(text: str) -> int:
    """Number of maximal whitespace-separated tokens."""
    return len(text.split())


@dataclass(frozen=True)
class DialogueAction:
    kind: ActionKind
    sender: str
    recipient: Optional[str] = None
    text: str = ""
    proposal: Optional[dict] = None

    def to_record(self) -> dict:
        return {
            "kind": self.kind.value,
            "sender": self.sender,
            "recipient": self.recipient,
            "text": self.text,
            "proposal": self.proposal,
        }

    @staticmethod
    def from_record(rec: dict) -> "DialogueAction":
        return DialogueAction(
            kind=ActionKind(rec["kind"]),
            sender=rec["sender"],
            recipient=rec.get("recipient"),
            text=rec.get("text", ""),
            proposal=rec.get("proposal"),
        )


@dataclass
class PendingProposal:
    payload: dict
    proposer: str
    # actors that still owe an accept/reject, in turn order
    addressed: tuple[str, ...]
    accepts: set[str] = field(default_factory=set)
    # feedback snapshots computed at propose time, keyed by recipient actor
    feedback: dict[str, dict] = field(default_factory=dict)


@dataclass(frozen=True)
class TaskRules:
    """Per-task protocol configuration consumed by Session.

    ``validate_proposal`` raises SchemaError on malformed payloads.
    ``is_full`` decides whether an accepted payload ends the game.
    ``feedback`` computes per-recipient scorecards at propose time.
    ``addressees`` lists the actors owing a response to a payload.
    ``peers`` routes unaddressed actions: who hears actor X by default
    (mediation users only ever talk to the assistant).
    """

    task: str
    actors: tuple[str, ...]
    proposers: frozenset[str]
    recipient_required_for: frozenset[str]
    action_cap: int
    validate_proposal: Callable[[dict, Any], None]
    is_full: Callable[[dict, Any], bool]
    addressees: Callable[[dict, Any], tuple[str, ...]]
    feedback: Callable[[Any, dict, "Session"], dict[str, dict]]
    peers: dict[str, tuple[str, ...]] = None  # type: ignore[assignment]

    def peers_of(self, actor: str) -> tuple[str, ...]:
        if self.peers and actor in self.peers:
            return self.peers[actor]
        return tuple(a for a in self.actors if a != actor)


class SessionStatus(str, Enum):
    LIVE = "live"
    ACCEPTED = "accepted"
    CAPPED = "capped"


# Kinds that consume the turn and count toward the episode action cap.
TURN_KINDS = (ActionKind.MESSAGE, ActionKind.PROPOSE, ActionKind.ACCEPT, ActionKind.REJECT)


@dataclass
class Transition:
    """Result of one submit: the recorded action plus routing metadata."""

    index: int
    action: DialogueAction
    # actors (other than the sender) that should observe this action
    delivered_to: tuple[str, ...]
    # per-actor feedback snapshots (propose only)
    feedback: dict[str, dict]
    terminal: bool


class Session:
    """One live dialogue over a fixed hidden world."""

    def __init__(self, rules: TaskRules, world: Any):
        self.rules = rules
        self.world = world
        self.transcript: list[DialogueAction] = []
        self.transitions: list[Transition] = []
        self.pending: Optional[PendingProposal] = None
        self.turn_ptr: int = 0
        self.status = SessionStatus.LIVE
        self.word_counts: dict[str, int] = {a: 0 for a in rules.actors}
        self.action_count = 0  # turn-consuming actions only
        self.final_payload: Optional[dict] = None
        # last fully-accepted partial decision per actor (mediation keeps the
        # other user's tentatively booked flight here for closeness display)
        self.tentative: dict[str, Any] = {}

    # -- introspection ----------------------------------------------------

    @property
    def terminal(self) -> bool:
        return self.status == SessionStatus.ACCEPTED

    @property
    def live(self) -> bool:
        return self.status == SessionStatus.LIVE

    def turn_actor(self) -> str:
        if not self.live:
            raise ProtocolError("session is finished", retriable=False)
        return self.rules.actors[self.turn_ptr]

    def legal_actions(self, actor: str) -> set[ActionKind]:
        if actor not in self.rules.actors:
            raise ProtocolError(f"unknown actor {actor!r}", retriable=False)
        if not self.live:
            return set()
        if self.pending is not None and actor in self.pending.addressed and actor not in self.pending.accepts:
            return {ActionKind.ACCEPT, ActionKind.REJECT}
        kinds = {ActionKind.MESSAGE, ActionKind.THINK}
        if actor in self.rules.proposers:
            kinds.add(ActionKind.PROPOSE)
        return kinds

    # -- transitions -------------------------------------------------------

    def submit(self, action: DialogueAction) -> Transition:
        if not self.live:
            raise ProtocolError("session is finished", retriable=False)
        actor = action.sender
        if actor not in self.rules.actors:
            raise ProtocolError(f"unknown actor {actor!r}", retriable=False)
        expected = self.turn_actor()
        if actor != expected:
            raise ProtocolError(f"it is {expected}'s turn, not {actor}'s", retriable=False)

        legal = self.legal_actions(actor)
        if action.kind not in legal:
            raise ProtocolError(f"You cannot send [{action.kind.value}].")
        self._validate_shape(action)

        feedback: dict[str, dict] = {}
        delivered: tuple[str, ...] = ()
        if action.kind == ActionKind.MESSAGE:
            delivered = self._route_message(action)
        elif action.kind == ActionKind.THINK:
            delivered = ()  # never forwarded
        elif action.kind == ActionKind.PROPOSE:
            feedback = self._apply_propose(action)
            delivered = self.pending.addressed
        elif action.kind == ActionKind.ACCEPT:
            delivered = self._apply_accept(actor)
        elif action.kind == ActionKind.REJECT:
            delivered = self._apply_reject(actor)

        self.transcript.append(action)
        if action.kind in (ActionKind.MESSAGE, ActionKind.PROPOSE):
            self.word_counts[actor] += word_count(action.text)
        if action.kind in TURN_KINDS:
            self.action_count += 1
            self._advance_turn()
            if self.live and self.action_count >= self.rules.action_cap:
                self.status = SessionStatus.CAPPED
        tr = Transition(
            index=len(self.transcript) - 1,
            action=action,
            delivered_to=delivered,
            feedback=feedback,
            terminal=self.terminal,
        )
        self.transitions.append(tr)
        return tr

    def _validate_shape(self, action: DialogueAction) -> None:
        if action.kind in (ActionKind.ACCEPT, ActionKind.REJECT):
            if action.text:
                raise ProtocolError(f"[{action.kind.value}] must not carry text")
            if self.pending is None:
                raise ProtocolError("there is no pending proposal to respond to")
        if action.kind == ActionKind.PROPOSE:
            if action.proposal is None:
                raise SchemaError("[propose] requires a proposal payload")
            self.rules.validate_proposal(action.proposal, self.world)
        if action.kind == ActionKind.MESSAGE:
            if action.sender in self.rules.recipient_required_for:
                if action.recipient not in self.rules.actors or action.recipient == action.sender:
                    others = [a for a in self.rules.actors if a != action.sender]
                    raise ProtocolError(
                        f"you must address your message to one of {others}"
                    )

    def _route_message(self, action: DialogueAction) -> tuple[str, ...]:
        if action.recipient is not None:
            return (action.recipient,)
        return self.rules.peers_of(action.sender)

    def _apply_propose(self, action: DialogueAction) -> dict[str, dict]:
        addressed = self.rules.addressees(action.proposal, self.world)
        if not addressed:
            addressed = tuple(a for a in self.rules.actors if a != action.sender)
        feedback = self.rules.feedback(self.world, action.proposal, self)
        self.pending = PendingProposal(
            payload=action.proposal,
            proposer=action.sender,
            addressed=addressed,
            feedback=dict(feedback),
        )
        return feedback

    def _apply_accept(self, actor: str) -> tuple[str, ...]:
        pending = self.pending
        assert pending is not None
        pending.accepts.add(actor)
        if set(pending.addressed) == pending.accepts:
            if self.rules.is_full(pending.payload, self.world):
                self.status = SessionStatus.ACCEPTED
                self.final_payload = pending.payload
            else:
                # partial decision locked in: remember it, play on
                self.tentative.update(_tentative_parts(pending.payload))
            self.pending = None
        return self.rules.peers_of(actor)

    def _apply_reject(self, actor: str) -> tuple[str, ...]:
        self.pending = None
        return self.rules.peers_of(actor)

    def _advance_turn(self) -> None:
        self.turn_ptr = (self.turn_ptr + 1) % len(self.rules.actors)
        # skip actors with nothing to do: a pending proposal only pauses for
        # addressed responders; everyone else keeps their normal turn
        if self.pending is not None:
            # proposer never holds the turn while its own proposal is pending
            for _ in range(len(self.rules.actors)):
                actor = self.rules.actors[self.turn_ptr]
                if actor != self.pending.proposer:
                    break
                self.turn_ptr = (self.turn_ptr + 1) % len(self.rules.actors)

    # -- views -------------------------------------------------------------

    def visible_transcript(self, actor: str) -> list[tuple[int, DialogueAction]]:
        """Transcript events the actor is entitled to see, with indices."""
        out = []
        for tr in self.transitions:
            a = tr.action
            if a.sender == actor or actor in tr.delivered_to:
                out.append((tr.index, a))
        return out

    def copy(self) -> "Session":
        return copy.deepcopy(self)


def _tentative_parts(payload: dict) -> dict:
    if payload.get("kind") == "mediation":
        return {u: f for u, f in payload["flights"].items()}
    return {}


def submit_action(state: Session, action: DialogueAction) -> tuple[Session, Transition]:
    """Pure transition: returns a new session, leaving ``state`` untouched."""
    nxt = state.copy()
    tr = nxt.submit(action)
    return nxt, tr
