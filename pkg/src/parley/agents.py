"""Agents: scripted baselines, the oracle, and the external-agent bridge.

Every agent implements ``act(request) -> DialogueAction | SearchCall``. The
driver loop (``request_action``) owns legality: an illegal or malformed reply
is sent back to the agent together with the environment's error text, up to
the endpoint's retry budget, mirroring a revise-and-resubmit loop. Search
calls (itinerary assistants only) are executed against the site database and
their result attached to the re-request; they never enter the transcript.
"""

from __future__ import annotations

import json
import os
import socket
import subprocess
import zlib
from dataclasses import dataclass
from typing import Optional, Protocol

import numpy as np

from . import rules as task_rules
from . import scoring, search, solvers
from .protocol import ActionKind, DialogueAction, ProtocolError, Session, Transition
from .worlds.itinerary import ItineraryWorld
from .worlds.matching import MatchingWorld
from .worlds.mediation import USERS, MediationWorld

DEFAULT_RETRY_BUDGET = 3
DEFAULT_SEARCH_BUDGET = 8
BRIDGE_TIMEOUT_ENV = "PARLEY_BRIDGE_TIMEOUT"


@dataclass(frozen=True)
class AgentEndpoint:
    kind: str                      # scripted-random | scripted-oracle | external
    address: Optional[str] = None  # external only: cmd:... or tcp:host:port
    seed: int = 0
    retry_budget: int = DEFAULT_RETRY_BUDGET

    def __post_init__(self):
        if self.retry_budget < 1:
            raise ValueError("retry budget must be >= 1")


@dataclass(frozen=True)
class SearchCall:
    query: str


@dataclass
class ActionRequest:
    session_id: str
    role: str
    turn_index: int
    observation: str
    transcript: list[str]
    legal: list[str]
    view: dict
    pending: Optional[dict] = None
    error: Optional[str] = None
    notice: Optional[str] = None
    search_result: Optional[str] = None

    def to_doc(self) -> dict:
        return {
            "type": "action_request",
            "session_id": self.session_id,
            "role": self.role,
            "turn_index": self.turn_index,
            "observation": self.observation,
            "transcript": list(self.transcript),
            "legal": list(self.legal),
            "view": self.view,
            "pending": self.pending,
            "error": self.error,
            "notice": self.notice,
            "search_result": self.search_result,
        }


class Agent(Protocol):
    def act(self, request: ActionRequest) -> DialogueAction | SearchCall: ...


class ProtocolFailure(Exception):
    """Retry budget exhausted; the episode is aborted and recorded as failed."""


class BridgeError(Exception):
    """Transport-level failure talking to an external agent."""


def transcript_lines(session: Session, role: str) -> list[str]:
    """Role-visible transcript rendered one line per event (feedback inlined)."""
    lines = []
    for tr in session.transitions:
        a = tr.action
        if a.sender != role and role not in tr.delivered_to:
            continue
        who = "You" if a.sender == role else a.sender
        if a.kind == ActionKind.PROPOSE:
            shown = task_rules.render_proposal(session.world, a.proposal, role)
            lines.append(f"{who}: [propose] {shown}".rstrip())
            if a.text:
                lines.append(f"{who}: [message] {a.text}")
            if role in tr.feedback:
                lines.append(tr.feedback[role]["text"])
        else:
            suffix = f" {a.text}" if a.text else ""
            recipient = f" to {a.recipient}" if (a.recipient and a.sender == role) else ""
            lines.append(f"{who}{recipient}: [{a.kind.value}]{suffix}")
    return lines


def build_request(session: Session, role: str, session_id: str = "local",
                  error: Optional[str] = None, notice: Optional[str] = None,
                  search_result: Optional[str] = None) -> ActionRequest:
    pending = None
    if session.pending is not None and role != session.pending.proposer:
        shown = session.pending.payload
        if isinstance(session.world, MediationWorld) and role in USERS:
            shown = _user_slice(shown, role)
        pending = {"payload": shown, "proposer": session.pending.proposer}
    return ActionRequest(
        session_id=session_id,
        role=role,
        turn_index=len(session.transcript),
        observation=task_rules.render_observation(session.world, role),
        transcript=transcript_lines(session, role),
        legal=sorted(k.value for k in session.legal_actions(role)),
        view=task_rules.view_for(session.world, role),
        pending=pending,
        error=error,
        notice=notice,
        search_result=search_result,
    )


def _user_slice(payload: dict, user: str) -> dict:
    flights = payload.get("flights", {})
    return {"kind": "mediation", "flights": {user: flights[user]} if user in flights else {}}


def request_action(agent: Agent, session: Session, role: str, *,
                   session_id: str = "local",
                   retry_budget: int = DEFAULT_RETRY_BUDGET,
                   search_budget: int = DEFAULT_SEARCH_BUDGET,
                   notice: Optional[str] = None,
                   on_search=None) -> Transition:
    """Ask the agent for one legal action and apply it, driving the
    revision loop on errors and the search side-channel."""
    error = None
    search_result = None
    retries = retry_budget
    searches = search_budget
    while True:
        req = build_request(session, role, session_id=session_id, error=error,
                            notice=notice, search_result=search_result)
        reply = agent.act(req)
        if isinstance(reply, SearchCall):
            if searches <= 0:
                raise ProtocolFailure(f"{role} exceeded the search budget")
            searches -= 1
            search_result = run_search_for(session, role, reply.query)
            if on_search is not None:
                on_search(role, reply.query, search_result)
            continue
        if reply.sender != role:
            reply = DialogueAction(kind=reply.kind, sender=role, recipient=reply.recipient,
                                   text=reply.text, proposal=reply.proposal)
        try:
            return session.submit(reply)
        except ProtocolError as exc:
            if not exc.retriable:
                raise
            retries -= 1
            if retries <= 0:
                raise ProtocolFailure(f"{role} exhausted its retry budget: {exc}") from exc
            error = str(exc)
            search_result = None


def run_search_for(session: Session, role: str, query: str) -> str:
    if not isinstance(session.world, ItineraryWorld) or role != "assistant":
        return "Search is not available to you."
    try:
        return search.run_search(session.world, query)
    except search.QueryError as exc:
        return str(exc)


# -- scripted agents -------------------------------------------------------------


class RandomProposalAgent:
    """Proposes a uniformly random legal full decision as soon as it may
    propose, accepts any pending proposal, and otherwise sends filler chat.
    Deterministic given (seed, session id, transcript position); distinct
    sessions draw independent decisions."""

    def __init__(self, seed: int = 0):
        self.seed = int(seed)

    def _rng(self, request: ActionRequest) -> np.random.Generator:
        session_tag = zlib.crc32(request.session_id.encode("utf-8"))
        return np.random.default_rng(np.random.SeedSequence(
            [7_777, self.seed, session_tag, request.turn_index]))

    def act(self, request: ActionRequest) -> DialogueAction:
        role = request.role
        if "accept" in request.legal:
            return DialogueAction(kind=ActionKind.ACCEPT, sender=role)
        if "propose" in request.legal:
            return DialogueAction(kind=ActionKind.PROPOSE, sender=role,
                                  proposal=self._random_proposal(request))
        recipient = self._default_recipient(request)
        return DialogueAction(kind=ActionKind.MESSAGE, sender=role, recipient=recipient, text="ok")

    def _default_recipient(self, request: ActionRequest) -> Optional[str]:
        if request.view.get("task") == "mediation" and request.role == "assistant":
            rng = self._rng(request)
            return USERS[int(rng.integers(0, 2))]
        return None

    def _random_proposal(self, request: ActionRequest) -> dict:
        rng = self._rng(request)
        view = request.view
        task = view.get("task")
        if task == "matching":
            perm = rng.permutation(view["k"]).tolist()
            return {"kind": "matching", "reviewer_for_paper": [int(r) for r in perm]}
        if task == "itinerary":
            names = [s["name"] for s in view["sites"]]
            picks = rng.choice(len(names), size=view["k"], replace=False)
            return {"kind": "itinerary", "sites": [names[int(i)] for i in picks]}
        if task == "mediation":
            flights = {}
            for i, user in enumerate(USERS):
                n = len(view["users"][i]["flights"])
                flights[user] = int(rng.integers(0, n))
            return {"kind": "mediation", "flights": flights}
        raise ValueError(f"cannot build a proposal for task {task!r}")


class OracleAgent:
    """Diagnostic upper-bound agent: sees the full world (test use only),
    proposes the solver optimum, and accepts exactly the optimal decisions."""

    def __init__(self, world):
        self.world = world
        self._optimum = None

    def optimum(self) -> dict:
        if self._optimum is None:
            w = self.world
            if isinstance(w, MatchingWorld):
                best = solvers.best_matching(solvers.impute_pooled(w).table)
                payload = {"kind": "matching", "reviewer_for_paper": list(best.payload)}
            elif isinstance(w, ItineraryWorld):
                best, _ = solvers.best_worst_itinerary(w)
                payload = {"kind": "itinerary", "sites": list(best.payload)}
            elif isinstance(w, MediationWorld):
                best, _ = solvers.best_worst_flightpair(w)
                payload = {"kind": "mediation",
                           "flights": {"user-0": int(best.payload[0]),
                                       "user-1": int(best.payload[1])}}
            else:
                raise TypeError(f"no oracle for {type(w).__name__}")
            self._optimum = payload
        return self._optimum

    def act(self, request: ActionRequest) -> DialogueAction:
        role = request.role
        if "accept" in request.legal:
            kind = ActionKind.ACCEPT if self._approves(request) else ActionKind.REJECT
            return DialogueAction(kind=kind, sender=role)
        if "propose" in request.legal:
            return DialogueAction(kind=ActionKind.PROPOSE, sender=role, proposal=self.optimum())
        recipient = USERS[0] if (isinstance(self.world, MediationWorld)
                                 and role == "assistant") else None
        return DialogueAction(kind=ActionKind.MESSAGE, sender=role,
                              recipient=recipient, text="ok")

    def _approves(self, request: ActionRequest) -> bool:
        payload = (request.pending or {}).get("payload") or {}
        w = self.world
        opt = self.optimum()
        if isinstance(w, MatchingWorld):
            return scoring.score_matching(w, payload).normalized >= 1.0 - 1e-9
        if isinstance(w, ItineraryWorld):
            if any(nm is None for nm in payload.get("sites", [None])):
                return False
            raw, _ = scoring.score_itinerary(w, payload)
            return scoring.normalize_itinerary(w, raw).normalized >= 1.0 - 1e-9
        if isinstance(w, MediationWorld):
            flights = payload.get("flights", {})
            return bool(flights) and all(opt["flights"][u] == f for u, f in flights.items())
        return False


class ScriptedReplies:
    """Test helper: replays a fixed list of replies (actions or searches)."""

    def __init__(self, replies):
        self.replies = list(replies)
        self.requests: list[ActionRequest] = []

    def act(self, request: ActionRequest):
        self.requests.append(request)
        if not self.replies:
            raise ProtocolFailure("scripted agent ran out of replies")
        return self.replies.pop(0)


# -- the external bridge ----------------------------------------------------------


def _bridge_timeout() -> float:
    return float(os.environ.get(BRIDGE_TIMEOUT_ENV, "60"))


class StdioTransport:
    """Line-delimited JSON over a child process's stdin/stdout."""

    def __init__(self, command: str):
        self.proc = subprocess.Popen(
            command, shell=True, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
            text=True, bufsize=1)

    def exchange(self, doc: dict) -> dict:
        try:
            self.proc.stdin.write(json.dumps(doc, ensure_ascii=False) + "\n")
            self.proc.stdin.flush()
            line = self.proc.stdout.readline()
        except (BrokenPipeError, OSError) as exc:
            raise BridgeError(f"bridge process failed: {exc}") from exc
        if not line:
            raise BridgeError("bridge process closed its stream")
        return json.loads(line)

    def close(self):
        try:
            self.proc.stdin.close()
            self.proc.terminate()
        except OSError:
            pass


class TcpTransport:
    """Line-delimited JSON over a TCP socket."""

    def __init__(self, host: str, port: int):
        self.sock = socket.create_connection((host, port), timeout=_bridge_timeout())
        self.reader = self.sock.makefile("r", encoding="utf-8")
        self.writer = self.sock.makefile("w", encoding="utf-8")

    def exchange(self, doc: dict) -> dict:
        try:
            self.writer.write(json.dumps(doc, ensure_ascii=False) + "\n")
            self.writer.flush()
            line = self.reader.readline()
        except OSError as exc:
            raise BridgeError(f"bridge socket failed: {exc}") from exc
        if not line:
            raise BridgeError("bridge peer closed the connection")
        return json.loads(line)

    def close(self):
        try:
            self.sock.close()
        except OSError:
            pass


class StreamTransport:
    """Line-delimited JSON over explicit file objects (tests, pipes)."""

    def __init__(self, reader, writer):
        self.reader = reader
        self.writer = writer

    def exchange(self, doc: dict) -> dict:
        self.writer.write(json.dumps(doc, ensure_ascii=False) + "\n")
        self.writer.flush()
        line = self.reader.readline()
        if not line:
            raise BridgeError("bridge peer closed the stream")
        return json.loads(line)

    def close(self):
        pass


class BridgeAgent:
    """Adapts an external peer speaking the request/reply wire format."""

    def __init__(self, transport):
        self.transport = transport

    def act(self, request: ActionRequest) -> DialogueAction | SearchCall:
        reply = self.transport.exchange(request.to_doc())
        return parse_reply(reply, request.role)

    def close(self):
        self.transport.close()


def parse_reply(reply: dict, role: str) -> DialogueAction | SearchCall:
    rtype = reply.get("type", "action")
    if rtype == "search":
        return SearchCall(query=reply.get("query", ""))
    if rtype != "action":
        raise BridgeError(f"unknown reply type {rtype!r}")
    try:
        kind = ActionKind(reply["kind"])
    except (KeyError, ValueError) as exc:
        raise BridgeError(f"bad action kind in reply: {reply!r}") from exc
    return DialogueAction(
        kind=kind, sender=role, recipient=reply.get("recipient"),
        text=reply.get("text", ""), proposal=reply.get("proposal"),
    )


def make_agent(endpoint, world, role: str):
    """Instantiate the agent behind an endpoint spec.

    Accepts AgentEndpoint, an already-built agent object, or a string spec:
    "random", "random:SEED", "oracle", "cmd:<shell command>", "tcp:HOST:PORT".
    """
    if hasattr(endpoint, "act"):
        return endpoint
    if isinstance(endpoint, AgentEndpoint):
        if endpoint.kind == "scripted-random":
            agent = RandomProposalAgent(endpoint.seed)
        elif endpoint.kind == "scripted-oracle":
            agent = OracleAgent(world)
        elif endpoint.kind == "external":
            agent = _external_agent(endpoint.address or "")
        else:
            raise ValueError(f"unknown endpoint kind {endpoint.kind!r}")
        agent.endpoint = endpoint  # drivers read the retry budget from here
        return agent
    if isinstance(endpoint, str):
        if endpoint.startswith("random"):
            seed = int(endpoint.split(":", 1)[1]) if ":" in endpoint else 0
            return RandomProposalAgent(seed)
        if endpoint == "oracle":
            return OracleAgent(world)
        return _external_agent(endpoint)
    raise TypeError(f"cannot build an agent from {endpoint!r}")


def _external_agent(address: str) -> BridgeAgent:
    if address.startswith("cmd:"):
        return BridgeAgent(StdioTransport(address[4:]))
    if address.startswith("tcp:"):
        host, port = address[4:].rsplit(":", 1)
        return BridgeAgent(TcpTransport(host, int(port)))
    raise ValueError(f"unknown external agent address {address!r}")
