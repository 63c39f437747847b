"""Live session service: create/join sessions, stream role-filtered frames,
accept actions, serve scorecards and logs.

Every role gets an unguessable ticket token at creation. Frames are numbered
gaplessly per role, so a client that reconnects with ``since=n`` receives
exactly the frames it missed. A role's frames carry only that role's view of
the world and the transcript events it is entitled to see; scorecards go to
the proposal's recipients only. Scripted roles act automatically whenever the
turn reaches them.
"""

from __future__ import annotations

import secrets
import threading
import time
from dataclasses import dataclass, field
from typing import Optional

from fastapi import Body, FastAPI, HTTPException, Query, WebSocket
from fastapi.responses import PlainTextResponse

from . import agents as agentlib
from . import rules as task_rules
from .episodes import EpisodeRecorder
from .protocol import ActionKind, DialogueAction, ProtocolError, Session
from .worlds import TASKS, generate

ROLE_KINDS = ("human", "external", "scripted-random", "scripted-oracle")


@dataclass
class SessionRecord:
    session_id: str
    task: str
    seed: int
    params: dict
    session: Session
    roles: dict[str, str]                  # role -> kind
    tokens: dict[str, str]                 # token -> role
    recorder: EpisodeRecorder
    disclose_final: bool = True
    frames: dict[str, list[dict]] = field(default_factory=dict)
    agents: dict[str, object] = field(default_factory=dict)
    lock: threading.RLock = field(default_factory=threading.RLock)
    created_at: float = field(default_factory=time.time)
    finished: bool = False
    final_score: Optional[dict] = None

    def push(self, role: str, frame: dict) -> None:
        seq = len(self.frames[role]) + 1
        self.frames[role].append({"seq": seq, **frame})


class SessionStore:
    def __init__(self):
        self._records: dict[str, SessionRecord] = {}
        self._lock = threading.Lock()

    def create(self, task: str, seed: Optional[int], params: dict,
               roles: dict[str, str], agent_seed: int = 0,
               disclose_final: bool = True) -> SessionRecord:
        if task not in TASKS:
            raise ValueError(f"unknown task {task!r}")
        if seed is None:
            seed = secrets.randbelow(2**31)
        world = generate(task, seed, params)
        session = task_rules.new_session(world)
        expected = set(session.rules.actors)
        roles = {**{r: "human" for r in expected}, **(roles or {})}
        if set(roles) != expected:
            raise ValueError(f"roles must cover exactly {sorted(expected)}")
        for role, kind in roles.items():
            if kind not in ROLE_KINDS:
                raise ValueError(f"unknown role kind {kind!r} for {role}")
        record = SessionRecord(
            session_id=secrets.token_urlsafe(8),
            task=task, seed=seed, params=dict(params),
            session=session, roles=roles,
            tokens={secrets.token_urlsafe(24): role for role in roles},
            recorder=EpisodeRecorder(task, seed, params, session.rules.actors, mode="service"),
            disclose_final=disclose_final,
            frames={role: [] for role in roles},
        )
        for role, kind in roles.items():
            if kind.startswith("scripted"):
                endpoint = agentlib.AgentEndpoint(kind=kind, seed=agent_seed)
                record.agents[role] = agentlib.make_agent(endpoint, world, role)
        with self._lock:
            self._records[record.session_id] = record
        with record.lock:
            _run_scripted(record)
        return record

    def get(self, session_id: str) -> SessionRecord:
        with self._lock:
            record = self._records.get(session_id)
        if record is None:
            raise HTTPException(status_code=404, detail="no such session")
        return record

    def list(self) -> list[SessionRecord]:
        with self._lock:
            return list(self._records.values())


def _role_for_token(record: SessionRecord, token: str) -> str:
    role = record.tokens.get(token or "")
    if role is None:
        raise HTTPException(status_code=401, detail="invalid token")
    return role


def _broadcast_transition(record: SessionRecord, tr) -> None:
    action = tr.action
    audience = set(tr.delivered_to) | {action.sender}
    for role in record.roles:
        if role not in audience:
            continue
        if action.kind == ActionKind.PROPOSE:
            payload = action.proposal
            if record.task == "mediation" and role in ("user-0", "user-1"):
                payload = {"kind": "mediation",
                           "flights": {role: action.proposal["flights"][role]}
                           if role in action.proposal["flights"] else {}}
            record.push(role, {
                "type": "proposal", "sender": action.sender, "payload": payload,
                "rendered": task_rules.render_proposal(record.session.world, action.proposal, role),
                "text": action.text,
            })
        elif action.kind in (ActionKind.ACCEPT, ActionKind.REJECT):
            record.push(role, {"type": "response", "sender": action.sender,
                               "kind": action.kind.value})
        else:
            record.push(role, {
                "type": "chat", "sender": action.sender, "recipient": action.recipient,
                "kind": action.kind.value, "text": action.text,
            })
    for role, fb in (tr.feedback or {}).items():
        if role in record.roles:
            record.push(role, {"type": "feedback", "text": fb["text"],
                               "breakdown": fb["breakdown"]})
    if tr.terminal:
        _finish(record)


def _finish(record: SessionRecord) -> None:
    session = record.session
    score = task_rules.final_score(session.world, session.final_payload)
    record.final_score = score.to_doc()
    record.finished = True
    record.recorder.finish(session, record.final_score,
                           wall_clock_s=time.time() - record.created_at)
    for role in record.roles:
        frame = {"type": "termination", "status": session.status.value}
        if record.disclose_final:
            frame["final_score"] = score.normalized
        record.push(role, frame)


def _mark_capped(record: SessionRecord) -> None:
    record.finished = True
    record.recorder.finish(record.session, None, wall_clock_s=time.time() - record.created_at)
    for role in record.roles:
        record.push(role, {"type": "termination", "status": record.session.status.value})


def _run_scripted(record: SessionRecord) -> None:
    """Advance scripted roles until a human/external turn, termination, or cap."""
    session = record.session
    while session.live:
        role = session.turn_actor()
        agent = record.agents.get(role)
        if agent is None:
            return
        tr = agentlib.request_action(agent, session, role, session_id=record.session_id,
                                     on_search=record.recorder.on_search)
        record.recorder.on_transition(tr)
        _broadcast_transition(record, tr)
    if not session.terminal and not record.finished:
        _mark_capped(record)


def _apply_action(record: SessionRecord, role: str, body: dict) -> dict:
    session = record.session
    if not session.live:
        raise HTTPException(status_code=409, detail="session is finished")
    try:
        kind = ActionKind(body.get("kind", ""))
    except ValueError:
        raise HTTPException(status_code=422, detail=f"unknown action kind {body.get('kind')!r}")
    action = DialogueAction(kind=kind, sender=role, recipient=body.get("recipient"),
                            text=body.get("text", ""), proposal=body.get("proposal"))
    if session.turn_actor() != role:
        raise HTTPException(status_code=409, detail={
            "error": f"it is {session.turn_actor()}'s turn", "retriable": True})
    try:
        tr = session.submit(action)
    except ProtocolError as exc:
        raise HTTPException(status_code=422, detail={"error": str(exc),
                                                     "retriable": exc.retriable})
    record.recorder.on_transition(tr)
    _broadcast_transition(record, tr)
    if session.live:
        _run_scripted(record)
    elif not session.terminal and not record.finished:
        _mark_capped(record)
    return {"ok": True, "terminal": not session.live}


def create_app(store: Optional[SessionStore] = None, static_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="parley session service")
    app.state.store = store or SessionStore()

    def _store() -> SessionStore:
        return app.state.store

    @app.post("/sessions")
    def create_session(body: dict = Body(default_factory=dict)):
        try:
            record = _store().create(
                task=body.get("task", ""),
                seed=body.get("seed"),
                params=body.get("params") or {},
                roles=body.get("roles") or {},
                agent_seed=int(body.get("agent_seed", 0)),
                disclose_final=bool(body.get("disclose_final", True)),
            )
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return {
            "session_id": record.session_id,
            "task": record.task,
            "seed": record.seed,
            "actors": list(record.session.rules.actors),
            "tickets": {role: token for token, role in record.tokens.items()
                        if record.roles[role] in ("human", "external")},
        }

    @app.get("/sessions")
    def list_sessions():
        return [{
            "session_id": r.session_id, "task": r.task,
            "status": r.session.status.value, "actors": list(r.session.rules.actors),
            "roles": r.roles,
        } for r in _store().list()]

    @app.get("/sessions/{session_id}")
    def session_summary(session_id: str):
        r = _store().get(session_id)
        return {"session_id": r.session_id, "task": r.task,
                "status": r.session.status.value, "roles": r.roles}

    @app.get("/sessions/{session_id}/view")
    def session_view(session_id: str, token: str = Query("")):
        record = _store().get(session_id)
        role = _role_for_token(record, token)
        with record.lock:
            session = record.session
            legal = sorted(k.value for k in session.legal_actions(role)) if session.live else []
            return {
                "role": role,
                "task": record.task,
                "status": session.status.value,
                "observation": task_rules.render_observation(session.world, role),
                "view": task_rules.view_for(session.world, role),
                "your_turn": session.live and session.turn_actor() == role,
                "legal": legal,
            }

    @app.get("/sessions/{session_id}/events")
    def session_events(session_id: str, token: str = Query(""), since: int = Query(0)):
        record = _store().get(session_id)
        role = _role_for_token(record, token)
        with record.lock:
            frames = [f for f in record.frames[role] if f["seq"] > since]
            session = record.session
            return {
                "frames": frames,
                "status": session.status.value,
                "your_turn": session.live and session.turn_actor() == role,
            }

    @app.post("/sessions/{session_id}/actions")
    def post_action(session_id: str, body: dict = Body(...)):
        record = _store().get(session_id)
        role = _role_for_token(record, str(body.get("token", "")))
        with record.lock:
            return _apply_action(record, role, body)

    @app.post("/sessions/{session_id}/search")
    def post_search(session_id: str, body: dict = Body(...)):
        record = _store().get(session_id)
        role = _role_for_token(record, str(body.get("token", "")))
        with record.lock:
            result = agentlib.run_search_for(record.session, role, body.get("query", ""))
            record.recorder.on_search(role, body.get("query", ""), result)
            return {"result": result}

    @app.get("/sessions/{session_id}/log", response_class=PlainTextResponse)
    def session_log(session_id: str, token: str = Query("")):
        record = _store().get(session_id)
        _role_for_token(record, token)
        with record.lock:
            if record.session.live:
                raise HTTPException(status_code=409, detail="session still running")
            return "\n".join(record.recorder.log.to_lines()) + "\n"

    @app.websocket("/sessions/{session_id}/ws")
    async def session_ws(ws: WebSocket):
        await ws.accept()
        session_id = ws.path_params["session_id"]
        token = ws.query_params.get("token", "")
        since = int(ws.query_params.get("since", 0))
        try:
            record = _store().get(session_id)
            role = _role_for_token(record, token)
        except HTTPException as exc:
            await ws.send_json({"type": "error", "error": str(exc.detail)})
            await ws.close()
            return
        sent = since

        def pending_frames() -> list[dict]:
            with record.lock:
                return [f for f in record.frames[role] if f["seq"] > sent]

        for frame in pending_frames():
            await ws.send_json(frame)
            sent = frame["seq"]
        while True:
            try:
                msg = await ws.receive_json()
            except Exception:  # noqa: BLE001 - disconnects come in many flavors
                return
            reply = None
            if msg.get("type") == "action":
                try:
                    with record.lock:
                        _apply_action(record, role, msg.get("action") or {})
                    reply = {"type": "ack"}
                except HTTPException as exc:
                    reply = {"type": "error", "error": exc.detail}
            if reply is not None:
                await ws.send_json(reply)
            for frame in pending_frames():
                await ws.send_json(frame)
                sent = frame["seq"]

    if static_dir:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
