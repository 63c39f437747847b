"""Group flight mediation worlds.

Two users each hold a calendar (personal events only they can see, work
events also visible to the assistant, importances always hidden from the
assistant) and a list of F flights. Calendars come from walking the 3-day
window slot by slot: each slot's duration is drawn from {30m, 1h, 2h, 4h}
and becomes an event with probability ``p_event``, so events may touch but
never overlap. A fraction ``f_shared`` of events land on the work calendar.

Flight prices are Normal(mu_i, mu_i) with a $50 floor so each user's price
scale feels coherent; departure times are uniform minutes over the window
and durations uniform in [1, 10] hours. Preference weights: a per-user price
weight from Uniform[1, 20] and one shared per-hour arrival-gap weight from
Uniform[1, 10].
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta

import numpy as np

from .base import GenerationError, display_round, load_data, rng_for

ACTORS = ("user-0", "user-1", "assistant")
USERS = ("user-0", "user-1")
DEFAULT_P_EVENT = 0.35
DEFAULT_F_SHARED = 0.75
DEFAULT_F = 30
WINDOW_START = datetime(2023, 5, 31)
WINDOW_MINUTES = 3 * 24 * 60
SLOT_MINUTES = (30, 60, 120, 240)
PRICE_FLOOR = 50
MAX_DRAWS = 100


@dataclass
class CalendarEvent:
    id: int
    start: int        # minutes from window start
    end: int
    importance: int   # 1..10, hidden from the assistant
    shared: bool      # work calendar, visible to the assistant

    def overlaps(self, lo: int, hi: int) -> bool:
        # half-open intervals: an event ending exactly at departure is kept
        return self.start < hi and lo < self.end

    def to_doc(self) -> dict:
        return {"id": self.id, "start": self.start, "end": self.end,
                "importance": self.importance, "shared": self.shared}

    @staticmethod
    def from_doc(d: dict) -> "CalendarEvent":
        return CalendarEvent(d["id"], d["start"], d["end"], d["importance"], d["shared"])


@dataclass
class Flight:
    id: int
    carrier: str
    price: int
    depart: int       # minutes from window start
    arrive: int

    def to_doc(self) -> dict:
        return {"id": self.id, "carrier": self.carrier, "price": self.price,
                "depart": self.depart, "arrive": self.arrive}

    @staticmethod
    def from_doc(d: dict) -> "Flight":
        return Flight(d["id"], d["carrier"], d["price"], d["depart"], d["arrive"])


@dataclass
class MediationUser:
    flights: list[Flight]
    events: list[CalendarEvent]

    @property
    def personal_events(self) -> list[CalendarEvent]:
        return [e for e in self.events if not e.shared]

    @property
    def shared_events(self) -> list[CalendarEvent]:
        return [e for e in self.events if e.shared]


@dataclass
class MediationWorld:
    task: str
    seed: int
    p_event: float
    f_shared: float
    n_flights: int
    users: list[MediationUser]
    theta_price: np.ndarray    # (2,) per-user
    theta_arrival: float       # shared per-hour arrival-gap weight
    mu: np.ndarray             # (2,) price distribution mean == std

    @property
    def actors(self) -> tuple[str, ...]:
        return ACTORS

    def params(self) -> dict:
        return {"p_event": self.p_event, "f_shared": self.f_shared, "n_flights": self.n_flights}

    def to_doc(self) -> dict:
        return {
            "task": self.task,
            "seed": self.seed,
            "params": self.params(),
            "world": {
                "theta_price": self.theta_price.tolist(),
                "theta_arrival": self.theta_arrival,
                "mu": self.mu.tolist(),
                "users": [
                    {
                        "flights": [f.to_doc() for f in u.flights],
                        "events": [e.to_doc() for e in u.events],
                    }
                    for u in self.users
                ],
            },
        }

    @staticmethod
    def from_doc(doc: dict) -> "MediationWorld":
        w = doc["world"]
        return MediationWorld(
            task="mediation", seed=doc["seed"],
            p_event=doc["params"]["p_event"], f_shared=doc["params"]["f_shared"],
            n_flights=doc["params"]["n_flights"],
            users=[
                MediationUser(
                    flights=[Flight.from_doc(f) for f in u["flights"]],
                    events=[CalendarEvent.from_doc(e) for e in u["events"]],
                )
                for u in w["users"]
            ],
            theta_price=np.asarray(w["theta_price"], dtype=float),
            theta_arrival=float(w["theta_arrival"]),
            mu=np.asarray(w["mu"], dtype=float),
        )


def _calendar_events(rng, p_event: float, f_shared: float) -> list[CalendarEvent]:
    spans = []
    t = 0
    while True:
        dur = SLOT_MINUTES[int(rng.integers(0, len(SLOT_MINUTES)))]
        if t + dur > WINDOW_MINUTES:
            break
        if rng.random() < p_event:
            spans.append((t, t + dur))
        t += dur
    shared = rng.random(len(spans)) < f_shared
    importance = rng.integers(1, 11, size=len(spans))
    order = rng.permutation(len(spans))
    events, next_id = [], {True: 0, False: 0}
    for pos in order:
        s, e = spans[int(pos)]
        is_shared = bool(shared[int(pos)])
        events.append(CalendarEvent(next_id[is_shared], s, e, int(importance[int(pos)]), is_shared))
        next_id[is_shared] += 1
    return events


def _flights(rng, mu: float, n_flights: int) -> list[Flight]:
    carriers = load_data("matching_names")["carriers"]
    rows = []
    for _ in range(n_flights):
        depart = int(rng.integers(0, WINDOW_MINUTES))
        duration = int(rng.integers(60, 601))  # 1..10 hours, minute granularity
        carrier = carriers[int(rng.integers(0, len(carriers)))]
        price = max(PRICE_FLOOR, display_round(float(rng.normal(mu, mu))))
        rows.append((depart, duration, carrier, price))
    rows.sort(key=lambda r: (r[0], r[1]))
    return [Flight(i, carrier, price, dep, dep + dur)
            for i, (dep, dur, carrier, price) in enumerate(rows)]


def gen_mediation(seed: int, p_event: float = DEFAULT_P_EVENT,
                  f_shared: float = DEFAULT_F_SHARED, n_flights: int = DEFAULT_F) -> MediationWorld:
    if not 0.0 < p_event < 1.0 or not 0.0 <= f_shared <= 1.0 or n_flights < 1:
        raise ValueError("parameters out of range")
    from .. import solvers  # deferred: solvers depends on world types

    rng = rng_for("mediation", seed)
    for _ in range(MAX_DRAWS):
        mu = rng.uniform(50.0, 1000.0, size=2)
        users = []
        for i in range(2):
            events = _calendar_events(rng, p_event, f_shared)
            flights = _flights(rng, float(mu[i]), n_flights)
            users.append(MediationUser(flights=flights, events=events))
        world = MediationWorld(
            task="mediation", seed=seed, p_event=p_event, f_shared=f_shared,
            n_flights=n_flights, users=users,
            theta_price=rng.uniform(1.0, 20.0, size=2),
            theta_arrival=float(rng.uniform(1.0, 10.0)),
            mu=mu,
        )
        best, worst = solvers.best_worst_flightpair(world)
        if best.value > worst.value:
            return world
    raise GenerationError(f"degenerate mediation world for seed {seed}", seed=seed)


# -- rendering ---------------------------------------------------------------

def _clock(minutes: int, force_minutes: bool) -> str:
    dt = WINDOW_START + timedelta(minutes=minutes)
    hour12 = (dt.hour + 11) % 12 + 1
    ampm = "AM" if dt.hour < 12 else "PM"
    if force_minutes or dt.minute:
        return f"{hour12}:{dt.minute:02d} {ampm}"
    return f"{hour12} {ampm}"


def _date(minutes: int) -> str:
    dt = WINDOW_START + timedelta(minutes=minutes)
    return f"{dt.month}/{dt.day}"


def fmt_span(start: int, end: int, force_minutes: bool) -> str:
    return f"{_date(start)} {_clock(start, force_minutes)} - {_clock(end, force_minutes)}"


def flight_row(f: Flight) -> str:
    return f"{f.id} | {f.carrier} | {f.price} | {fmt_span(f.depart, f.arrive, True)}"


def _flight_block(flights: list[Flight]) -> list[str]:
    return ["Flights:", "id | carrier | price | times"] + [flight_row(f) for f in flights]


def render_observation(world: MediationWorld, actor: str) -> str:
    if actor in USERS:
        u = world.users[USERS.index(actor)]
        lines = _flight_block(u.flights)
        lines += ["Private calendar:", "id | importance | times"]
        lines += [f"{e.id} | ({e.importance}) | {fmt_span(e.start, e.end, False)}"
                  for e in u.personal_events]
        lines += ["Shared calendar (visible to assistant):", "id | importance | times"]
        lines += [f"{e.id} | ({e.importance}) | {fmt_span(e.start, e.end, False)}"
                  for e in u.shared_events]
        return "\n".join(lines)
    if actor == "assistant":
        lines = []
        for i, u in enumerate(world.users):
            lines.append(f"User {i} Information")
            lines += _flight_block(u.flights)
            lines += ["Calendar:", "id | times"]
            lines += [f"{e.id} | {fmt_span(e.start, e.end, False)}" for e in u.shared_events]
        return "\n".join(lines)
    raise ValueError(f"unknown actor {actor!r}")


def view_for(world: MediationWorld, actor: str) -> dict:
    def flight_doc(f: Flight) -> dict:
        return {"id": f.id, "carrier": f.carrier, "price": f.price,
                "times": fmt_span(f.depart, f.arrive, True)}

    if actor in USERS:
        u = world.users[USERS.index(actor)]
        return {
            "task": "mediation", "role": actor,
            "flights": [flight_doc(f) for f in u.flights],
            "personal_calendar": [
                {"id": e.id, "importance": e.importance, "times": fmt_span(e.start, e.end, False)}
                for e in u.personal_events
            ],
            "shared_calendar": [
                {"id": e.id, "importance": e.importance, "times": fmt_span(e.start, e.end, False)}
                for e in u.shared_events
            ],
        }
    if actor == "assistant":
        return {
            "task": "mediation", "role": "assistant",
            "users": [
                {
                    "flights": [flight_doc(f) for f in u.flights],
                    "work_calendar": [
                        {"id": e.id, "times": fmt_span(e.start, e.end, False)}
                        for e in u.shared_events
                    ],
                }
                for u in world.users
            ],
        }
    raise ValueError(f"unknown actor {actor!r}")


def render_proposal(world: MediationWorld, payload: dict, for_actor: str) -> str:
    """Addressed users see only their own flight line; the assistant sees all."""
    flights = payload["flights"]
    if for_actor in USERS:
        fid = flights.get(for_actor)
        if fid is None:
            return ""
        return flight_row(world.users[USERS.index(for_actor)].flights[fid])
    lines = []
    for user in USERS:
        if user in flights:
            idx = USERS.index(user)
            lines.append(f"Flight for user {idx}: "
                         f"{flight_row(world.users[idx].flights[flights[user]])}")
    return "\n".join(lines)
