"""Per-task protocol wiring: rosters, proposer rights, payload schemas, feedback.

Turn order: 2-actor tasks strictly alternate (matching starts with agent-0,
itinerary with the user); mediation cycles user-0 -> user-1 -> assistant and
the assistant must address each message to one user. Proposal rights: both
matching agents may propose; only the assistant proposes in itinerary and
mediation.
"""

from __future__ import annotations

from typing import Any

from . import scoring
from .protocol import Session, TaskRules
from .worlds import itinerary as itinerary_world
from .worlds import matching as matching_world
from .worlds import mediation as mediation_world
from .worlds.itinerary import ItineraryWorld
from .worlds.matching import MatchingWorld
from .worlds.mediation import USERS, MediationWorld

ACTION_CAPS = {"matching": 30, "itinerary": 30, "mediation": 45}


def _matching_rules(cap: int | None) -> TaskRules:
    def validate(payload: dict, world: MatchingWorld) -> None:
        scoring.validate_matching_payload(world, payload)

    def addressees(payload: dict, world: MatchingWorld) -> tuple[str, ...]:
        # the responder is whoever did not propose; resolved at propose time
        return ()

    return TaskRules(
        task="matching",
        actors=matching_world.ACTORS,
        proposers=frozenset(matching_world.ACTORS),
        recipient_required_for=frozenset(),
        action_cap=cap or ACTION_CAPS["matching"],
        validate_proposal=validate,
        is_full=lambda payload, world: True,  # payloads are always full permutations
        addressees=addressees,
        feedback=lambda world, payload, session: {},  # no scorecards in matching
    )


def _itinerary_rules(cap: int | None) -> TaskRules:
    def validate(payload: dict, world: ItineraryWorld) -> None:
        scoring.validate_itinerary_payload(world, payload)

    def is_full(payload: dict, world: ItineraryWorld) -> bool:
        return all(name is not None for name in payload["sites"])

    def feedback(world: ItineraryWorld, payload: dict, session: Session) -> dict[str, dict]:
        _, breakdown = scoring.score_itinerary(world, payload)
        return {"user": {
            "text": scoring.render_feedback(breakdown, "itinerary"),
            "breakdown": breakdown.to_doc(),
        }}

    return TaskRules(
        task="itinerary",
        actors=itinerary_world.ACTORS,  # user first
        proposers=frozenset({"assistant"}),
        recipient_required_for=frozenset(),
        action_cap=cap or ACTION_CAPS["itinerary"],
        validate_proposal=validate,
        is_full=is_full,
        addressees=lambda payload, world: ("user",),
        feedback=feedback,
    )


def _mediation_rules(cap: int | None) -> TaskRules:
    def validate(payload: dict, world: MediationWorld) -> None:
        scoring.validate_mediation_payload(world, payload)

    def is_full(payload: dict, world: MediationWorld) -> bool:
        return all(u in payload["flights"] for u in USERS)

    def addressees(payload: dict, world: MediationWorld) -> tuple[str, ...]:
        return tuple(u for u in USERS if u in payload["flights"])

    def feedback(world: MediationWorld, payload: dict, session: Session) -> dict[str, dict]:
        out: dict[str, dict] = {}
        flights = payload["flights"]
        for user in USERS:
            if user not in flights:
                continue
            idx = USERS.index(user)
            other = USERS[1 - idx]
            # the gap line only appears when the other user's flight is known:
            # from this same proposal, or a previously locked-in partial
            other_fid = flights.get(other, session.tentative.get(other))
            card = scoring.user_flight_breakdown(world, idx, flights[user], other_fid)
            out[user] = {
                "text": scoring.render_feedback(card, "mediation"),
                "breakdown": card.to_doc(),
            }
        return out

    return TaskRules(
        task="mediation",
        actors=mediation_world.ACTORS,  # user-0 -> user-1 -> assistant
        proposers=frozenset({"assistant"}),
        recipient_required_for=frozenset({"assistant"}),
        action_cap=cap or ACTION_CAPS["mediation"],
        validate_proposal=validate,
        is_full=is_full,
        addressees=addressees,
        feedback=feedback,
        # users coordinate only through the assistant and never see each other
        peers={"user-0": ("assistant",), "user-1": ("assistant",),
               "assistant": ("user-0", "user-1")},
    )


def rules_for(world: Any, action_cap: int | None = None) -> TaskRules:
    if isinstance(world, MatchingWorld):
        return _matching_rules(action_cap)
    if isinstance(world, ItineraryWorld):
        return _itinerary_rules(action_cap)
    if isinstance(world, MediationWorld):
        return _mediation_rules(action_cap)
    raise TypeError(f"no rules for {type(world).__name__}")


def new_session(world: Any, action_cap: int | None = None) -> Session:
    return Session(rules_for(world, action_cap), world)


def final_score(world: Any, payload: dict) -> scoring.NormalizedScore:
    """Normalized score of the accepted final decision."""
    if isinstance(world, MatchingWorld):
        return scoring.score_matching(world, payload)
    if isinstance(world, ItineraryWorld):
        raw, _ = scoring.score_itinerary(world, payload)
        return scoring.normalize_itinerary(world, raw)
    if isinstance(world, MediationWorld):
        raw, _ = scoring.score_flights(world, payload)
        return scoring.normalize_mediation(world, raw)
    raise TypeError(f"no scorer for {type(world).__name__}")


def render_observation(world: Any, actor: str) -> str:
    if isinstance(world, MatchingWorld):
        return matching_world.render_observation(world, actor)
    if isinstance(world, ItineraryWorld):
        return itinerary_world.render_observation(world, actor)
    if isinstance(world, MediationWorld):
        return mediation_world.render_observation(world, actor)
    raise TypeError(f"no observation renderer for {type(world).__name__}")


def view_for(world: Any, actor: str) -> dict:
    if isinstance(world, MatchingWorld):
        return matching_world.view_for(world, actor)
    if isinstance(world, ItineraryWorld):
        return itinerary_world.view_for(world, actor)
    if isinstance(world, MediationWorld):
        return mediation_world.view_for(world, actor)
    raise TypeError(f"no view for {type(world).__name__}")


def render_proposal(world: Any, payload: dict, for_actor: str) -> str:
    if isinstance(world, MatchingWorld):
        return matching_world.render_proposal(world, payload)
    if isinstance(world, ItineraryWorld):
        return itinerary_world.render_proposal(payload)
    if isinstance(world, MediationWorld):
        return mediation_world.render_proposal(world, payload, for_actor)
    raise TypeError(f"no proposal renderer for {type(world).__name__}")
