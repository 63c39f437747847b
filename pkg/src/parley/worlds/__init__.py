"""Seeded procedural world generation and per-role observation rendering."""

from .base import GenerationError, load_data, display_round
from .matching import MatchingWorld, gen_matching
from .itinerary import ItineraryWorld, Site, Preference, gen_itinerary
from .mediation import MediationWorld, Flight, CalendarEvent, gen_mediation

TASKS = ("matching", "itinerary", "mediation")


def generate(task: str, seed: int, params: dict | None = None):
    """Generate the world for a task from a seed. Pure in (task, seed, params)."""
    params = dict(params or {})
    if task == "matching":
        return gen_matching(seed, **params)
    if task == "itinerary":
        return gen_itinerary(seed, **params)
    if task == "mediation":
        return gen_mediation(seed, **params)
    raise ValueError(f"unknown task {task!r}")


def world_from_doc(doc: dict):
    """Rehydrate a world from its self-describing document."""
    task = doc["task"]
    if task == "matching":
        return MatchingWorld.from_doc(doc)
    if task == "itinerary":
        return ItineraryWorld.from_doc(doc)
    if task == "mediation":
        return MediationWorld.from_doc(doc)
    raise ValueError(f"unknown task {task!r}")
