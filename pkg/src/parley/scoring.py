"""Task rewards, proposal scorecards, and range normalization.

Raw rewards are computed with unrounded arithmetic; scorecards render each
component rounded half-away-from-zero to an integer, and the printed total is
the sum of the printed components so the arithmetic line always checks out.

Normalization maps legal full decisions into [0, 1]:
  matching   raw / best, both evaluated on the pooled-imputed table
  itinerary  (raw - worst) / (best - worst) over all ordered k-site tuples
  mediation  (raw - worst) / (best - worst) over all flight pairs
Extrema are re-evaluated through the same scoring path as ``raw`` so optimal
decisions land on exactly 1.0 (and worst on exactly 0.0).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import solvers
from .protocol import SchemaError
from .worlds.base import display_round, fmt_miles, fmt_number
from .worlds.itinerary import ItineraryWorld, Site
from .worlds.matching import MatchingWorld
from .worlds.mediation import USERS, MediationWorld, fmt_span

TOL = 1e-9

MEETINGS_LABEL = "Try not to skip important meetings"
PRICE_LABEL = "Get a good deal on the flight price"
CLOSENESS_LABEL = "Have everyone arrive around the same time"


@dataclass
class Component:
    label: str
    value: float                       # unrounded contribution to the total
    kind: str = "item"                 # site | travel | empty | checklist | item
    satisfied: bool | None = None      # checklist rows only
    detail: list[str] = field(default_factory=list)  # site feature lines etc.

    @property
    def display(self) -> int:
        return display_round(self.value)

    def to_doc(self) -> dict:
        return {
            "label": self.label, "value": self.value, "kind": self.kind,
            "satisfied": self.satisfied, "detail": list(self.detail),
            "display": self.display,
        }


@dataclass
class RewardBreakdown:
    task: str
    components: list[Component]
    conflicts: list = field(default_factory=list)  # mediation: overlapped events

    @property
    def total(self) -> float:
        return sum(c.value for c in self.components)

    @property
    def total_display(self) -> int:
        return sum(c.display for c in self.components)

    def to_doc(self) -> dict:
        doc = {
            "task": self.task,
            "components": [c.to_doc() for c in self.components],
            "total": self.total,
            "total_display": self.total_display,
        }
        if self.conflicts:
            doc["conflicts"] = [
                {"importance": e.importance, "times": fmt_span(e.start, e.end, False)}
                for e in self.conflicts
            ]
        return doc


@dataclass(frozen=True)
class NormalizedScore:
    raw: float
    best: float
    worst: float
    normalized: float

    def to_doc(self) -> dict:
        return {"raw": self.raw, "best": self.best, "worst": self.worst,
                "normalized": self.normalized}


def _clamp_unit(x: float) -> float:
    if x < -TOL or x > 1.0 + TOL:
        raise AssertionError(f"normalized score {x} escaped [0, 1]")
    return min(1.0, max(0.0, x))


# -- matching -----------------------------------------------------------------


def score_matching(world: MatchingWorld, payload: dict) -> NormalizedScore:
    perm = validate_matching_payload(world, payload)
    pooled = solvers.impute_pooled(world).table
    raw = solvers.matching_value(pooled, perm)
    best = solvers.best_matching(pooled)
    best_raw = solvers.matching_value(pooled, best.payload)
    return NormalizedScore(raw=raw, best=best_raw, worst=0.0,
                           normalized=_clamp_unit(raw / best_raw))


def validate_matching_payload(world: MatchingWorld, payload: dict) -> tuple[int, ...]:
    rfp = payload.get("reviewer_for_paper")
    if not isinstance(rfp, (list, tuple)) or len(rfp) != world.k:
        raise SchemaError(f"proposal must assign a reviewer to each of the {world.k} papers")
    perm = []
    seen = set()
    for j, r in enumerate(rfp):
        if not isinstance(r, int) or not 0 <= r < world.k:
            raise SchemaError(f"slot {j + 1}: unknown reviewer {r!r}")
        if r in seen:
            raise SchemaError(f"slot {j + 1}: reviewer {world.reviewers[r]} is assigned twice")
        seen.add(r)
        perm.append(r)
    return tuple(perm)


# -- itinerary ------------------------------------------------------------------


def feature_pref_delta(pref, site: Site) -> float:
    """+w on a matching feature value, -w on a conflicting one, 0 if absent."""
    if pref.feature not in site.features:
        return 0.0
    v = site.features[pref.feature]
    if pref.feature == "rating":
        ok = float(v) >= float(pref.value)
    elif isinstance(pref.value, list):
        ok = v in pref.value
    else:
        ok = v == pref.value
    return float(pref.weight) if ok else -float(pref.weight)


def site_feature_score(world: ItineraryWorld, site: Site) -> float:
    return sum(feature_pref_delta(p, site) for p in world.prefs if p.kind == "feature")


def validate_itinerary_payload(world: ItineraryWorld, payload: dict) -> list[Site | None]:
    entries = payload.get("sites")
    if not isinstance(entries, (list, tuple)) or len(entries) != world.k:
        raise SchemaError(f"itinerary must have exactly {world.k} slots")
    resolved: list[Site | None] = []
    seen = set()
    for i, name in enumerate(entries):
        if name is None:
            resolved.append(None)
            continue
        site = world.site_by_name(str(name))
        if site is None:
            raise SchemaError(f"slot {i + 1}: unknown site {name!r}")
        if site.name in seen:
            raise SchemaError(f"slot {i + 1}: {site.name} appears twice")
        seen.add(site.name)
        resolved.append(site)
    return resolved


def score_itinerary(world: ItineraryWorld, payload: dict) -> tuple[float, RewardBreakdown]:
    """Raw reward plus the user-facing breakdown for a (possibly partial) itinerary.

    The breakdown lists 2k-1 slots alternating site / travel-leg (NULL slots
    and the legs they break render as Empty), then checklist rows for the
    budget, want-to-go, and at-least-one preferences.
    """
    sites = validate_itinerary_payload(world, payload)
    theta_dist = next(p.weight for p in world.prefs if p.kind == "distance")
    components: list[Component] = []
    for i, site in enumerate(sites):
        if i > 0:
            prev = sites[i - 1]
            if prev is not None and site is not None:
                miles = world.distance_miles(prev, site)
                components.append(Component(
                    label=f"Travel from {prev.name} to {site.name}, {fmt_miles(miles)}mi",
                    value=-theta_dist * miles, kind="travel"))
            else:
                components.append(Component(label="Empty", value=0.0, kind="empty"))
        if site is None:
            components.append(Component(label="Empty", value=0.0, kind="empty"))
        else:
            detail = [f"{k}: {fmt_number(v)}" for k, v in sorted(site.features.items())]
            components.append(Component(
                label=site.name, value=site_feature_score(world, site),
                kind="site", detail=detail))

    chosen = [s for s in sites if s is not None]
    total_price = sum(s.price for s in chosen)
    names = {s.name for s in chosen}
    cats = {s.category for s in chosen}
    for p in world.prefs:
        if p.kind == "price":
            ok = total_price <= p.budget
            components.append(Component(label=p.nl, value=0.0 if ok else -float(p.weight),
                                        kind="checklist", satisfied=ok))
        elif p.kind == "want_to_go":
            ok = all(nm in names for nm in p.sites)
            components.append(Component(label=p.nl, value=float(p.weight) if ok else -float(p.weight),
                                        kind="checklist", satisfied=ok))
        elif p.kind == "at_least_one":
            ok = p.category in cats
            components.append(Component(label=p.nl, value=float(p.weight) if ok else -float(p.weight),
                                        kind="checklist", satisfied=ok))
    breakdown = RewardBreakdown(task="itinerary", components=components)
    return breakdown.total, breakdown


def itinerary_extrema(world: ItineraryWorld) -> tuple[float, float]:
    best, worst = solvers.best_worst_itinerary(world)
    best_raw, _ = score_itinerary(world, {"kind": "itinerary", "sites": list(best.payload)})
    worst_raw, _ = score_itinerary(world, {"kind": "itinerary", "sites": list(worst.payload)})
    return best_raw, worst_raw


def normalize_itinerary(world: ItineraryWorld, raw: float) -> NormalizedScore:
    best_raw, worst_raw = itinerary_extrema(world)
    return NormalizedScore(raw=raw, best=best_raw, worst=worst_raw,
                           normalized=_clamp_unit((raw - worst_raw) / (best_raw - worst_raw)))


# -- mediation ------------------------------------------------------------------


def validate_mediation_payload(world: MediationWorld, payload: dict) -> dict[str, int]:
    flights = payload.get("flights")
    if not isinstance(flights, dict) or not flights:
        raise SchemaError("proposal must name a flight for at least one user")
    out = {}
    for user, fid in flights.items():
        if user not in USERS:
            raise SchemaError(f"unknown user {user!r}")
        if not isinstance(fid, int) or not 0 <= fid < world.n_flights:
            raise SchemaError(f"{user}: unknown flight id {fid!r}")
        out[user] = fid
    return out


def user_flight_breakdown(world: MediationWorld, user: int, flight_id: int,
                          other_flight_id: int | None) -> RewardBreakdown:
    """One user's scorecard: missed meetings, price, and (when the other
    user's flight is known) the arrival-gap penalty, shown in full."""
    u = world.users[user]
    f = u.flights[flight_id]
    meet = -float(sum(e.importance for e in u.events if e.overlaps(f.depart, f.arrive)))
    price = float(world.theta_price[user]) * (float(world.mu[user]) - f.price) / float(world.mu[user])
    components = [
        Component(label=MEETINGS_LABEL, value=meet, kind="meetings"),
        Component(label=PRICE_LABEL, value=price, kind="price"),
    ]
    if other_flight_id is not None:
        other = world.users[1 - user].flights[other_flight_id]
        gap_hours = abs(f.arrive - other.arrive) / 60.0
        components.append(Component(label=CLOSENESS_LABEL,
                                    value=-world.theta_arrival * gap_hours, kind="closeness"))
    conflicts = [e for e in u.events if e.overlaps(f.depart, f.arrive)]
    return RewardBreakdown(task="mediation", components=components, conflicts=conflicts)


def score_flights(world: MediationWorld, assignment: dict) -> tuple[float, dict[str, RewardBreakdown]]:
    """Joint raw reward plus per-user breakdowns for a full assignment.

    The per-user cards show the full arrival-gap penalty (both users see the
    same number); the joint reward charges it once.
    """
    flights = validate_mediation_payload(world, assignment)
    missing = [u for u in USERS if u not in flights]
    if missing:
        raise SchemaError(f"incomplete decision: no flight for {', '.join(missing)}")
    f0, f1 = flights["user-0"], flights["user-1"]
    cards = {
        "user-0": user_flight_breakdown(world, 0, f0, f1),
        "user-1": user_flight_breakdown(world, 1, f1, f0),
    }
    per_user = []
    for card in cards.values():
        per_user.append(sum(c.value for c in card.components if c.kind in ("meetings", "price")))
    closeness = next(c.value for c in cards["user-0"].components if c.kind == "closeness")
    raw = sum(per_user) + closeness
    return raw, cards


def mediation_extrema(world: MediationWorld) -> tuple[float, float]:
    best, worst = solvers.best_worst_flightpair(world)
    best_raw, _ = score_flights(world, _pair_payload(best.payload))
    worst_raw, _ = score_flights(world, _pair_payload(worst.payload))
    return best_raw, worst_raw


def _pair_payload(pair) -> dict:
    return {"kind": "mediation", "flights": {"user-0": int(pair[0]), "user-1": int(pair[1])}}


def normalize_mediation(world: MediationWorld, raw: float) -> NormalizedScore:
    best_raw, worst_raw = mediation_extrema(world)
    return NormalizedScore(raw=raw, best=best_raw, worst=worst_raw,
                           normalized=_clamp_unit((raw - worst_raw) / (best_raw - worst_raw)))


# -- scorecard text -------------------------------------------------------------


def _signed(n: int) -> str:
    return f"+{n}" if n >= 0 else str(n)


def render_feedback(breakdown: RewardBreakdown, task: str) -> str:
    if task == "itinerary":
        return _render_itinerary_card(breakdown)
    if task == "mediation":
        return _render_mediation_card(breakdown)
    raise ValueError(f"no scorecard format for task {task!r}")


def _render_itinerary_card(breakdown: RewardBreakdown) -> str:
    lines = ["Proposal Score:"]
    slot = 0
    for c in breakdown.components:
        if c.kind == "checklist":
            continue
        slot += 1
        if c.kind == "empty":
            lines.append(f"{slot}) Empty")
        else:
            lines.append(f"{slot}) (score: {c.display}) {c.label}")
            lines.extend(c.detail)
    lines.append("")
    lines.append("Overall Checklist:")
    for c in breakdown.components:
        if c.kind != "checklist":
            continue
        yn = "YES" if c.satisfied else "NO"
        lines.append(f"{yn} (score: {c.display}) {c.label}")
    arithmetic = "".join(_signed(c.display) for c in breakdown.components)
    lines.append(f"TOTAL SCORE: {arithmetic}={breakdown.total_display}")
    return "\n".join(lines)


def _render_mediation_card(breakdown: RewardBreakdown) -> str:
    lines = []
    if breakdown.conflicts:
        lines.append("Conflicting meetings:")
        for e in breakdown.conflicts:
            lines.append("importance | times")
            lines.append(f"({e.importance}) | {fmt_span(e.start, e.end, False)}")
    lines.append("Score:")
    for c in breakdown.components:
        lines.append(f"- ({c.display}) {c.label}")
    lines.append(f"Total score: {breakdown.total_display}")
    return "\n".join(lines)


_SLOT_RE = re.compile(r"^(\d+)\) \(score: (-?\d+)\) (.*)$")
_CHECK_RE = re.compile(r"^(YES|NO) \(score: (-?\d+)\) (.*)$")


def parse_itinerary_card(text: str) -> dict:
    """Structural parse of a rendered itinerary scorecard (display values)."""
    lines = text.split("\n")
    if lines[0] != "Proposal Score:":
        raise ValueError("not an itinerary scorecard")
    slots, checklist = [], []
    i = 1
    current = None
    while i < len(lines) and lines[i] != "":
        m = _SLOT_RE.match(lines[i])
        if m:
            current = {"slot": int(m.group(1)), "score": int(m.group(2)),
                       "label": m.group(3), "detail": []}
            slots.append(current)
        elif re.match(r"^\d+\) Empty$", lines[i]):
            slots.append({"slot": int(lines[i].split(")")[0]), "score": None,
                          "label": "Empty", "detail": []})
            current = None
        elif current is not None:
            current["detail"].append(lines[i])
        else:
            raise ValueError(f"unparseable scorecard line: {lines[i]!r}")
        i += 1
    if lines[i + 1] != "Overall Checklist:":
        raise ValueError("missing checklist header")
    i += 2
    while i < len(lines) and not lines[i].startswith("TOTAL SCORE:"):
        m = _CHECK_RE.match(lines[i])
        if not m:
            raise ValueError(f"unparseable checklist line: {lines[i]!r}")
        checklist.append({"satisfied": m.group(1) == "YES", "score": int(m.group(2)),
                          "label": m.group(3)})
        i += 1
    arithmetic, total = lines[i][len("TOTAL SCORE: "):].split("=")
    return {"slots": slots, "checklist": checklist,
            "arithmetic": arithmetic, "total": int(total)}


def render_parsed_itinerary_card(parsed: dict) -> str:
    lines = ["Proposal Score:"]
    for s in parsed["slots"]:
        if s["score"] is None:
            lines.append(f"{s['slot']}) Empty")
        else:
            lines.append(f"{s['slot']}) (score: {s['score']}) {s['label']}")
            lines.extend(s["detail"])
    lines += ["", "Overall Checklist:"]
    for c in parsed["checklist"]:
        yn = "YES" if c["satisfied"] else "NO"
        lines.append(f"{yn} (score: {c['score']}) {c['label']}")
    lines.append(f"TOTAL SCORE: {parsed['arithmetic']}={parsed['total']}")
    return "\n".join(lines)
