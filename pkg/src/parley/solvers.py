"""Exact decision oracles: optimal matchings, itineraries, and flight pairs.

These back reward normalization, worldgen rejection sampling, and the oracle
agent. All of them are exhaustive (k=8 matchings are 40,320 permutations,
k=3 itineraries 54,834 ordered triples, flight pairs 900 combinations), so
the answers are unambiguous; ties break to the lexicographically smallest
decision for replay determinism.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .worlds.itinerary import ItineraryWorld
from .worlds.matching import MatchingWorld
from .worlds.mediation import MediationWorld

PRIOR_MEAN = 50.0  # expectation of Uniform[0, 100]
MAX_ENUM_K = 9


class CapabilityError(Exception):
    """Requested an exhaustive sweep beyond the supported size."""


@dataclass(frozen=True)
class DecisionValue:
    payload: tuple
    value: float


@dataclass
class ImputedTable:
    table: np.ndarray
    # provenance codes: 0 imputed, 1 observed-by-0, 2 observed-by-1, 3 observed-by-both
    provenance: np.ndarray


@lru_cache(maxsize=4)
def _all_perms(k: int) -> np.ndarray:
    if k > MAX_ENUM_K:
        raise CapabilityError(f"exhaustive matching only supported up to k={MAX_ENUM_K}")
    return np.array(list(itertools.permutations(range(k))), dtype=np.intp)


def matching_value(table: np.ndarray, perm) -> float:
    """Sum of selected cells in paper order; shared by solver, scorer, tests."""
    total = 0.0
    for j, r in enumerate(perm):
        total += float(table[r, j])
    return total


def best_matching(table: np.ndarray) -> DecisionValue:
    """Maximum-total-weight assignment of one reviewer per paper.

    ``payload[j]`` is the reviewer index for paper j; ties resolve to the
    lexicographically smallest permutation.
    """
    table = np.asarray(table, dtype=float)
    if table.ndim != 2 or table.shape[0] != table.shape[1]:
        raise ValueError("table must be square")
    if not np.isfinite(table).all():
        raise ValueError("table must be finite")
    k = table.shape[0]
    perms = _all_perms(k)
    values = table[perms, np.arange(k)].sum(axis=1)
    idx = int(np.argmax(values))  # perms are in lex order; argmax takes the first
    perm = tuple(int(r) for r in perms[idx])
    return DecisionValue(perm, matching_value(table, perm))


def impute_pooled(world: MatchingWorld) -> ImputedTable:
    """Union of both players' observations, prior mean elsewhere."""
    seen0, seen1 = world.masks[0], world.masks[1]
    union = seen0 | seen1
    table = np.where(union, world.table, PRIOR_MEAN)
    provenance = seen0.astype(int) + 2 * seen1.astype(int)
    return ImputedTable(table=table, provenance=provenance)


def impute_solo(world: MatchingWorld, player: int) -> np.ndarray:
    return np.where(world.masks[player], world.table, PRIOR_MEAN)


def solo_plan_value(world: MatchingWorld, player: int) -> float:
    """What the player's own-information plan is worth under pooled knowledge."""
    plan = best_matching(impute_solo(world, player)).payload
    pooled = impute_pooled(world).table
    return matching_value(pooled, plan)


# -- itineraries ---------------------------------------------------------------


def itinerary_value_parts(world: ItineraryWorld):
    """Vectorized ingredients of the itinerary reward over the site database."""
    from . import scoring  # deferred: scoring depends on world types too

    n = len(world.sites)
    base = np.array([scoring.site_feature_score(world, s) for s in world.sites])
    prices = np.array([s.price for s in world.sites])
    theta_dist = next(p.weight for p in world.prefs if p.kind == "distance")
    locs = np.array([s.loc for s in world.sites])
    diff = locs[:, None, :] - locs[None, :, :]
    travel = np.hypot(diff[..., 0], diff[..., 1]) * world.miles_per_unit * theta_dist
    return base, prices, travel


def _checklist_bonus(world: ItineraryWorld, combos: np.ndarray, prices: np.ndarray) -> np.ndarray:
    cats = [s.category for s in world.sites]
    name_idx = {s.name: i for i, s in enumerate(world.sites)}
    bonus = np.zeros(len(combos))
    total_price = prices[combos].sum(axis=1)
    for p in world.prefs:
        if p.kind == "price":
            bonus += np.where(total_price <= p.budget, 0.0, -float(p.weight))
        elif p.kind == "want_to_go":
            want = np.array([name_idx[nm] for nm in p.sites])
            got = np.isin(combos, want).sum(axis=1) == len(want)
            bonus += np.where(got, float(p.weight), -float(p.weight))
        elif p.kind == "at_least_one":
            members = np.array([i for i, c in enumerate(cats) if c == p.category])
            got = np.isin(combos, members).any(axis=1) if len(members) else np.zeros(len(combos), bool)
            bonus += np.where(got, float(p.weight), -float(p.weight))
    return bonus


def best_worst_itinerary(world: ItineraryWorld) -> tuple[DecisionValue, DecisionValue]:
    """Exact extrema of the full reward over ordered k-tuples of distinct sites.

    Exhaustive for k <= 3; traversal order is reversal-symmetric so sets plus
    a middle choice cover every ordering.
    """
    k = world.k
    if k > 3:
        raise CapabilityError("exhaustive itinerary extrema only supported for k <= 3")
    base, prices, travel = itinerary_value_parts(world)
    n = len(world.sites)
    names = [s.name for s in world.sites]

    combos = np.array(list(itertools.combinations(range(n), k)), dtype=np.intp)
    set_score = base[combos].sum(axis=1) + _checklist_bonus(world, combos, prices)

    if k == 1:
        legs_best = legs_worst = np.zeros(len(combos))
        mid_best = mid_worst = None
    elif k == 2:
        legs_best = legs_worst = travel[combos[:, 0], combos[:, 1]]
        mid_best = mid_worst = None
    else:
        a, b, c = combos[:, 0], combos[:, 1], combos[:, 2]
        legs = np.stack([
            travel[b, a] + travel[a, c],  # middle a -> order (b, a, c)
            travel[a, b] + travel[b, c],  # middle b -> order (a, b, c)
            travel[a, c] + travel[c, b],  # middle c -> order (a, c, b)
        ], axis=1)
        mid_best = legs.argmin(axis=1)
        mid_worst = legs.argmax(axis=1)
        legs_best = legs[np.arange(len(combos)), mid_best]
        legs_worst = legs[np.arange(len(combos)), mid_worst]

    totals_best = set_score - legs_best
    totals_worst = set_score - legs_worst

    def build(idx: int, mid) -> tuple[str, ...]:
        combo = [int(x) for x in combos[idx]]
        if k < 3:
            order = combo
        else:
            a, b, c = combo
            order = {0: [b, a, c], 1: [a, b, c], 2: [a, c, b]}[int(mid[idx])]
        # reversal scores identically; keep the lexicographically smaller payload
        fwd = tuple(names[i] for i in order)
        rev = tuple(reversed(fwd))
        return min(fwd, rev)

    bi = int(np.argmax(totals_best))
    wi = int(np.argmin(totals_worst))
    best = DecisionValue(build(bi, mid_best), float(totals_best[bi]))
    worst = DecisionValue(build(wi, mid_worst), float(totals_worst[wi]))
    return best, worst


# -- flight pairs ---------------------------------------------------------------


def flight_components(world: MediationWorld):
    """Per-user meeting and price vectors plus the pairwise arrival-gap matrix."""
    meet, price = [], []
    for i, u in enumerate(world.users):
        m = np.array([
            -sum(e.importance for e in u.events if e.overlaps(f.depart, f.arrive))
            for f in u.flights
        ], dtype=float)
        p = np.array([
            float(world.theta_price[i]) * (float(world.mu[i]) - f.price) / float(world.mu[i])
            for f in u.flights
        ])
        meet.append(m)
        price.append(p)
    arr0 = np.array([f.arrive for f in world.users[0].flights], dtype=float)
    arr1 = np.array([f.arrive for f in world.users[1].flights], dtype=float)
    gap_hours = np.abs(arr0[:, None] - arr1[None, :]) / 60.0
    closeness = -world.theta_arrival * gap_hours
    return meet, price, closeness


def joint_flight_matrix(world: MediationWorld) -> np.ndarray:
    """Joint reward for every (flight for user 0, flight for user 1) pair."""
    meet, price, closeness = flight_components(world)
    solo0 = meet[0] + price[0]
    solo1 = meet[1] + price[1]
    return solo0[:, None] + solo1[None, :] + closeness


def best_worst_flightpair(world: MediationWorld) -> tuple[DecisionValue, DecisionValue]:
    joint = joint_flight_matrix(world)
    bi = int(np.argmax(joint))  # first occurrence = lexicographically smallest pair
    wi = int(np.argmin(joint))
    n = joint.shape[1]
    best = DecisionValue((bi // n, bi % n), float(joint.flat[bi]))
    worst = DecisionValue((wi // n, wi % n), float(joint.flat[wi]))
    return best, worst
