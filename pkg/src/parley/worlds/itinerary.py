"""Itinerary planning worlds.

A world is the 39-site city database plus one user's hidden preference set.
Site names and categories are fixed by the seed list; every instance shuffles
the coordinate pool across sites and re-randomizes prices and features (each
site carries exactly five category-legal features). The user gets a price and
a travel-distance preference plus a random handful of feature / want-to-go /
at-least-one-of-type preferences, each with a hidden positive integer weight
and a templated natural-language description (the only thing the user sees).

Distances are Euclidean in coordinate space times ``miles_per_unit``
(default 69, coordinates behave like lon/lat), displayed rounded to 0.1 mi.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import hypot
from typing import Any, Optional

from .base import GenerationError, fmt_number, load_data, rng_for

ACTORS = ("user", "assistant")
DEFAULT_K = 3
DEFAULT_S = 10
MILES_PER_UNIT = 69.0
MAX_DRAWS = 100

# preference weights and budgets are small round numbers, like people use
WEIGHT_LO, WEIGHT_HI = 1, 10
BUDGET_CHOICES = [20, 30, 40, 50, 60, 80, 100, 120]
RATING_THRESHOLDS = [3, 3.5, 4, 4.5]

FEATURE_TEMPLATES = {
    "live music": "check out live music!",
    "has takeout": "prefer just eating takeout",
    "accepts reservations": "would be great if everything is reservable in advance",
    "vegan options": "generally like eating vegan options",
    "vegetarian options": "need vegetarian options available",
    "has parking": "renting a car so preferably places with parking",
    "viewpoint": "would love to see some panoramic views of the city",
    "good for kids": "family trip, best to go to places that are good for kids",
    "touristy": "want to hit the big touristy spots",
    "open late": "night owl, want places open late",
    "good for groups": "with a big group, need places good for groups",
    "outdoor seating": "love sitting outside, outdoor seating is a plus",
    "has wifi": "need wifi to get some work done",
}


@dataclass
class Site:
    name: str
    category: str
    loc: tuple[float, float]
    price: int
    features: dict[str, Any]  # exactly five, keys in alphabetical order

    def to_doc(self) -> dict:
        return {
            "name": self.name, "category": self.category,
            "loc": list(self.loc), "price": self.price, "features": dict(self.features),
        }

    @staticmethod
    def from_doc(d: dict) -> "Site":
        return Site(d["name"], d["category"], tuple(d["loc"]), d["price"], dict(d["features"]))


@dataclass
class Preference:
    kind: str                      # feature | want_to_go | price | at_least_one | distance
    weight: int
    nl: str
    feature: Optional[str] = None
    value: Any = None              # bool / categorical value / liked list / rating threshold
    sites: list[str] = field(default_factory=list)
    category: Optional[str] = None
    budget: Optional[int] = None

    def to_doc(self) -> dict:
        return {
            "kind": self.kind, "weight": self.weight, "nl": self.nl,
            "feature": self.feature, "value": self.value, "sites": list(self.sites),
            "category": self.category, "budget": self.budget,
        }

    @staticmethod
    def from_doc(d: dict) -> "Preference":
        return Preference(
            kind=d["kind"], weight=d["weight"], nl=d["nl"], feature=d.get("feature"),
            value=d.get("value"), sites=list(d.get("sites") or []),
            category=d.get("category"), budget=d.get("budget"),
        )


@dataclass
class ItineraryWorld:
    task: str
    seed: int
    k: int
    s: int
    sites: list[Site]
    prefs: list[Preference]
    miles_per_unit: float = MILES_PER_UNIT

    @property
    def actors(self) -> tuple[str, ...]:
        return ACTORS

    def params(self) -> dict:
        return {"k": self.k, "s": self.s}

    def site_by_name(self, name: str) -> Optional[Site]:
        return self._index().get(name.lower())

    def _index(self) -> dict[str, Site]:
        if not hasattr(self, "_name_index"):
            self._name_index = {s.name.lower(): s for s in self.sites}
        return self._name_index

    def distance_miles(self, a: Site, b: Site) -> float:
        return hypot(a.loc[0] - b.loc[0], a.loc[1] - b.loc[1]) * self.miles_per_unit

    def to_doc(self) -> dict:
        return {
            "task": self.task,
            "seed": self.seed,
            "params": self.params(),
            "world": {
                "miles_per_unit": self.miles_per_unit,
                "sites": [s.to_doc() for s in self.sites],
                "prefs": [p.to_doc() for p in self.prefs],
            },
        }

    @staticmethod
    def from_doc(doc: dict) -> "ItineraryWorld":
        w = doc["world"]
        return ItineraryWorld(
            task="itinerary", seed=doc["seed"],
            k=doc["params"]["k"], s=doc["params"]["s"],
            sites=[Site.from_doc(d) for d in w["sites"]],
            prefs=[Preference.from_doc(d) for d in w["prefs"]],
            miles_per_unit=w.get("miles_per_unit", MILES_PER_UNIT),
        )


def canonical_sites() -> list[Site]:
    """The seed database exactly as shipped (fixed prices and features)."""
    data = load_data("sites")["sites"]
    return [
        Site(r["name"], r["category"], tuple(r["loc"]), r["est_price"],
             dict(sorted(r["features"].items())))
        for r in data
    ]


def canonical_world(k: int = DEFAULT_K) -> ItineraryWorld:
    """A world over the canonical database with no preferences; used by the
    search engine tests and anywhere only the site inventory matters."""
    return ItineraryWorld(task="itinerary", seed=-1, k=k, s=0,
                          sites=canonical_sites(), prefs=[])


def _sample_sites(rng) -> list[Site]:
    data = load_data("sites")["sites"]
    catalog = load_data("features")
    features = catalog["features"]
    prices = catalog["prices"]
    locs = [tuple(rec["loc"]) for rec in data]
    perm = rng.permutation(len(data))
    sites = []
    for i, rec in enumerate(data):
        category = rec["category"]
        legal = [f for f, spec in features.items() if category in spec["categories"]]
        picked = sorted(rng.choice(len(legal), size=5, replace=False).tolist())
        feats: dict[str, Any] = {}
        for idx in picked:
            fname = legal[idx]
            spec = features[fname]
            if spec["type"] == "bool":
                feats[fname] = bool(rng.random() < 0.5)
            else:
                feats[fname] = spec["values"][int(rng.integers(0, len(spec["values"])))]
        feats = dict(sorted(feats.items()))
        price = int(prices[category][int(rng.integers(0, len(prices[category])))])
        sites.append(Site(rec["name"], category, locs[perm[i]], price, feats))
    return sites


def _weight(rng) -> int:
    return int(rng.integers(WEIGHT_LO, WEIGHT_HI + 1))


def _sample_prefs(rng, sites: list[Site], s: int) -> list[Preference]:
    catalog = load_data("features")["features"]
    categories = load_data("features")["categories"]
    prefs: list[Preference] = []

    n_extra = int(rng.integers(3, max(4, s - 1)))  # price + distance always ride along
    n_want = 1 if rng.random() < 0.75 else 2
    n_want = min(n_want, n_extra)
    want_names = [sites[i].name for i in rng.choice(len(sites), size=n_want, replace=False)]
    budget_left = n_extra - n_want

    include_type = budget_left > 0 and rng.random() < 0.5
    if include_type:
        budget_left -= 1

    feature_names = list(catalog.keys())
    order = rng.permutation(len(feature_names))
    chosen_features = []
    for idx in order:
        if len(chosen_features) >= budget_left:
            break
        chosen_features.append(feature_names[int(idx)])

    for fname in chosen_features:
        spec = catalog[fname]
        if spec["type"] == "bool":
            # denylist: never prefer a feature to be absent/false
            prefs.append(Preference("feature", _weight(rng), FEATURE_TEMPLATES[fname],
                                    feature=fname, value=True))
        elif fname == "rating":
            t = RATING_THRESHOLDS[int(rng.integers(0, len(RATING_THRESHOLDS)))]
            nl = f"only want to go to highly rated places ({fmt_number(t)} stars and up)"
            prefs.append(Preference("feature", _weight(rng), nl, feature="rating", value=t))
        elif fname == "cuisine":
            values = list(spec["values"])
            n_liked = int(rng.integers(2, 5))
            liked = [values[i] for i in rng.choice(len(values), size=n_liked, replace=False)]
            prefs.append(Preference("feature", _weight(rng), "like: " + ", ".join(liked),
                                    feature="cuisine", value=liked))
        else:  # ambience, alcohol type
            v = spec["values"][int(rng.integers(0, len(spec["values"])))]
            nl = (f"looking for a {v} ambience" if fname == "ambience"
                  else f"prefer bars that serve {v}")
            prefs.append(Preference("feature", _weight(rng), nl, feature=fname, value=v))

    budget = BUDGET_CHOICES[int(rng.integers(0, len(BUDGET_CHOICES)))]
    prefs.append(Preference("price", _weight(rng), f"keep budget below ${budget}", budget=budget))
    for name in want_names:
        prefs.append(Preference("want_to_go", _weight(rng), f"definitely want to go to {name}",
                                sites=[name]))
    if include_type:
        cat = categories[int(rng.integers(0, len(categories)))]
        prefs.append(Preference("at_least_one", _weight(rng), f"want to visit at least one {cat}",
                                category=cat))
    prefs.append(Preference("distance", _weight(rng), "minimize travel distance"))
    return prefs


def gen_itinerary(seed: int, k: int = DEFAULT_K, s: int = DEFAULT_S) -> ItineraryWorld:
    if s < 5:
        raise ValueError("s must be >= 5")
    rng = rng_for("itinerary", seed)
    n_sites = len(load_data("sites")["sites"])
    if not 1 <= k <= n_sites:
        raise ValueError(f"k must be in [1, {n_sites}]")
    from .. import solvers  # deferred: solvers depends on world types

    for _ in range(MAX_DRAWS):
        sites = _sample_sites(rng)
        prefs = _sample_prefs(rng, sites, s)
        world = ItineraryWorld(task="itinerary", seed=seed, k=k, s=s, sites=sites, prefs=prefs)
        if k > 3:
            return world  # extrema not exhaustively checkable; callers opt in
        best, worst = solvers.best_worst_itinerary(world)
        if best.value > worst.value:
            return world
    raise GenerationError(f"degenerate itinerary world for seed {seed}", seed=seed)


def site_db_line(site: Site) -> str:
    doc = {
        "est_price": site.price,
        "etype": site.category,
        "features": dict(sorted(site.features.items())),
        "loc": [site.loc[0], site.loc[1]],
        "name": site.name,
    }
    return repr(doc)


def render_observation(world: ItineraryWorld, actor: str) -> str:
    if actor == "user":
        return "Travel Preferences:\n" + "\n".join(p.nl for p in world.prefs)
    if actor == "assistant":
        return "Database:\n" + "\n".join(site_db_line(s) for s in world.sites)
    raise ValueError(f"unknown actor {actor!r}")


def view_for(world: ItineraryWorld, actor: str) -> dict:
    if actor == "user":
        return {
            "task": "itinerary", "role": "user", "k": world.k,
            "preferences": [p.nl for p in world.prefs],
        }
    if actor == "assistant":
        return {
            "task": "itinerary", "role": "assistant", "k": world.k,
            "miles_per_unit": world.miles_per_unit,
            "sites": [s.to_doc() for s in world.sites],
        }
    raise ValueError(f"unknown actor {actor!r}")


def render_proposal(payload: dict) -> str:
    names = [name if name is not None else "NULL" for name in payload["sites"]]
    return "[" + ", ".join(names) + "]"
