"""Shared worldgen utilities: data loading, RNG streams, display rounding."""

from __future__ import annotations

import json
import math
from functools import lru_cache
from importlib import resources

import numpy as np

# stable per-task stream tags so tasks never share random draws for one seed
STREAM_TAGS = {"matching": 101, "itinerary": 202, "mediation": 303}


class GenerationError(Exception):
    def __init__(self, message: str, seed: int | None = None):
        super().__init__(message)
        self.seed = seed


@lru_cache(maxsize=None)
def load_data(name: str) -> dict:
    text = resources.files("parley.data").joinpath(f"{name}.json").read_text("utf-8")
    return json.loads(text)


def rng_for(task: str, seed: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([STREAM_TAGS[task], int(seed), stream]))


def display_round(x: float) -> int:
    """Round half away from zero, as used for every displayed score."""
    return int(math.copysign(math.floor(abs(x) + 0.5), x)) if x else 0


def fmt_miles(miles: float) -> str:
    """Distances on scorecards: one decimal, whole numbers bare ('0mi', '0.8mi')."""
    tenths = display_round(miles * 10)
    if tenths % 10 == 0:
        return str(tenths // 10)
    return f"{tenths / 10:.1f}"


def fmt_number(x) -> str:
    """Feature values: bools as True/False, '3' not '3.0', strings verbatim."""
    if isinstance(x, (bool, str)):
        return str(x)
    f = float(x)
    if f == int(f):
        return str(int(f))
    return repr(f)
