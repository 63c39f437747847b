"""Reviewer-paper matching worlds.

The hidden state is a k x k table of affinity scores drawn uniformly from
[0, 100]. Each cell is revealed to each of the two players independently with
probability ``p_observed``. Generation rejection-samples until the optimum
under the players' pooled knowledge beats what the weaker-informed player's
own-information plan achieves by a factor of at least 1.25, so at least one
player has something real to gain from talking. (Requiring the margin over
the stronger player instead is statistically unreachable at k=8, p=0.4: the
99th percentile of that ratio sits near 1.17.)

Players never see raw scores: each player's view is multiplied by a private
scale from Uniform[1, 10] and rendered as integers, which keeps scores
comparable within a view but not across players.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import GenerationError, display_round, load_data, rng_for

ACTORS = ("agent-0", "agent-1")
DEFAULT_K = 8
DEFAULT_P_OBSERVED = 0.4
MIN_GAIN = 1.25
MAX_DRAWS = 10_000


@dataclass
class MatchingWorld:
    task: str
    seed: int
    k: int
    p_observed: float
    table: np.ndarray          # (k, k) float, rows = reviewers, cols = papers
    masks: np.ndarray          # (2, k, k) bool, per-player visibility
    scales: np.ndarray         # (2,) float display multipliers
    reviewers: list[str]
    papers: list[str]

    @property
    def actors(self) -> tuple[str, ...]:
        return ACTORS

    def params(self) -> dict:
        return {"k": self.k, "p_observed": self.p_observed}

    def to_doc(self) -> dict:
        return {
            "task": self.task,
            "seed": self.seed,
            "params": self.params(),
            "world": {
                "table": self.table.tolist(),
                "masks": self.masks.astype(int).tolist(),
                "scales": self.scales.tolist(),
                "reviewers": self.reviewers,
                "papers": self.papers,
            },
        }

    @staticmethod
    def from_doc(doc: dict) -> "MatchingWorld":
        w = doc["world"]
        return MatchingWorld(
            task="matching",
            seed=doc["seed"],
            k=doc["params"]["k"],
            p_observed=doc["params"]["p_observed"],
            table=np.asarray(w["table"], dtype=float),
            masks=np.asarray(w["masks"], dtype=bool),
            scales=np.asarray(w["scales"], dtype=float),
            reviewers=list(w["reviewers"]),
            papers=list(w["papers"]),
        )


def _rosters(k: int) -> tuple[list[str], list[str]]:
    names = load_data("matching_names")
    reviewers = list(names["reviewers"][:k])
    papers = list(names["papers"][:k])
    while len(reviewers) < k:
        reviewers.append(f"Reviewer {len(reviewers) + 1}")
    while len(papers) < k:
        papers.append(f"Paper {len(papers) + 1}")
    return reviewers, papers


def draw_table(rng, k: int) -> np.ndarray:
    """One raw affinity table draw, before the solvability filter."""
    return rng.uniform(0.0, 100.0, size=(k, k))


def draw_masks(rng, k: int, p_observed: float) -> np.ndarray:
    return rng.random(size=(2, k, k)) < p_observed


def gen_matching(seed: int, k: int = DEFAULT_K, p_observed: float = DEFAULT_P_OBSERVED) -> MatchingWorld:
    if k < 2:
        raise ValueError("k must be >= 2")
    if not 0.0 < p_observed < 1.0:
        raise ValueError("p_observed must be in (0, 1)")
    from .. import solvers  # deferred: solvers depends on world types

    rng = rng_for("matching", seed)
    reviewers, papers = _rosters(k)
    for _ in range(MAX_DRAWS):
        table = draw_table(rng, k)
        masks = draw_masks(rng, k, p_observed)
        scales = rng.uniform(1.0, 10.0, size=2)
        world = MatchingWorld(
            task="matching", seed=seed, k=k, p_observed=p_observed,
            table=table, masks=masks, scales=scales,
            reviewers=reviewers, papers=papers,
        )
        pooled_best = solvers.best_matching(solvers.impute_pooled(world).table).value
        solo = min(solvers.solo_plan_value(world, 0), solvers.solo_plan_value(world, 1))
        if pooled_best >= MIN_GAIN * solo:
            return world
    raise GenerationError(f"no acceptable matching world within {MAX_DRAWS} draws", seed=seed)


def displayed_cells(world: MatchingWorld, player: int) -> dict[tuple[int, int], int]:
    """Scaled integer scores this player is allowed to see."""
    out = {}
    scale = float(world.scales[player])
    mask = world.masks[player]
    for i in range(world.k):
        for j in range(world.k):
            if mask[i, j]:
                out[(i, j)] = display_round(float(world.table[i, j]) * scale)
    return out


def render_observation(world: MatchingWorld, actor: str) -> str:
    """The CSV block a player is prompted with; unobserved cells stay empty."""
    player = ACTORS.index(actor)
    cells = displayed_cells(world, player)
    lines = ["Reviewer Paper Similarity Scores:", "," + ",".join(world.papers)]
    for i, reviewer in enumerate(world.reviewers):
        row = [reviewer]
        for j in range(world.k):
            row.append(str(cells[(i, j)]) if (i, j) in cells else "")
        lines.append(",".join(row))
    return "\n".join(lines)


def view_for(world: MatchingWorld, actor: str) -> dict:
    """Structured per-role view; contains only scaled, observed values."""
    player = ACTORS.index(actor)
    cells = displayed_cells(world, player)
    return {
        "task": "matching",
        "role": actor,
        "k": world.k,
        "reviewers": list(world.reviewers),
        "papers": list(world.papers),
        "cells": [[i, j, v] for (i, j), v in sorted(cells.items())],
        "display": {"scaled": True},
    }


def short_paper(title: str) -> str:
    return title.split(":")[0]


def render_proposal(world: MatchingWorld, payload: dict) -> str:
    """Plain-text proposal listing, papers ordered by short title."""
    perm = payload["reviewer_for_paper"]
    pairs = sorted(
        ((short_paper(world.papers[j]), world.reviewers[perm[j]]) for j in range(world.k)),
        key=lambda p: p[0],
    )
    lines = ["Proposal:"] + [f"  - {paper}: {reviewer}" for paper, reviewer in pairs]
    return "\n".join(lines)
