"""Worldgen: determinism, structural invariants, view soundness, render formats."""

import json
import re

import numpy as np
import pytest

from parley import solvers
from parley.rules import render_observation, view_for
from parley.worlds import generate, world_from_doc
from parley.worlds.base import load_data
from parley.worlds.itinerary import FEATURE_TEMPLATES
from parley.worlds.matching import displayed_cells
from parley.worlds.mediation import WINDOW_MINUTES, fmt_span


class TestDeterminism:
    @pytest.mark.parametrize("task", ["matching", "itinerary", "mediation"])
    def test_same_seed_same_world(self, task):
        a = generate(task, 123)
        b = generate(task, 123)
        assert json.dumps(a.to_doc(), sort_keys=True) == json.dumps(b.to_doc(), sort_keys=True)

    @pytest.mark.parametrize("task", ["matching", "itinerary", "mediation"])
    def test_doc_round_trip(self, task):
        a = generate(task, 77)
        b = world_from_doc(json.loads(json.dumps(a.to_doc())))
        assert json.dumps(a.to_doc(), sort_keys=True) == json.dumps(b.to_doc(), sort_keys=True)

    def test_different_seeds_differ(self):
        assert generate("matching", 1).to_doc() != generate("matching", 2).to_doc()


class TestMatchingWorld:
    def test_cells_in_range(self):
        w = generate("matching", 200)
        assert np.all((w.table >= 0) & (w.table <= 100))

    def test_solvability_margin_holds(self):
        for seed in range(30):
            w = generate("matching", 300 + seed)
            pooled_best = solvers.best_matching(solvers.impute_pooled(w).table).value
            solo = min(solvers.solo_plan_value(w, 0), solvers.solo_plan_value(w, 1))
            assert pooled_best >= 1.25 * solo - 1e-9

    def test_rejection_budget_exhaustion_carries_the_seed(self, monkeypatch):
        from parley.worlds import matching as matching_mod
        from parley.worlds.base import GenerationError
        # near-total visibility: pooled knowledge almost never beats solo play
        monkeypatch.setattr(matching_mod, "MAX_DRAWS", 20)
        with pytest.raises(GenerationError) as err:
            generate("matching", 77, {"k": 2, "p_observed": 0.999999})
        assert err.value.seed == 77

    def test_csv_observation_layout(self):
        w = generate("matching", 201)
        text = render_observation(w, "agent-0")
        lines = text.split("\n")
        assert lines[0] == "Reviewer Paper Similarity Scores:"
        assert lines[1].startswith(",BLEU: a Method")
        assert len(lines) == 2 + w.k
        cells = displayed_cells(w, 0)
        row0 = lines[2].split(",")
        assert row0[0] == w.reviewers[0]
        for j in range(w.k):
            expected = str(cells[(0, j)]) if (0, j) in cells else ""
            assert row0[1 + j] == expected

    def test_scaled_display_simple_multiplication(self):
        w = generate("matching", 202)
        w.table[0, 0] = 40.0
        w.scales[0] = 2.5
        w.masks[0, 0, 0] = True
        assert displayed_cells(w, 0)[(0, 0)] == 100

    def test_views_never_contain_raw_values_or_scales(self):
        w = generate("matching", 203)
        for actor in ("agent-0", "agent-1"):
            blob = json.dumps(view_for(w, actor))
            assert "scales" not in blob
            # raw (unscaled) cell values never appear
            player = int(actor[-1])
            for (i, j), shown in displayed_cells(w, player).items():
                raw = w.table[i, j]
                if abs(shown - raw) > 0.5:  # scaled away from the raw value
                    assert f": {raw}" not in blob

    def test_view_cells_match_mask_exactly(self):
        w = generate("matching", 204)
        for player, actor in enumerate(("agent-0", "agent-1")):
            view = view_for(w, actor)
            got = {(i, j) for i, j, _ in view["cells"]}
            expected = {(i, j) for i in range(w.k) for j in range(w.k)
                        if w.masks[player, i, j]}
            assert got == expected


class TestItineraryWorld:
    def test_every_site_has_five_legal_features(self):
        catalog = load_data("features")["features"]
        for seed in range(20):
            w = generate("itinerary", 400 + seed)
            for site in w.sites:
                assert len(site.features) == 5
                for fname in site.features:
                    assert site.category in catalog[fname]["categories"]

    def test_price_and_distance_always_present_and_total_capped(self):
        for seed in range(20):
            w = generate("itinerary", 420 + seed)
            kinds = [p.kind for p in w.prefs]
            assert kinds.count("price") == 1
            assert kinds.count("distance") == 1
            assert len(w.prefs) <= w.s

    def test_budget_template_wording(self):
        w = generate("itinerary", 440)
        budget_pref = next(p for p in w.prefs if p.kind == "price")
        assert budget_pref.nl == f"keep budget below ${budget_pref.budget}"

    def test_boolean_preferences_never_target_false(self):
        denied = {(d["feature"], d["value"])
                  for d in load_data("exclusions")["denied_feature_values"]}
        for seed in range(20):
            w = generate("itinerary", 460 + seed)
            for p in w.prefs:
                if p.kind == "feature" and isinstance(p.value, bool):
                    assert (p.feature, p.value) not in denied
                    assert p.value is True

    def test_weights_positive(self):
        for seed in range(10):
            w = generate("itinerary", 480 + seed)
            assert all(p.weight >= 1 for p in w.prefs)

    def test_user_view_hides_weights(self):
        w = generate("itinerary", 490)
        blob = json.dumps(view_for(w, "user"))
        assert "weight" not in blob
        obs = render_observation(w, "user")
        assert obs.startswith("Travel Preferences:\n")
        assert obs.split("\n")[1:] == [p.nl for p in w.prefs]

    def test_assistant_observation_is_database_block(self):
        w = generate("itinerary", 491)
        obs = render_observation(w, "assistant")
        lines = obs.split("\n")
        assert lines[0] == "Database:"
        assert len(lines) == 1 + len(w.sites)
        first = lines[1]
        assert first.startswith("{'est_price': ")
        assert "'etype':" in first and "'features':" in first and "'name':" in first

    def test_feature_templates_cover_all_boolean_features(self):
        catalog = load_data("features")["features"]
        for fname, spec in catalog.items():
            if spec["type"] == "bool":
                assert fname in FEATURE_TEMPLATES

    def test_want_to_go_names_are_real_sites(self):
        for seed in range(10):
            w = generate("itinerary", 495 + seed)
            names = {s.name for s in w.sites}
            for p in w.prefs:
                if p.kind == "want_to_go":
                    assert set(p.sites) <= names


class TestMediationWorld:
    def test_importances_and_durations_in_range(self):
        for seed in range(20):
            w = generate("mediation", 500 + seed)
            for u in w.users:
                for e in u.events:
                    assert 1 <= e.importance <= 10
                    assert e.end > e.start
                for f in u.flights:
                    assert 60 <= f.arrive - f.depart <= 600
                    assert f.price >= 50

    def test_events_never_overlap_within_a_calendar(self):
        for seed in range(20):
            w = generate("mediation", 520 + seed)
            for u in w.users:
                spans = sorted((e.start, e.end) for e in u.events)
                for (s1, e1), (s2, e2) in zip(spans, spans[1:]):
                    assert e1 <= s2

    def test_flights_sorted_with_sequential_ids(self):
        w = generate("mediation", 540)
        for u in w.users:
            assert [f.id for f in u.flights] == list(range(len(u.flights)))
            departs = [f.depart for f in u.flights]
            assert departs == sorted(departs)
            assert all(0 <= f.depart < WINDOW_MINUTES for f in u.flights)

    def test_flight_row_format(self):
        w = generate("mediation", 541)
        obs = render_observation(w, "user-0")
        lines = obs.split("\n")
        assert lines[0] == "Flights:"
        assert lines[1] == "id | carrier | price | times"
        assert re.match(
            r"^0 \| (JetBlue|Delta|Alaska|American|Southwest|United) \| \d+ \| "
            r"\d+/\d+ \d+:\d\d (AM|PM) - \d+:\d\d (AM|PM)$", lines[2])

    def test_flight_row_frozen_example(self):
        from parley.worlds.mediation import Flight, flight_row
        # 5/31 12:34 PM departure, exactly 8 hours in the air
        f = Flight(0, "JetBlue", 623, 12 * 60 + 34, 20 * 60 + 34)
        assert flight_row(f) == "0 | JetBlue | 623 | 5/31 12:34 PM - 8:34 PM"
        # flights keep :00 minutes; midnight renders as 12 AM
        g = Flight(20, "Alaska", 2447, 2 * 1440 + 16 * 60, 3 * 1440)
        assert flight_row(g) == "20 | Alaska | 2447 | 6/2 4:00 PM - 12:00 AM"

    def test_calendar_rows_drop_zero_minutes(self):
        assert fmt_span(2 * 1440 + 16 * 60, 2 * 1440 + 16 * 60 + 30, False) \
            == "6/2 4 PM - 4:30 PM"
        assert fmt_span(0, 30, False) == "5/31 12 AM - 12:30 AM"
        assert fmt_span(12 * 60, 14 * 60, False) == "5/31 12 PM - 2 PM"

    def test_assistant_never_sees_importance_or_personal_events(self):
        for seed in range(10):
            w = generate("mediation", 560 + seed)
            blob = json.dumps(view_for(w, "assistant"))
            assert "importance" not in blob
            assert "personal" not in blob
            obs = render_observation(w, "assistant")
            assert "(" not in obs.split("Calendar:")[1]  # no (importance) markers
            for u in w.users:
                for e in u.personal_events:
                    assert fmt_span(e.start, e.end, False) not in obs

    def test_user_sees_own_importances_but_not_weights(self):
        w = generate("mediation", 570)
        blob = json.dumps(view_for(w, "user-0"))
        assert "theta" not in blob
        obs = render_observation(w, "user-0")
        assert "Private calendar:" in obs
        assert "Shared calendar (visible to assistant):" in obs
        e = w.users[0].personal_events[0] if w.users[0].personal_events else None
        if e is not None:
            assert f"({e.importance}) | {fmt_span(e.start, e.end, False)}" in obs
