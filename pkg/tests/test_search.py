"""Query engine: canonical database ground truth, parsing, execution properties."""

import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parley.search import (QueryError, execute, parse_query, parse_results,
                           render_results, run_search)
from parley.worlds.itinerary import canonical_world


@pytest.fixture(scope="module")
def world():
    return canonical_world()


class TestCanonicalPairs:
    """The executor-prompt query/result pairs over the shipped database."""

    def test_landmark_filter(self, world):
        assert run_search(world, "Search(fields=[name], filters=[category == landmark])") == (
            "Search Results (4):\n"
            "name\n"
            "Hindenberg Memorial\n"
            "The Tower\n"
            "Liberty Memorial\n"
            "Einstein's summer house")

    def test_unknown_category_yields_no_results(self, world):
        assert run_search(world, "Search(fields=[name], filters=[category == concert])") == (
            "Search Results: No results")

    def test_live_music_text_query(self, world):
        assert run_search(world, "Search(fields=[name], text_query=live music)") == (
            "Search Results (6):\n"
            "name\n"
            "Bards n Brews\n"
            "Kozy Kar\n"
            "Saul's\n"
            "A-Trane\n"
            "The Jazz Spot\n"
            "The Dockside Grill")

    def test_unfilterable_field_error_sentence(self, world):
        with pytest.raises(QueryError) as err:
            run_search(world, "Search(fields=[name], filters=[vegan == true])")
        assert str(err.value) == ("You cannot filter by vegan. "
                                  "Try searching with a text query instead.")

    def test_text_query_intersects_with_filters(self, world):
        assert run_search(
            world,
            "Search(fields=[name, price], text_query=live music, filters=[price <= 40])") == (
            "Search Results (3):\n"
            "name|price\n"
            "Bards n Brews|20\n"
            "Kozy Kar|30\n"
            "The Jazz Spot|40")

    def test_distance_sort_appends_distance_column(self, world):
        out = run_search(
            world,
            "Search(fields=[name, price], filters=[category == restaurant, price <= 10], "
            "sort_by=[distance_to(The Mall)])")
        lines = out.split("\n")
        assert lines[0] == "Search Results (1):"
        assert lines[1] == "name|price|distance"
        assert lines[2].startswith("El Toro Steakhouse|10|")

    def test_sequential_sort_keys_last_one_wins(self, world):
        out = run_search(
            world,
            "Search(fields=[name, price, distance], filters=[category == restaurant], "
            "sort_by=[distance_to(The Mall), price])")
        names = [line.split("|")[0] for line in out.split("\n")[2:]]
        assert names == ["El Toro Steakhouse", "Taqueria y Mas", "Lucia's", "Cookies Cream",
                         "Mad Seoul", "The Cakery", "The Dockside Grill", "Saul's",
                         "Earthbar", "Caribbean Corner"]

    def test_quoted_text_query_with_filter_and_sort(self, world):
        out = run_search(
            world,
            "Search(fields=[name], text_query=\"good for kids\", "
            "filters=[category == park], sort_by=[distance_to(Saul's)])")
        names = [line.split("|")[0] for line in out.split("\n")[2:]]
        assert names == ["Lincoln Park", "Riverside Trail"]


class TestParsing:
    def test_match_all(self, world):
        q = parse_query("Search(fields=[name])")
        assert q.fields == ["name"] and not q.filters and q.text_query is None
        assert execute(q, world).count == len(world.sites)

    def test_filter_structure(self):
        q = parse_query("Search(fields=[name], filters=[category == landmark])")
        assert len(q.filters) == 1
        atom = q.filters[0][0]
        assert (atom.field, atom.op, atom.literal) == ("category", "==", "landmark")

    def test_or_group_folds_into_disjunction(self, world):
        q = parse_query("Search(fields=[name], filters=[good for kids OR viewpoint])")
        assert len(q.filters) == 1 and len(q.filters[0]) == 2
        rows = {r[0] for r in execute(q, world).rows}
        expected = {s.name for s in world.sites
                    if s.features.get("good for kids") is True
                    or s.features.get("viewpoint") is True}
        assert rows == expected

    def test_and_inside_a_bracket_splits_conjuncts(self, world):
        q = parse_query("Search(fields=[name], filters=[category == park AND has parking])")
        assert len(q.filters) == 2
        rows = {r[0] for r in execute(q, world).rows}
        expected = {s.name for s in world.sites
                    if s.category == "park" and s.features.get("has parking") is True}
        assert rows == expected

    def test_limit_zero_rejected_at_parse(self):
        with pytest.raises(QueryError, match="positive"):
            parse_query("Search(fields=[name], limit=0)")

    def test_syntax_error_positions(self):
        with pytest.raises(QueryError):
            parse_query("Search(fields=[name]")
        with pytest.raises(QueryError, match="parameter"):
            parse_query("Search(fields=[name], nonsense)")

    def test_unknown_anchor_names_the_site(self, world):
        q = parse_query("Search(fields=[name], sort_by=[distance_to(Narnia Cafe)])")
        with pytest.raises(QueryError, match="Narnia Cafe"):
            execute(q, world)


class TestExecution:
    def test_limit_truncates_after_sort(self, world):
        out = run_search(world, "Search(fields=[name], sort_by=[price], limit=3)")
        assert out.startswith("Search Results (3):")

    def test_info_field_concatenates_features(self, world):
        out = run_search(world, "Search(fields=[name, info], filters=[name == Mad Seoul])")
        row = out.split("\n")[2]
        assert row == "Mad Seoul|classy, seafood, open late"

    def test_info_cannot_be_filtered(self, world):
        with pytest.raises(QueryError, match="cannot filter by info"):
            run_search(world, "Search(fields=[name], filters=[info == foo])")

    def test_distance_ties_preserve_name_order(self, world):
        out = run_search(
            world, "Search(fields=[name], filters=[category == park], "
            "sort_by=[distance_to(Atlas Park)])")
        names = [line.split("|")[0] for line in out.split("\n")[2:]]
        zero_dist = {"The Arboretum", "Riverside Trail", "Atlas Park"}  # same coordinates
        assert names[:3] == sorted(zero_dist)

    def test_filter_soundness_against_naive_scan(self, world):
        queries = [
            "Search(fields=[name, price], filters=[price >= 50, category == restaurant])",
            "Search(fields=[name], filters=[price < 20])",
            "Search(fields=[name], filters=[touristy])",
            "Search(fields=[name], filters=[rating >= 4])",
        ]
        for qtext in queries:
            q = parse_query(qtext)
            got = {r[0] for r in execute(q, world).rows}
            for site in world.sites:
                ok = all(any(_naive_atom(site, a) for a in group) for group in q.filters)
                assert (site.name in got) == ok, (qtext, site.name)

    def test_render_parse_round_trip(self, world):
        for qtext in ["Search(fields=[name])",
                      "Search(fields=[name, price, category], filters=[price >= 100])",
                      "Search(fields=[name], filters=[category == concert])"]:
            out = run_search(world, qtext)
            table = parse_results(out)
            assert render_results(table) == out

    @given(st.integers(min_value=1, max_value=45))
    @settings(deadline=None, max_examples=20)
    def test_limit_never_exceeded(self, limit):
        w = canonical_world()
        out = run_search(w, f"Search(fields=[name], limit={limit})")
        m = re.match(r"^Search Results \((\d+)\):", out)
        assert int(m.group(1)) <= limit


def _naive_atom(site, atom):
    if atom.field == "name":
        value = site.name
    elif atom.field == "category":
        value = site.category
    elif atom.field == "price":
        value = site.price
    elif atom.field in site.features:
        value = site.features[atom.field]
    else:
        return False
    if isinstance(value, str) or isinstance(atom.literal, str):
        value, lit = str(value).lower(), str(atom.literal).lower()
    else:
        lit = atom.literal
    return {"==": value == lit, "<=": value <= lit, ">=": value >= lit,
            "<": value < lit, ">": value > lit}[atom.op]
