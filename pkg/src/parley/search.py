"""Deterministic `Search(...)` query engine over the itinerary site database.

Surface syntax:

    Search(fields=[name, price], filters=[category == restaurant, price <= 10],
           text_query=live music, sort_by=[distance_to(The Mall), price], limit=5)

Filters form a conjunction; ``OR`` inside one bracket item folds into a
disjunctive group. Only real site fields can be filtered (name, category,
price, or an exact feature name); anything else gets the canonical "You
cannot filter by ..." error. ``text_query`` is deterministic keyword search:
the query is normalized through a synonym table, tokenized, and every token
must appear among the site's name, category, feature names, or categorical
feature values. Matching is on feature *presence*, so "live music" finds
sites that list the feature even with value False, mirroring how a human
would skim the database.

Sort keys are applied as successive stable passes over name-ordered rows
(each ascending), so the last key is the primary one; without sort keys,
database order is kept. When a ``distance_to`` sort is requested and no
distance column was asked for, one is appended under the name ``distance``,
rounded to 0.1 mi for display (sorting uses exact values).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .worlds.base import fmt_number, load_data
from .worlds.itinerary import ItineraryWorld, Site

COMPARATORS = ("==", "<=", ">=", "<", ">")


class QueryError(Exception):
    pass


@dataclass(frozen=True)
class FilterAtom:
    field: str
    op: str
    literal: object


@dataclass
class Query:
    fields: list[str]
    filters: list[list[FilterAtom]] = field(default_factory=list)  # AND of OR-groups
    text_query: str | None = None
    sort_by: list[tuple[str, str | None]] = field(default_factory=list)  # (kind, anchor)
    limit: int | None = None


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[list[str]]

    @property
    def count(self) -> int:
        return len(self.rows)


def _filterable_fields() -> set[str]:
    return {"name", "category", "price"} | set(load_data("features")["features"].keys())


def _split_top_level(text: str) -> list[str]:
    parts, depth, buf, quote = [], 0, [], None
    for ch in text:
        if quote:
            buf.append(ch)
            if ch == quote:
                quote = None
            continue
        if ch in "\"'":
            quote = ch
            buf.append(ch)
        elif ch in "([":
            depth += 1
            buf.append(ch)
        elif ch in ")]":
            depth -= 1
            buf.append(ch)
        elif ch == "," and depth == 0:
            parts.append("".join(buf))
            buf = []
        else:
            buf.append(ch)
    if buf:
        parts.append("".join(buf))
    return [p.strip() for p in parts if p.strip()]


def _unquote(text: str) -> str:
    text = text.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    return text


def _bracket_list(text: str, param: str) -> list[str]:
    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        raise QueryError(f"{param} must be a [bracketed] list")
    return _split_top_level(text[1:-1])


def _parse_literal(text: str):
    text = _unquote(text)
    low = text.lower()
    if low == "true":
        return True
    if low == "false":
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def _parse_atom(item: str) -> FilterAtom:
    for op in COMPARATORS:
        if op in item:
            fld, lit = item.split(op, 1)
            return FilterAtom(_unquote(fld).strip(), op, _parse_literal(lit))
    return FilterAtom(_unquote(item).strip(), "==", True)  # bare boolean feature


def _validate_filter_field(fld: str) -> None:
    if fld not in _filterable_fields():
        raise QueryError(f"You cannot filter by {fld}. Try searching with a text query instead.")


_DISTANCE_TO_RE = re.compile(r"^distance_to\((.*)\)$")


def parse_query(text: str) -> Query:
    """Parse the Search(...) surface syntax; errors carry the offending position."""
    text = text.strip()
    m = re.search(r"Search\s*\(", text)
    if not m:
        raise QueryError("expected Search(...)")
    start = m.end()
    depth, end = 1, None
    for i in range(start, len(text)):
        if text[i] == "(":
            depth += 1
        elif text[i] == ")":
            depth -= 1
            if depth == 0:
                end = i
                break
    if end is None:
        raise QueryError(f"unbalanced parentheses at position {start}")
    body = text[start:end]

    query = Query(fields=[])
    for part in _split_top_level(body):
        if "=" not in part:
            raise QueryError(f"expected parameter=value near {part!r}")
        key, value = part.split("=", 1)
        key = key.strip()
        value = value.strip()
        if key == "fields":
            query.fields = [_unquote(f) for f in _bracket_list(value, "fields")]
        elif key == "filters":
            for item in _bracket_list(value, "filters"):
                for conjunct in re.split(r"\s+AND\s+", item):
                    group = [_parse_atom(alt) for alt in re.split(r"\s+OR\s+", conjunct)]
                    for atom in group:
                        _validate_filter_field(atom.field)
                    query.filters.append(group)
        elif key == "text_query":
            query.text_query = _unquote(value)
        elif key == "sort_by":
            for item in _bracket_list(value, "sort_by"):
                item = _unquote(item)
                dm = _DISTANCE_TO_RE.match(item)
                if dm:
                    query.sort_by.append(("distance_to", dm.group(1).strip()))
                else:
                    query.sort_by.append((item, None))
        elif key == "limit":
            try:
                limit = int(value)
            except ValueError:
                raise QueryError(f"limit must be an integer, got {value!r}")
            if limit <= 0:
                raise QueryError("limit must be a positive integer")
            query.limit = limit
        else:
            raise QueryError(f"unknown parameter {key!r}")
    if not query.fields:
        raise QueryError("fields is required")
    return query


# -- evaluation ---------------------------------------------------------------


def _site_info(site: Site) -> str:
    parts = []
    for name, value in sorted(site.features.items()):
        if value is False:
            continue
        if value is True:
            parts.append(name)
        elif name == "rating":
            parts.append(f"rating: {fmt_number(value)}")
        else:
            parts.append(str(value))
    return ", ".join(parts)


def _token_bag(site: Site) -> set[str]:
    words = [site.name, site.category]
    for name, value in site.features.items():
        words.append(name)
        if isinstance(value, str):
            words.append(value)
        elif not isinstance(value, bool):
            words.append(fmt_number(value))
    bag = set()
    for w in words:
        bag.update(re.findall(r"[a-z0-9']+", w.lower()))
    return bag


def _normalize_text_query(text: str) -> list[str]:
    syn = load_data("synonyms")
    q = text.lower()
    for phrase in sorted(syn["phrases"], key=len, reverse=True):
        q = q.replace(phrase, syn["phrases"][phrase])
    tokens = re.findall(r"[a-z0-9']+", q)
    return [syn["tokens"].get(t, t) for t in tokens]


def _text_match(site: Site, tokens: list[str]) -> bool:
    bag = _token_bag(site)
    return all(t in bag for t in tokens)


def _atom_match(site: Site, atom: FilterAtom) -> bool:
    if atom.field == "name":
        actual = site.name
    elif atom.field == "category":
        actual = site.category
    elif atom.field == "price":
        actual = site.price
    else:
        if atom.field not in site.features:
            return False
        actual = site.features[atom.field]

    lit = atom.literal
    if isinstance(actual, str) or isinstance(lit, str):
        a = str(actual).lower()
        b = str(lit).lower()
        if atom.op == "==":
            return a == b
        return _compare(a, b, atom.op)
    if isinstance(actual, bool) or isinstance(lit, bool):
        return atom.op == "==" and bool(actual) == bool(lit)
    return _compare(float(actual), float(lit), atom.op)


def _compare(a, b, op: str) -> bool:
    if op == "==":
        return a == b
    if op == "<=":
        return a <= b
    if op == ">=":
        return a >= b
    if op == "<":
        return a < b
    return a > b


def execute(query: Query, world: ItineraryWorld) -> ResultTable:
    sites = list(world.sites)

    for group in query.filters:
        sites = [s for s in sites if any(_atom_match(s, atom) for atom in group)]
    if query.text_query:
        tokens = _normalize_text_query(query.text_query)
        sites = [s for s in sites if _text_match(s, tokens)]

    anchors = {a for kind, a in query.sort_by if kind == "distance_to"}
    for f in query.fields:
        dm = _DISTANCE_TO_RE.match(f)
        if dm:
            anchors.add(dm.group(1).strip())
    if len(anchors) > 1:
        raise QueryError("only one distance_to anchor is supported per query")
    anchor_site = None
    if anchors:
        (anchor_name,) = anchors
        anchor_site = world.site_by_name(anchor_name)
        if anchor_site is None:
            raise QueryError(f"Unknown site {anchor_name!r} in distance_to")

    wants_distance = any(f == "distance" or _DISTANCE_TO_RE.match(f) for f in query.fields)
    if wants_distance and anchor_site is None:
        raise QueryError("the distance field requires sort_by=[distance_to(<site>)]")

    def distance(s: Site) -> float:
        return world.distance_miles(anchor_site, s)

    if query.sort_by:
        sites.sort(key=lambda s: s.name)  # equal sort keys preserve name order
        for kind, anchor in query.sort_by:
            if kind == "distance_to":
                sites.sort(key=distance)
            elif kind in ("price", "est_price"):
                sites.sort(key=lambda s: s.price)
            elif kind == "name":
                sites.sort(key=lambda s: s.name)
            elif kind == "category":
                sites.sort(key=lambda s: s.category)
            else:
                raise QueryError(f"cannot sort by {kind!r}")
    if query.limit is not None:
        sites = sites[: query.limit]

    columns = list(query.fields)
    if anchor_site is not None and not wants_distance:
        columns.append("distance")

    known_fields = {"name", "category", "price", "info", "distance"} | set(
        load_data("features")["features"].keys())

    rows = []
    for s in sites:
        row = []
        for col in columns:
            if col == "name":
                row.append(s.name)
            elif col == "category":
                row.append(s.category)
            elif col in ("price", "est_price"):
                row.append(str(s.price))
            elif col == "info":
                row.append(_site_info(s))
            elif col == "distance" or _DISTANCE_TO_RE.match(col):
                row.append(f"{distance(s):.1f}")
            elif col in known_fields:
                row.append(fmt_number(s.features[col]) if col in s.features else "")
            else:
                raise QueryError(f"unknown field {col!r}")
        rows.append(row)
    return ResultTable(columns=columns, rows=rows)


def render_results(table: ResultTable) -> str:
    if not table.rows:
        return "Search Results: No results"
    lines = [f"Search Results ({table.count}):", "|".join(table.columns)]
    lines += ["|".join(row) for row in table.rows]
    return "\n".join(lines)


def parse_results(text: str) -> ResultTable:
    """Inverse of render_results, for round-trip checks and client parsing."""
    if text.strip() == "Search Results: No results":
        return ResultTable(columns=[], rows=[])
    lines = text.split("\n")
    m = re.match(r"^Search Results \((\d+)\):$", lines[0])
    if not m:
        raise QueryError("not a search result block")
    columns = lines[1].split("|")
    rows = [line.split("|") for line in lines[2 : 2 + int(m.group(1))]]
    return ResultTable(columns=columns, rows=rows)


def run_search(world: ItineraryWorld, text: str) -> str:
    """One-shot parse + execute + render, as exposed to agents."""
    table = execute(parse_query(text), world)
    return render_results(table)
