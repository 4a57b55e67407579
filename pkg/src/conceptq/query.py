"""Query parsing, decomposition into short concepts, and subset enumeration.

A long concept query names one head noun qualified by several modifiers
("top american private university"). The engine rewrites it into short
concepts, one per modifier ("top university", "american university",
"private university"), and works with the entity sets of those concepts and
of every non-empty intersection among them.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

from .errors import QueryParseError, UnanswerableQueryError
from .taxonomy import Taxonomy, normalize

logger = logging.getLogger(__name__)

# 2^n subset enumeration; queries past this size are malformed anyway.
MAX_SHORT_CONCEPTS = 20


@dataclass(frozen=True)
class LongConceptQuery:
    raw: str
    head: str
    modifiers: tuple[str, ...]


@dataclass(frozen=True)
class Decomposition:
    """Short concepts resolved in the taxonomy, plus modifiers that were not."""

    short_concepts: tuple[str, ...]
    unresolved: tuple[str, ...]


@dataclass(frozen=True)
class SubsetIntersection:
    """A subset of the query's short concepts and its shared entities."""

    subset: frozenset[str]
    entities: frozenset[str]
    size: int


def parse(raw: str, head_override: str | None = None) -> LongConceptQuery:
    """Split a raw query into head and modifiers.

    The head is the last whitespace token unless ``head_override`` gives a
    multi-word head, which must literally terminate the query string.
    """
    norm = normalize(raw)
    tokens = norm.split()
    if len(tokens) < 2:
        raise QueryParseError(
            f"query {raw!r} needs a head and at least one modifier"
        )
    if head_override is not None:
        head = normalize(head_override)
        if not head:
            raise QueryParseError("head override is empty")
        if norm == head or not norm.endswith(" " + head):
            raise QueryParseError(
                f"head override {head_override!r} must be a proper suffix of the query"
            )
        modifiers = tuple(norm[: -len(head)].split())
    else:
        head = tokens[-1]
        modifiers = tuple(tokens[:-1])
    if not modifiers:
        raise QueryParseError(f"query {raw!r} has no modifiers")
    return LongConceptQuery(raw=raw, head=head, modifiers=modifiers)


def decompose(query: LongConceptQuery, taxonomy: Taxonomy) -> Decomposition:
    """Resolve each "modifier + head" short concept against the taxonomy.

    Modifiers whose short concept is absent are dropped with a warning; if
    none resolves the query cannot be answered over this taxonomy.
    """
    resolved: dict[str, None] = {}
    unresolved: list[str] = []
    for modifier in query.modifiers:
        short = f"{modifier} {query.head}"
        if taxonomy.has_concept(short):
            resolved.setdefault(short, None)
        else:
            unresolved.append(modifier)
    if not resolved:
        raise UnanswerableQueryError(
            f"query {query.raw!r} is not answerable over this taxonomy: "
            "no modifier resolves to a known short concept"
        )
    if unresolved:
        logger.warning(
            "query %r: dropping unresolved modifiers %s", query.raw, unresolved
        )
    return Decomposition(
        short_concepts=tuple(resolved), unresolved=tuple(unresolved)
    )


def enumerate_subsets(
    taxonomy: Taxonomy, short_concepts: Sequence[str]
) -> list[SubsetIntersection]:
    """All non-empty entity intersections over subsets of the short concepts.

    The full set is evaluated first; then every proper non-empty subset.
    Only subsets whose intersection is non-empty are returned, ordered by
    subset size descending with ties in lexicographic member order.
    """
    concepts = list(dict.fromkeys(short_concepts))
    n = len(concepts)
    if n < 1:
        raise ValueError("short concept set is empty")
    if n > MAX_SHORT_CONCEPTS:
        raise QueryParseError(
            f"{n} short concepts exceed the enumeration limit of {MAX_SHORT_CONCEPTS}"
        )

    entity_sets = {c: frozenset(taxonomy.entities_of(c)) for c in concepts}

    def intersect(members: tuple[str, ...]) -> frozenset[str]:
        out = entity_sets[members[0]]
        for c in members[1:]:
            out = out & entity_sets[c]
            if not out:
                break
        return out

    results: list[SubsetIntersection] = []
    full = intersect(tuple(concepts))
    if full:
        results.append(
            SubsetIntersection(subset=frozenset(concepts), entities=full, size=n)
        )
    for size in range(n - 1, 0, -1):
        for members in sorted(combinations(sorted(concepts), size)):
            shared = intersect(members)
            if shared:
                results.append(
                    SubsetIntersection(
                        subset=frozenset(members), entities=shared, size=size
                    )
                )
    return results
