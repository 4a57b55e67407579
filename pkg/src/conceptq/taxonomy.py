"""Concept-entity co-occurrence store backing all probability estimates.

The source data is a bipartite multiset of isA facts: a concept string, an
entity string, and how many times the pair was observed together. Ingestion
interns the normalized strings, merges duplicate pairs, and precomputes the
marginals that every downstream score is built from:

* ``n(c, e)`` -- pair co-occurrence count
* ``n(c)``    -- total count of concept c over its entities
* ``n(e)``    -- total count of entity e over its concepts
* ``N``       -- grand total over all pairs

Conditional probabilities are plain ratios, ``P(c|e) = n(c,e) / n(e)`` and
``P(e|c) = n(c,e) / n(c)``; priors are proportional to the marginals,
``P(c) = n(c) / N`` and ``P(e) = n(e) / N``. Lookups of unknown names return
zero counts and zero probabilities instead of raising.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from types import MappingProxyType

from .errors import DataFormatError, EngineError


def normalize(text: str) -> str:
    """Lowercase ``text`` and collapse runs of whitespace to single spaces."""
    return " ".join(text.split()).lower()


@dataclass(frozen=True)
class CooccurrenceRecord:
    """One ingestion row: a concept-entity pair with a positive count."""

    concept: str
    entity: str
    count: int


class Taxonomy:
    """Immutable bipartite index of concept-entity co-occurrence counts.

    Instances are built by :func:`ingest` or :func:`load` and never mutated
    afterwards, so all lookups are safe for unrestricted concurrent use.
    Dense integer identifiers are assigned to concepts and entities in
    first-seen stream order; they are an indexing convenience -- equality
    between taxonomies compares counts only.
    """

    def __init__(self, records: Iterable[CooccurrenceRecord]):
        by_concept: dict[str, dict[str, int]] = {}
        entity_order: dict[str, None] = {}
        for rec in records:
            entities = by_concept.setdefault(rec.concept, {})
            entities[rec.entity] = entities.get(rec.entity, 0) + rec.count
            entity_order.setdefault(rec.entity, None)

        self._by_concept = by_concept
        self._by_entity: dict[str, dict[str, int]] = {e: {} for e in entity_order}
        for concept, entities in by_concept.items():
            for entity, n in entities.items():
                self._by_entity[entity][concept] = n

        self.concept_totals = {c: sum(es.values()) for c, es in self._by_concept.items()}
        self.entity_totals = {e: sum(cs.values()) for e, cs in self._by_entity.items()}
        self.grand_total = sum(self.concept_totals.values())
        self.concept_ids = {c: i for i, c in enumerate(self._by_concept)}
        self.entity_ids = {e: i for i, e in enumerate(self._by_entity)}

    # -- lookups ----------------------------------------------------------

    @property
    def concepts(self):
        return self._by_concept.keys()

    @property
    def entities(self):
        return self._by_entity.keys()

    @property
    def n_edges(self) -> int:
        return sum(len(es) for es in self._by_concept.values())

    def has_concept(self, concept: str) -> bool:
        return normalize(concept) in self._by_concept

    def has_entity(self, entity: str) -> bool:
        return normalize(entity) in self._by_entity

    def entities_of(self, concept: str) -> Mapping[str, int]:
        """Entities of ``concept`` with their counts; empty if unknown."""
        return MappingProxyType(self._by_concept.get(normalize(concept), {}))

    def concepts_of(self, entity: str) -> Mapping[str, int]:
        """Concepts of ``entity`` with their counts; empty if unknown."""
        return MappingProxyType(self._by_entity.get(normalize(entity), {}))

    def count(self, concept: str, entity: str) -> int:
        """n(c, e); 0 when the pair was never observed."""
        return self._by_concept.get(normalize(concept), {}).get(normalize(entity), 0)

    def cond_prob(self, direction: str, concept: str, entity: str) -> float:
        """Conditional probability of one side of a pair given the other.

        ``direction`` selects the estimate: ``"c_given_e"`` returns
        ``n(c,e) / n(e)`` and ``"e_given_c"`` returns ``n(c,e) / n(c)``.
        Unknown pairs or items yield 0.
        """
        n_ce = self.count(concept, entity)
        if n_ce == 0:
            return 0.0
        if direction == "c_given_e":
            denom = self.entity_totals.get(normalize(entity), 0)
        elif direction == "e_given_c":
            denom = self.concept_totals.get(normalize(concept), 0)
        else:
            raise ValueError(f"unknown direction {direction!r}")
        return n_ce / denom if denom else 0.0

    def p_c_given_e(self, concept: str, entity: str) -> float:
        return self.cond_prob("c_given_e", concept, entity)

    def p_e_given_c(self, concept: str, entity: str) -> float:
        return self.cond_prob("e_given_c", concept, entity)

    def prior(self, kind: str, name: str) -> float:
        """Marginal prior P(c) or P(e); ``kind`` is ``"concept"`` or ``"entity"``."""
        if kind == "concept":
            total = self.concept_totals.get(normalize(name), 0)
        elif kind == "entity":
            total = self.entity_totals.get(normalize(name), 0)
        else:
            raise ValueError(f"unknown prior kind {kind!r}")
        return total / self.grand_total if self.grand_total else 0.0

    def records(self) -> Iterator[CooccurrenceRecord]:
        """Merged records in deterministic (first-seen) order."""
        for concept, entities in self._by_concept.items():
            for entity, n in entities.items():
                yield CooccurrenceRecord(concept, entity, n)

    # -- integrity ---------------------------------------------------------

    def check_marginals(self) -> None:
        """Re-derive all marginals from the pair counts and compare exactly."""
        concept_sums = {c: sum(es.values()) for c, es in self._by_concept.items()}
        entity_sums = {e: sum(cs.values()) for e, cs in self._by_entity.items()}
        if concept_sums != self.concept_totals:
            raise EngineError("concept totals disagree with pair counts")
        if entity_sums != self.entity_totals:
            raise EngineError("entity totals disagree with pair counts")
        grand = sum(concept_sums.values())
        if grand != self.grand_total or grand != sum(entity_sums.values()):
            raise EngineError("grand total disagrees with pair counts")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Taxonomy):
            return NotImplemented
        return self._by_concept == other._by_concept

    __hash__ = None

    def __repr__(self) -> str:
        return (
            f"Taxonomy({len(self._by_concept)} concepts, "
            f"{len(self._by_entity)} entities, {self.n_edges} edges, "
            f"total {self.grand_total})"
        )


def entity_union(taxonomy: Taxonomy, concepts: Iterable[str]) -> frozenset[str]:
    """Union of the entity sets of ``concepts``."""
    out: set[str] = set()
    for c in concepts:
        out.update(taxonomy.entities_of(c))
    return frozenset(out)


def entity_intersection(taxonomy: Taxonomy, concepts: Iterable[str]) -> frozenset[str]:
    """Entities shared by every concept in ``concepts``; empty for no concepts."""
    concepts = list(concepts)
    if not concepts:
        return frozenset()
    out = set(taxonomy.entities_of(concepts[0]))
    for c in concepts[1:]:
        out &= set(taxonomy.entities_of(c))
        if not out:
            break
    return frozenset(out)


def ingest(records: Iterable) -> Taxonomy:
    """Build a Taxonomy from a stream of rows, merging duplicate pairs.

    Rows may be :class:`CooccurrenceRecord` instances or plain
    ``(concept, entity, count)`` triples. Strings are normalized; a malformed
    row (missing field, empty name, non-integer or non-positive count) aborts
    ingestion with its 1-based row number.
    """
    clean: list[CooccurrenceRecord] = []
    for row_num, row in enumerate(records, start=1):
        if isinstance(row, CooccurrenceRecord):
            concept, entity, count = row.concept, row.entity, row.count
        else:
            try:
                concept, entity, count = row
            except (TypeError, ValueError):
                raise DataFormatError(
                    f"row {row_num}: expected (concept, entity, count)", row=row_num
                ) from None
        if not isinstance(concept, str) or not isinstance(entity, str):
            raise DataFormatError(
                f"row {row_num}: concept and entity must be strings", row=row_num
            )
        if isinstance(count, bool) or not isinstance(count, int):
            raise DataFormatError(
                f"row {row_num}: count must be an integer, got {count!r}", row=row_num
            )
        if count < 1:
            raise DataFormatError(
                f"row {row_num}: count must be >= 1, got {count}", row=row_num
            )
        concept = normalize(concept)
        entity = normalize(entity)
        if not concept or not entity:
            raise DataFormatError(
                f"row {row_num}: empty concept or entity name", row=row_num
            )
        clean.append(CooccurrenceRecord(concept, entity, count))
    return Taxonomy(clean)


def load(path) -> Taxonomy:
    """Read a taxonomy file: ``concept<TAB>entity<TAB>count`` per line.

    Lines starting with ``#`` and blank lines are skipped. There is no
    quoting; a TAB inside a name is unsupported. Malformed lines raise
    :class:`DataFormatError` naming the 1-based physical line number.
    """
    rows: list[CooccurrenceRecord] = []
    with open(path, encoding="utf-8") as fh:
        for line_num, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            fields = line.rstrip("\n").split("\t")
            if len(fields) != 3:
                raise DataFormatError(
                    f"line {line_num}: expected 3 tab-separated fields, got {len(fields)}",
                    row=line_num,
                )
            concept, entity, raw_count = fields
            try:
                count = int(raw_count.strip())
            except ValueError:
                raise DataFormatError(
                    f"line {line_num}: count must be an integer, got {raw_count!r}",
                    row=line_num,
                ) from None
            if count < 1:
                raise DataFormatError(
                    f"line {line_num}: count must be >= 1, got {count}", row=line_num
                )
            concept = normalize(concept)
            entity = normalize(entity)
            if not concept or not entity:
                raise DataFormatError(
                    f"line {line_num}: empty concept or entity name", row=line_num
                )
            rows.append(CooccurrenceRecord(concept, entity, count))
    return Taxonomy(rows)
