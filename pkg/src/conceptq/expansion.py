"""Instance-based concept expansion, entity reordering, and seed constraints.

Given seed entities (an intersection of the query's short concepts), every
concept covering at least one seed is scored for how likely it is to be a
related concept of the whole query. Two relevance models are available, both
divided by a penalty g(c) that punishes concepts reaching outside the
query's entity union E_u = union of e(c) over the short concepts:

  naive bayes   rel(c) = P(c) * prod_{e in seeds} (g_ * P(e|c) + (1-g_) * P(e)) / g(c)
  noisy-or      rel(c) = (1 - (1-leak) * prod_{e in seeds} (1 - P(c|e))) / g(c)

  g(c) = (delta + sum_{e in e(c), e not in E_u} (n(e,c)+1))
         / sum_{e in e(c)} (n(e,c)+1)

Entities are then reordered by how much relevant-concept mass covers them:

  rel(e) = sum_c P(e|c) * rel(c)

Separately, the subset intersections yield tiers of seed entities (grouped
by the largest subset supporting them) and pairwise ordering constraints
"higher tier beats lower tier" that the rank aggregation consumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .query import SubsetIntersection
from .taxonomy import Taxonomy, entity_union, normalize

DEFAULT_GAMMA = 0.5
DEFAULT_LEAK = 0.1
DEFAULT_DELTA = 0.5
DEFAULT_CONCEPTS_TOP_K = 10

NAIVE_BAYES = "naive_bayes"
NOISY_OR = "noisy_or"


@dataclass(frozen=True)
class ExpansionModel:
    """Relevance model choice and its smoothing constants."""

    kind: str = NOISY_OR
    gamma: float = DEFAULT_GAMMA  # naive bayes mixing weight
    leak: float = DEFAULT_LEAK    # noisy-or leak probability
    delta: float = DEFAULT_DELTA  # penalty numerator floor

    def __post_init__(self):
        if self.kind not in (NAIVE_BAYES, NOISY_OR):
            raise ValueError(f"unknown expansion model kind {self.kind!r}")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must be in (0, 1]")
        if not 0.0 <= self.leak < 1.0:
            raise ValueError("leak must be in [0, 1)")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must be in (0, 1)")


@dataclass(frozen=True)
class ConceptRelevance:
    """A scored expanded concept and the seed subset that produced it."""

    concept: str
    score: float
    source_subset: frozenset[str] | None = None


@dataclass(frozen=True)
class SeedTier:
    """Seed entities whose largest supporting subset has the given size."""

    size: int
    entities: frozenset[str]


@dataclass(frozen=True)
class PairwiseConstraint:
    """Every entity of ``higher`` should outrank every entity of ``lower``."""

    higher: frozenset[str]
    lower: frozenset[str]

    def __post_init__(self):
        if not self.higher or not self.lower:
            raise ValueError("constraint sides must be non-empty")
        if self.higher & self.lower:
            raise ValueError("constraint sides must be disjoint")


@dataclass
class ExpansionResult:
    """Retained concepts, the expansion ordering R_c, and constraints R_p."""

    concepts: list[ConceptRelevance]
    r_c: list[str]
    r_p: list[PairwiseConstraint]
    seed_entities: frozenset[str] = frozenset()
    entity_scores: dict[str, float] = field(default_factory=dict)


# -- relevance scores ----------------------------------------------------


def g_penalty(
    taxonomy: Taxonomy, concept: str, short_concepts: Iterable[str], delta: float
) -> float:
    """Over-generality penalty of ``concept`` against the query's entity union."""
    return _g_penalty(taxonomy, concept, entity_union(taxonomy, short_concepts), delta)


def _g_penalty(
    taxonomy: Taxonomy, concept: str, e_union: frozenset[str], delta: float
) -> float:
    entities = taxonomy.entities_of(concept)
    if not entities:
        raise ValueError(f"concept {normalize(concept)!r} not in taxonomy")
    outside = 0
    total = 0
    for entity, n in entities.items():
        total += n + 1
        if entity not in e_union:
            outside += n + 1
    return (delta + outside) / total


def rel_naive_bayes(
    taxonomy: Taxonomy,
    concept: str,
    seeds: Iterable[str],
    short_concepts: Iterable[str],
    model: ExpansionModel,
) -> float:
    """Smoothed naive bayes relevance of ``concept`` to the seed entities."""
    e_union = entity_union(taxonomy, short_concepts)
    return _rel_naive_bayes(taxonomy, concept, seeds, e_union, model)


def _rel_naive_bayes(taxonomy, concept, seeds, e_union, model) -> float:
    seeds = list(seeds)
    if not seeds:
        raise ValueError("seed set is empty")
    prior = taxonomy.prior("concept", concept)
    if prior == 0.0:
        raise ValueError(f"concept {normalize(concept)!r} not in taxonomy")
    # Log domain: the per-seed factors are < 1 and long seed lists underflow.
    log_score = math.log(prior)
    for entity in seeds:
        factor = model.gamma * taxonomy.p_e_given_c(concept, entity) + (
            1.0 - model.gamma
        ) * taxonomy.prior("entity", entity)
        if factor == 0.0:
            return 0.0
        log_score += math.log(factor)
    return math.exp(log_score) / _g_penalty(taxonomy, concept, e_union, model.delta)


def rel_noisy_or(
    taxonomy: Taxonomy,
    concept: str,
    seeds: Iterable[str],
    short_concepts: Iterable[str],
    model: ExpansionModel,
) -> float:
    """Noisy-or relevance: captures any concept related to at least one seed."""
    e_union = entity_union(taxonomy, short_concepts)
    return _rel_noisy_or(taxonomy, concept, seeds, e_union, model)


def _rel_noisy_or(taxonomy, concept, seeds, e_union, model) -> float:
    seeds = list(seeds)
    if not seeds:
        raise ValueError("seed set is empty")
    miss = 1.0
    for entity in seeds:
        miss *= 1.0 - taxonomy.p_c_given_e(concept, entity)
    numerator = 1.0 - (1.0 - model.leak) * miss
    return numerator / _g_penalty(taxonomy, concept, e_union, model.delta)


def _rel(taxonomy, concept, seeds, e_union, model) -> float:
    if model.kind == NAIVE_BAYES:
        return _rel_naive_bayes(taxonomy, concept, seeds, e_union, model)
    return _rel_noisy_or(taxonomy, concept, seeds, e_union, model)


# -- expansion ------------------------------------------------------------


def expand_concepts(
    taxonomy: Taxonomy,
    seeds: Iterable[str],
    short_concepts: Sequence[str],
    model: ExpansionModel,
    top_k: int = DEFAULT_CONCEPTS_TOP_K,
    source_subset: frozenset[str] | None = None,
) -> list[ConceptRelevance]:
    """Score every concept of a seed entity; keep the ``top_k`` by relevance.

    Ties are broken by concept name so the result never depends on candidate
    enumeration order.
    """
    seeds = sorted(set(seeds))
    if not seeds:
        raise ValueError("seed set is empty")
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    e_union = entity_union(taxonomy, short_concepts)
    scored = _score_candidates(taxonomy, seeds, e_union, model)
    ranked = sorted(scored.items(), key=lambda kv: (-kv[1], kv[0]))[:top_k]
    return [
        ConceptRelevance(concept=c, score=s, source_subset=source_subset)
        for c, s in ranked
    ]


def _score_candidates(taxonomy, seeds, e_union, model) -> dict[str, float]:
    candidates = sorted({c for e in seeds for c in taxonomy.concepts_of(e)})
    return {c: _rel(taxonomy, c, seeds, e_union, model) for c in candidates}


def entity_relevance(
    taxonomy: Taxonomy, concepts: Sequence[ConceptRelevance]
) -> dict[str, float]:
    """rel(e) = sum over retained concepts of P(e|c) * rel(c)."""
    scores: dict[str, float] = {}
    for cr in concepts:
        for entity in taxonomy.entities_of(cr.concept):
            scores[entity] = scores.get(entity, 0.0) + (
                taxonomy.p_e_given_c(cr.concept, entity) * cr.score
            )
    return scores


def rank_entities(
    taxonomy: Taxonomy, concepts: Sequence[ConceptRelevance]
) -> list[str]:
    """Linear ordering of every entity covered by the retained concepts."""
    if not concepts:
        raise ValueError("no concepts to rank entities from")
    scores = entity_relevance(taxonomy, concepts)
    return sorted(scores, key=lambda e: (-scores[e], e))


# -- seed tiers and constraints -------------------------------------------


def generate_seed_tiers(subsets: Sequence[SubsetIntersection]) -> list[SeedTier]:
    """Group seed entities by the largest subset size in which they appear.

    Assigning each entity only to its maximum tier keeps the tiers disjoint,
    so the induced constraints can never demand an entity outrank itself.
    """
    best_size: dict[str, int] = {}
    for si in subsets:
        for entity in si.entities:
            if si.size > best_size.get(entity, 0):
                best_size[entity] = si.size
    tiers: dict[int, set[str]] = {}
    for entity, size in best_size.items():
        tiers.setdefault(size, set()).add(entity)
    return [
        SeedTier(size=size, entities=frozenset(tiers[size]))
        for size in sorted(tiers, reverse=True)
    ]


def build_pairwise_constraints(
    tiers: Sequence[SeedTier],
) -> list[PairwiseConstraint]:
    """One constraint per consecutive tier pair; no transitive closure."""
    return [
        PairwiseConstraint(higher=hi.entities, lower=lo.entities)
        for hi, lo in zip(tiers, tiers[1:])
    ]


# -- orchestration ----------------------------------------------------------


def expand(
    taxonomy: Taxonomy,
    short_concepts: Sequence[str],
    subsets: Sequence[SubsetIntersection],
    model: ExpansionModel,
    top_k: int = DEFAULT_CONCEPTS_TOP_K,
) -> ExpansionResult:
    """Run the whole expansion stage for one query.

    When the full intersection is non-empty it is the single seed set.
    Otherwise every maximal-cardinality subset with a non-empty intersection
    is expanded independently and the retained concepts are pooled, summing
    the scores of concepts found by several runs.

    The query's own short concepts are always added to the retained pool
    (they carry the minimal penalty by construction), so the expansion
    ordering covers every seed-tier entity.
    """
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    concepts_q = list(dict.fromkeys(short_concepts))
    n = len(concepts_q)
    e_union = entity_union(taxonomy, concepts_q)

    full = [si for si in subsets if si.size == n]
    if full:
        runs = [(frozenset(concepts_q), full[0].entities)]
    else:
        if not subsets:
            raise ValueError("no non-empty subset intersections to seed from")
        best = max(si.size for si in subsets)
        runs = [(si.subset, si.entities) for si in subsets if si.size == best]

    pooled: dict[str, float] = {}
    sources: dict[str, frozenset[str]] = {}
    for source, seeds in runs:
        seeds = sorted(seeds)
        scored = _score_candidates(taxonomy, seeds, e_union, model)
        retained = {
            c
            for c, _ in sorted(scored.items(), key=lambda kv: (-kv[1], kv[0]))[:top_k]
        }
        retained.update(c for c in concepts_q if c in scored)
        for c in retained:
            pooled[c] = pooled.get(c, 0.0) + scored[c]
            sources.setdefault(c, source)
    # Short concepts that were candidates in no run still get a model score
    # against each run's seeds (the noisy-or leak keeps it meaningful).
    for c in concepts_q:
        if c not in pooled:
            pooled[c] = sum(
                _rel(taxonomy, c, sorted(seeds), e_union, model) for _, seeds in runs
            )
            sources[c] = frozenset(concepts_q)

    concepts = [
        ConceptRelevance(concept=c, score=pooled[c], source_subset=sources[c])
        for c in sorted(pooled, key=lambda c: (-pooled[c], c))
    ]
    entity_scores = entity_relevance(taxonomy, concepts)
    r_c = sorted(entity_scores, key=lambda e: (-entity_scores[e], e))
    tiers = generate_seed_tiers(subsets)
    r_p = build_pairwise_constraints(tiers)
    seed_entities = frozenset().union(*(seeds for _, seeds in runs))
    return ExpansionResult(
        concepts=concepts,
        r_c=r_c,
        r_p=r_p,
        seed_entities=seed_entities,
        entity_scores=entity_scores,
    )
