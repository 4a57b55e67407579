"""End-to-end query runs: parse, decompose, rank, expand, aggregate."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .aggregate import (
    DEFAULT_ALPHA,
    DEFAULT_BETA,
    DEFAULT_LEARNING_RATE,
    DEFAULT_MAX_EPOCHS,
    DEFAULT_TOL,
    ObjectiveWeights,
    OptimizerParams,
    ScoreVector,
    optimize,
)
from .baseline import DEFAULT_MAX_ITER, DEFAULT_TOL as BASELINE_TOL, BaselineRanking, baseline_rank
from .expansion import (
    DEFAULT_CONCEPTS_TOP_K,
    DEFAULT_DELTA,
    DEFAULT_GAMMA,
    DEFAULT_LEAK,
    NOISY_OR,
    ExpansionModel,
    ExpansionResult,
    expand,
)
from .query import Decomposition, LongConceptQuery, SubsetIntersection, decompose, enumerate_subsets, parse
from .taxonomy import Taxonomy, entity_union

PROVENANCE_SEED = "seed"
PROVENANCE_EXPANDED = "expanded"
PROVENANCE_BASELINE = "baseline-only"


@dataclass
class PipelineConfig:
    """Every tunable of a query run, with the engine defaults."""

    model_kind: str = NOISY_OR
    gamma: float = DEFAULT_GAMMA
    leak: float = DEFAULT_LEAK
    delta: float = DEFAULT_DELTA
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    concepts_top_k: int = DEFAULT_CONCEPTS_TOP_K
    learning_rate: float = DEFAULT_LEARNING_RATE
    max_epochs: int = DEFAULT_MAX_EPOCHS
    opt_tol: float = DEFAULT_TOL
    baseline_max_iter: int = DEFAULT_MAX_ITER
    baseline_tol: float = BASELINE_TOL
    seed: int = 0
    stochastic: bool = False
    head: Optional[str] = None

    def expansion_model(self) -> ExpansionModel:
        return ExpansionModel(
            kind=self.model_kind, gamma=self.gamma, leak=self.leak, delta=self.delta
        )

    def weights(self) -> ObjectiveWeights:
        return ObjectiveWeights(alpha=self.alpha, beta=self.beta)

    def optimizer_params(self) -> OptimizerParams:
        return OptimizerParams(
            learning_rate=self.learning_rate,
            max_epochs=self.max_epochs,
            tol=self.opt_tol,
            rng_seed=self.seed,
            stochastic=self.stochastic,
        )


@dataclass(frozen=True)
class RankedEntity:
    entity: str
    score: float
    provenance: str


@dataclass
class QueryResult:
    """Full trace of a query run; ``ranking`` is the aggregated ordering."""

    query: LongConceptQuery
    decomposition: Decomposition
    subsets: list[SubsetIntersection]
    baseline: BaselineRanking
    expansion: ExpansionResult
    scores: ScoreVector
    ranking: list[RankedEntity]
    config: PipelineConfig = field(default_factory=PipelineConfig)

    def top(self, k: int) -> list[RankedEntity]:
        return self.ranking[:k]

    def entities(self) -> list[str]:
        return [r.entity for r in self.ranking]


def run_query(
    taxonomy: Taxonomy, raw_query: str, config: PipelineConfig | None = None
) -> QueryResult:
    """Answer one long concept query over the taxonomy.

    Provenance marks where each result entity came from: ``seed`` entities
    belonged to an intersection used to seed the expansion, ``expanded``
    entities are new ones surfaced only through expanded concepts, and
    ``baseline-only`` entities sit in the query concepts' entity union
    without being seeds.
    """
    config = config or PipelineConfig()
    query = parse(raw_query, config.head)
    decomposition = decompose(query, taxonomy)
    subsets = enumerate_subsets(taxonomy, decomposition.short_concepts)
    ranking_b = baseline_rank(
        taxonomy,
        decomposition.short_concepts,
        max_iter=config.baseline_max_iter,
        tol=config.baseline_tol,
    )
    expansion = expand(
        taxonomy,
        decomposition.short_concepts,
        subsets,
        config.expansion_model(),
        top_k=config.concepts_top_k,
    )
    scores, ordering = optimize(
        ranking_b.ordering,
        expansion.r_c,
        expansion.r_p,
        config.weights(),
        config.optimizer_params(),
    )

    e_union = entity_union(taxonomy, decomposition.short_concepts)
    ranking = []
    for entity in ordering:
        if entity in expansion.seed_entities:
            provenance = PROVENANCE_SEED
        elif entity not in e_union:
            provenance = PROVENANCE_EXPANDED
        else:
            provenance = PROVENANCE_BASELINE
        ranking.append(
            RankedEntity(entity=entity, score=scores.scores[entity], provenance=provenance)
        )

    return QueryResult(
        query=query,
        decomposition=decomposition,
        subsets=subsets,
        baseline=ranking_b,
        expansion=expansion,
        scores=scores,
        ranking=ranking,
        config=config,
    )
