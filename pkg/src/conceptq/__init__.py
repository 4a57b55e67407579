"""conceptq: top-k entity retrieval for long concept queries.

A long concept query names a head noun with several modifiers ("top american
private university"). The engine decomposes it into short concepts over an
isA co-occurrence taxonomy, ranks the candidate entities with a mutually
recursive relevance iteration, expands the concept set probabilistically to
recover entities the raw intersection misses, and aggregates the resulting
orderings and constraints into one ranking by maximum likelihood.
"""

from .aggregate import (
    ObjectiveWeights,
    OptimizerParams,
    ScoreVector,
    bt_pair_prob,
    gradient,
    listwise_log_likelihood,
    objective,
    optimize,
    pairwise_log_likelihood,
)
from .baseline import BaselineRanking, baseline_rank
from .errors import (
    DataFormatError,
    EngineError,
    NoCandidateEntitiesError,
    OptimizationError,
    QueryParseError,
    UnanswerableQueryError,
)
from .evaluation import (
    EvalReport,
    GroundTruth,
    evaluate_queries,
    fixture_f1,
    holdout_experiment,
    intpro_baseline,
    planted_instance,
    precision_at_k,
    ratio_at_k,
    recall_at_k,
)
from .expansion import (
    ConceptRelevance,
    ExpansionModel,
    ExpansionResult,
    PairwiseConstraint,
    SeedTier,
    build_pairwise_constraints,
    expand,
    expand_concepts,
    g_penalty,
    generate_seed_tiers,
    rank_entities,
    rel_naive_bayes,
    rel_noisy_or,
)
from .pipeline import PipelineConfig, QueryResult, RankedEntity, run_query
from .query import (
    Decomposition,
    LongConceptQuery,
    SubsetIntersection,
    decompose,
    enumerate_subsets,
    parse,
)
from .taxonomy import (
    CooccurrenceRecord,
    Taxonomy,
    entity_intersection,
    entity_union,
    ingest,
    load,
    normalize,
)

__version__ = "0.1.0"
