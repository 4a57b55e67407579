"""Command-line interface: query, eval, and validate subcommands.

Every run prints a reproducibility header first, echoing the full effective
configuration (defaulted values included), so identical configs and inputs
give byte-identical output.

Exit codes: 0 success, 2 usage error, 3 data error, 4 unanswerable query.

With ``--format json`` each command emits a single JSON document (keys
sorted) instead of the text report:

  query     {"config": {<flag echo>}, "short_concepts": [str],
             "unresolved_modifiers": [str],
             "results": [{"rank": int, "entity": str, "score": float,
                          "provenance": "seed"|"expanded"|"baseline-only"}]}
  eval      {"config": {<flag echo>},
             "per_query": [{"query": str, "metrics": {"<name>@<k>": float}}],
             "averages": {"<name>@<k>": float}}
  validate  {"taxonomy": str, "stats": {"concepts": int, "entities": int,
             "edges": int, "grand_total": int, "marginals": "ok"}}
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import evaluation
from .errors import (
    DataFormatError,
    EngineError,
    NoCandidateEntitiesError,
    QueryParseError,
    UnanswerableQueryError,
)
from .evaluation import GroundTruth, evaluate_queries, holdout_experiment
from .expansion import NAIVE_BAYES, NOISY_OR
from .pipeline import PipelineConfig, run_query
from .taxonomy import load, normalize

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_UNANSWERABLE = 4

MODEL_FLAGS = {"nb": NAIVE_BAYES, "noisy-or": NOISY_OR}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conceptq",
        description="Answer long concept queries over an isA co-occurrence taxonomy.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", choices=sorted(MODEL_FLAGS), default="noisy-or",
                        help="concept expansion model (default: noisy-or)")
    common.add_argument("--gamma", type=float, default=PipelineConfig.gamma,
                        help="naive bayes smoothing weight")
    common.add_argument("--lambda", dest="leak", type=float, default=PipelineConfig.leak,
                        help="noisy-or leak probability")
    common.add_argument("--delta", type=float, default=PipelineConfig.delta,
                        help="over-generality penalty floor")
    common.add_argument("--alpha", type=float, default=PipelineConfig.alpha,
                        help="weight of the expansion ordering")
    common.add_argument("--beta", type=float, default=PipelineConfig.beta,
                        help="weight of the pairwise constraints")
    common.add_argument("--concepts-top-k", type=int, default=PipelineConfig.concepts_top_k,
                        help="expanded concepts kept per seed set")
    common.add_argument("--lr", type=float, default=PipelineConfig.learning_rate,
                        help="optimizer learning rate")
    common.add_argument("--epochs", type=int, default=PipelineConfig.max_epochs,
                        help="optimizer epoch limit")
    common.add_argument("--tol", type=float, default=PipelineConfig.opt_tol,
                        help="optimizer convergence tolerance")
    common.add_argument("--seed", type=int, default=PipelineConfig.seed,
                        help="random seed for stochastic updates and hold-out")
    common.add_argument("--stochastic", action="store_true",
                        help="shuffle likelihood terms into per-term updates")
    common.add_argument("--format", choices=["text", "json"], default="text",
                        help="output format")

    query = sub.add_parser("query", parents=[common],
                           help="answer one long concept query")
    query.add_argument("taxonomy", help="taxonomy file (concept<TAB>entity<TAB>count)")
    query.add_argument("text", help="the long concept query")
    query.add_argument("--k", type=int, default=10, help="results to return")
    query.add_argument("--head", default=None,
                       help="multi-word head override (must end the query)")

    evalp = sub.add_parser("eval", parents=[common],
                           help="score queries against ground truth or by hold-out")
    evalp.add_argument("taxonomy")
    evalp.add_argument("queries", help="file with one query per line")
    evalp.add_argument("truth", nargs="?", default=None,
                       help="ground truth file (query<TAB>entity per line)")
    evalp.add_argument("--k", default="10",
                       help="comma-separated list of cutoffs (default: 10)")
    evalp.add_argument("--holdout", type=float, default=None, metavar="FRACTION",
                       help="run the hold-out experiment instead of truth scoring")

    validate = sub.add_parser("validate", help="ingest a taxonomy and print statistics")
    validate.add_argument("taxonomy")
    validate.add_argument("--format", choices=["text", "json"], default="text")

    return parser


def _config_from_args(args) -> PipelineConfig:
    config = PipelineConfig(
        model_kind=MODEL_FLAGS[args.model],
        gamma=args.gamma,
        leak=args.leak,
        delta=args.delta,
        alpha=args.alpha,
        beta=args.beta,
        concepts_top_k=args.concepts_top_k,
        learning_rate=args.lr,
        max_epochs=args.epochs,
        opt_tol=args.tol,
        seed=args.seed,
        stochastic=args.stochastic,
        head=getattr(args, "head", None),
    )
    # force range validation before any file is touched
    config.expansion_model()
    config.weights()
    config.optimizer_params()
    if config.concepts_top_k < 1:
        raise ValueError("--concepts-top-k must be >= 1")
    return config


def _config_echo(args, config: PipelineConfig, **extra) -> dict[str, object]:
    echo: dict[str, object] = {
        "command": args.command,
        "taxonomy": args.taxonomy,
        "model": args.model,
        "gamma": config.gamma,
        "lambda": config.leak,
        "delta": config.delta,
        "alpha": config.alpha,
        "beta": config.beta,
        "concepts_top_k": config.concepts_top_k,
        "lr": config.learning_rate,
        "epochs": config.max_epochs,
        "tol": config.opt_tol,
        "seed": config.seed,
        "stochastic": config.stochastic,
        "format": args.format,
    }
    echo.update(extra)
    return echo


def _print_header(echo: dict[str, object]) -> None:
    pairs = " ".join(f"{key}={value!r}" for key, value in echo.items())
    print(f"# conceptq {pairs}")


def cmd_query(args) -> int:
    if args.k < 1:
        print(f"error: --k must be >= 1, got {args.k}", file=sys.stderr)
        return EXIT_USAGE
    config = _config_from_args(args)
    taxonomy = load(args.taxonomy)
    result = run_query(taxonomy, args.text, config)
    echo = _config_echo(args, config, query=args.text, k=args.k, head=args.head)

    if args.format == "json":
        doc = {
            "config": echo,
            "short_concepts": list(result.decomposition.short_concepts),
            "unresolved_modifiers": list(result.decomposition.unresolved),
            "results": [
                {
                    "rank": i,
                    "entity": r.entity,
                    "score": r.score,
                    "provenance": r.provenance,
                }
                for i, r in enumerate(result.top(args.k), start=1)
            ],
        }
        print(json.dumps(doc, sort_keys=True))
        return EXIT_OK

    _print_header(echo)
    print(f"# short-concepts={list(result.decomposition.short_concepts)!r} "
          f"unresolved={list(result.decomposition.unresolved)!r}")
    for i, r in enumerate(result.top(args.k), start=1):
        print(f"{i}\t{r.entity}\t{r.score:.6f}\t{r.provenance}")
    return EXIT_OK


def _read_queries(path) -> list[str]:
    queries: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            stripped = line.strip()
            if stripped and not stripped.startswith("#"):
                queries.append(stripped)
    return queries


def _read_truth(path) -> dict[str, set[str]]:
    truth: dict[str, set[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for line_num, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            fields = line.rstrip("\n").split("\t")
            if len(fields) != 2 or not fields[0].strip() or not fields[1].strip():
                raise DataFormatError(
                    f"line {line_num}: expected query<TAB>entity", row=line_num
                )
            truth.setdefault(normalize(fields[0]), set()).add(normalize(fields[1]))
    return truth


def _metric_line(label: str, metrics: dict[str, float]) -> str:
    parts = [f"{key}={metrics[key]:.6f}" for key in sorted(metrics)]
    return "\t".join([label] + parts)


def cmd_eval(args) -> int:
    config = _config_from_args(args)
    try:
        ks = [int(part) for part in str(args.k).split(",") if part.strip()]
    except ValueError:
        print(f"error: bad --k list {args.k!r}", file=sys.stderr)
        return EXIT_USAGE
    if not ks or any(k < 1 for k in ks):
        print(f"error: bad --k list {args.k!r}", file=sys.stderr)
        return EXIT_USAGE
    if args.holdout is None and args.truth is None:
        print("error: eval needs a truth file or --holdout", file=sys.stderr)
        return EXIT_USAGE

    taxonomy = load(args.taxonomy)
    queries = _read_queries(args.queries)
    echo = _config_echo(
        args, config, queries=args.queries, truth=args.truth,
        k=",".join(map(str, ks)), holdout=args.holdout,
    )

    if args.holdout is not None:
        reports = []
        for query in queries:
            try:
                report = holdout_experiment(
                    taxonomy, query, args.holdout, rng_seed=config.seed, k=ks[0],
                    config=config,
                )
            except EngineError as exc:
                print(f"warning: {query!r} skipped: {exc}", file=sys.stderr)
                continue
            reports.append(report.per_query[0])
        averages: dict[str, float] = {}
        if reports:
            for key in reports[0].metrics:
                averages[key] = sum(r.metrics[key] for r in reports) / len(reports)
        report = evaluation.EvalReport(per_query=reports, averages=averages, params=echo)
    else:
        truth_map = _read_truth(args.truth)
        per_query = []
        for query in queries:
            answers = truth_map.get(normalize(query))
            if not answers:
                print(f"warning: no ground truth for {query!r}; skipped", file=sys.stderr)
                continue
            truth = GroundTruth(query=query, answers=frozenset(answers))
            try:
                partial = evaluate_queries(taxonomy, [truth], ks, config)
            except (UnanswerableQueryError, QueryParseError) as exc:
                print(f"warning: {query!r} skipped: {exc}", file=sys.stderr)
                continue
            per_query.extend(partial.per_query)
        averages = {}
        if per_query:
            for key in per_query[0].metrics:
                averages[key] = sum(qm.metrics[key] for qm in per_query) / len(per_query)
        report = evaluation.EvalReport(per_query=per_query, averages=averages, params=echo)

    if args.format == "json":
        doc = {
            "config": echo,
            "per_query": [
                {"query": qm.query, "metrics": qm.metrics} for qm in report.per_query
            ],
            "averages": report.averages,
        }
        print(json.dumps(doc, sort_keys=True))
        return EXIT_OK

    _print_header(echo)
    for qm in report.per_query:
        print(_metric_line(f"query={qm.query}", qm.metrics))
    print(_metric_line("average", report.averages))
    return EXIT_OK


def cmd_validate(args) -> int:
    taxonomy = load(args.taxonomy)
    taxonomy.check_marginals()
    stats = {
        "concepts": len(taxonomy.concepts),
        "entities": len(taxonomy.entities),
        "edges": taxonomy.n_edges,
        "grand_total": taxonomy.grand_total,
        "marginals": "ok",
    }
    if args.format == "json":
        print(json.dumps({"taxonomy": args.taxonomy, "stats": stats}, sort_keys=True))
        return EXIT_OK
    print(f"# conceptq command='validate' taxonomy={args.taxonomy!r} format={args.format!r}")
    for key, value in stats.items():
        print(f"{key}={value}")
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING, format="%(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "query":
            return cmd_query(args)
        if args.command == "eval":
            return cmd_eval(args)
        return cmd_validate(args)
    except (UnanswerableQueryError, QueryParseError, NoCandidateEntitiesError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNANSWERABLE
    except (DataFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        # out-of-range parameter values are usage errors
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
