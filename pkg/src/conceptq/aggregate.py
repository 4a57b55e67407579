"""Rank aggregation by maximizing a weighted Bradley-Terry log-likelihood.

Each entity gets a real score s; a pairwise win is modeled as
P(x beats y) = e^{s_x} / (e^{s_x} + e^{s_y}). A total ordering
Z = [z_1, ..., z_n] then has the sequential (Plackett-Luce) log-likelihood

    L(Z) = sum_{i=1}^{n-1} log( e^{s_{z_i}} / sum_{j >= i} e^{s_{z_j}} )

and a set-level constraint X > Y has

    L(X, Y) = log( sum_{x in X} e^{s_x} / (sum_X e^{s_x} + sum_Y e^{s_y}) ).

The aggregation objective combines the baseline ordering R_b, the expansion
ordering R_c, and the constraint list R_p:

    maximize  (1 - alpha - beta) L(R_b) + alpha L(R_c) + beta L(R_p)

which is climbed by (optionally stochastic) gradient ascent on the exact
analytic gradient. The objective depends only on score differences, so the
final scores are re-centered to mean zero before reporting.

All log-sum-exp reductions are max-shifted; gradients are assembled from
exponent differences that are bounded above by zero, so no intermediate can
overflow regardless of score magnitudes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import OptimizationError
from .expansion import PairwiseConstraint

DEFAULT_ALPHA = 1.0 / 3.0
DEFAULT_BETA = 1.0 / 3.0
DEFAULT_LEARNING_RATE = 0.05
DEFAULT_MAX_EPOCHS = 1000
DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class ObjectiveWeights:
    """Mixing weights; the baseline ordering gets 1 - alpha - beta."""

    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be non-negative")
        if self.alpha + self.beta > 1.0 + 1e-12:
            raise ValueError("alpha + beta must not exceed 1")

    @property
    def baseline(self) -> float:
        return 1.0 - self.alpha - self.beta


@dataclass(frozen=True)
class OptimizerParams:
    learning_rate: float = DEFAULT_LEARNING_RATE
    max_epochs: int = DEFAULT_MAX_EPOCHS
    tol: float = DEFAULT_TOL
    rng_seed: int = 0
    stochastic: bool = False

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


@dataclass
class ScoreVector:
    """Optimized per-entity scores over the aggregation universe."""

    scores: dict[str, float]
    universe: frozenset[str]


def bt_pair_prob(s_x: float, s_y: float) -> float:
    """P(x beats y) = e^{s_x} / (e^{s_x} + e^{s_y}), overflow-safe."""
    d = s_x - s_y
    if d >= 0:
        return 1.0 / (1.0 + math.exp(-d))
    e = math.exp(d)
    return e / (1.0 + e)


def _lse(values: np.ndarray) -> float:
    m = values.max()
    return float(m + np.log(np.exp(values - m).sum()))


def _check_members(name: str, members, universe: Mapping[str, float]) -> None:
    missing = [e for e in members if e not in universe]
    if missing:
        raise ValueError(f"{name} mentions entities outside the score universe: {missing}")


def listwise_log_likelihood(
    ordering: Sequence[str], scores: Mapping[str, float]
) -> float:
    """Sequential log-likelihood of a total ordering under the scores.

    Orderings of length 0 or 1 have an empty product and contribute 0.
    """
    if len(set(ordering)) != len(ordering):
        raise ValueError("ordering contains duplicate entities")
    _check_members("ordering", ordering, scores)
    n = len(ordering)
    if n < 2:
        return 0.0
    s = np.array([scores[e] for e in ordering])
    # suffix[i] = log sum_{j >= i} e^{s_j}, accumulated stably from the end
    suffix = np.logaddexp.accumulate(s[::-1])[::-1]
    return float(np.sum(s[:-1] - suffix[:-1]))


def pairwise_log_likelihood(
    constraints: Sequence[PairwiseConstraint], scores: Mapping[str, float]
) -> float:
    """Sum of log P(higher set beats lower set) over all constraints."""
    total = 0.0
    for con in constraints:
        _check_members("constraint", con.higher | con.lower, scores)
        lx = _lse(np.array([scores[e] for e in con.higher]))
        ly = _lse(np.array([scores[e] for e in con.lower]))
        total += lx - np.logaddexp(lx, ly)
    return float(total)


def objective(
    scores: Mapping[str, float],
    r_b: Sequence[str],
    r_c: Sequence[str],
    r_p: Sequence[PairwiseConstraint],
    weights: ObjectiveWeights | None = None,
) -> float:
    """Weighted combination of the three log-likelihood components."""
    weights = weights or ObjectiveWeights()
    total = 0.0
    if r_b:
        total += weights.baseline * listwise_log_likelihood(r_b, scores)
    if r_c:
        total += weights.alpha * listwise_log_likelihood(r_c, scores)
    if r_p:
        total += weights.beta * pairwise_log_likelihood(r_p, scores)
    return total


# -- analytic gradient ------------------------------------------------------


def _listwise_grad(s: np.ndarray, idx: np.ndarray, weight: float, out: np.ndarray):
    """Add the gradient of the listwise log-likelihood of ordering ``idx``.

    For the entity at position p (0-based) the derivative is
    [p <= n-2] - sum_{k <= min(p, n-2)} softmax_k(p), where softmax_k is the
    choice distribution of the k-th term over the suffix k..n-1. The inner
    sum equals exp(s_p + M_p) with M_p the running log-sum-exp of -suffix
    log-normalizers, which keeps every exponent bounded.
    """
    n = idx.size
    if n < 2 or weight == 0.0:
        return
    so = s[idx]
    suffix = np.logaddexp.accumulate(so[::-1])[::-1]
    m = np.logaddexp.accumulate(-suffix[: n - 1])
    contrib = np.empty(n)
    contrib[: n - 1] = 1.0 - np.exp(so[: n - 1] + m)
    contrib[n - 1] = -np.exp(so[n - 1] + m[n - 2])
    out[idx] += weight * contrib


def _pairwise_grad(
    s: np.ndarray,
    higher: np.ndarray,
    lower: np.ndarray,
    weight: float,
    out: np.ndarray,
):
    """Add the gradient of one set-level constraint's log-likelihood."""
    if weight == 0.0:
        return
    lx = _lse(s[higher])
    ly = _lse(s[lower])
    la = np.logaddexp(lx, ly)
    out[higher] += weight * np.exp(s[higher] + ly - lx - la)
    out[lower] -= weight * np.exp(s[lower] - la)


def gradient(
    scores: Mapping[str, float],
    r_b: Sequence[str],
    r_c: Sequence[str],
    r_p: Sequence[PairwiseConstraint],
    weights: ObjectiveWeights | None = None,
) -> dict[str, float]:
    """Exact gradient of :func:`objective` with respect to every score."""
    weights = weights or ObjectiveWeights()
    names = list(scores)
    index = {e: i for i, e in enumerate(names)}
    s = np.array([scores[e] for e in names])
    out = np.zeros(len(names))
    if r_b:
        _check_members("ordering", r_b, scores)
        _listwise_grad(s, np.array([index[e] for e in r_b], dtype=np.intp), weights.baseline, out)
    if r_c:
        _check_members("ordering", r_c, scores)
        _listwise_grad(s, np.array([index[e] for e in r_c], dtype=np.intp), weights.alpha, out)
    for con in r_p:
        _check_members("constraint", con.higher | con.lower, scores)
        _pairwise_grad(
            s,
            np.array([index[e] for e in sorted(con.higher)], dtype=np.intp),
            np.array([index[e] for e in sorted(con.lower)], dtype=np.intp),
            weights.beta,
            out,
        )
    return {e: float(out[i]) for e, i in index.items()}


# -- optimization -----------------------------------------------------------


def optimize(
    r_b: Sequence[str],
    r_c: Sequence[str],
    r_p: Sequence[PairwiseConstraint],
    weights: ObjectiveWeights | None = None,
    params: OptimizerParams | None = None,
) -> tuple[ScoreVector, list[str]]:
    """Fit scores to the orderings and constraints; return them and the
    induced final ordering (descending score, ties lexicographic).

    Scores start at zero -- the objective is shift-invariant, so any constant
    start is equivalent -- and are re-centered to mean zero on return.
    With ``params.stochastic`` the per-term updates of an epoch are applied
    one at a time in an order shuffled by the seeded generator; otherwise
    every epoch takes one full-gradient step.
    """
    weights = weights or ObjectiveWeights()
    params = params or OptimizerParams()
    if not r_b and not r_c:
        raise ValueError("need at least one non-empty ordering")
    for name, ordering in (("r_b", r_b), ("r_c", r_c)):
        if len(set(ordering)) != len(ordering):
            raise ValueError(f"{name} contains duplicate entities")

    universe = sorted(
        set(r_b) | set(r_c) | {e for con in r_p for e in con.higher | con.lower}
    )
    index = {e: i for i, e in enumerate(universe)}
    idx_b = np.array([index[e] for e in r_b], dtype=np.intp)
    idx_c = np.array([index[e] for e in r_c], dtype=np.intp)
    cons = [
        (
            np.array([index[e] for e in sorted(con.higher)], dtype=np.intp),
            np.array([index[e] for e in sorted(con.lower)], dtype=np.intp),
        )
        for con in r_p
    ]

    def current_objective(s: np.ndarray) -> float:
        total = 0.0
        for idx, weight in ((idx_b, weights.baseline), (idx_c, weights.alpha)):
            if idx.size >= 2:
                so = s[idx]
                suffix = np.logaddexp.accumulate(so[::-1])[::-1]
                total += weight * float(np.sum(so[:-1] - suffix[:-1]))
        for hi, lo in cons:
            lx = _lse(s[hi])
            ly = _lse(s[lo])
            total += weights.beta * float(lx - np.logaddexp(lx, ly))
        return total

    s = np.zeros(len(universe))
    rng = np.random.default_rng(params.rng_seed)
    terms = _term_list(idx_b, idx_c, cons, weights) if params.stochastic else None

    prev = current_objective(s)
    for epoch in range(1, params.max_epochs + 1):
        if params.stochastic:
            _stochastic_epoch(s, terms, params.learning_rate, rng)
        else:
            grad = np.zeros_like(s)
            _listwise_grad(s, idx_b, weights.baseline, grad)
            _listwise_grad(s, idx_c, weights.alpha, grad)
            for hi, lo in cons:
                _pairwise_grad(s, hi, lo, weights.beta, grad)
            s += params.learning_rate * grad
        cur = current_objective(s)
        if not math.isfinite(cur):
            raise OptimizationError(
                f"objective became non-finite ({cur}) at epoch {epoch}; "
                f"reduce the learning rate ({params.learning_rate})"
            )
        if abs(cur - prev) < params.tol:
            break
        prev = cur

    s -= s.mean()
    ordering = sorted(universe, key=lambda e: (-s[index[e]], e))
    return (
        ScoreVector(scores={e: float(s[i]) for e, i in index.items()}, universe=frozenset(universe)),
        ordering,
    )


def _term_list(idx_b, idx_c, cons, weights):
    """One likelihood term per list position / constraint, with its weight."""
    terms = []
    if weights.baseline > 0:
        terms += [("list", idx_b, k, weights.baseline) for k in range(idx_b.size - 1)]
    if weights.alpha > 0:
        terms += [("list", idx_c, k, weights.alpha) for k in range(idx_c.size - 1)]
    if weights.beta > 0:
        terms += [("pair", hi, lo, weights.beta) for hi, lo in cons]
    return terms


def _stochastic_epoch(s, terms, lr, rng):
    for t in rng.permutation(len(terms)):
        kind, a, b, weight = terms[t]
        if kind == "list":
            tail = a[b:]
            st = s[tail]
            p = np.exp(st - st.max())
            p /= p.sum()
            s[tail] -= lr * weight * p
            s[a[b]] += lr * weight
        else:
            grad = np.zeros_like(s)
            _pairwise_grad(s, a, b, weight, grad)
            s += lr * grad
