"""Prediction rejection ratio: oracle, random, and uncertainty-based PR values.

The PR value of an ordering is the mean of the cumulative sums of per-sample
risk taken in that order; risk is one minus the min-max-normalized quality
score. PRR relates the uncertainty ordering's PR to the oracle's, both
centered on the random baseline:

    PRR = (PR_uncertainty - PR_random) / (PR_oracle - PR_random)

so 1 means oracle-perfect ranking and 0 means no better than random.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from uqsum.numerics import minmax_normalize, rank_ascending
from uqsum.records import ScoreKind, ScoreVector

DEFAULT_ALPHA = 1000
DEFAULT_SEED = 42
_DEGENERATE_TOL = 1e-12


@dataclass
class PrrResult:
    prr: float
    pr_uncertainty: float
    pr_oracle: float
    pr_random_mean: float
    alpha: int
    seed: int
    degenerate: bool = False


def risk_from_nlg(nlg_scores: ScoreVector) -> np.ndarray:
    """Per-sample risk: 1 - minmax_normalize(quality scores), each in [0, 1]."""
    if not nlg_scores.higher_is_better:
        raise ValueError("risk is defined for quality scores where higher is better")
    if not nlg_scores.values:
        raise ValueError("cannot derive risk from an empty score vector")
    return 1.0 - minmax_normalize(nlg_scores.values)


def pr_value(risk, order) -> float:
    """Mean of cumulative risk sums after reordering `risk` by `order`."""
    risk = np.asarray(risk, dtype=float)
    order = np.asarray(order)
    if risk.shape != order.shape:
        raise ValueError(f"risk has length {risk.size} but order has length {order.size}")
    if not np.array_equal(np.sort(order), np.arange(risk.size)):
        raise ValueError("order must be a permutation of 0..N-1")
    return float(np.cumsum(risk[order]).mean())


def pr_oracle(nlg_scores: ScoreVector) -> float:
    """PR of the oracle ordering (negated quality, ascending): the minimum PR."""
    risk = risk_from_nlg(nlg_scores)
    order = rank_ascending(-np.asarray(nlg_scores.values, dtype=float))
    return pr_value(risk, order)


def _trial_rngs(seed: int, alpha: int):
    # Per-trial child seeds keep the result independent of any parallel
    # evaluation schedule; the reduction order is fixed by trial index.
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(alpha)]


def pr_random_mean(nlg_scores: ScoreVector, alpha: int = DEFAULT_ALPHA, seed: int = DEFAULT_SEED) -> float:
    """Monte-Carlo random baseline: mean PR over `alpha` random orderings.

    Permutations come from PCG64 generators seeded by spawning the given seed,
    so identical (seed, alpha) pairs give bit-identical results. Converges to
    `pr_random_expected` as alpha grows.
    """
    if alpha < 1:
        raise ValueError("alpha must be >= 1")
    risk = risk_from_nlg(nlg_scores)
    n = risk.size
    trials = np.empty(alpha)
    for i, rng in enumerate(_trial_rngs(seed, alpha)):
        trials[i] = pr_value(risk, rng.permutation(n))
    return float(trials.mean())


def pr_random_expected(nlg_scores: ScoreVector) -> float:
    """Closed-form expectation of PR under a uniform random ordering.

    Each risk element is equally likely at every position, and position j
    (1-based) is counted in N - j + 1 cumulative sums, which averages to
    (N + 1) / (2N) per unit of total risk.
    """
    risk = risk_from_nlg(nlg_scores)
    n = risk.size
    return float((n + 1) / (2 * n) * risk.sum())


def _prr_from_parts(
    risk: np.ndarray,
    oracle_pr: float,
    random_pr: float,
    uncertainty_values,
    alpha: int,
    seed: int,
) -> PrrResult:
    pr_unc = pr_value(risk, rank_ascending(uncertainty_values))
    denom = oracle_pr - random_pr
    if abs(denom) <= _DEGENERATE_TOL:
        return PrrResult(0.0, pr_unc, oracle_pr, random_pr, alpha, seed, degenerate=True)
    result = PrrResult((pr_unc - random_pr) / denom, pr_unc, oracle_pr, random_pr, alpha, seed)
    assert result.pr_oracle <= result.pr_random_mean + 1e-9
    return result


def prr(
    uncertainty: ScoreVector,
    nlg_scores: ScoreVector,
    alpha: int = DEFAULT_ALPHA,
    seed: int = DEFAULT_SEED,
    random_baseline: str = "monte_carlo",
) -> PrrResult:
    """Prediction rejection ratio of an uncertainty method against a quality metric.

    Both vectors must be aligned to the same id list. The random baseline is
    Monte-Carlo by default; "closed_form" substitutes the analytic expectation
    (useful for exact tests). A degenerate denominator (constant quality)
    yields prr = 0 with the `degenerate` flag set.
    """
    if uncertainty.kind is not ScoreKind.UNCERTAINTY or uncertainty.higher_is_better:
        raise ValueError("uncertainty vector must have kind=uncertainty and higher_is_better=False")
    if uncertainty.ids != nlg_scores.ids:
        raise ValueError(
            f"id lists differ between {uncertainty.name!r} and {nlg_scores.name!r}"
        )
    risk = risk_from_nlg(nlg_scores)
    oracle = pr_oracle(nlg_scores)
    if random_baseline == "monte_carlo":
        random_pr = pr_random_mean(nlg_scores, alpha=alpha, seed=seed)
    elif random_baseline == "closed_form":
        random_pr = pr_random_expected(nlg_scores)
    else:
        raise ValueError(f"unknown random baseline {random_baseline!r}")
    return _prr_from_parts(risk, oracle, random_pr, uncertainty.values, alpha, seed)
