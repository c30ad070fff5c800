"""White-box uncertainty scores: information-, density-, ensemble-, prompt-based.

Every score follows the convention "higher = more uncertain". Entropies and
KL divergences are in nats. Probabilities are floored at 1e-12 before any
log or KL so that one-hot member distributions stay finite; sequence
probabilities below the floor saturate accordingly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.special import logsumexp

from uqsum.records import EnsembleBlock, GenerationRecord

PROB_FLOOR = 1e-12
LOG_FLOOR = math.log(PROB_FLOOR)


def msp(record: GenerationRecord, length_normalize: bool = False) -> float:
    """Negated total log-probability of the greedy generation."""
    lps = record.greedy_token_logprobs
    if not lps:
        raise ValueError(f"record {record.id!r}: greedy_token_logprobs is empty")
    total = -float(np.sum(lps))
    return total / len(lps) if length_normalize else total


def mte(record: GenerationRecord) -> float:
    """Mean per-token predictive entropy of the greedy generation.

    Falls back to the first ensemble member's token distributions (over the
    restricted vocabulary plus tail bucket) when explicit entropies are absent.
    """
    if record.greedy_token_entropies is not None:
        ent = record.greedy_token_entropies
        if not ent:
            raise ValueError(f"record {record.id!r}: greedy_token_entropies is empty")
        return float(np.mean(ent))
    if record.ensemble is not None and record.ensemble.token_distributions:
        per_token = [
            _entropy(np.asarray(d.member_probs[0] + [d.tail_mass[0]]))
            for d in record.ensemble.token_distributions
        ]
        return float(np.mean(per_token))
    raise ValueError(f"MTE requires token entropies (record {record.id!r})")


def mcse(record: GenerationRecord, length_normalize: bool = True) -> float:
    """Monte-Carlo sequence entropy: negated mean sample log-probability.

    With `length_normalize`, each sample's total log-probability is divided by
    its token count before averaging.
    """
    if not record.samples:
        raise ValueError(f"record {record.id!r}: MCSE needs at least one sampled generation")
    totals = []
    for idx, sample in enumerate(record.samples):
        if not sample.token_logprobs:
            raise ValueError(f"record {record.id!r}: samples[{idx}] has no token_logprobs")
        total = float(np.sum(sample.token_logprobs))
        totals.append(total / len(sample.token_logprobs) if length_normalize else total)
    return -float(np.mean(totals))


@dataclass
class DensityModel:
    """Gaussian density of training embeddings, optionally in a PCA subspace.

    `mean` and `covariance` live in the working space (the PCA subspace when
    `pca_basis` is set); `covariance` is already ridged and its Cholesky
    factor is cached for distance queries.
    """

    mean: np.ndarray
    covariance: np.ndarray
    ridge: float
    pca_basis: np.ndarray | None = None
    pca_mean: np.ndarray | None = None

    def __post_init__(self) -> None:
        if not np.allclose(self.covariance, self.covariance.T, atol=1e-9):
            raise ValueError("covariance must be symmetric")
        self._chol = cho_factor(self.covariance, lower=True)

    @property
    def dim(self) -> int:
        return self.mean.size


def fit_density(training_embeddings, use_pca: bool = False, variance_kept: float = 0.95) -> DensityModel:
    """Fit mean and ridged covariance; with PCA, keep components covering
    at least `variance_kept` of the total variance first."""
    x = np.asarray(training_embeddings, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("fit_density needs at least 2 embeddings of shared dimension")
    pca_basis = None
    pca_mean = None
    if use_pca:
        pca_mean = x.mean(axis=0)
        centered = x - pca_mean
        cov_full = centered.T @ centered / x.shape[0]
        eigvals, eigvecs = np.linalg.eigh(cov_full)
        order = np.argsort(eigvals)[::-1]
        eigvals = np.maximum(eigvals[order], 0.0)
        total = eigvals.sum()
        if total <= 0:
            d = 1
        else:
            explained = np.cumsum(eigvals) / total
            d = int(np.searchsorted(explained, variance_kept - 1e-12) + 1)
        pca_basis = eigvecs[:, order[:d]].T
        x = centered @ pca_basis.T

    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / x.shape[0]
    dim = cov.shape[0]
    trace = float(np.trace(cov))
    # Raw covariance of few samples can be singular; zero-variance data would
    # give a zero ridge, so fall back to an absolute one.
    ridge = 1e-6 * trace / dim if trace > 0 else 1e-6
    cov = cov + ridge * np.eye(dim)
    return DensityModel(mean=mean, covariance=cov, ridge=ridge, pca_basis=pca_basis, pca_mean=pca_mean)


def mahalanobis(embedding, model: DensityModel) -> float:
    """Distance sqrt((x - mu)^T Sigma^-1 (x - mu)) via a Cholesky solve."""
    x = np.asarray(embedding, dtype=float)
    if model.pca_basis is not None:
        if x.shape != model.pca_mean.shape:
            raise ValueError(f"embedding has dimension {x.size}, model expects {model.pca_mean.size}")
        x = model.pca_basis @ (x - model.pca_mean)
    elif x.shape != model.mean.shape:
        raise ValueError(f"embedding has dimension {x.size}, model expects {model.dim}")
    diff = x - model.mean
    solved = cho_solve(model._chol, diff)
    return float(np.sqrt(max(diff @ solved, 0.0)))


def _entropy(probs: np.ndarray) -> float:
    p = np.maximum(probs, PROB_FLOOR)
    return float(-(p * np.log(p)).sum())


def _position_matrix(dist) -> np.ndarray:
    # Members as rows over the restricted vocabulary plus the tail bucket.
    return np.column_stack([np.asarray(dist.member_probs, dtype=float), np.asarray(dist.tail_mass, dtype=float)])


def token_total_uncertainty(ensemble: EnsembleBlock | None) -> float:
    """Mean entropy of the member-averaged posterior across greedy positions."""
    if ensemble is None or not ensemble.token_distributions:
        raise ValueError("token-level ensemble uncertainty requires an ensemble block")
    per_position = []
    for dist in ensemble.token_distributions:
        members = _position_matrix(dist)
        per_position.append(_entropy(members.mean(axis=0)))
    return float(np.mean(per_position))


def token_rmi(ensemble: EnsembleBlock | None) -> float:
    """Mean reverse-KL from the averaged posterior to each member, per position."""
    if ensemble is None or not ensemble.token_distributions:
        raise ValueError("token-level ensemble uncertainty requires an ensemble block")
    per_position = []
    for dist in ensemble.token_distributions:
        members = np.maximum(_position_matrix(dist), PROB_FLOOR)
        pbar = np.maximum(_position_matrix(dist).mean(axis=0), PROB_FLOOR)
        log_pbar = np.log(pbar)
        kls = [(pbar * (log_pbar - np.log(row))).sum() for row in members]
        per_position.append(float(np.mean(kls)))
    return float(np.mean(per_position))


def _member_seq_logprobs(record: GenerationRecord) -> list[tuple[np.ndarray, int]]:
    if not record.samples:
        raise ValueError(f"record {record.id!r}: sequence-level ensemble scores need samples")
    out = []
    m = record.ensemble.member_count if record.ensemble is not None else None
    for idx, sample in enumerate(record.samples):
        if sample.ensemble_seq_logprobs is None:
            raise ValueError(f"record {record.id!r}: samples[{idx}] lacks ensemble_seq_logprobs")
        if not sample.token_logprobs:
            raise ValueError(f"record {record.id!r}: samples[{idx}] has no token_logprobs for length")
        lps = np.maximum(np.asarray(sample.ensemble_seq_logprobs, dtype=float), LOG_FLOOR)
        if m is None:
            m = lps.size
        if lps.size != m:
            raise ValueError(f"record {record.id!r}: inconsistent ensemble member counts across samples")
        out.append((lps, len(sample.token_logprobs)))
    return out


def seq_total_uncertainty(record: GenerationRecord) -> float:
    """Length-normalized entropy estimate of the sequence-level posterior.

    For each sampled sequence, the posterior probability is the member mean
    computed with a stable log-sum-exp.
    """
    terms = []
    for lps, length in _member_seq_logprobs(record):
        log_pbar = float(logsumexp(lps)) - math.log(lps.size)
        terms.append(-log_pbar / length)
    return float(np.mean(terms))


def seq_rmi(record: GenerationRecord) -> float:
    """Monte-Carlo reverse mutual information over the sampled sequences.

    Averages log P_bar(y) - log P_m(y) over members, length-normalized per
    sample; non-negative by concavity of the logarithm.
    """
    terms = []
    for lps, length in _member_seq_logprobs(record):
        log_pbar = float(logsumexp(lps)) - math.log(lps.size)
        terms.append(float(np.mean(log_pbar - lps)) / length)
    return float(np.mean(terms))


def p_true_uncertainty(p_true: float) -> float:
    """Complement of the judged probability that the generation is correct."""
    if not 0.0 <= p_true <= 1.0:
        raise ValueError(f"p_true must be in [0, 1], got {p_true}")
    return 1.0 - p_true
