"""Black-box uncertainty scores over sampled generation texts.

A symmetric pairwise-similarity graph over the samples drives all four
scores: semantic-set counting via thresholded components, the spectrum of the
symmetric normalized Laplacian (sum of `1 - eigenvalue` truncations),
eigenvector-embedding spread, and the complement of mean lexical similarity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from uqsum.nlg import rouge_l_tokens, tokenize

DEFAULT_SET_THRESHOLD = 0.5


@dataclass
class SimilarityGraph:
    """Symmetric pairwise-similarity matrix in [0, 1] with unit diagonal."""

    weights: np.ndarray
    _spectrum: tuple[np.ndarray, np.ndarray] | None = field(
        default=None, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] < 2:
            raise ValueError("similarity graph needs a square matrix of size >= 2")
        if not np.allclose(w, w.T, atol=1e-9):
            raise ValueError("similarity weights must be symmetric")
        if not np.allclose(np.diag(w), 1.0, atol=1e-9):
            raise ValueError("similarity weights must have unit diagonal")
        if w.min() < -1e-9 or w.max() > 1 + 1e-9:
            raise ValueError("similarity weights must lie in [0, 1]")
        self.weights = w

    @property
    def size(self) -> int:
        return self.weights.shape[0]


def pairwise_similarity(samples, kind: str = "lexical_rougeL", embeddings=None) -> SimilarityGraph:
    """Build the similarity graph over sampled generations.

    `lexical_rougeL` compares token sequences; `embedding_cosine` needs one
    vector per sample and clips cosine similarity into [0, 1].
    """
    m = len(samples)
    if m < 2:
        raise ValueError("black-box methods need multiple samples (got %d)" % m)
    weights = np.eye(m)
    if kind == "lexical_rougeL":
        tokens = [tokenize(text) for text in samples]
        for i in range(m):
            for j in range(i + 1, m):
                weights[i, j] = weights[j, i] = rouge_l_tokens(tokens[i], tokens[j])
    elif kind == "embedding_cosine":
        if embeddings is None or len(embeddings) != m:
            raise ValueError("embedding_cosine needs one embedding per sample")
        vecs = np.asarray(embeddings, dtype=float)
        norms = np.linalg.norm(vecs, axis=1)
        if np.any(norms == 0):
            raise ValueError("embedding_cosine needs non-zero embeddings")
        cos = (vecs @ vecs.T) / np.outer(norms, norms)
        weights = np.clip(cos, 0.0, 1.0)
        np.fill_diagonal(weights, 1.0)
    else:
        raise ValueError(f"unknown similarity kind {kind!r}")
    return SimilarityGraph(np.clip(weights, 0.0, 1.0))


def num_sets(graph: SimilarityGraph, threshold: float = DEFAULT_SET_THRESHOLD) -> int:
    """Number of connected components among edges with weight >= threshold."""
    m = graph.size
    adjacent = graph.weights >= threshold
    seen = [False] * m
    components = 0
    for start in range(m):
        if seen[start]:
            continue
        components += 1
        stack = [start]
        seen[start] = True
        while stack:
            node = stack.pop()
            for neighbor in np.flatnonzero(adjacent[node]):
                if not seen[neighbor]:
                    seen[neighbor] = True
                    stack.append(int(neighbor))
    return components


def laplacian_spectrum(graph: SimilarityGraph) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of the symmetric
    normalized Laplacian L = I - D^{-1/2} W D^{-1/2}."""
    if graph._spectrum is None:
        w = graph.weights
        degrees = w.sum(axis=1)
        assert np.all(degrees > 0), "unit diagonal guarantees positive degrees"
        inv_sqrt = 1.0 / np.sqrt(degrees)
        laplacian = np.eye(graph.size) - inv_sqrt[:, None] * w * inv_sqrt[None, :]
        eigenvalues, eigenvectors = np.linalg.eigh(laplacian)
        graph._spectrum = (eigenvalues, eigenvectors)
    return graph._spectrum


def eigv(graph: SimilarityGraph) -> float:
    """Continuous semantic-set count: sum of max(0, 1 - eigenvalue)."""
    eigenvalues, _ = laplacian_spectrum(graph)
    return float(np.maximum(0.0, 1.0 - eigenvalues).sum())


def ecc(graph: SimilarityGraph, k: int | None = None) -> float:
    """Spread of the samples' spectral embeddings around their centroid.

    Sample i is embedded as row i of the first k eigenvectors; k defaults to
    round(eigv), the continuous cluster estimate.
    """
    if k is None:
        k = int(round(eigv(graph)))
        k = min(max(k, 1), graph.size)
    if not 1 <= k <= graph.size:
        raise ValueError(f"k must be in [1, {graph.size}], got {k}")
    _, eigenvectors = laplacian_spectrum(graph)
    rows = eigenvectors[:, :k]
    centered = rows - rows.mean(axis=0)
    return float(np.linalg.norm(centered))


def lexsim(samples) -> float:
    """One minus the mean pairwise lexical similarity of the samples.

    Oriented so that more diverse sample sets score as more uncertain.
    """
    m = len(samples)
    if m < 2:
        raise ValueError("black-box methods need multiple samples (got %d)" % m)
    tokens = [tokenize(text) for text in samples]
    sims = [
        rouge_l_tokens(tokens[i], tokens[j])
        for i in range(m)
        for j in range(i + 1, m)
    ]
    return 1.0 - float(np.mean(sims))
