"""k-means partitioning of genes by their expression profiles."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import ExpressionMatrix
from .rng import substream


@dataclass(frozen=True, eq=False)
class GenePartition:
    """Assignment of genes to K coexpression partitions.

    Every partition holds at least one gene, and each gene sits with its
    nearest centroid (Euclidean, ties to the lower partition index).
    """

    assignments: np.ndarray
    centroids: np.ndarray
    inertia: float

    @property
    def n_partitions(self) -> int:
        return self.centroids.shape[0]

    def members(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == k)


def _sq_dists(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    # (n, K) squared Euclidean distances
    return ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)


def _kmeans_pp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centroids = np.empty((k, x.shape[1]), dtype=np.float64)
    centroids[0] = x[rng.integers(n)]
    closest = ((x - centroids[0]) ** 2).sum(axis=1)
    for i in range(1, k):
        total = closest.sum()
        if total > 0:
            idx = rng.choice(n, p=closest / total)
        else:
            idx = rng.integers(n)  # all points already coincide with a centroid
        centroids[i] = x[idx]
        closest = np.minimum(closest, ((x - centroids[i]) ** 2).sum(axis=1))
    return centroids


def _repair_empty(x, centroids, assign):
    """Seed each empty cluster with the point farthest from its centroid.

    Only points from clusters with two or more members may move, so a
    repair never empties a donor; with k <= n one always exists.
    """
    k = centroids.shape[0]
    for c in range(k):
        if np.any(assign == c):
            continue
        sizes = np.bincount(assign, minlength=k)
        here = ((x - centroids[assign]) ** 2).sum(axis=1)
        here[sizes[assign] < 2] = -1.0
        idx = int(np.argmax(here))
        centroids[c] = x[idx]
        assign[idx] = c


def _inertia(x, centroids, assign) -> float:
    return float(((x - centroids[assign]) ** 2).sum())


def _lloyd(x: np.ndarray, centroids: np.ndarray, max_iter: int):
    """Lloyd iterations from given centroids; returns the inertia history."""
    centroids = centroids.copy()
    assign = np.argmin(_sq_dists(x, centroids), axis=1)
    _repair_empty(x, centroids, assign)
    history = [_inertia(x, centroids, assign)]
    for _ in range(max_iter):
        for c in range(centroids.shape[0]):
            centroids[c] = x[assign == c].mean(axis=0)
        new_assign = np.argmin(_sq_dists(x, centroids), axis=1)
        _repair_empty(x, centroids, new_assign)
        history.append(_inertia(x, centroids, new_assign))
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
    return assign, centroids, history[-1], history


def kmeans_genes(m_learn: ExpressionMatrix, k: int, seed: int,
                 restarts: int = 10, max_iter: int = 300) -> GenePartition:
    """Cluster genes (columns of the learning matrix) into k partitions.

    Genes are points in learning-sample space. Runs Lloyd's algorithm from
    k-means++ starts, ``restarts`` times, and keeps the lowest-inertia
    solution (first restart wins ties). Deterministic given (data, k, seed).
    """
    if not 1 <= k <= m_learn.n_genes:
        raise ValueError(f"k must be in [1, {m_learn.n_genes}], got {k}")
    x = np.ascontiguousarray(m_learn.values.T)
    streams = np.random.SeedSequence(seed).spawn(restarts)
    best = None
    for ss in streams:
        rng = np.random.default_rng(ss)
        init = _kmeans_pp_init(x, k, rng)
        assign, centroids, inertia, _ = _lloyd(x, init, max_iter)
        if best is None or inertia < best[2]:
            best = (assign, centroids, inertia)
    return GenePartition(best[0], best[1], best[2])
