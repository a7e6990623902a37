"""Rasch-model dimension reduction.

Expression values are binarized at a learning-set median cutoff, genes are
grouped into coexpression partitions, and one dichotomous Rasch model is
fitted per partition by marginal maximum likelihood (EM over a fixed
N(0,1) latent prior, unit discrimination). Each sample's factor score for
a partition is the posterior mean (EAP) of its latent trait.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .cluster import GenePartition, kmeans_genes
from .data import BinaryMatrix, ExpressionMatrix, FactorMatrix

BINARIZATION_SCOPES = ("global_median", "per_gene_median")

# Estimation defaults; overridable through every fitting entry point.
QUADRATURE_NODES = 21
BETA_CLIP = 10.0
EM_TOL = 1e-5
EM_MAX_ITER = 500

_NEWTON_TOL = 1e-10
_NEWTON_MAX_ITER = 40
_NEWTON_MAX_STEP = 4.0


@lru_cache(maxsize=8)
def gauss_hermite_normal(n: int):
    """Quadrature (nodes, weights) for expectations under N(0,1).

    Rescales physicists' Gauss-Hermite points; weights sum to 1.
    """
    x, w = np.polynomial.hermite.hermgauss(n)
    nodes = x * np.sqrt(2.0)
    weights = w / np.sqrt(np.pi)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def rasch_prob(eta, beta):
    """P(response = 1) = exp(beta + eta) / (1 + exp(beta + eta)).

    Overflow-safe for arbitrarily large |beta + eta|; broadcasts over
    array arguments. Strictly increasing in both arguments.
    """
    z = np.asarray(eta, dtype=np.float64) + np.asarray(beta, dtype=np.float64)
    e = np.exp(-np.abs(z))
    out = np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class BinarizationRule:
    """Median cutoff(s) learned on a learning matrix.

    ``global_median`` stores one cutoff for the whole matrix;
    ``per_gene_median`` stores one cutoff per gene column.
    """

    scope: str
    cutoffs: object

    def __post_init__(self):
        if self.scope not in BINARIZATION_SCOPES:
            raise ValueError(f"scope must be one of {BINARIZATION_SCOPES}")
        if self.scope == "global_median":
            c = float(self.cutoffs)
            if not np.isfinite(c):
                raise ValueError("cutoff must be finite")
            object.__setattr__(self, "cutoffs", c)
        else:
            c = np.asarray(self.cutoffs, dtype=np.float64)
            if c.ndim != 1 or not np.all(np.isfinite(c)):
                raise ValueError("per-gene cutoffs must be a finite 1-D array")
            object.__setattr__(self, "cutoffs", c)


def learn_binarization(m_learn: ExpressionMatrix, scope: str = "global_median") -> BinarizationRule:
    """Median cutoff(s) of the learning matrix."""
    if scope == "global_median":
        return BinarizationRule(scope, float(np.median(m_learn.values)))
    if scope == "per_gene_median":
        return BinarizationRule(scope, np.median(m_learn.values, axis=0))
    raise ValueError(f"scope must be one of {BINARIZATION_SCOPES}")


def binarize(m: ExpressionMatrix, rule: BinarizationRule) -> BinaryMatrix:
    """1 where the value exceeds its cutoff, else 0 (ties map to 0)."""
    if rule.scope == "per_gene_median" and np.size(rule.cutoffs) != m.n_genes:
        raise ValueError("per-gene cutoffs do not match gene count")
    return BinaryMatrix((m.values > rule.cutoffs).astype(np.int8), rule)


@dataclass(frozen=True, eq=False)
class RaschPartitionModel:
    """Fitted item parameters for one gene partition.

    ``loglik_trace`` holds the marginal log-likelihood at the initial
    parameters and after every EM iteration; EM guarantees it is
    non-decreasing.
    """

    beta: np.ndarray
    quad_nodes: np.ndarray
    quad_weights: np.ndarray
    log_likelihood: float
    iterations: int
    loglik_trace: tuple

    @property
    def n_genes(self) -> int:
        return self.beta.size

    @property
    def quadrature(self):
        return list(zip(self.quad_nodes, self.quad_weights))


def _log_prob_terms(beta: np.ndarray, nodes: np.ndarray):
    # log sigma and log(1 - sigma) of (beta_j + eta_q), shape (Q, J)
    z = nodes[:, None] + beta[None, :]
    log1mp = -np.logaddexp(0.0, z)
    return z + log1mp, log1mp


def _posterior(y: np.ndarray, beta: np.ndarray, nodes: np.ndarray, log_w: np.ndarray):
    """Posterior node weights per sample and the marginal log-likelihood."""
    logp, log1mp = _log_prob_terms(beta, nodes)
    loglik = y @ (logp - log1mp).T + log1mp.sum(axis=1)[None, :]  # (n, Q)
    joint = loglik + log_w[None, :]
    top = joint.max(axis=1, keepdims=True)
    post = np.exp(joint - top)
    norm = post.sum(axis=1, keepdims=True)
    marginal = float((top[:, 0] + np.log(norm[:, 0])).sum())
    return post / norm, marginal


def _sigmoid(z: np.ndarray) -> np.ndarray:
    e = np.exp(-np.abs(z))
    return np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def _mstep(beta, free, s_free, nq, nodes, beta_clip):
    """Box-constrained per-item Newton ascent of the expected log-likelihood.

    Each item's objective is concave in beta_j, so clipping the Newton
    limit into [-clip, clip] yields the constrained maximizer.
    """
    b = beta[free]
    if b.size == 0:
        # every item pinned by a degenerate column; nothing to update
        return np.clip(beta, -beta_clip, beta_clip)
    for _ in range(_NEWTON_MAX_ITER):
        p = _sigmoid(nodes[:, None] + b[None, :])
        grad = s_free - nq @ p
        hess = nq @ (p * (1.0 - p))
        step = np.clip(grad / np.maximum(hess, 1e-12), -_NEWTON_MAX_STEP, _NEWTON_MAX_STEP)
        b = b + step
        if np.max(np.abs(step)) < _NEWTON_TOL:
            break
    out = beta.copy()
    out[free] = b
    return np.clip(out, -beta_clip, beta_clip)


def fit_rasch(b: BinaryMatrix, *, nodes: int = QUADRATURE_NODES,
              beta_clip: float = BETA_CLIP, tol: float = EM_TOL,
              max_iter: int = EM_MAX_ITER) -> RaschPartitionModel:
    """Marginal maximum-likelihood fit of item parameters for one partition.

    EM with Gauss-Hermite quadrature over the N(0,1) latent prior;
    discrimination is fixed at 1. Converges when the largest item-parameter
    change drops below ``tol`` or after ``max_iter`` iterations. Degenerate
    items (all-0 or all-1 columns) are pinned at -/+ ``beta_clip``.
    """
    y = b.values.astype(np.float64)
    n, j = y.shape
    if n < 2:
        raise ValueError("need at least 2 samples to fit")
    if j < 1:
        raise ValueError("need at least 1 gene to fit")

    eta, w = gauss_hermite_normal(nodes)
    log_w = np.log(w)
    s = y.sum(axis=0)

    beta = np.zeros(j)
    free = (s > 0) & (s < n)
    beta[s == 0] = -beta_clip
    beta[s == n] = beta_clip
    # moment start for free items: marginal logit with the latent scale
    # absorbed (exact start is irrelevant, EM owns convergence)
    rate = s[free] / n
    beta[free] = np.clip(np.log(rate / (1.0 - rate)), -beta_clip, beta_clip)

    post, marginal = _posterior(y, beta, eta, log_w)
    trace = [marginal]
    iterations = 0
    for iterations in range(1, max_iter + 1):
        nq = post.sum(axis=0)
        new_beta = _mstep(beta, free, s[free], nq, eta, beta_clip)
        delta = np.max(np.abs(new_beta - beta)) if j else 0.0
        beta = new_beta
        post, marginal = _posterior(y, beta, eta, log_w)
        trace.append(marginal)
        if delta < tol:
            break

    return RaschPartitionModel(
        beta=beta,
        quad_nodes=eta.copy(),
        quad_weights=w.copy(),
        log_likelihood=trace[-1],
        iterations=iterations,
        loglik_trace=tuple(trace),
    )


def eap_scores(model: RaschPartitionModel, responses: np.ndarray) -> np.ndarray:
    """Posterior latent-trait means for a batch of 0/1 response rows."""
    y = np.asarray(responses, dtype=np.float64)
    squeeze = y.ndim == 1
    if squeeze:
        y = y[None, :]
    if y.shape[1] != model.n_genes:
        raise ValueError(
            f"response length {y.shape[1]} != model gene count {model.n_genes}"
        )
    post, _ = _posterior(y, model.beta, model.quad_nodes, np.log(model.quad_weights))
    scores = post @ model.quad_nodes
    return float(scores[0]) if squeeze else scores


def eap_score(model: RaschPartitionModel, responses) -> float:
    """EAP score of a single sample's response vector."""
    return eap_scores(model, np.asarray(responses))


@dataclass(frozen=True, eq=False)
class RaschReducer:
    """Gene partition + binarization rule + one fitted model per partition."""

    partition: GenePartition
    rule: BinarizationRule
    models: tuple
    gene_ids: tuple

    @property
    def n_factors(self) -> int:
        return len(self.models)


def rasch_reduce_fit(m_learn: ExpressionMatrix, k: int, seed: int, *,
                     scope: str = "global_median",
                     restarts: int = 10, kmeans_max_iter: int = 300,
                     nodes: int = QUADRATURE_NODES, beta_clip: float = BETA_CLIP,
                     tol: float = EM_TOL, max_iter: int = EM_MAX_ITER) -> RaschReducer:
    """Partition genes, learn the median cutoff, and fit k Rasch models.

    Partitioning runs on the continuous learning matrix (before
    binarization); the cutoff and all item parameters come from learning
    data only.
    """
    if k > m_learn.n_genes:
        raise ValueError(f"k {k} exceeds selected gene count {m_learn.n_genes}")
    partition = kmeans_genes(m_learn, k, seed, restarts=restarts, max_iter=kmeans_max_iter)
    rule = learn_binarization(m_learn, scope)
    binary = binarize(m_learn, rule)
    models = []
    for part in range(k):
        cols = partition.members(part)
        sub = BinaryMatrix(binary.values[:, cols], rule)
        models.append(fit_rasch(sub, nodes=nodes, beta_clip=beta_clip,
                                tol=tol, max_iter=max_iter))
    return RaschReducer(partition, rule, tuple(models), m_learn.gene_ids)


def rasch_transform(red: RaschReducer, m: ExpressionMatrix) -> FactorMatrix:
    """Binarize with the learned rule and EAP-score every partition.

    Column k of the result is the latent factor for partition k. Applies
    identically to learning and test matrices.
    """
    if m.gene_ids != red.gene_ids:
        raise ValueError("gene ids do not match the fitted reducer")
    binary = binarize(m, red.rule)
    scores = np.empty((m.n_samples, red.n_factors))
    for part, model in enumerate(red.models):
        cols = red.partition.members(part)
        scores[:, part] = eap_scores(model, binary.values[:, cols])
    return FactorMatrix(scores, "RM")
