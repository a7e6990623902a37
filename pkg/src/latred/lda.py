"""Linear discriminant classification on factor scores.

Classical LDA: per-class means, one pooled within-class covariance, class
priors from learning frequencies. Prediction minimizes the Mahalanobis
distance penalized by -2 log prior, equivalently maximizes the Gaussian
log-posterior; the ROC score is the posterior probability of class 1.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import ClassLabels, FactorMatrix

COND_LIMIT = 1e10
RIDGE_EPS = 1e-6
PRIOR_MODES = ("empirical", "equal")


def _scores(f) -> np.ndarray:
    x = f.scores if isinstance(f, FactorMatrix) else np.asarray(f, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("factor scores must be 2-D")
    return x


@dataclass(frozen=True, eq=False)
class LDAModel:
    means: np.ndarray       # (G, K) class centroids
    cov: np.ndarray         # (K, K) pooled within-class covariance, ridged
    precision: np.ndarray   # (K, K) inverse of cov
    priors: np.ndarray      # (G,) class prior probabilities
    ridge: float            # diagonal inflation actually applied (0 if none)

    @property
    def n_classes(self) -> int:
        return self.means.shape[0]

    @property
    def n_factors(self) -> int:
        return self.means.shape[1]


def _condition_safe(cov: np.ndarray) -> bool:
    if not np.all(np.isfinite(cov)):
        return False
    try:
        return np.linalg.cond(cov) <= COND_LIMIT
    except np.linalg.LinAlgError:
        return False


def fit_lda(f_learn, labels: ClassLabels, *, priors: str = "empirical",
            ridge_eps: float = RIDGE_EPS) -> LDAModel:
    """Means, pooled covariance (divisor n - G), priors.

    ``priors`` is "empirical" (learning-set class frequencies) or "equal".
    A near-singular pooled covariance gets a relative ridge
    ridge_eps * trace / K on the diagonal, with the factor escalating
    tenfold until the condition number is acceptable.
    """
    if priors not in PRIOR_MODES:
        raise ValueError(f"priors must be one of {PRIOR_MODES}")
    if not ridge_eps > 0.0:
        raise ValueError("ridge_eps must be positive")
    x = _scores(f_learn)
    y = labels.labels
    n, k = x.shape
    if y.size != n:
        raise ValueError(f"{n} score rows but {y.size} labels")
    g = labels.n_classes
    counts = np.bincount(y, minlength=g)
    if np.any(counts == 0):
        raise ValueError("every class needs at least one learning sample")
    if n <= g:
        raise ValueError("need more learning samples than classes")

    means = np.empty((g, k))
    scatter = np.zeros((k, k))
    for c in range(g):
        xc = x[y == c]
        means[c] = xc.mean(axis=0)
        d = xc - means[c]
        scatter += d.T @ d
    cov = scatter / (n - g)

    ridge = 0.0
    if not _condition_safe(cov):
        scale = np.trace(cov) / k
        if scale <= 0.0:
            scale = 1.0  # all points coincide; any SPD fill works
        eps = ridge_eps
        while True:
            ridge = eps * scale
            if _condition_safe(cov + ridge * np.eye(k)) or eps >= 1.0:
                break
            eps *= 10.0
        cov = cov + ridge * np.eye(k)

    precision = np.linalg.inv(cov)
    prior = np.full(g, 1.0 / g) if priors == "equal" else counts / n
    return LDAModel(means=means, cov=cov, precision=precision,
                    priors=prior, ridge=ridge)


def discriminants(model: LDAModel, f) -> np.ndarray:
    """Per-class Gaussian log-posterior up to a shared constant, (n, G)."""
    x = _scores(f)
    if x.shape[1] != model.n_factors:
        raise ValueError("factor count does not match the fitted model")
    diff = x[:, None, :] - model.means[None, :, :]
    maha = np.einsum("ngk,kl,ngl->ng", diff, model.precision, diff)
    return -0.5 * maha + np.log(model.priors)[None, :]


def predict_lda(model: LDAModel, f) -> np.ndarray:
    """Most probable class index per row (first index wins exact ties)."""
    return np.argmax(discriminants(model, f), axis=1).astype(np.int64)


def posterior_lda(model: LDAModel, f) -> np.ndarray:
    """Class posterior probabilities per row, (n, G); rows sum to 1."""
    d = discriminants(model, f)
    d = d - d.max(axis=1, keepdims=True)
    e = np.exp(d)
    return e / e.sum(axis=1, keepdims=True)


def score_class1(model: LDAModel, f) -> np.ndarray:
    """Posterior probability of class index 1, the ROC sweep score."""
    if model.n_classes < 2:
        raise ValueError("need at least two classes for a ROC score")
    return posterior_lda(model, f)[:, 1]
