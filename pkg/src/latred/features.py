"""Gene subset selection: uniform random, or supervised Welch-t ranking."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import ClassLabels, ExpressionMatrix
from .rng import substream

SELECTION_MODES = ("random", "welch")


@dataclass(frozen=True)
class SelectionConfig:
    mode: str
    p_star: int
    seed: int = 0

    def __post_init__(self):
        if self.mode not in SELECTION_MODES:
            raise ValueError(f"selection mode must be one of {SELECTION_MODES}")
        if self.p_star < 1:
            raise ValueError("p_star must be at least 1")


@dataclass(frozen=True, eq=False)
class WelchStats:
    """Per-gene two-class summary statistics backing the t ranking."""

    mean1: np.ndarray
    mean2: np.ndarray
    var1: np.ndarray
    var2: np.ndarray
    n1: int
    n2: int
    t: np.ndarray


def welch_t(x1, x2) -> float:
    """Welch's two-sample t statistic (x1 mean minus x2 mean).

    Sample variances use the n-1 divisor. With both variances zero the
    statistic degenerates: equal means give 0, unequal means give a signed
    infinity that ranks above every finite |t|.
    """
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    if x1.size < 2 or x2.size < 2:
        raise ValueError("welch_t needs at least 2 observations per class")
    diff = x1.mean() - x2.mean()
    denom = np.sqrt(x1.var(ddof=1) / x1.size + x2.var(ddof=1) / x2.size)
    if denom == 0:
        return 0.0 if diff == 0 else float(np.sign(diff) * np.inf)
    return float(diff / denom)


def welch_stats(m: ExpressionMatrix, y: ClassLabels) -> WelchStats:
    """Vectorized per-gene Welch statistics for a two-class matrix."""
    if y.n_classes != 2:
        raise ValueError("welch selection requires exactly two classes")
    if len(y.labels) != m.n_samples:
        raise ValueError("labels length does not match matrix")
    g1 = m.values[y.labels == 0]
    g2 = m.values[y.labels == 1]
    if g1.shape[0] < 2 or g2.shape[0] < 2:
        raise ValueError("welch selection needs at least 2 samples per class")
    mean1, mean2 = g1.mean(axis=0), g2.mean(axis=0)
    var1 = g1.var(axis=0, ddof=1)
    var2 = g2.var(axis=0, ddof=1)
    diff = mean1 - mean2
    denom = np.sqrt(var1 / g1.shape[0] + var2 / g2.shape[0])
    with np.errstate(divide="ignore", invalid="ignore"):
        t = diff / denom
        zero = denom == 0
        t[zero] = np.sign(diff[zero]) * np.inf
    t[zero & (diff == 0)] = 0.0
    return WelchStats(mean1, mean2, var1, var2, g1.shape[0], g2.shape[0], t)


def select_random(m: ExpressionMatrix, cfg: SelectionConfig) -> np.ndarray:
    """p_star distinct gene indices, uniform without replacement, sorted."""
    if cfg.p_star > m.n_genes:
        raise ValueError(f"p_star {cfg.p_star} exceeds gene count {m.n_genes}")
    rng = substream(cfg.seed)
    return np.sort(rng.choice(m.n_genes, size=cfg.p_star, replace=False))


def select_supervised(m: ExpressionMatrix, y: ClassLabels, cfg: SelectionConfig) -> np.ndarray:
    """Indices of the p_star genes with largest |t|, sorted ascending.

    Ties resolve to the smaller gene index. Call with learning data only;
    the ranking must not see test samples.
    """
    if cfg.p_star > m.n_genes:
        raise ValueError(f"p_star {cfg.p_star} exceeds gene count {m.n_genes}")
    stats = welch_stats(m, y)
    order = np.argsort(-np.abs(stats.t), kind="stable")
    return np.sort(order[: cfg.p_star])
