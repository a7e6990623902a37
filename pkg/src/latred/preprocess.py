"""Expression preprocessing chain: threshold, gene filter, log-standardize."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import ExpressionMatrix


@dataclass(frozen=True)
class PreprocessConfig:
    floor: float = 100.0
    ceiling: float = 16000.0
    min_fold: float = 5.0
    min_range: float = 500.0
    log_base: float = 10.0

    def __post_init__(self):
        if not self.floor < self.ceiling:
            raise ValueError("floor must be below ceiling")
        if self.min_fold <= 1:
            raise ValueError("min_fold must exceed 1")
        if self.min_range <= 0:
            raise ValueError("min_range must be positive")


def threshold(m: ExpressionMatrix, cfg: PreprocessConfig = PreprocessConfig()) -> ExpressionMatrix:
    """Clamp every intensity into [floor, ceiling]."""
    return ExpressionMatrix(
        np.clip(m.values, cfg.floor, cfg.ceiling), m.sample_ids, m.gene_ids
    )


def filter_genes(m: ExpressionMatrix, cfg: PreprocessConfig = PreprocessConfig()) -> ExpressionMatrix:
    """Keep genes with max/min > min_fold AND max - min > min_range.

    Extrema are taken over samples; expects a thresholded matrix so every
    entry is positive and the fold ratio is defined. Gene order is kept.
    """
    if m.values.min() <= 0:
        raise ValueError("filter_genes requires strictly positive intensities")
    hi = m.values.max(axis=0)
    lo = m.values.min(axis=0)
    keep = (hi / lo > cfg.min_fold) & (hi - lo > cfg.min_range)
    if not keep.any():
        raise ValueError("no genes survive intensity filtering")
    return m.take_genes(np.flatnonzero(keep))


def log_columns(values: np.ndarray, log_base: float = 10.0) -> np.ndarray:
    if values.min() <= 0:
        raise ValueError("log transform requires strictly positive intensities")
    return np.log(values) / np.log(log_base)


def standardize_columns(values: np.ndarray, apply_to: np.ndarray = None):
    """Center/scale columns by their sample mean and sd (n-1 divisor).

    Returns the standardized ``values`` and, when ``apply_to`` is given,
    that matrix mapped through the same per-column affine transform.
    """
    mean = values.mean(axis=0)
    sd = values.std(axis=0, ddof=1)
    if np.any(sd == 0):
        j = int(np.flatnonzero(sd == 0)[0])
        raise ValueError(f"gene column {j} has zero variance; cannot standardize")
    out = (values - mean) / sd
    if apply_to is None:
        return out
    return out, (apply_to - mean) / sd


def log_standardize(m: ExpressionMatrix, cfg: PreprocessConfig = PreprocessConfig()) -> ExpressionMatrix:
    """Per gene: log-transform, then standardize to zero mean, unit variance."""
    logged = log_columns(m.values, cfg.log_base)
    return ExpressionMatrix(standardize_columns(logged), m.sample_ids, m.gene_ids)


def preprocess(m: ExpressionMatrix, cfg: PreprocessConfig = PreprocessConfig()) -> ExpressionMatrix:
    """Full chain in listing order: threshold -> filter -> log-standardize."""
    return log_standardize(filter_genes(threshold(m, cfg), cfg), cfg)
