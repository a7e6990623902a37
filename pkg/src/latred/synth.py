"""Synthetic datasets with known structure, for exercising the pipeline.

Two generators: a balanced two-class expression matrix whose informative
genes are mean-shifted, optionally overlaid with coexpression blocks, and
a 0/1 response matrix drawn from the one-parameter logistic response model
with known item parameters and latent traits.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import BinaryMatrix, ClassLabels, ExpressionMatrix
from .rasch import rasch_prob
from .rng import ROLE_SYNTH, substream


@dataclass(frozen=True)
class SynthSpec:
    """Shape of a generated balanced two-class dataset.

    The first ``n_informative`` genes carry class means of -shift/2 and
    +shift/2. With ``block_rho`` > 0 every gene also loads sqrt(block_rho)
    on one of ``n_blocks`` shared latent factors (gene j belongs to block
    j mod n_blocks, so informative genes spread across blocks); the blocks
    model class-independent coexpression structure.
    """

    n: int = 72
    p: int = 400
    n_informative: int = 50
    shift: float = 1.5
    n_blocks: int = 1
    block_rho: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 4 or self.n % 2:
            raise ValueError("n must be an even count of at least 4 samples")
        if self.p < 1:
            raise ValueError("need at least one gene")
        if not 0 <= self.n_informative <= self.p:
            raise ValueError("n_informative must be in [0, p]")
        if not np.isfinite(self.shift):
            raise ValueError("shift must be finite")
        if not 0.0 <= self.block_rho < 1.0:
            raise ValueError("block_rho must be in [0, 1)")
        if not 1 <= self.n_blocks <= self.p:
            raise ValueError("n_blocks must be in [1, p]")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


def gen_two_class(spec: SynthSpec):
    """Draw (ExpressionMatrix, ClassLabels) under the spec.

    Per-gene values are unit-variance Gaussians (idiosyncratic noise plus
    the block factor when block_rho > 0); class B rows sit ``shift`` above
    class A rows on informative columns. Values are continuous and
    centered, meant to be run with preprocessing disabled. Deterministic
    in the spec, including its seed.
    """
    rng = substream(spec.seed, ROLE_SYNTH)
    half = spec.n // 2
    x = rng.standard_normal((spec.n, spec.p))
    if spec.block_rho > 0.0:
        z = rng.standard_normal((spec.n, spec.n_blocks))
        block_of = np.arange(spec.p) % spec.n_blocks
        x = np.sqrt(1.0 - spec.block_rho) * x + np.sqrt(spec.block_rho) * z[:, block_of]
    x[:half, : spec.n_informative] -= spec.shift / 2.0
    x[half:, : spec.n_informative] += spec.shift / 2.0

    matrix = ExpressionMatrix(
        x,
        tuple(f"s{i:03d}" for i in range(spec.n)),
        tuple(f"g{j:04d}" for j in range(spec.p)),
    )
    labels = ClassLabels(np.repeat([0, 1], [half, half]), ("A", "B"))
    return matrix, labels


def gen_rasch_responses(n: int, beta, seed: int):
    """Draw (BinaryMatrix, eta) from the logistic response model.

    Latent traits eta are iid N(0, 1); entry (i, j) is 1 with probability
    rasch_prob(eta_i, beta_j). Returns the traits so recovery tests can
    compare estimates against the truth.
    """
    b = np.asarray(beta, dtype=np.float64)
    if b.ndim != 1 or b.size == 0 or not np.all(np.isfinite(b)):
        raise ValueError("beta must be a non-empty finite 1-D array")
    if n < 1:
        raise ValueError("need at least one sample")
    rng = substream(seed, ROLE_SYNTH)
    eta = rng.standard_normal(n)
    prob = rasch_prob(eta[:, None], b[None, :])
    y = (rng.random((n, b.size)) < prob).astype(np.int8)
    return BinaryMatrix(y), eta
