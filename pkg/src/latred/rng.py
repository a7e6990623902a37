"""Deterministic RNG stream derivation.

Every stochastic step in the pipeline draws from a stream addressed by a
tuple of small integers (seed, role, trial, ...), so results never depend
on execution order or worker count.
"""
from __future__ import annotations

import numpy as np

# Role tags keep independently addressed streams from colliding.
ROLE_SELECT = 23
ROLE_KMEANS_CV = 31
ROLE_KMEANS_FINAL = 37
ROLE_SYNTH = 41


def _normalize(keys) -> list:
    out = []
    for k in keys:
        k = int(k)
        if k < 0:
            raise ValueError(f"stream keys must be non-negative, got {k}")
        out.append(k)
    return out


def substream(*keys: int) -> np.random.Generator:
    """Generator for the stream addressed by an integer key tuple."""
    return np.random.default_rng(np.random.SeedSequence(_normalize(keys)))


def derive_seed(*keys: int) -> int:
    """Collapse a key tuple into a single integer seed for nested APIs."""
    return int(np.random.SeedSequence(_normalize(keys)).generate_state(1, np.uint32)[0])
