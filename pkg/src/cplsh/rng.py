"""Deterministic stream derivation from one master seed.

Every random draw in the package comes from a generator built as
``default_rng(SeedSequence(entropy=seed, spawn_key=path))``.  The integer
path encodes (domain, point, trial, ...), so any parallel schedule that
partitions work along those coordinates reproduces identical streams.
"""

from __future__ import annotations

import numpy as np

from .errors import ParameterError

# Domain tags keep unrelated subsystems on disjoint streams.
DOMAIN_FAMILY = 0xF0
DOMAIN_SPARSE_JL = 0xF1
DOMAIN_INDEX = 0xF2
DOMAIN_COLLIDE = 0xC0
DOMAIN_RHO = 0xC1
DOMAIN_CONVERGE = 0xC2
DOMAIN_GEN = 0xC3
DOMAIN_PARAMS = 0xC4


def derive_rng(seed: int, *path: int) -> np.random.Generator:
    """Generator for the stream identified by ``(seed, *path)``."""
    seed = int(seed)
    if seed < 0:
        raise ParameterError("seed must be a nonnegative integer")
    key = tuple(int(p) for p in path)
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))
