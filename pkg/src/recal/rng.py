"""Reproducible random-number substreams.

Everything stochastic in this package draws from a PCG64 generator keyed by
a 64-bit seed plus a purpose path, via numpy's ``SeedSequence`` spawn-key
mechanism. Two calls with the same (seed, path) always produce the same
stream; distinct paths give statistically independent streams. This is what
makes datasets, undersampling, and noisy base-model draws exactly
reproducible without sharing generator state across purposes.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError

# Purpose keys for per-module substreams.
COVARIATES = 0
OUTCOMES = 1
RETENTION = 2
NOISE = 3

_MAX_SEED = 2**64 - 1


def check_seed(seed: int) -> int:
    """Validate and return a 64-bit unsigned seed."""
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool):
        raise ConfigurationError(f"seed must be an integer, got {seed!r}")
    if not 0 <= seed <= _MAX_SEED:
        raise ConfigurationError(f"seed must be in [0, 2^64), got {seed}")
    return int(seed)


def substream(seed: int, *path: int) -> np.random.Generator:
    """Return the PCG64 generator for ``seed`` at the given purpose path."""
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(path))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed: int, *path: int) -> int:
    """Derive a child 64-bit seed from ``seed`` at the given purpose path.

    Used where a component wants an integer seed of its own (e.g. the
    harness handing independent seeds to the calibration and test dataset
    generators) rather than a live generator.
    """
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(path))
    return int(ss.generate_state(1, np.uint64)[0])
