"""Counter-based random streams for reproducible, mergeable trials.

Every random quantity in a run is drawn from a stream addressed by
(master seed, role, trial index).  Streams are built on Philox, whose
counter can be advanced in O(1), and normals are produced by applying
the Gaussian quantile function to uniforms so that every value consumes
exactly one 64-bit word.  Consequences:

* trial ``t`` of a batch equals trial ``t`` generated on its own,
  bit for bit, so runs can be chunked or parallelised freely;
* the same (seed, role) pair always yields the same *unit-variance*
  draws, which are scaled by ``sqrt(rho)`` at the point of use — runs
  at different noise powers share randomness (common random numbers).
"""

from __future__ import annotations

from enum import IntEnum

import numpy as np
from scipy.special import ndtri

_U_MIN = 2.0**-53  # smallest uniform we feed the quantile function


class Role(IntEnum):
    """Independent randomness consumers within a single experiment."""

    DELTA = 0        # injected authentication noise at the encoder
    ADVERSARY = 1    # adversary's observation noise
    DECODER = 2      # decoder-side channel noise
    MESSAGE = 3      # per-trial message selection
    T_TABLE = 4      # per-code injected-mean table
    DECIMATION = 5   # surviving-message subset
    OVERLAY = 6      # overlay subset sampling
    CODEBOOK = 7     # random base-code construction


def _philox(master_seed: int, role: int) -> np.random.Philox:
    ss = np.random.SeedSequence((int(master_seed), int(role)))
    return np.random.Philox(key=ss.generate_state(2, np.uint64))


def _stride(width: int) -> int:
    # Philox.advance ticks in blocks of 4 uint64 outputs; pad the
    # per-trial footprint so every trial starts on a block boundary.
    return ((int(width) + 3) // 4) * 4


def uniforms(master_seed: int, role: int, start_trial: int, trials: int,
             width: int) -> np.ndarray:
    """(trials, width) uniforms on [0,1); trial t is counter slice t."""
    if trials < 0 or width <= 0 or start_trial < 0:
        raise ValueError("start_trial >= 0, trials >= 0, width >= 1 required")
    stride = _stride(width)
    bg = _philox(master_seed, role)
    if start_trial:
        bg.advance(start_trial * stride // 4)
    u = np.random.Generator(bg).random((trials, stride))
    return u[:, :width]


def normals(master_seed: int, role: int, start_trial: int, trials: int,
            width: int) -> np.ndarray:
    """(trials, width) unit normals, counter-aligned like :func:`uniforms`."""
    u = uniforms(master_seed, role, start_trial, trials, width)
    return ndtri(np.maximum(u, _U_MIN))


def choices(master_seed: int, role: int, start_trial: int, trials: int,
            count: int) -> np.ndarray:
    """(trials,) uniform draws from {0, ..., count-1}, one per trial."""
    if count <= 0:
        raise ValueError("count must be positive")
    u = uniforms(master_seed, role, start_trial, trials, 1)[:, 0]
    return np.minimum((u * count).astype(np.int64), count - 1)


def one_shot_rng(master_seed: int, role: int, *extra: int) -> np.random.Generator:
    """Generator for non-trial-indexed sampling (tables, codebooks, retries)."""
    return np.random.default_rng(
        np.random.SeedSequence((int(master_seed), int(role), *map(int, extra))))
