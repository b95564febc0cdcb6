"""Deterministic random streams.

All randomness in the package flows through counter-based Philox streams
keyed on ``(seed, trial, purpose)``.  Trial ``t`` of a run seeded with
``s`` uses key ``s ^ t`` in the low key word; the ``purpose`` tag occupies
the high key word so that e.g. model sampling and solver initialization
never share a stream even when they share ``(seed, trial)``.  Results are
therefore reproducible and independent of execution order or threading.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

PURPOSE_MODEL = 0
PURPOSE_SOLVER = 1


def substream(seed: int, trial: int = 0, purpose: int = PURPOSE_MODEL) -> np.random.Generator:
    """Return the Philox generator for one (seed, trial, purpose) cell."""
    key = ((seed ^ trial) & _MASK64) | ((purpose & _MASK64) << 64)
    return np.random.Generator(np.random.Philox(key=key))


def gaussians(gen: np.random.Generator, shape) -> np.ndarray:
    """Standard normal draws via the Box-Muller transform on Philox uniforms."""
    if np.isscalar(shape):
        shape = (int(shape),)
    n = int(np.prod(shape)) if len(shape) else 1
    half = (n + 1) // 2
    u1 = 1.0 - gen.random(half)  # in (0, 1]; keeps the log finite
    u2 = gen.random(half)
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    z = np.concatenate([radius * np.cos(angle), radius * np.sin(angle)])[:n]
    return z.reshape(shape)
