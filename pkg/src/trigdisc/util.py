"""Small shared helpers: deterministic RNG streams and number formatting."""

from __future__ import annotations

import numpy as np

__all__ = ["rng_stream", "fmt17"]


def rng_stream(*key: int) -> np.random.Generator:
    """A counter-based generator keyed by a tuple of nonnegative integers.

    Philox guarantees that distinct keys give independent streams and the
    same key always reproduces the same stream, which is what trial- and
    attempt-indexed experiments rely on.
    """
    ints = [int(k) for k in key]
    if any(k < 0 for k in ints):
        raise ValueError(f"rng key components must be >= 0, got {ints}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(ints)))


def fmt17(x: float) -> str:
    """Format with 17 significant digits (round-trips float64)."""
    return format(float(x), ".17g")
