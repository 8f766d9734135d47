"""Deterministic derived random streams shared by the solvers.

Every worker (annealing run, restart, offspring) seeds its own Random from a
splitmix-style fold of (seed, index...), so results do not depend on the
order or parallelism with which workers execute.
"""

from __future__ import annotations

import random

_MASK = (1 << 64) - 1


def derive_seed(*parts: int) -> int:
    h = 0x9E3779B97F4A7C15
    for p in parts:
        h = (h ^ (p & _MASK)) & _MASK
        h = (h * 0xBF58476D1CE4E5B9) & _MASK
        h ^= h >> 31
    return h


def stream(*parts: int) -> random.Random:
    return random.Random(derive_seed(*parts))
