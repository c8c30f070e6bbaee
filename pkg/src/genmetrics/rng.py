"""Deterministic seeding for every stochastic operation.

All randomness flows through SeededRng, a thin wrapper over numpy's PCG64
bit generator. PCG64 streams are stable across numpy versions and
platforms, so a (seed, derivation keys) pair replays bit-identically
anywhere. Operations that need several independent streams derive child
seeds instead of sharing one generator, which keeps pipelines insensitive
to internal draw counts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from genmetrics.errors import ValidationError

GENERATOR_ALGORITHM = "pcg64"

_SEED_BOUND = 2**64


@dataclass(frozen=True)
class SeededRng:
    """A reproducible random stream identified by a 64-bit seed."""

    seed: int
    algorithm: str = GENERATOR_ALGORITHM

    def __post_init__(self):
        if not isinstance(self.seed, (int, np.integer)):
            raise ValidationError(f"seed must be an integer, got {type(self.seed).__name__}")
        if not 0 <= int(self.seed) < _SEED_BOUND:
            raise ValidationError(f"seed must be in [0, 2**64), got {self.seed}")
        if self.algorithm != GENERATOR_ALGORITHM:
            raise ValidationError(
                f"unsupported generator algorithm {self.algorithm!r}; only "
                f"{GENERATOR_ALGORITHM!r} is available"
            )
        object.__setattr__(self, "seed", int(self.seed))

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        return np.random.Generator(np.random.PCG64(self.seed))

    def derive(self, *keys: int) -> "SeededRng":
        """Child rng for a sub-task, decorrelated from this one.

        Children with distinct key tuples are statistically independent;
        the same keys always reproduce the same child.
        """
        if not keys:
            raise ValidationError("derive() needs at least one key")
        for k in keys:
            if not isinstance(k, (int, np.integer)) or int(k) < 0:
                raise ValidationError(f"derivation keys must be non-negative integers, got {k!r}")
        ss = np.random.SeedSequence([self.seed, *[int(k) for k in keys]])
        child = int(ss.generate_state(1, dtype=np.uint64)[0])
        return SeededRng(child)
