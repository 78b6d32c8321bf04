"""Deterministic, addressable random streams.

Every stochastic component draws from its own generator, derived from the
run seed plus a structural key (epoch, generation, individual, phase, ...).
Streams are independent of evaluation order, which is what makes candidate
evaluations replayable and safe to parallelize.
"""

from __future__ import annotations

import zlib

import numpy as np

# Distinct namespaces for the common phases, kept small and stable.
_PHASE_IDS = {
    "train": 1,
    "eval": 2,
    "commit": 3,
    "population": 4,
    "init": 5,
    "env": 6,
}


def _key_part(part) -> int:
    if isinstance(part, (int, np.integer)):
        if part < 0:
            raise ValueError(f"stream key parts must be non-negative, got {part}")
        return int(part)
    if isinstance(part, str):
        return _PHASE_IDS.get(part, zlib.crc32(part.encode("utf-8")))
    raise TypeError(f"unsupported stream key part: {part!r}")


def stream(root_seed: int, *key) -> np.random.Generator:
    """Generator for the sub-stream addressed by ``key`` under ``root_seed``."""
    seq = np.random.SeedSequence(int(root_seed), spawn_key=tuple(_key_part(p) for p in key))
    return np.random.default_rng(seq)


def spawn_seed(rng: np.random.Generator) -> int:
    """Draw a fresh 63-bit seed from an existing generator."""
    return int(rng.integers(0, 2**63 - 1))
