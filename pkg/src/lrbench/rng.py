"""Deterministic derivation of independent random streams from one base seed.

Every stochastic step in the package draws from a generator obtained here, so
runs are reproducible bit for bit and adding a new consumer of randomness never
perturbs the draws existing consumers see.
"""

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _label_word(label) -> int:
    """Stable 64-bit word for a stream label (int or str)."""
    if isinstance(label, (int, np.integer)):
        return int(label) & _MASK64
    digest = hashlib.sha256(str(label).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def stream_rng(seed: int, *labels) -> np.random.Generator:
    """Generator for the stream identified by (seed, *labels)."""
    entropy = [int(seed) & _MASK64] + [_label_word(lab) for lab in labels]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def derive_seed(seed: int, *labels) -> int:
    """Collapse (seed, *labels) to a single integer usable as a child seed."""
    entropy = [int(seed) & _MASK64] + [_label_word(lab) for lab in labels]
    state = np.random.SeedSequence(entropy).generate_state(1, np.uint64)
    return int(state[0])
