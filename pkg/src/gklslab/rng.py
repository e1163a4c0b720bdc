"""Seed derivation and the one PRNG used everywhere.

All randomness flows through :func:`make_rng`, which wraps numpy's Philox
counter-based bit generator.  Seeds for independent streams (one problem,
one optimizer run, one ELA sample) are derived by hashing the inputs that
identify the stream, so streams never depend on evaluation order.
"""
from __future__ import annotations

import hashlib

import numpy as np

SEED_MASK = (1 << 64) - 1


def _token(value) -> str:
    if isinstance(value, float):
        # repr round-trips doubles exactly
        return "f" + repr(value)
    if isinstance(value, bool):
        return "b" + str(int(value))
    if isinstance(value, int):
        return "i" + str(value)
    return "s" + str(value)


def derive_seed(*parts) -> int:
    """Mix arbitrary scalars into a 64-bit seed (blake2b of a canonical string)."""
    text = "\x1f".join(_token(p) for p in parts)
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(seed) & SEED_MASK))
