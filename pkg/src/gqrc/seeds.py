"""Deterministic seed derivation for multi-realization experiments.

Every random stream in the package is keyed by a 64-bit master seed plus a
tuple of string/int labels.  The derived seed is the first 8 bytes
(big-endian) of ``sha256("gqrc|<master>|<label>|<label>...")``, so any
implementation with the same labeling scheme reproduces the stream
structure even if the underlying bit generator differs.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(master_seed: int, *labels) -> int:
    """Stable 64-bit seed derived from the master seed and a label path."""
    payload = "|".join(["gqrc", str(int(master_seed))] + [str(p) for p in labels])
    digest = hashlib.sha256(payload.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def make_rng(master_seed: int, *labels) -> np.random.Generator:
    """Generator seeded via :func:`derive_seed`."""
    return np.random.default_rng(derive_seed(master_seed, *labels))
