"""Seed derivation for per-record random streams.

Every stream used by the toolkit descends from one master seed. Streams for
independent work items are derived by hashing (master_seed, item keys), so
the outputs never depend on scheduling or worker count.
"""

import hashlib

import numpy as np


def derive_seed(master_seed: int, *keys) -> int:
    """Stable 64-bit seed from a master seed plus arbitrary hashable keys."""
    material = repr((int(master_seed),) + tuple(keys)).encode("utf-8")
    digest = hashlib.sha256(material).digest()
    return int.from_bytes(digest[:8], "little")


def derive_rng(master_seed: int, *keys) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master_seed, *keys))
