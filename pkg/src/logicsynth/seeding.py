"""Order-independent seed derivation.

Every random stream in the package is keyed by hashing a master seed with a
tuple of identifying parts, so instance ``i`` never depends on how many
instances were drawn before it or in which worker.
"""

from __future__ import annotations

import hashlib
import random

MASK64 = (1 << 64) - 1


def derive_seed(master: int, *parts: object) -> int:
    """Return a 64-bit unsigned seed derived from ``master`` and ``parts``."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(master) & MASK64).encode())
    for part in parts:
        h.update(b"\x1f")
        h.update(str(part).encode("utf-8"))
    return int.from_bytes(h.digest(), "big")


def unit_draw(master: int, *parts: object) -> float:
    """Uniform draw in [0, 1) keyed by ``master`` and ``parts``."""
    return derive_seed(master, *parts) / float(1 << 64)


def rng_for(master: int, *parts: object) -> random.Random:
    return random.Random(derive_seed(master, *parts))
