"""Deterministic sub-seed derivation for nested stages (folds, bases, seeds).

Hashing the stage path keeps every component's stream independent of
iteration order and stable across platforms and runs.
"""

from __future__ import annotations

import hashlib


def derive_seed(*parts) -> int:
    """64-bit seed from a path of stage labels and indices."""
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")
