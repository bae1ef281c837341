"""Deterministic derivation of independent random streams.

Streams are keyed by a master seed plus a derivation path of integers
and strings.  The mapping is pure, so any worker can rebuild its own
stream from the path alone and results never depend on scheduling
order or worker count.  Philox is counter-based, which keeps stream
construction cheap and jump-ahead free.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["substream"]


def _path_word(part) -> int:
    if isinstance(part, (bool, float)):
        raise TypeError(f"stream path parts must be int or str, got {part!r}")
    if isinstance(part, (int, np.integer)):
        if part < 0:
            raise ValueError(f"stream path integers must be >= 0, got {part}")
        return int(part)
    if isinstance(part, str):
        # sha256 keeps string tags stable across processes and Python builds
        # (hash() is salted per interpreter and must not be used here).
        digest = hashlib.sha256(part.encode("utf-8")).digest()
        return int.from_bytes(digest[:8], "little")
    raise TypeError(f"stream path parts must be int or str, got {part!r}")


def substream(master_seed: int, *path) -> np.random.Generator:
    """Return the random stream for ``path`` under ``master_seed``.

    Parameters
    ----------
    master_seed : int
        Experiment-level seed.
    *path : int or str
        Derivation path, e.g. ``("size", n, p, design, rep, "boot")``.
        Distinct paths give statistically independent streams; equal
        paths give bit-identical streams.
    """
    words = tuple(_path_word(part) for part in path)
    seq = np.random.SeedSequence(master_seed, spawn_key=words)
    return np.random.Generator(np.random.Philox(seq))
