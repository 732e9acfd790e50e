"""Splittable, counter-based random streams.

Every stochastic task derives its own independent stream from the master seed
and a structured key, so replica i of task "tails" always sees the same bits
no matter how work is chunked across workers or how many other tasks ran
first.  Streams are numpy Philox generators; the key is folded into a
SeedSequence spawn key, which is the documented way to build independent
Philox streams.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["substream", "spawn_keys"]

_U32 = 1 << 32


def _fold(part) -> list[int]:
    # Stable mapping of key parts to 32-bit words. Strings hash via sha256 so
    # renaming a task tag cannot collide with an integer index.
    if isinstance(part, (int, np.integer)):
        if part < 0:
            raise ValueError("stream key integers must be nonnegative")
        words = []
        v = int(part)
        while True:
            words.append(v % _U32)
            v //= _U32
            if v == 0:
                return words
    if isinstance(part, str):
        digest = hashlib.sha256(part.encode("utf8")).digest()
        return [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 8, 4)]
    raise TypeError(f"unsupported stream key part: {part!r}")


def spawn_keys(*key) -> tuple[int, ...]:
    """Flatten a structured key into SeedSequence spawn-key words."""
    words: list[int] = []
    for part in key:
        words.extend(_fold(part))
    return tuple(words)


def substream(master_seed: int, *key) -> np.random.Generator:
    """Return the Philox generator for (master_seed, key).

    The same arguments always yield the same stream, on any platform and in
    any worker process.
    """
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=spawn_keys(*key))
    return np.random.Generator(np.random.Philox(ss))
