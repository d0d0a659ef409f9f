"""Random streams.

Every random draw comes from a Philox4x64 counter-based generator. A
replication is identified by a *stream* tuple ``(experiment, replication)``
(each component a non-negative integer or a tuple of them); its 64-bit key is

    SeedSequence(base_seed, spawn_key=flatten(stream)).generate_state(1, uint64)[0]

The key alone reproduces the replication, so it is what gets written to the
``seed`` column of raw CSV output and what ``--seed`` accepts on the command
line. Keys depend only on (base_seed, stream), never on scheduling order.
"""
from __future__ import annotations

import zlib

import numpy as np

MASK64 = (1 << 64) - 1


def _flatten(parts):
    for p in parts:
        if isinstance(p, (tuple, list)):
            yield from _flatten(p)
        else:
            yield int(p)


def experiment_code(name: str) -> int:
    """Stable 32-bit code for an experiment kind."""
    return zlib.crc32(name.encode("utf-8"))


def stream_seed(base_seed: int, *stream) -> int:
    key = tuple(_flatten(stream))
    ss = np.random.SeedSequence(int(base_seed) & MASK64, spawn_key=key)
    return int(ss.generate_state(1, np.uint64)[0])


def generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(seed) & MASK64))
