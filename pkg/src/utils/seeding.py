"""
Indexed random streams.

Every random draw in the pipeline comes from a generator keyed by
(master_seed, purpose, index..., role). Streams never depend on the order in
which workers run, so serial and parallel runs draw identical numbers.
"""

import zlib
from typing import Union

import numpy as np

Key = Union[int, str]


def _word(part: Key) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf8"))
    if part < 0:
        raise ValueError(f"Stream key parts must be non-negative, got {part}")
    return int(part)


def stream_seed(master_seed: int, *parts: Key) -> np.random.SeedSequence:
    return np.random.SeedSequence([_word(master_seed), *(_word(p) for p in parts)])


def make_rng(master_seed: int, *parts: Key) -> np.random.Generator:
    """Generator for the stream named by ``parts`` under ``master_seed``."""
    return np.random.default_rng(stream_seed(master_seed, *parts))


def derive_seed(master_seed: int, *parts: Key) -> int:
    """A plain 32-bit integer seed for the named stream (stored in artifacts)."""
    return int(stream_seed(master_seed, *parts).generate_state(1)[0])
