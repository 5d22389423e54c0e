"""
Counter-based random streams.

Every sample owns independent Philox streams keyed by
(master seed, class position, sample index, stream). Draws therefore never
depend on generation order or worker count, and Philox output is identical on
every platform.
"""

from __future__ import annotations

from enum import IntEnum

import numpy as np

# seeds stay inside the signed 64-bit range of CSV readers
_SEED_MASK = (1 << 63) - 1


class Stream(IntEnum):
    AFFINE = 0
    WARP = 1
    SALT = 2
    SPLIT = 3


def _sequence(seed: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))


def sample_generator(seed: int, class_position: int, index: int, stream: Stream) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(_sequence(seed, class_position, index, int(stream))))


def derived_seed(seed: int, class_position: int, index: int) -> int:
    """63-bit id of a sample's streams, recorded in manifests"""
    words = _sequence(seed, class_position, index).generate_state(2, dtype=np.uint32)
    return ((int(words[0]) << 32) | int(words[1])) & _SEED_MASK


def repetition_seed(seed: int, repetition: int) -> int:
    """Master seed of repetition `repetition`; repetition 0 keeps the master seed"""
    if repetition == 0:
        return int(seed)
    words = _sequence(seed, int(Stream.SPLIT), repetition).generate_state(2, dtype=np.uint32)
    return ((int(words[0]) << 32) | int(words[1])) & _SEED_MASK


def split_generator(seed: int, repetition: int) -> np.random.Generator:
    """Stream for train/test splits of one repetition"""
    return np.random.Generator(np.random.Philox(_sequence(seed, int(Stream.SPLIT), repetition, 0)))
