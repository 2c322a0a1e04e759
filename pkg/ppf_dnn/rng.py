"""Seeded random streams.

Every consumer asks for a stream by (seed, key...). Streams are Philox
(counter-based) generators keyed through SeedSequence spawn keys, so a stream
depends only on its key, never on how many other streams were drawn before it
or on how work is split between workers.
"""

from typing import Union

import numpy as np

KeyPart = Union[int, str]

# fixed small ints for the string keys we use, so keys stay hashable ints
_NAMESPACES = {
    "sample": 1,
    "init": 2,
    "shuffle": 3,
    "split": 4,
}


def _key_to_ints(key):
    out = []
    for part in key:
        if isinstance(part, str):
            out.append(_NAMESPACES[part])
        else:
            out.append(int(part))
    return tuple(out)


def make_rng(seed: int, *key: KeyPart) -> np.random.Generator:
    seq = np.random.SeedSequence(int(seed), spawn_key=_key_to_ints(key))
    return np.random.Generator(np.random.Philox(seq))
