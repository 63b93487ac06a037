"""
    Seeded random number generation

All randomness in the package flows from a Philox counter-based bit generator,
so a given seed produces the same stream on every platform. Normal deviates are
drawn with the Box-Muller transform on top of the uniform stream instead of
numpy's ziggurat sampler.
"""

import math
from typing import Union

import numpy as np

Shape = Union[int, tuple[int, ...]]


def make_rng(seed: int, *keys: Union[int, str]) -> np.random.Generator:
    """
    Build a generator for the given seed.

    Optional keys derive an independent stream for a sub-task, e.g.
    make_rng(seed, run_id, "init") and make_rng(seed, run_id, "train") never
    share draws.
    """
    return np.random.Generator(np.random.Philox(derive_seed(seed, *keys)))


def derive_seed(seed: int, *keys: Union[int, str]) -> int:
    if not keys:
        return int(seed)
    entropy = [int(seed)] + [_key_to_int(key) for key in keys]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])


def _key_to_int(key: Union[int, str]) -> int:
    if isinstance(key, str):
        return int.from_bytes(key.encode("utf-8"), "little")
    return int(key)


def standard_normal(rng: np.random.Generator, size: Shape) -> np.ndarray:
    """
    Independent N(0, 1) draws using the Box-Muller transform
    """
    shape = (size,) if isinstance(size, int) else tuple(size)
    count = math.prod(shape)
    pairs = (count + 1) // 2
    # 1 - U keeps the log argument in (0, 1]
    radius = np.sqrt(-2.0 * np.log(1.0 - rng.random(pairs)))
    theta = 2.0 * np.pi * rng.random(pairs)
    values = np.concatenate([radius * np.cos(theta), radius * np.sin(theta)])
    return values[:count].reshape(shape)


def python_seed(rng: np.random.Generator) -> int:
    """
    Integer seed for libraries driven by Python's own Mersenne Twister
    """
    return int(rng.integers(0, 2**32))
