from __future__ import annotations

from typing import Union

import numpy as np
import numpy.typing as npt

from .errors import DomainError

SeedLike = Union[int, np.random.Generator, np.random.SeedSequence]


def check_unit(u: npt.ArrayLike, name: str = "u") -> np.ndarray:
    """Return `u` as a float array, raising DomainError unless every entry is in [0, 1]."""
    arr = np.asarray(u, dtype=float)
    if not np.all((arr >= 0.0) & (arr <= 1.0)):
        raise DomainError(f"{name} must lie in [0, 1], got {u!r}")
    return arr


def check_count(n: int, name: str = "n", minimum: int = 1) -> int:
    if isinstance(n, bool) or int(n) != n or n < minimum:
        raise DomainError(f"{name} must be an integer >= {minimum}, got {n!r}")
    return int(n)


def scalar_or_array(value: np.ndarray):
    # 0-d results come back as plain Python numbers
    if np.ndim(value) == 0:
        return np.asarray(value).item()
    return value


def as_rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def replicate_seed(master_seed: int, index: int) -> np.random.SeedSequence:
    """Independent stream for replicate `index`, a pure function of (master_seed, index)."""
    return np.random.SeedSequence([int(master_seed), int(index)])
