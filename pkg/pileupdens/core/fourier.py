"""Weighted exponential sums  S(u) = sum_k c_k exp(-i u x_k)  evaluated in bulk.

Both estimators need these sums: the trigonometric estimator on the integer
frequency grid, the sinc estimator on the FFT grid, and empirical noise models
for their Fourier transform.
"""
from __future__ import annotations

import numpy as np
import numpy.typing as npt

# complex entries held at once in a work block
_BLOCK_BUDGET = 1 << 20
# blocks advanced by multiplication before the phases are recomputed exactly
_RESEED_EVERY = 16


def exp_sum(x: npt.ArrayLike, c: npt.ArrayLike, u: npt.ArrayLike) -> np.ndarray:
    """sum_k c_k exp(-i u x_k) for arbitrary frequencies `u` (any shape)."""
    x = np.asarray(x, dtype=float)
    c = np.asarray(c)
    u = np.asarray(u, dtype=float)
    flat = u.ravel()
    out = np.empty(flat.size, dtype=complex)
    step = max(1, _BLOCK_BUDGET // max(1, x.size))
    for start in range(0, flat.size, step):
        block = flat[start : start + step]
        out[start : start + step] = np.exp(-1j * np.outer(block, x)) @ c
    return out.reshape(u.shape)


def exp_sum_grid(x: npt.ArrayLike, c: npt.ArrayLike, u0: float, du: float, count: int) -> np.ndarray:
    """sum_k c_k exp(-i u_t x_k) on the arithmetic grid u_t = u0 + t du, t = 0..count-1.

    Consecutive blocks of the grid are advanced with one complex multiplication
    per entry; phases are recomputed exactly every few blocks to bound rounding drift.
    """
    x = np.asarray(x, dtype=float)
    c = np.asarray(c)
    out = np.empty(count, dtype=complex)
    if x.size == 0:
        out[:] = 0.0
        return out
    block = int(max(1, min(256, _BLOCK_BUDGET // x.size)))
    offsets = np.arange(block) * du
    advance = np.exp(-1j * (block * du) * x)
    phases = None
    for b, start in enumerate(range(0, count, block)):
        if b % _RESEED_EVERY == 0:
            phases = np.exp(-1j * np.outer(u0 + start * du + offsets, x))
        else:
            phases *= advance
        stop = min(block, count - start)
        out[start : start + stop] = phases[:stop] @ c
    return out
