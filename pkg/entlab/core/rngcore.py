"""Deterministic, portable randomness.

Every random quantity in entlab is a pure function of ``(seed, step)``:

* ``mix64`` is the splitmix64 finalizer.
* ``derive_seed(seed, step) = mix64((seed ^ mix64(step * GAMMA + SALT)) + GAMMA)``.
* A stream with state ``s`` emits ``mix64(s + i * GAMMA)`` for ``i = 1, 2, ...``
  (splitmix64), so output ``i`` can be computed without visiting ``1..i-1``.
* Uniforms are ``(raw >> 11) * 2**-53 + 2**-54``, strictly inside (0, 1).
* Normals come from Box-Muller over consecutive uniform pairs ``(u1, u2)``:
  ``r * cos(2 pi u2)`` then ``r * sin(2 pi u2)`` with ``r = sqrt(-2 ln u1)``.
* Projection matrices are filled row-major from the stream of
  ``derive_seed(seed, step)``.
"""

import math
from dataclasses import dataclass
from typing import Iterator, Sequence, Tuple, Union

import numpy as np

from entlab.core.constants import (
    GAUSSIAN_BLOCK_ENTRIES,
    GOLDEN_GAMMA,
    MASK64,
    MIX_MULT_1,
    MIX_MULT_2,
    STEP_SALT,
)
from entlab.core.errors import DimensionError, InputValidationError

_GAMMA = np.uint64(GOLDEN_GAMMA)
_M1 = np.uint64(MIX_MULT_1)
_M2 = np.uint64(MIX_MULT_2)
_TWO_PI = 2.0 * math.pi
_UNIT = 2.0**-53
_HALF_UNIT = 2.0**-54

RowSelection = Union[Sequence[int], np.ndarray]


def mix64(z: int) -> int:
    """splitmix64 finalizer on a Python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX_MULT_1) & MASK64
    z = ((z ^ (z >> 27)) * MIX_MULT_2) & MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def _to_unit(raw: np.ndarray) -> np.ndarray:
    return (raw >> np.uint64(11)).astype(np.float64) * _UNIT + _HALF_UNIT


def _check_seed(master_seed: int, step: int) -> None:
    if not 0 <= master_seed <= MASK64:
        raise InputValidationError(
            f"master seed must be a 64-bit unsigned integer, got {master_seed}"
        )
    if step < 0:
        raise InputValidationError(f"step must be non-negative, got {step}")


def derive_seed(master_seed: int, step: int) -> int:
    """Derive the 64-bit state for ``(master_seed, step)``."""
    _check_seed(master_seed, step)
    salt = mix64(step * GOLDEN_GAMMA + STEP_SALT)
    return mix64((master_seed ^ salt) + GOLDEN_GAMMA)


@dataclass
class RngStream:
    """splitmix64 stream; ``state`` advances by one gamma per output."""

    state: int

    def next_u64(self) -> int:
        """Return the next raw 64-bit output."""
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        return mix64(self.state)

    def take_u64(self, count: int) -> np.ndarray:
        """Return the next ``count`` raw outputs as a uint64 array."""
        offsets = np.arange(1, count + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            counters = np.uint64(self.state) + offsets * _GAMMA
        self.state = (self.state + count * GOLDEN_GAMMA) & MASK64
        return _mix64_array(counters)

    def uniforms(self, count: int) -> np.ndarray:
        """Return ``count`` uniforms in the open interval (0, 1)."""
        return _to_unit(self.take_u64(count))

    def normals(self, count: int) -> np.ndarray:
        """Return ``count`` standard normals (Box-Muller, pairs consumed whole)."""
        pairs = (count + 1) // 2
        u = self.uniforms(2 * pairs)
        radius = np.sqrt(-2.0 * np.log(u[0::2]))
        angle = _TWO_PI * u[1::2]
        out = np.empty(2 * pairs, dtype=np.float64)
        out[0::2] = radius * np.cos(angle)
        out[1::2] = radius * np.sin(angle)
        return out[:count]


def derive_stream(master_seed: int, step: int) -> RngStream:
    """Create the stream for ``(master_seed, step)``."""
    return RngStream(state=derive_seed(master_seed, step))


def _gaussian_entries(state: int, entries: np.ndarray) -> np.ndarray:
    """Normals at absolute stream positions ``entries`` (row-major indices)."""
    pair = entries >> np.uint64(1)
    with np.errstate(over="ignore"):
        first = np.uint64(state) + (pair * np.uint64(2) + np.uint64(1)) * _GAMMA
        second = first + _GAMMA
    radius = np.sqrt(-2.0 * np.log(_to_unit(_mix64_array(first))))
    angle = _TWO_PI * _to_unit(_mix64_array(second))
    odd = (entries & np.uint64(1)).astype(bool)
    return np.where(odd, radius * np.sin(angle), radius * np.cos(angle))


def iter_gaussian_blocks(
    master_seed: int, step: int, rows: RowSelection, d: int
) -> Iterator[Tuple[slice, np.ndarray]]:
    """Yield ``(positions, block)`` pairs covering the requested matrix rows.

    ``positions`` slices into ``rows``; each block holds the full ``d``
    columns of those rows.
    """
    if d < 1:
        raise DimensionError(f"matrix dimensions must be positive, got d={d}")
    state = derive_seed(master_seed, step)
    row_index = np.asarray(rows, dtype=np.uint64)
    columns = np.arange(d, dtype=np.uint64)
    block_rows = max(1, GAUSSIAN_BLOCK_ENTRIES // d)
    for start in range(0, row_index.size, block_rows):
        stop = min(start + block_rows, row_index.size)
        entries = row_index[start:stop, None] * np.uint64(d) + columns
        yield slice(start, stop), _gaussian_entries(state, entries)


def gaussian_rows(master_seed: int, step: int, rows: RowSelection, d: int) -> np.ndarray:
    """Selected rows of the ``(master_seed, step)`` projection matrix."""
    row_index = np.asarray(rows, dtype=np.int64)
    out = np.empty((row_index.size, d), dtype=np.float64)
    for positions, block in iter_gaussian_blocks(master_seed, step, row_index, d):
        out[positions] = block
    return out


def gaussian_matrix(master_seed: int, step: int, n: int, d: int) -> np.ndarray:
    """Return the ``n x d`` standard-normal projection matrix for ``(seed, step)``."""
    if n < 1 or d < 1:
        raise DimensionError(f"matrix dimensions must be positive, got {n}x{d}")
    return gaussian_rows(master_seed, step, np.arange(n), d)


def gaussian_matvec(master_seed: int, step: int, n: int, w: np.ndarray) -> np.ndarray:
    """Compute ``G @ w`` block by block without holding all of ``G``."""
    if n < 1:
        raise DimensionError(f"matrix dimensions must be positive, got n={n}")
    out = np.empty(n, dtype=np.float64)
    for positions, block in iter_gaussian_blocks(master_seed, step, np.arange(n), w.size):
        out[positions] = block @ w
    return out
