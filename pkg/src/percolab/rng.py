"""Counter-based uniforms keyed by (master seed, stream, domain, index).

Every random bit in the package comes from a stateless hash, so a sample is
reproducible from its coordinates alone and shards never share state.  The
numpy and numba versions below produce identical bits.
"""

from __future__ import annotations

import numpy as np
from numba import njit, uint64

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_INV53 = 1.0 / 9007199254740992.0

#: Domain tags keep edge uniforms and vertex (ghost) uniforms independent.
EDGE = 0
GHOST = 1


def _mix_np(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def stream_key(seed: int, stream: int, domain: int = EDGE) -> np.uint64:
    """Per-(seed, stream, domain) key shared by both implementations."""
    with np.errstate(over="ignore"):
        k = _mix_np(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + _GOLDEN)
        k = _mix_np(k ^ (np.uint64(stream & 0xFFFFFFFFFFFFFFFF) * _GOLDEN + _M1))
        k = _mix_np(k ^ (np.uint64(domain) * _M2 + _GOLDEN))
    return np.uint64(k)


def uniforms(seed: int, stream: int, index, domain: int = EDGE) -> np.ndarray:
    """Uniforms in [0, 1) for an array of indices."""
    idx = np.asarray(index, dtype=np.uint64)
    key = stream_key(seed, stream, domain)
    with np.errstate(over="ignore"):
        z = _mix_np(key ^ (idx * _GOLDEN + _M2))
    return (z >> np.uint64(11)).astype(np.float64) * _INV53


@njit(cache=True, inline="always")
def _mix_nb(z):
    z = (z ^ (z >> uint64(30))) * uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> uint64(27))) * uint64(0x94D049BB133111EB)
    return z ^ (z >> uint64(31))


@njit(cache=True)
def stream_key_nb(seed, stream, domain):
    g = uint64(0x9E3779B97F4A7C15)
    k = _mix_nb(uint64(seed) + g)
    k = _mix_nb(k ^ (uint64(stream) * g + uint64(0xBF58476D1CE4E5B9)))
    k = _mix_nb(k ^ (uint64(domain) * uint64(0x94D049BB133111EB) + g))
    return k


@njit(cache=True, inline="always")
def uniform_nb(key, index):
    z = _mix_nb(uint64(key) ^ (uint64(index) * uint64(0x9E3779B97F4A7C15) + uint64(0x94D049BB133111EB)))
    return float(z >> uint64(11)) * (1.0 / 9007199254740992.0)
