"""Seeded, platform-independent 64-bit hashing.

Everything that must be reproducible across runs and machines (tile indices,
config fingerprints) goes through the mixer here rather than Python's salted
``hash``. The mixer is the splitmix64 finalizer applied as a chain:
``h = mix(seed); for part: h = mix(h ^ part)``. It is documented so that logs
and model files stay portable.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def splitmix64(x: int) -> int:
    """One splitmix64 step on a 64-bit integer (pure Python reference)."""
    x = (x + _GAMMA) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def mix64(seed: int, parts: Iterable[int]) -> int:
    """Chain-mix integer parts into one 64-bit value."""
    h = splitmix64(seed & MASK64)
    for p in parts:
        h = splitmix64(h ^ (p & MASK64))
    return h


def splitmix64_array(x: np.ndarray) -> np.ndarray:
    """Vectorized splitmix64 over a uint64 array (wrapping arithmetic)."""
    x = x + np.uint64(_GAMMA)
    z = (x ^ (x >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def mix64_columns(seed_vec: np.ndarray, columns: list[np.ndarray]) -> np.ndarray:
    """Chain-mix per-row parts, one column at a time.

    ``seed_vec`` is the already-mixed head value per row; each column holds one
    part per row. Row i ends up equal to mix64(head_i, [col0_i, col1_i, ...]).
    """
    h = seed_vec
    for col in columns:
        h = splitmix64_array(h ^ col.astype(np.uint64))
    return h


def hash_bytes(data: bytes, seed: int = 0) -> int:
    """64-bit fingerprint of a byte string (8-byte little-endian chunks)."""
    h = splitmix64(seed ^ (len(data) & MASK64))
    for i in range(0, len(data), 8):
        chunk = int.from_bytes(data[i : i + 8], "little")
        h = splitmix64(h ^ chunk)
    return h


def hash_text(text: str, seed: int = 0) -> str:
    """16-hex-digit fingerprint of a text string."""
    return f"{hash_bytes(text.encode('utf-8'), seed):016x}"
