"""Hashed tile coding: bounded state vectors to sparse binary features.

Each tiling group carves a subset of state dimensions into a grid of tiles;
``num_tilings`` copies of the grid are offset by k/num_tilings of one tile
width (wrapping past the top of the range). (group, tiling, coordinates) is
hashed with the seeded mixer from ``hashing`` into a 2**hash_bits table, so
encodings are identical across runs and platforms. Index 0 is reserved for an
always-active bias feature; hashed indices occupy [1, 2**hash_bits].

For speed, groups with the same dimensionality are batched into single
vectorized passes; ``coordinates`` keeps the straightforward per-group
computation as the reference the batched path is tested against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .hashing import mix64, splitmix64_array

_TOP = math.nextafter(1.0, 0.0)   # keeps an exact top-of-range value in the top tile


@dataclass(frozen=True)
class TilingGroup:
    dim_indices: tuple[int, ...]
    tiles_per_dim: tuple[int, ...]
    num_tilings: int

    def __post_init__(self):
        if len(self.tiles_per_dim) != len(self.dim_indices):
            raise ConfigError("tiles_per_dim must have one entry per dim")
        if self.num_tilings < 1:
            raise ConfigError("num_tilings must be >= 1")
        if any(t < 1 for t in self.tiles_per_dim):
            raise ConfigError("tiles_per_dim entries must be >= 1")


@dataclass(frozen=True)
class TileCoderConfig:
    groups: tuple[TilingGroup, ...]
    hash_bits: int = 20
    seed: int = 99

    def __post_init__(self):
        if not 10 <= self.hash_bits <= 26:
            raise ConfigError(f"hash_bits must be in [10, 26], got {self.hash_bits}")

    @property
    def num_features_total(self) -> int:
        return (1 << self.hash_bits) + 1


@dataclass(frozen=True)
class FeatureVector:
    """Sorted unique active indices; index 0 is the bias."""

    active_indices: np.ndarray
    num_features_total: int


def active_count(config: TileCoderConfig) -> int:
    """Collision-free active features per encode: one per tiling, plus bias."""
    return 1 + sum(g.num_tilings for g in config.groups)


class _Batch:
    """All tilings of all groups that share one dimensionality."""

    __slots__ = ("dims", "lo", "inv_span", "tiles", "tiles_minus_1", "offsets", "heads")

    def __init__(self, rows: list[tuple[int, int, TilingGroup]], lo, span):
        arity = len(rows[0][2].dim_indices)
        n = len(rows)
        self.dims = np.empty((n, arity), dtype=np.int64)
        self.tiles = np.empty((n, arity), dtype=np.int64)
        self.offsets = np.empty((n, arity), dtype=float)
        self.heads = np.empty(n, dtype=np.uint64)
        for r, (gi, k, g) in enumerate(rows):
            self.dims[r] = g.dim_indices
            self.tiles[r] = g.tiles_per_dim
            self.offsets[r] = [
                k / (g.num_tilings * t) for t in g.tiles_per_dim
            ]
        self.lo = lo[self.dims]
        self.inv_span = 1.0 / span[self.dims]
        self.tiles_minus_1 = self.tiles - 1


class TileCoder:
    """Pure encoder bound to one (config, state layout) pair."""

    def __init__(self, config: TileCoderConfig, layout):
        self.config = config
        n_dims = len(layout)
        lo = np.array([entry[1] for entry in layout], dtype=float)
        hi = np.array([entry[2] for entry in layout], dtype=float)
        self._lo = lo
        self._span = hi - lo
        self._groups = []
        rows_by_arity: dict[int, list[tuple[int, int, TilingGroup]]] = {}
        for gi, g in enumerate(config.groups):
            if any(d < 0 or d >= n_dims for d in g.dim_indices):
                raise ConfigError(f"group {gi} references dim outside 0..{n_dims - 1}")
            self._groups.append(g)
            rows_by_arity.setdefault(len(g.dim_indices), []).append((gi, 0, g))
        # expand group entries into one row per tiling, preserving group order
        self._batches: list[_Batch] = []
        for arity in sorted(rows_by_arity):
            rows = [
                (gi, k, g)
                for gi, _, g in rows_by_arity[arity]
                for k in range(g.num_tilings)
            ]
            batch = _Batch(rows, lo, self._span)
            for r, (gi, k, g) in enumerate(rows):
                batch.heads[r] = mix64(config.seed, (gi, k))
            self._batches.append(batch)
        self._mask = np.uint64((1 << config.hash_bits) - 1)
        self._one = np.uint64(1)

    def coordinates(self, values: np.ndarray) -> list[np.ndarray]:
        """Per-group (num_tilings, n_dims) tile coordinates (reference path)."""
        out = []
        for g in self._groups:
            dims = np.array(g.dim_indices, dtype=np.int64)
            tiles = np.array(g.tiles_per_dim, dtype=np.int64)
            k = np.arange(g.num_tilings, dtype=float)
            offsets = k[:, None] / (g.num_tilings * tiles[None, :].astype(float))
            unit = (values[dims] - self._lo[dims]) / self._span[dims]
            unit = np.clip(unit, 0.0, _TOP)
            frac = (unit[None, :] + offsets) % 1.0
            coords = np.minimum((frac * tiles).astype(np.int64), tiles - 1)
            out.append(coords)
        return out

    def encode(self, values: np.ndarray) -> FeatureVector:
        parts = [np.zeros(1, dtype=np.int64)]   # bias
        for batch in self._batches:
            unit = (values[batch.dims] - batch.lo) * batch.inv_span
            np.clip(unit, 0.0, _TOP, out=unit)
            frac = (unit + batch.offsets) % 1.0
            coords = np.minimum((frac * batch.tiles).astype(np.int64), batch.tiles_minus_1)
            h = batch.heads
            for a in range(coords.shape[1]):
                h = splitmix64_array(h ^ coords[:, a].astype(np.uint64))
            parts.append(((h & self._mask) + self._one).astype(np.int64))
        active = np.unique(np.concatenate(parts))
        return FeatureVector(active_indices=active,
                             num_features_total=self.config.num_features_total)


def encode(state_values: np.ndarray, config: TileCoderConfig, layout) -> FeatureVector:
    """One-shot convenience wrapper; build a TileCoder for repeated use."""
    return TileCoder(config, layout).encode(state_values)


def default_tile_config(layout, hash_bits: int = 20, seed: int = 99) -> TileCoderConfig:
    """Default grouping over the pipeline layout.

    Joint positions are tiled jointly (8 tiles/dim, 8 tilings), the two control
    channels jointly (8 tiles/dim, 8 tilings), and every trace dimension
    independently (8 tiles, 4 tilings).
    """
    names = [entry[0] for entry in layout]
    pos_dims = tuple(i for i, n in enumerate(names) if n.startswith("joint_pos["))
    emg_dims = tuple(i for i, n in enumerate(names) if n in ("ch_drive", "ch_switch"))
    trace_dims = tuple(i for i, n in enumerate(names) if n.startswith("trace["))
    groups = []
    if pos_dims:
        groups.append(TilingGroup(pos_dims, (8,) * len(pos_dims), 8))
    if emg_dims:
        groups.append(TilingGroup(emg_dims, (8,) * len(emg_dims), 8))
    for d in trace_dims:
        groups.append(TilingGroup((d,), (8,), 4))
    return TileCoderConfig(groups=tuple(groups), hash_bits=hash_bits, seed=seed)


def tile_hash_reference(seed: int, group: int, tiling: int, coords) -> int:
    """Scalar reference for the vectorized hash path (kept for tests/docs)."""
    return mix64(seed, (group, tiling, *coords))
