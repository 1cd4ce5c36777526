"""Procedural 64x64 world generation.

Two octaves of value noise are thresholded into water/sand/grass/stone
bands. Inside the stone region, winding cave tunnels are carved, lava
pockets appear at depth, and ore veins are layered by distance from the
grass boundary: coal shallowest, iron deeper, diamond deepest. Generation
retries (with a salted stream) until a validation pass confirms the spawn
area can reach wood, water, and stone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .errors import OutOfBounds, RetryExhausted
from .rng import Seed, stream_key

SIZE = 64
MAX_PLANTS = 10
_GEN_RETRIES = 100


class TileKind(IntEnum):
    WATER = 0
    SAND = 1
    GRASS = 2
    TREE = 3
    STONE = 4
    PATH = 5
    COAL_ORE = 6
    IRON_ORE = 7
    DIAMOND_ORE = 8
    LAVA = 9
    TABLE = 10
    FURNACE = 11
    PLANT = 12
    DARK = 13


# Tiles the player can stand on. Lava is special-cased by mechanics
# (enterable and lethal when health decay is enabled).
WALKABLE = frozenset({TileKind.GRASS, TileKind.SAND, TileKind.PATH, TileKind.DARK})
# Conservative set used by reachability validation (matches what a fresh
# player can traverse on an untouched map).
SURFACE_WALKABLE = frozenset({TileKind.GRASS, TileKind.SAND, TileKind.PATH})


@dataclass
class PlantSlot:
    position: tuple
    growth_timer: int


@dataclass
class WorldGrid:
    """Static terrain layer plus the plant registry.

    tiles is indexed [x, y] with x rightward and y downward.
    """

    tiles: np.ndarray
    spawn_point: tuple
    plant_slots: list = field(default_factory=list)

    def copy(self) -> "WorldGrid":
        return WorldGrid(self.tiles.copy(), self.spawn_point,
                         [PlantSlot(s.position, s.growth_timer) for s in self.plant_slots])


def tile_at(grid: WorldGrid, pos) -> TileKind:
    x, y = pos
    if not (0 <= x < SIZE and 0 <= y < SIZE):
        raise OutOfBounds(f"position {pos!r} outside [0,{SIZE})^2")
    return TileKind(int(grid.tiles[x, y]))


# --- value noise -----------------------------------------------------------

_M64 = np.uint64(0xFFFFFFFFFFFFFFFF)


def _mix64_np(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def _lattice(key: int, salt: int, nx: int, ny: int) -> np.ndarray:
    """Deterministic [0,1) lattice values from integer hashing."""
    ix = np.arange(nx, dtype=np.uint64)[:, None]
    iy = np.arange(ny, dtype=np.uint64)[None, :]
    h = (np.uint64(key)
         + ix * np.uint64(0x9E3779B97F4A7C15)
         + iy * np.uint64(0xC2B2AE3D27D4EB4F)
         + np.uint64(salt) * np.uint64(0x165667B19E3779F9))
    return (_mix64_np(h) >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def _value_noise(key: int, salt: int, period: int) -> np.ndarray:
    """Bilinear value noise over the 64x64 grid with lattice spacing `period`."""
    n = SIZE // period + 2
    lat = _lattice(key, salt, n, n)
    coords = np.arange(SIZE)
    cell, frac = np.divmod(coords, period)
    t = frac / period
    s = t * t * (3.0 - 2.0 * t)  # smoothstep
    v00 = lat[np.ix_(cell, cell)]
    v10 = lat[np.ix_(cell + 1, cell)]
    v01 = lat[np.ix_(cell, cell + 1)]
    v11 = lat[np.ix_(cell + 1, cell + 1)]
    sx = s[:, None]
    sy = s[None, :]
    top = v00 + (v10 - v00) * sx
    bot = v01 + (v11 - v01) * sx
    return top + (bot - top) * sy


def _stone_depth(stone_mask: np.ndarray) -> np.ndarray:
    """Manhattan distance into the stone region from the nearest non-stone cell."""
    depth = np.where(stone_mask, np.int32(10_000), np.int32(0))
    for _ in range(SIZE):
        shifted = np.minimum.reduce([
            np.pad(depth[1:, :], ((0, 1), (0, 0)), constant_values=10_000),
            np.pad(depth[:-1, :], ((1, 0), (0, 0)), constant_values=10_000),
            np.pad(depth[:, 1:], ((0, 0), (0, 1)), constant_values=10_000),
            np.pad(depth[:, :-1], ((0, 0), (1, 0)), constant_values=10_000),
        ])
        new = np.minimum(depth, shifted + 1)
        if np.array_equal(new, depth):
            break
        depth = new
    return depth


def _top_k_cells(mask: np.ndarray, score: np.ndarray, k: int) -> np.ndarray:
    """Flat indices of the k highest-scoring cells inside mask; deterministic
    tie-break by flat index."""
    flat_idx = np.flatnonzero(mask.ravel())
    if flat_idx.size == 0 or k <= 0:
        return flat_idx[:0]
    vals = score.ravel()[flat_idx]
    order = np.lexsort((flat_idx, -vals))
    return flat_idx[order[:k]]


def _components(mask: np.ndarray):
    """4-connected component labels via BFS. Returns (labels, sizes)."""
    labels = np.full(mask.shape, -1, dtype=np.int32)
    sizes = []
    stack = []
    for sx in range(SIZE):
        for sy in range(SIZE):
            if not mask[sx, sy] or labels[sx, sy] >= 0:
                continue
            lab = len(sizes)
            count = 0
            stack.append((sx, sy))
            labels[sx, sy] = lab
            while stack:
                x, y = stack.pop()
                count += 1
                for nx, ny in ((x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)):
                    if 0 <= nx < SIZE and 0 <= ny < SIZE and mask[nx, ny] and labels[nx, ny] < 0:
                        labels[nx, ny] = lab
                        stack.append((nx, ny))
            sizes.append(count)
    return labels, sizes


def flood_reachable(tiles: np.ndarray, start, passable) -> np.ndarray:
    """Boolean mask of cells reachable from start over `passable` tile ids."""
    passable = {int(t) for t in passable}
    seen = np.zeros((SIZE, SIZE), dtype=bool)
    if int(tiles[start[0], start[1]]) not in passable:
        return seen
    stack = [start]
    seen[start[0], start[1]] = True
    while stack:
        x, y = stack.pop()
        for nx, ny in ((x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)):
            if 0 <= nx < SIZE and 0 <= ny < SIZE and not seen[nx, ny] \
                    and int(tiles[nx, ny]) in passable:
                seen[nx, ny] = True
                stack.append((nx, ny))
    return seen


def _adjacent_to(tiles: np.ndarray, reach: np.ndarray, kind: TileKind) -> bool:
    target = tiles == int(kind)
    near = np.zeros_like(target)
    near[1:, :] |= target[:-1, :]
    near[:-1, :] |= target[1:, :]
    near[:, 1:] |= target[:, :-1]
    near[:, :-1] |= target[:, 1:]
    return bool((near & reach).any())


def _generate_once(key: int) -> WorldGrid | None:
    elev = 0.62 * _value_noise(key, 1, 16) + 0.38 * _value_noise(key, 2, 8)
    forest = _value_noise(key, 3, 8)
    cave = _value_noise(key, 4, 4)
    lava_n = _value_noise(key, 5, 4)
    ore_c = _value_noise(key, 6, 4)
    ore_i = _value_noise(key, 7, 4)
    ore_d = _value_noise(key, 8, 4)

    tiles = np.full((SIZE, SIZE), int(TileKind.GRASS), dtype=np.int8)
    tiles[elev < 0.335] = int(TileKind.WATER)
    tiles[(elev >= 0.335) & (elev < 0.38)] = int(TileKind.SAND)
    stone_mask = elev >= 0.60
    tiles[stone_mask] = int(TileKind.STONE)

    grass_mask = tiles == int(TileKind.GRASS)
    tree_mask = grass_mask & (forest > 0.68)
    tiles[tree_mask] = int(TileKind.TREE)

    depth = _stone_depth(stone_mask)

    tunnel = stone_mask & (depth >= 2) & (np.abs(cave - 0.5) < 0.065)
    tiles[tunnel] = int(TileKind.DARK)
    lava_mask = stone_mask & ~tunnel & (depth >= 5) & (lava_n > 0.88)
    tiles[lava_mask] = int(TileKind.LAVA)

    plain_stone = tiles == int(TileKind.STONE)
    coal_band = plain_stone & (depth >= 1) & (depth <= 5)
    iron_band = plain_stone & (depth >= 3) & (depth <= 9)
    diamond_band = plain_stone & (depth >= 6)
    if not (coal_band.any() and iron_band.any() and diamond_band.any()):
        return None

    def scatter(band, score, divisor, lo, kind):
        k = max(lo, int(band.sum()) // divisor)
        for fi in _top_k_cells(band, score, k):
            x, y = divmod(int(fi), SIZE)
            if tiles[x, y] == int(TileKind.STONE):
                tiles[x, y] = int(kind)

    scatter(coal_band, ore_c, 24, 4, TileKind.COAL_ORE)
    scatter(iron_band, ore_i, 32, 3, TileKind.IRON_ORE)
    scatter(diamond_band, ore_d, 40, 2, TileKind.DIAMOND_ORE)

    # Layered ore placement can overlap; the scatter order above means a
    # cell claimed by coal stays coal. Re-check presence afterwards.
    for kind in (TileKind.COAL_ORE, TileKind.IRON_ORE, TileKind.DIAMOND_ORE):
        if not (tiles == int(kind)).any():
            return None

    grass_mask = tiles == int(TileKind.GRASS)
    labels, sizes = _components(grass_mask)
    if not sizes or max(sizes) < 25:
        return None
    big = int(np.argmax(sizes))
    xs, ys = np.nonzero(labels == big)
    center_d = np.abs(xs - SIZE // 2) + np.abs(ys - SIZE // 2)
    pick = int(np.argmin(center_d))
    spawn = (int(xs[pick]), int(ys[pick]))

    reach = flood_reachable(tiles, spawn, SURFACE_WALKABLE)
    for needed in (TileKind.TREE, TileKind.WATER, TileKind.STONE):
        if not _adjacent_to(tiles, reach, needed):
            return None
    return WorldGrid(tiles=tiles, spawn_point=spawn)


def generate_world(seed) -> WorldGrid:
    """Generate a validated world. Pure function of the seed.

    Accepts a Seed (stream must be "terrain") or a bare int base seed.
    Raises RetryExhausted if no attempt out of 100 validates.
    """
    if isinstance(seed, Seed):
        if seed.stream != "terrain":
            raise ValueError("generate_world expects the terrain stream")
        base = seed.base
    else:
        base = int(seed)
    for attempt in range(_GEN_RETRIES):
        grid = _generate_once(stream_key(base, "terrain", attempt))
        if grid is not None:
            return grid
    raise RetryExhausted(f"no valid world in {_GEN_RETRIES} attempts for seed {base}")
