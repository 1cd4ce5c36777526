"""Deterministic pixel rendering and image export.

A frame is 144x144 RGB: a 9x7-tile viewport (16 px sprites, 144x112)
centered on the player, above a 32 px status panel. 9*16 = 144 and
7*16 + 32 = 144, the unique integral layout for this frame size.
Rendering is a pure function of the state; repeated calls yield identical
buffers, which the dataset formats and GIF export rely on.
"""

from __future__ import annotations

import numpy as np

from . import _kernel as K
from .errors import EmptyInput, IoFailure
from .mechanics import FACINGS, ITEMS, EnvState
from .sprites import ATLAS, digit_mask
from .world import SIZE, TileKind

FRAME_W = 144
FRAME_H = 144
VIEW_COLS = 9
VIEW_ROWS = 7
TILE = 16
PANEL_H = 32
VIEW_H = VIEW_ROWS * TILE  # 112

# Tile sprites stacked for fancy-index gathering; slot 14 = dark (off-map).
_TILE_STACK = np.stack(
    [ATLAS[f"tile_{k.name.lower()}"] for k in TileKind]
    + [ATLAS["tile_dark"]]).astype(np.uint8)
_OFFMAP = len(TileKind)

# Panel slot layout: row 0 = four stat gauges then five resources,
# row 1 = remaining items. Fixed positions make pixel oracles stable.
_STAT_SLOTS = (("icon_health", "health"), ("icon_food", "food"),
               ("icon_drink", "drink"), ("icon_energy", "energy"))
_ITEM_ROW0 = ("wood", "stone", "coal", "iron", "diamond")
_ITEM_ROW1 = ("sapling", "wood_pickaxe", "stone_pickaxe", "iron_pickaxe",
              "wood_sword", "stone_sword", "iron_sword")
_PANEL_BG = (42, 42, 46)
_DIGIT_COLOR = (236, 236, 236)

# precomputed per-sprite (mask, colors) pairs and 2x-scaled digit masks
_BLIT_CACHE = {name: (spr[:, :, 3] > 0, spr[:, :, :3].copy())
               for name, spr in ATLAS.items() if spr.shape[2] == 4}
_DIGITS_2X = [np.kron(digit_mask(d), np.ones((2, 2), dtype=bool)) for d in range(10)]


def _blit_rgba(frame, name, x, y):
    mask, colors = _BLIT_CACHE[name]
    frame[y:y + TILE, x:x + TILE][mask] = colors[mask]


def item_slot_region(item: str):
    """(x, y) pixel origin of an item's fixed panel slot."""
    if item in _ITEM_ROW0:
        return (4 + _ITEM_ROW0.index(item)) * TILE, VIEW_H
    return _ITEM_ROW1.index(item) * TILE, VIEW_H + TILE


def draw_count(region: np.ndarray, count: int) -> None:
    """Stamp a single-digit count into a 16x16 slot region (bottom-right)."""
    region[5:15, 9:15][_DIGITS_2X[min(count, 9)]] = _DIGIT_COLOR


def _panel_base() -> np.ndarray:
    base = np.empty((PANEL_H, FRAME_W, 3), dtype=np.uint8)
    base[:] = _PANEL_BG
    for slot, (icon, _) in enumerate(_STAT_SLOTS):
        mask, colors = _BLIT_CACHE[icon]
        base[0:TILE, slot * TILE:slot * TILE + TILE][mask] = colors[mask]
    return base


_PANEL_BASE = _panel_base()


def render(state: EnvState) -> np.ndarray:
    """Render one 144x144x3 uint8 frame. Pure; does not mutate state."""
    tiles2d = state.tiles.reshape(SIZE, SIZE)
    px = int(state.p[K.P_X])
    py = int(state.p[K.P_Y])

    # gather the 7x9 window of tile ids, off-map cells dark
    ids = np.full((VIEW_ROWS, VIEW_COLS), _OFFMAP, dtype=np.int64)
    x0, y0 = px - VIEW_COLS // 2, py - VIEW_ROWS // 2
    sx0, sy0 = max(0, x0), max(0, y0)
    sx1, sy1 = min(SIZE, x0 + VIEW_COLS), min(SIZE, y0 + VIEW_ROWS)
    if sx0 < sx1 and sy0 < sy1:
        ids[sy0 - y0:sy1 - y0, sx0 - x0:sx1 - x0] = tiles2d[sx0:sx1, sy0:sy1].T

    frame = np.empty((FRAME_H, FRAME_W, 3), dtype=np.uint8)
    view = (_TILE_STACK[ids]
            .transpose(0, 2, 1, 3, 4)
            .reshape(VIEW_H, FRAME_W, 3))
    frame[:VIEW_H] = view

    def cell_origin(wx, wy):
        return (wx - x0) * TILE, (wy - y0) * TILE

    def in_view(wx, wy):
        return x0 <= wx < x0 + VIEW_COLS and y0 <= wy < y0 + VIEW_ROWS

    # young plants override the ripe default sprite
    ripe_steps = int(state.pack.ci[K.CI_PLANT_RIPE])
    for i in range(state.plant_arr.shape[0]):
        wx = int(state.plant_arr[i, 0])
        if wx < 0:
            continue
        wy = int(state.plant_arr[i, 1])
        if in_view(wx, wy) and state.step_count - int(state.plant_arr[i, 2]) < ripe_steps:
            cx, cy = cell_origin(wx, wy)
            frame[cy:cy + TILE, cx:cx + TILE] = ATLAS["tile_plant_young"][:, :, :3] \
                if ATLAS["tile_plant_young"].shape[2] == 4 else ATLAS["tile_plant_young"]

    for s in range(K.N_MOB_SLOTS):
        kind = int(state.mob_arr[s, 0])
        if kind == K.M_NONE:
            continue
        wx, wy = int(state.mob_arr[s, 1]), int(state.mob_arr[s, 2])
        if not in_view(wx, wy):
            continue
        cx, cy = cell_origin(wx, wy)
        if kind == K.M_ARROW:
            d = int(state.mob_arr[s, 5])
            name = f"arrow_{FACINGS[d]}"
        else:
            name = f"mob_{('cow', 'zombie', 'skeleton')[kind - 1]}"
        _blit_rgba(frame, name, cx, cy)

    # player occupies the exact center tile
    facing = FACINGS[int(state.p[K.P_FACING])]
    name = "player_sleeping" if state.p[K.P_SLEEPING] else f"player_{facing}"
    _blit_rgba(frame, name, (VIEW_COLS // 2) * TILE, (VIEW_ROWS // 2) * TILE)

    # day-night: linear darkening of the world viewport
    light = state.light_level
    scale = int((0.35 + 0.65 * light) * 256)
    if scale < 256:
        frame[:VIEW_H] = (frame[:VIEW_H].astype(np.uint16) * scale) >> 8

    # status panel
    frame[VIEW_H:] = _PANEL_BASE
    p = state.p
    stats = (int(p[K.P_HEALTH]), int(p[K.P_FOOD]), int(p[K.P_DRINK]), int(p[K.P_ENERGY]))
    for slot, value in enumerate(stats):
        x = slot * TILE
        draw_count(frame[VIEW_H:VIEW_H + TILE, x:x + TILE], value)
    inv = state.inv.tolist()
    for item in _ITEM_ROW0 + _ITEM_ROW1:
        count = inv[ITEMS.index(item)]
        if count <= 0:
            continue
        x, y = item_slot_region(item)
        _blit_rgba(frame, f"item_{item}", x, y)
        draw_count(frame[y:y + TILE, x:x + TILE], count)
    return frame


def _exact_palette_image(frame: np.ndarray):
    """PIL P-mode image with a lossless palette (requires <=256 colors)."""
    from PIL import Image

    flat = frame.reshape(-1, 3)
    colors, inverse = np.unique(flat, axis=0, return_inverse=True)
    if len(colors) > 256:
        return Image.fromarray(frame)  # caller converts; quantization may be lossy
    img = Image.fromarray(inverse.reshape(frame.shape[:2]).astype(np.uint8), mode="P")
    palette = np.zeros((256, 3), dtype=np.uint8)
    palette[:len(colors)] = colors
    img.putpalette(palette.reshape(-1).tolist())
    return img


def export_png(frame: np.ndarray, path) -> None:
    from PIL import Image

    try:
        Image.fromarray(np.asarray(frame, dtype=np.uint8)).save(str(path), format="PNG")
    except OSError as e:
        raise IoFailure(str(e)) from e


def export_gif(frames, path, frame_ms: int = 100) -> None:
    """Animated GIF with one lossless palette per frame."""
    frames = list(frames)
    if not frames:
        raise EmptyInput("export_gif needs at least one frame")
    images = [_exact_palette_image(np.asarray(f, dtype=np.uint8)) for f in frames]
    try:
        images[0].save(str(path), format="GIF", save_all=True,
                       append_images=images[1:], duration=frame_ms, loop=0,
                       optimize=False)
    except OSError as e:
        raise IoFailure(str(e)) from e
