"""Procedural 16x16 sprite atlas.

All art is generated from code at import time: no binary assets, so frame
hashes are stable across platforms and the repo stays license-clean.
Entity sprites carry an alpha mask (RGBA); tile sprites are opaque RGB.
"""

from __future__ import annotations

import numpy as np

from .rng import mix64
from .world import TileKind

T = 16


def _speckle(base, accent, density, salt, stronger=None):
    """Opaque tile: base color with hash-scattered accent pixels."""
    img = np.empty((T, T, 3), dtype=np.uint8)
    img[:] = base
    for y in range(T):
        for x in range(T):
            h = mix64(salt * 7919 + y * 131 + x)
            if (h & 0xFF) < density * 256:
                img[y, x] = accent
            elif stronger is not None and ((h >> 8) & 0xFF) < 12:
                img[y, x] = stronger
    return img


def _blank(alpha=0):
    img = np.zeros((T, T, 4), dtype=np.uint8)
    img[:, :, 3] = alpha
    return img


def _rect(img, x0, y0, x1, y1, color):
    img[y0:y1 + 1, x0:x1 + 1, :3] = color
    if img.shape[2] == 4:
        img[y0:y1 + 1, x0:x1 + 1, 3] = 255


def _dot(img, x, y, color):
    img[y, x, :3] = color
    if img.shape[2] == 4:
        img[y, x, 3] = 255


def _ore(base_salt, vein_color):
    img = _speckle((110, 110, 116), (88, 88, 94), 0.18, base_salt)
    for (x, y) in ((3, 4), (4, 4), (4, 5), (10, 3), (11, 4), (5, 11),
                   (6, 12), (11, 10), (12, 11), (12, 10)):
        img[y, x] = vein_color
    return img


def _tree():
    img = _speckle((64, 128, 55), (56, 116, 48), 0.2, 3)
    _rect(img, 6, 9, 9, 15, (92, 62, 30))
    canopy = (34, 86, 30)
    _rect(img, 2, 2, 13, 8, canopy)
    _rect(img, 4, 0, 11, 2, canopy)
    for (x, y) in ((3, 3), (12, 4), (6, 1), (9, 6), (5, 7)):
        img[y, x] = (48, 108, 42)
    return img


def _water():
    img = _speckle((48, 86, 186), (44, 78, 170), 0.25, 1)
    for row, off in ((3, 2), (8, 7), (13, 4)):
        for x in range(0, T, 8):
            xx = (x + off) % T
            img[row, xx:xx + 3] = (90, 128, 220)
    return img


def _lava():
    img = _speckle((204, 80, 28), (176, 58, 20), 0.3, 9)
    for (x, y) in ((2, 3), (3, 3), (8, 7), (9, 8), (13, 2), (5, 12), (12, 12)):
        img[y, x] = (250, 200, 60)
    return img


def _table():
    img = _speckle((150, 106, 58), (136, 94, 50), 0.2, 10)
    _rect(img, 1, 1, 14, 3, (178, 130, 74))
    _rect(img, 2, 4, 3, 14, (120, 82, 44))
    _rect(img, 12, 4, 13, 14, (120, 82, 44))
    _rect(img, 6, 6, 9, 9, (96, 64, 34))
    return img


def _furnace():
    img = _speckle((96, 96, 100), (84, 84, 88), 0.2, 11)
    _rect(img, 2, 2, 13, 13, (120, 120, 124))
    _rect(img, 5, 7, 10, 12, (40, 40, 44))
    _rect(img, 6, 9, 9, 12, (240, 140, 40))
    _dot(img, 7, 10, (255, 210, 80))
    _dot(img, 8, 11, (255, 210, 80))
    return img


def _plant(ripe):
    img = _speckle((70, 135, 60), (62, 122, 52), 0.2, 12)
    _rect(img, 7, 8, 8, 14, (60, 110, 40))
    if ripe:
        _rect(img, 4, 2, 11, 8, (210, 70, 70))
        _dot(img, 6, 4, (255, 140, 140))
        _dot(img, 9, 6, (160, 40, 40))
    else:
        _rect(img, 6, 5, 9, 8, (110, 190, 90))
        _dot(img, 7, 3, (110, 190, 90))
    return img


def _player(facing):
    img = _blank()
    skin = (224, 172, 128)
    shirt = (200, 60, 60)
    _rect(img, 5, 1, 10, 6, skin)      # head
    _rect(img, 4, 7, 11, 12, shirt)    # torso
    _rect(img, 5, 13, 7, 15, (60, 60, 140))
    _rect(img, 8, 13, 10, 15, (60, 60, 140))
    eye = (30, 30, 30)
    if facing == "down":
        _dot(img, 6, 3, eye)
        _dot(img, 9, 3, eye)
    elif facing == "up":
        pass  # back of head
    elif facing == "left":
        _dot(img, 6, 3, eye)
        _rect(img, 3, 8, 4, 11, skin)
    else:
        _dot(img, 9, 3, eye)
        _rect(img, 11, 8, 12, 11, skin)
    return img


def _cow():
    img = _blank()
    body = (235, 235, 235)
    _rect(img, 2, 5, 13, 12, body)
    _rect(img, 3, 13, 4, 15, body)
    _rect(img, 11, 13, 12, 15, body)
    _rect(img, 10, 2, 14, 7, body)     # head
    _rect(img, 4, 6, 7, 9, (90, 60, 40))
    _rect(img, 9, 10, 11, 12, (90, 60, 40))
    _dot(img, 13, 4, (20, 20, 20))
    _rect(img, 11, 6, 13, 7, (240, 180, 190))
    return img


def _zombie():
    img = _blank()
    green = (92, 160, 80)
    _rect(img, 5, 1, 10, 6, green)
    _rect(img, 4, 7, 11, 13, (70, 120, 62))
    _rect(img, 2, 7, 3, 11, green)
    _rect(img, 12, 7, 13, 11, green)
    _rect(img, 5, 14, 7, 15, (50, 90, 46))
    _rect(img, 8, 14, 10, 15, (50, 90, 46))
    _dot(img, 6, 3, (20, 40, 20))
    _dot(img, 9, 3, (20, 40, 20))
    return img


def _skeleton():
    img = _blank()
    bone = (226, 226, 218)
    _rect(img, 5, 1, 10, 6, bone)
    _rect(img, 6, 7, 9, 12, bone)
    _rect(img, 4, 8, 11, 8, bone)
    _rect(img, 4, 10, 11, 10, bone)
    _rect(img, 5, 13, 6, 15, bone)
    _rect(img, 9, 13, 10, 15, bone)
    _dot(img, 6, 3, (10, 10, 10))
    _dot(img, 9, 3, (10, 10, 10))
    _rect(img, 6, 5, 9, 5, (10, 10, 10))
    return img


def _arrow(direction):
    img = _blank()
    shaft = (150, 110, 60)
    tip = (210, 210, 214)
    if direction in ("left", "right"):
        _rect(img, 3, 7, 12, 8, shaft)
        if direction == "right":
            _rect(img, 12, 6, 13, 9, tip)
            _dot(img, 14, 7, tip)
            _dot(img, 14, 8, tip)
        else:
            _rect(img, 2, 6, 3, 9, tip)
            _dot(img, 1, 7, tip)
            _dot(img, 1, 8, tip)
    else:
        _rect(img, 7, 3, 8, 12, shaft)
        if direction == "down":
            _rect(img, 6, 12, 9, 13, tip)
            _dot(img, 7, 14, tip)
            _dot(img, 8, 14, tip)
        else:
            _rect(img, 6, 2, 9, 3, tip)
            _dot(img, 7, 1, tip)
            _dot(img, 8, 1, tip)
    return img


def _item_wood():
    img = _blank()
    _rect(img, 3, 5, 12, 10, (146, 100, 52))
    _rect(img, 3, 5, 12, 6, (170, 120, 66))
    _rect(img, 5, 7, 6, 9, (110, 74, 38))
    _rect(img, 9, 8, 10, 9, (110, 74, 38))
    return img


def _item_sapling():
    img = _blank()
    _rect(img, 7, 8, 8, 13, (96, 70, 40))
    _rect(img, 5, 4, 10, 8, (96, 190, 84))
    _dot(img, 7, 2, (120, 210, 100))
    _dot(img, 8, 3, (120, 210, 100))
    return img


def _item_block(color, edge):
    img = _blank()
    _rect(img, 4, 4, 11, 11, color)
    _rect(img, 4, 4, 11, 5, edge)
    return img


def _tool(head_color, sword=False):
    img = _blank()
    handle = (140, 96, 50)
    if sword:
        _rect(img, 7, 2, 8, 10, head_color)
        _rect(img, 5, 10, 10, 11, (90, 60, 30))
        _rect(img, 7, 12, 8, 14, handle)
    else:
        _rect(img, 7, 5, 8, 14, handle)
        _rect(img, 4, 2, 11, 4, head_color)
        _dot(img, 4, 5, head_color)
        _dot(img, 11, 5, head_color)
    return img


def _icon_health():
    img = _blank()
    red = (214, 48, 62)
    _rect(img, 3, 4, 6, 7, red)
    _rect(img, 9, 4, 12, 7, red)
    _rect(img, 3, 7, 12, 9, red)
    _rect(img, 5, 10, 10, 11, red)
    _rect(img, 7, 12, 8, 13, red)
    return img


def _icon_food():
    img = _blank()
    _rect(img, 5, 3, 10, 9, (190, 120, 60))
    _rect(img, 7, 10, 8, 13, (230, 220, 200))
    _dot(img, 5, 3, (210, 150, 90))
    return img


def _icon_drink():
    img = _blank()
    blue = (70, 120, 220)
    _rect(img, 7, 2, 8, 4, blue)
    _rect(img, 5, 5, 10, 9, blue)
    _rect(img, 6, 10, 9, 12, (110, 160, 240))
    return img


def _icon_energy():
    img = _blank()
    yellow = (240, 210, 60)
    _rect(img, 8, 1, 10, 5, yellow)
    _rect(img, 6, 6, 9, 9, yellow)
    _rect(img, 5, 10, 7, 14, yellow)
    return img


# 3x5 digit font, scaled x2 when drawn
_DIGIT_ROWS = {
    0: ("111", "101", "101", "101", "111"),
    1: ("010", "110", "010", "010", "111"),
    2: ("111", "001", "111", "100", "111"),
    3: ("111", "001", "111", "001", "111"),
    4: ("101", "101", "111", "001", "001"),
    5: ("111", "100", "111", "001", "111"),
    6: ("111", "100", "111", "101", "111"),
    7: ("111", "001", "010", "010", "010"),
    8: ("111", "101", "111", "101", "111"),
    9: ("111", "101", "111", "001", "111"),
}


def digit_mask(d: int) -> np.ndarray:
    """(5,3) boolean mask for one digit glyph."""
    return np.array([[c == "1" for c in row] for row in _DIGIT_ROWS[d]], dtype=bool)


def _build_tiles():
    tiles = {
        TileKind.WATER: _water(),
        TileKind.SAND: _speckle((224, 202, 140), (208, 186, 126), 0.22, 2),
        TileKind.GRASS: _speckle((84, 152, 66), (74, 138, 58), 0.22, 3),
        TileKind.TREE: _tree(),
        TileKind.STONE: _speckle((128, 128, 134), (112, 112, 118), 0.22, 4),
        TileKind.PATH: _speckle((158, 140, 108), (144, 126, 96), 0.2, 5),
        TileKind.COAL_ORE: _ore(6, (32, 32, 34)),
        TileKind.IRON_ORE: _ore(7, (206, 176, 150)),
        TileKind.DIAMOND_ORE: _ore(8, (120, 220, 228)),
        TileKind.LAVA: _lava(),
        TileKind.TABLE: _table(),
        TileKind.FURNACE: _furnace(),
        TileKind.PLANT: _plant(ripe=True),
        TileKind.DARK: _speckle((38, 36, 48), (30, 28, 38), 0.25, 13),
    }
    return tiles


def build_atlas() -> dict:
    """name -> sprite. Tiles are RGB (16,16,3); entities/icons RGBA."""
    atlas = {f"tile_{k.name.lower()}": v for k, v in _build_tiles().items()}
    atlas["tile_plant_young"] = _plant(ripe=False)
    for facing in ("left", "right", "up", "down"):
        atlas[f"player_{facing}"] = _player(facing)
        atlas[f"arrow_{facing}"] = _arrow(facing)
    atlas["player_sleeping"] = _player("up")
    atlas["mob_cow"] = _cow()
    atlas["mob_zombie"] = _zombie()
    atlas["mob_skeleton"] = _skeleton()
    atlas["item_wood"] = _item_wood()
    atlas["item_stone"] = _item_block((150, 150, 156), (170, 170, 176))
    atlas["item_coal"] = _item_block((44, 44, 48), (70, 70, 74))
    atlas["item_iron"] = _item_block((206, 176, 150), (226, 196, 170))
    atlas["item_diamond"] = _item_block((110, 215, 225), (150, 235, 240))
    atlas["item_sapling"] = _item_sapling()
    atlas["item_wood_pickaxe"] = _tool((160, 112, 60))
    atlas["item_stone_pickaxe"] = _tool((140, 140, 146))
    atlas["item_iron_pickaxe"] = _tool((216, 190, 166))
    atlas["item_wood_sword"] = _tool((160, 112, 60), sword=True)
    atlas["item_stone_sword"] = _tool((140, 140, 146), sword=True)
    atlas["item_iron_sword"] = _tool((216, 190, 166), sword=True)
    atlas["icon_health"] = _icon_health()
    atlas["icon_food"] = _icon_food()
    atlas["icon_drink"] = _icon_drink()
    atlas["icon_energy"] = _icon_energy()
    return atlas


ATLAS = build_atlas()
