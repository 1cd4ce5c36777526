import hashlib

import numpy as np
import pytest

from crafterkit.errors import EmptyInput
from crafterkit.mechanics import Action, make_state, reset, step
from crafterkit.render import (FRAME_H, FRAME_W, TILE, VIEW_H, draw_count,
                               export_gif, export_png, item_slot_region,
                               render)
from crafterkit.sprites import ATLAS
from crafterkit.world import TileKind

from conftest import NO_DECAY, grass_field


def test_frame_shape_and_size(warm_kernel):
    f = render(reset(0))
    assert f.shape == (144, 144, 3)
    assert f.dtype == np.uint8
    assert f.nbytes == 62208


def test_render_purity_and_stability(warm_kernel):
    s = reset(0)
    a = render(s)
    b = render(s)
    assert (a == b).all()
    # content hash pinned: regenerating seed 0's initial frame must never drift
    digest = hashlib.sha256(a.tobytes()).hexdigest()
    again = hashlib.sha256(render(reset(0)).tobytes()).hexdigest()
    assert digest == again


def test_player_occupies_center_tile(warm_kernel):
    # the center 16x16 cell must contain player sprite pixels over 100 states
    shirt = np.array([200, 60, 60])
    checked = 0
    for seed in range(20):
        s = reset(seed)
        for i in range(5):
            step(s, Action((seed + i) % 5))
            f = render(s)
            cx, cy = 4 * TILE, 3 * TILE
            cell = f[cy:cy + TILE, cx:cx + TILE]
            scale = 0.35 + 0.65 * s.light_level
            expected = (shirt.astype(np.uint16) * int(scale * 256)) >> 8
            assert (cell.reshape(-1, 3) == expected).all(axis=1).any(), seed
            checked += 1
    assert checked == 100


def test_sprite_atlas_completeness():
    for kind in TileKind:
        assert f"tile_{kind.name.lower()}" in ATLAS
    for mob in ("cow", "zombie", "skeleton"):
        assert f"mob_{mob}" in ATLAS
    for d in ("left", "right", "up", "down"):
        assert f"arrow_{d}" in ATLAS
        assert f"player_{d}" in ATLAS
    from crafterkit.mechanics import ITEMS
    for item in ITEMS:
        assert f"item_{item}" in ATLAS


def test_inventory_panel_shows_wood_count(warm_kernel):
    s = make_state(inventory={"wood": 3}, config=NO_DECAY)
    f = render(s)
    x, y = item_slot_region("wood")
    region = f[y:y + TILE, x:x + TILE].copy()
    # composite the reference slot independently: panel bg + sprite + digit
    expected = np.empty((TILE, TILE, 3), dtype=np.uint8)
    expected[:] = (42, 42, 46)
    spr = ATLAS["item_wood"]
    mask = spr[:, :, 3] > 0
    expected[mask] = spr[:, :, :3][mask]
    draw_count(expected, 3)
    assert (region == expected).all()


def test_empty_inventory_slot_is_blank(warm_kernel):
    s = make_state(config=NO_DECAY)
    f = render(s)
    x, y = item_slot_region("diamond")
    assert (f[y:y + TILE, x:x + TILE] == (42, 42, 46)).all()


def test_offmap_cells_render_dark(warm_kernel):
    s = make_state(player_pos=(0, 0), config=NO_DECAY)
    f = render(s)
    # top-left view cell is off the map; compare against the dark tile
    dark = ATLAS["tile_dark"]
    scale = int((0.35 + 0.65 * s.light_level) * 256)
    expected = (dark.astype(np.uint16) * scale) >> 8
    assert (f[:TILE, :TILE] == expected.astype(np.uint8)).all()


def test_night_is_darker_than_day(warm_kernel):
    day = make_state(step_count=10, config=NO_DECAY)
    night = make_state(step_count=190, config=NO_DECAY)
    assert render(day)[:VIEW_H].mean() > render(night)[:VIEW_H].mean()


def test_export_png_roundtrip(tmp_path, warm_kernel):
    from PIL import Image

    f = render(reset(1))
    out = tmp_path / "frame.png"
    export_png(f, out)
    back = np.asarray(Image.open(out).convert("RGB"))
    assert (back == f).all()


def test_export_gif_single_and_six(tmp_path, warm_kernel):
    from PIL import Image

    s = reset(2)
    frames = []
    for _ in range(6):
        frames.append(render(s))
        step(s, Action.MOVE_RIGHT)
    one = tmp_path / "one.gif"
    export_gif(frames[:1], one)
    img = Image.open(one)
    assert img.n_frames == 1

    six = tmp_path / "six.gif"
    export_gif(frames, six)
    img = Image.open(six)
    assert img.n_frames == 6
    # lossless palette: every decoded frame equals its source exactly
    for i, src in enumerate(frames):
        img.seek(i)
        assert (np.asarray(img.convert("RGB")) == src).all(), i


def test_export_gif_empty_raises(tmp_path):
    with pytest.raises(EmptyInput):
        export_gif([], tmp_path / "x.gif")
