"""Rule-based caption generation over trajectories.

Fifteen rules in four categories (achievement 5, movement 5, construction 3,
combat 2) match on (action, state, next state) transitions, several over a
short trailing window. A match at timestep t emits the 6-frame video range
[max(0, t-4), t+1] with the rendered caption; the t+1 frame captures the
action's outcome.

The full instantiation of every template over its legal bindings is the
fixed 61-caption vocabulary. Paraphrase tables (a YAML mapping from base
caption to variant list) are ingested, never generated here.

Rule windows/radii (stay run length, approach radius, ...) come from the
caption section of defaults.yaml; they are declared constants, open to
recalibration.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

import numpy as np
import yaml

from .datakit import Trajectory, read_episode, read_manifest
from .errors import (IoFailure, MalformedTable, MissingBinding,
                     UnknownCaption)
from .mechanics import Action, load_defaults
from .rng import Stream, stream_key
from .world import SIZE, TileKind


@dataclass(frozen=True)
class CaptionRule:
    id: int
    name: str
    category: str
    template: str


RULES = (
    CaptionRule(0, "harvest", "achievement", "obtain {item}"),
    CaptionRule(1, "place", "achievement", "place {item} on {material}"),
    CaptionRule(2, "craft", "achievement", "craft {item}"),
    CaptionRule(3, "kill", "achievement", "kill {mob}"),
    CaptionRule(4, "sleep", "achievement", "go to sleep"),
    CaptionRule(5, "stay", "movement", "stay"),
    CaptionRule(6, "move", "movement", "move to {dir}"),
    CaptionRule(7, "approach", "movement", "approach {mob}"),
    CaptionRule(8, "flee", "movement", "flee from {mob}"),
    CaptionRule(9, "explore", "movement", "go explore"),
    CaptionRule(10, "shelter", "construction", "place {item} to build shelter"),
    CaptionRule(11, "path", "construction", "build path over {material}"),
    CaptionRule(12, "tunnel", "construction", "dig a tunnel"),
    CaptionRule(13, "attacked_by", "combat", "attacked by {mob}"),
    CaptionRule(14, "block_attack", "combat", "block attack from {mob} with {item}"),
)
RULE_BY_NAME = {r.name: r for r in RULES}
CATEGORIES = ("achievement", "movement", "construction", "combat")

# Legal bindings per rule; their product defines the 61-caption vocabulary.
HARVEST_ITEMS = ("wood", "stone", "coal", "iron", "diamond", "sapling",
                 "drink", "plant")
PLACE_BINDINGS = tuple(
    (item, mat)
    for item, mats in (("stone", ("grass", "sand", "path", "water", "lava")),
                       ("table", ("grass", "sand", "path")),
                       ("furnace", ("grass", "sand", "path")),
                       ("plant", ("grass",)))
    for mat in mats)
CRAFT_ITEMS = ("wood pickaxe", "stone pickaxe", "iron pickaxe",
               "wood sword", "stone sword", "iron sword")
KILL_MOBS = ("cow", "zombie", "skeleton")
DIRECTIONS = ("north", "south", "east", "west")
APPROACH_MOBS = ("cow", "zombie", "skeleton")
FLEE_MOBS = ("zombie", "skeleton")
SHELTER_ITEMS = ("stone", "table", "furnace")
PATH_MATERIALS = ("water", "lava")
ATTACKER_MOBS = ("zombie", "skeleton")
BLOCK_MOBS = ("zombie", "skeleton", "arrow")
BLOCK_ITEMS = ("stone", "table", "furnace", "plant")

_PLACEHOLDER = re.compile(r"\{(\w+)\}")


@dataclass(frozen=True)
class CaptionRecord:
    episode_id: int
    t: int
    rule_id: int
    caption: str
    frame_start: int
    frame_end: int

    @property
    def rule(self) -> CaptionRule:
        return RULES[self.rule_id]


def render_caption(rule: CaptionRule, bindings: dict) -> str:
    """Exact template substitution, lowercase output."""
    def sub(match):
        key = match.group(1)
        if key not in bindings:
            raise MissingBinding(f"{rule.name}: no binding for {{{key}}}")
        return str(bindings[key]).lower()

    return _PLACEHOLDER.sub(sub, rule.template).lower()


def list_caption_vocabulary() -> list:
    """All legal template instantiations, deduplicated and sorted (61)."""
    caps = set()
    caps.update(render_caption(RULE_BY_NAME["harvest"], {"item": i})
                for i in HARVEST_ITEMS)
    caps.update(render_caption(RULE_BY_NAME["place"], {"item": i, "material": m})
                for i, m in PLACE_BINDINGS)
    caps.update(render_caption(RULE_BY_NAME["craft"], {"item": i})
                for i in CRAFT_ITEMS)
    caps.update(render_caption(RULE_BY_NAME["kill"], {"mob": m}) for m in KILL_MOBS)
    caps.add(RULE_BY_NAME["sleep"].template)
    caps.add(RULE_BY_NAME["stay"].template)
    caps.update(render_caption(RULE_BY_NAME["move"], {"dir": d}) for d in DIRECTIONS)
    caps.update(render_caption(RULE_BY_NAME["approach"], {"mob": m})
                for m in APPROACH_MOBS)
    caps.update(render_caption(RULE_BY_NAME["flee"], {"mob": m}) for m in FLEE_MOBS)
    caps.add(RULE_BY_NAME["explore"].template)
    caps.update(render_caption(RULE_BY_NAME["shelter"], {"item": i})
                for i in SHELTER_ITEMS)
    caps.update(render_caption(RULE_BY_NAME["path"], {"material": m})
                for m in PATH_MATERIALS)
    caps.add(RULE_BY_NAME["tunnel"].template)
    caps.update(render_caption(RULE_BY_NAME["attacked_by"], {"mob": m})
                for m in ATTACKER_MOBS)
    caps.update(render_caption(RULE_BY_NAME["block_attack"], {"mob": m, "item": i})
                for m in BLOCK_MOBS for i in BLOCK_ITEMS)
    return sorted(caps)


# --- event detection ----------------------------------------------------------

_T = {k.name.lower(): int(k) for k in TileKind}
_STONE_FAMILY = {int(TileKind.STONE), int(TileKind.COAL_ORE),
                 int(TileKind.IRON_ORE), int(TileKind.DIAMOND_ORE)}
_OPEN_TILES = {int(TileKind.GRASS), int(TileKind.SAND), int(TileKind.PATH),
               int(TileKind.DARK)}
_PLACE_ACTIONS = {int(Action.PLACE_STONE): "stone", int(Action.PLACE_TABLE): "table",
                  int(Action.PLACE_FURNACE): "furnace", int(Action.PLACE_PLANT): "plant"}
_PLACED_TILE = {"stone": int(TileKind.STONE), "table": int(TileKind.TABLE),
                "furnace": int(TileKind.FURNACE), "plant": int(TileKind.PLANT)}
_CRAFT_BY_ACTION = {int(a): CRAFT_ITEMS[i] for i, a in enumerate(
    (Action.MAKE_WOOD_PICKAXE, Action.MAKE_STONE_PICKAXE, Action.MAKE_IRON_PICKAXE,
     Action.MAKE_WOOD_SWORD, Action.MAKE_STONE_SWORD, Action.MAKE_IRON_SWORD))}
_CRAFT_INV_INDEX = {int(Action.MAKE_WOOD_PICKAXE): 6, int(Action.MAKE_STONE_PICKAXE): 7,
                    int(Action.MAKE_IRON_PICKAXE): 8, int(Action.MAKE_WOOD_SWORD): 9,
                    int(Action.MAKE_STONE_SWORD): 10, int(Action.MAKE_IRON_SWORD): 11}
_HARVEST_BY_INV = {0: "wood", 1: "stone", 2: "coal", 3: "iron", 4: "diamond", 5: "sapling"}
_TILE_NAME = {int(k): k.name.lower() for k in TileKind}
_FACING_DELTA = ((-1, 0), (1, 0), (0, -1), (0, 1))
_DIR_NAME_BY_DELTA = {(0, -1): "north", (0, 1): "south", (1, 0): "east", (-1, 0): "west"}


def _caption_constants():
    c = load_defaults()["caption"]
    return (int(c["stay_run"]), int(c["move_window"]), int(c["move_min_tiles"]),
            int(c["proximity_window"]), int(c["proximity_radius"]),
            int(c["explore_window"]), int(c["explore_min_new"]),
            int(c["tunnel_max_gap"]), int(c["tunnel_max_dist"]),
            int(c["block_range"]))


def _nearest_distances(traj: Trajectory, kind: str) -> np.ndarray:
    """Manhattan distance from the player to the nearest live `kind` mob,
    per timestep; +inf where none is alive."""
    pos = traj.arrays[f"{kind}_position"].astype(np.int64)
    live = traj.arrays[f"{kind}_status"][:, :, 0] > 0
    ppos = traj.arrays["player_position"].astype(np.int64)
    d = np.abs(pos - ppos[:, None, :]).sum(axis=2).astype(np.float64)
    d[~live] = np.inf
    return d.min(axis=1)


def detect_events(trajectory: Trajectory, episode_id: int | None = None) -> list:
    """Evaluate all 15 rules over every timestep; records sorted by (t, rule).

    Pure over the trajectory: re-running on a replayed copy reproduces the
    records exactly. At most one record per rule per timestep; bindings with
    several candidates resolve in a fixed order.
    """
    L = trajectory.length
    if L < 1:
        return []
    ep = episode_id if episode_id is not None else trajectory.seed
    (STAY_RUN, MOVE_W, MOVE_MIN, PROX_W, PROX_R,
     EXPL_W, EXPL_MIN, TUN_GAP, TUN_DIST, BLOCK_R) = _caption_constants()

    actions = trajectory.actions.tolist()
    ppos = trajectory.arrays["player_position"].astype(np.int64)
    px, py = ppos[:, 0].tolist(), ppos[:, 1].tolist()
    facing = trajectory.arrays["player_direction"].tolist()
    health = trajectory.arrays["player_stats"][:, 0].astype(np.int64).tolist()
    food = trajectory.arrays["player_stats"][:, 1].astype(np.int64).tolist()
    drink = trajectory.arrays["player_stats"][:, 2].astype(np.int64).tolist()
    sleeping = trajectory.arrays["player_sleeping"].tolist()
    inv = trajectory.arrays["player_inventory"].astype(np.int64)
    maps = trajectory.arrays["map"]

    dist = {k: _nearest_distances(trajectory, k).tolist()
            for k in ("cow", "zombie", "skeleton")}

    # first-ever visit time per cell, for the explore rule
    first_visit = {}
    for t in range(L + 1):
        cell = (px[t], py[t])
        if cell not in first_visit:
            first_visit[cell] = t

    records = []
    noop_run = 0
    last_dig = None  # (t, x, y)

    def emit(t, rule_name, caption):
        rule = RULE_BY_NAME[rule_name]
        records.append(CaptionRecord(ep, t, rule.id, caption,
                                     max(0, t - 4), t + 1))

    for t in range(L):
        a = actions[t]
        fired_non_explore = False

        fx, fy = _FACING_DELTA[facing[t]]
        tx, ty = px[t] + fx, py[t] + fy
        target_ok = 0 <= tx < SIZE and 0 <= ty < SIZE
        tile_before = int(maps[t, tx, ty]) if target_ok else -1
        tile_after = int(maps[t + 1, tx, ty]) if target_ok else -1

        # --- achievement rules ---
        if a == int(Action.DO):
            d_inv = inv[t + 1] - inv[t]
            gained = [i for i in range(6) if d_inv[i] > 0]
            if gained:
                emit(t, "harvest", f"obtain {_HARVEST_BY_INV[gained[0]]}")
                fired_non_explore = True
            elif target_ok and tile_before == int(TileKind.WATER) \
                    and drink[t + 1] > drink[t]:
                emit(t, "harvest", "obtain drink")
                fired_non_explore = True
            elif target_ok and tile_before == int(TileKind.PLANT) \
                    and food[t + 1] > food[t]:
                emit(t, "harvest", "obtain plant")
                fired_non_explore = True
            # kill: the faced mob died
            if target_ok:
                view = trajectory.state_view(t)
                nxt = trajectory.state_view(t + 1)
                for kind in KILL_MOBS:
                    at_target = [(x, y, hp) for (x, y, hp) in view.mobs(kind)
                                 if x == tx and y == ty]
                    if at_target:
                        still = [(x, y, hp) for (x, y, hp) in nxt.mobs(kind)
                                 if x == tx and y == ty]
                        if not still:
                            emit(t, "kill", f"kill {kind}")
                            fired_non_explore = True
                        break
            # tunnel: consecutive stone-family removals along one axis
            if target_ok and tile_before in _STONE_FAMILY \
                    and tile_after == int(TileKind.PATH):
                if last_dig is not None:
                    t0, x0, y0 = last_dig
                    if t - t0 <= TUN_GAP and (x0 == tx or y0 == ty) \
                            and abs(x0 - tx) + abs(y0 - ty) <= TUN_DIST \
                            and (x0, y0) != (tx, ty):
                        emit(t, "tunnel", "dig a tunnel")
                        fired_non_explore = True
                last_dig = (t, tx, ty)

        elif a in _PLACE_ACTIONS and target_ok:
            item = _PLACE_ACTIONS[a]
            placed = (tile_before != _PLACED_TILE[item]
                      and tile_after == _PLACED_TILE[item])
            if placed:
                emit(t, "place", f"place {item} on {_TILE_NAME[tile_before]}")
                fired_non_explore = True
                # shelter: this placement closed the last open cardinal gap
                if item in SHELTER_ITEMS:
                    open_before = []
                    for dx, dy in _FACING_DELTA:
                        nx, ny = px[t] + dx, py[t] + dy
                        if 0 <= nx < SIZE and 0 <= ny < SIZE \
                                and int(maps[t, nx, ny]) in _OPEN_TILES:
                            open_before.append((nx, ny))
                    if open_before == [(tx, ty)]:
                        emit(t, "shelter", f"place {item} to build shelter")
                if item == "stone" and tile_before in (int(TileKind.WATER),
                                                       int(TileKind.LAVA)):
                    emit(t, "path", f"build path over {_TILE_NAME[tile_before]}")
                # block attack: placement intercepts an attacker's line
                blocked = _blocked_mob(trajectory, t, tx, ty, px[t], py[t], BLOCK_R)
                if blocked:
                    emit(t, "block_attack",
                         f"block attack from {blocked} with {item}")

        elif a in _CRAFT_BY_ACTION:
            if inv[t + 1][_CRAFT_INV_INDEX[a]] > inv[t][_CRAFT_INV_INDEX[a]]:
                emit(t, "craft", f"craft {_CRAFT_BY_ACTION[a]}")
                fired_non_explore = True

        elif a == int(Action.SLEEP):
            if not sleeping[t] and sleeping[t + 1]:
                emit(t, "sleep", "go to sleep")
                fired_non_explore = True

        # --- movement rules ---
        if a == int(Action.NOOP):
            noop_run += 1
        else:
            noop_run = 0
        if noop_run >= STAY_RUN:
            emit(t, "stay", "stay")
            fired_non_explore = True

        if t >= MOVE_W - 1:
            w0 = t - MOVE_W + 1
            dx = px[t + 1] - px[w0]
            dy = py[t + 1] - py[w0]
            if max(abs(dx), abs(dy)) >= MOVE_MIN:
                if abs(dx) >= abs(dy):
                    name = "east" if dx > 0 else "west"
                else:
                    name = "south" if dy > 0 else "north"
                emit(t, "move", f"move to {name}")
                fired_non_explore = True

        if t >= PROX_W - 1:
            w0 = t - PROX_W + 1
            for kind in APPROACH_MOBS:
                window = dist[kind][w0:t + 2]
                if window[0] > PROX_R >= window[-1] and \
                        all(b <= a_ for a_, b in zip(window, window[1:])):
                    emit(t, "approach", f"approach {kind}")
                    fired_non_explore = True
                    break
            for kind in FLEE_MOBS:
                window = dist[kind][w0:t + 2]
                if window[-1] > PROX_R >= window[0] and window[-1] != np.inf and \
                        all(b >= a_ for a_, b in zip(window, window[1:])):
                    emit(t, "flee", f"flee from {kind}")
                    fired_non_explore = True
                    break

        if t >= EXPL_W - 1 and not fired_non_explore:
            w0 = t - EXPL_W + 1
            new_cells = {(px[i + 1], py[i + 1])
                         for i in range(w0, t + 1)
                         if first_visit.get((px[i + 1], py[i + 1])) == i + 1}
            if len(new_cells) >= EXPL_MIN:
                emit(t, "explore", "go explore")

        # --- combat: attacked by ---
        if health[t + 1] < health[t]:
            view = trajectory.state_view(t)
            hit = None
            for (zx, zy, _hp) in view.mobs("zombie"):
                if abs(zx - px[t]) + abs(zy - py[t]) == 1:
                    hit = "zombie"
                    break
            if hit is None:
                for (ax, ay, dx, dy) in view.arrows():
                    if (ax, ay) == (px[t], py[t]) or \
                            (ax + dx, ay + dy) == (px[t], py[t]):
                        hit = "skeleton"  # arrows credit their shooter
                        break
            if hit:
                emit(t, "attacked_by", f"attacked by {hit}")

    records.sort(key=lambda r: (r.t, r.rule_id))
    return records


def _blocked_mob(traj, t, cx, cy, px, py, block_range):
    """Which attacker (arrow > skeleton > zombie) the cell (cx, cy) shields
    the player from, or None."""
    view = traj.state_view(t)
    for (ax, ay, dx, dy) in view.arrows():
        for k in range(1, block_range + 1):
            if (ax + k * dx, ay + k * dy) == (cx, cy):
                for m in range(k + 1, block_range + 2):
                    if (ax + m * dx, ay + m * dy) == (px, py):
                        return "arrow"
                break
    for (sx, sy, _hp) in view.mobs("skeleton"):
        if sx == px and sy == py:
            continue
        aligned_x = sx == px == cx
        aligned_y = sy == py == cy
        if abs(sx - px) + abs(sy - py) <= block_range:
            if aligned_x and min(sy, py) < cy < max(sy, py):
                return "skeleton"
            if aligned_y and min(sx, px) < cx < max(sx, px):
                return "skeleton"
    for (zx, zy, _hp) in view.mobs("zombie"):
        if abs(zx - px) + abs(zy - py) <= 2 \
                and abs(cx - px) + abs(cy - py) == 1 \
                and abs(cx - zx) + abs(cy - zy) == 1:
            return "zombie"
    return None


# --- paraphrase tables ---------------------------------------------------------

def load_paraphrases(path) -> dict:
    """YAML mapping from base caption to a list of paraphrased variants."""
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as e:
        raise IoFailure(str(e)) from e
    except yaml.YAMLError as e:
        raise MalformedTable(f"unparseable paraphrase table: {e}") from e
    if not isinstance(data, dict):
        raise MalformedTable("paraphrase table must be a mapping")
    vocab = set(list_caption_vocabulary())
    for key, variants in data.items():
        if key not in vocab:
            raise MalformedTable(f"key is not a base caption: {key!r}")
        if not isinstance(variants, list) or not variants \
                or not all(isinstance(v, str) for v in variants):
            raise MalformedTable(f"variants for {key!r} must be a non-empty list")
    return {k: list(v) for k, v in data.items()}


def sample_caption(table: dict, base: str, n_variants_cap: int, seed) -> str:
    """Uniform draw over {base} + the first (cap - 1) paraphrases."""
    if base not in set(list_caption_vocabulary()):
        raise UnknownCaption(base)
    if n_variants_cap < 1:
        raise ValueError("n_variants_cap must be >= 1")
    options = [base] + list(table.get(base, ()))[:n_variants_cap - 1]
    rng = seed if isinstance(seed, Stream) else Stream(stream_key(seed, "paraphrase"))
    return options[rng.next_u64() % len(options)]


# --- dataset generation --------------------------------------------------------

def generate_caption_dataset(play_manifest, out_path, balance: bool = False,
                             balance_seed: int = 0) -> dict:
    """Stream detect_events over every manifest episode into a JSONL file.

    With balance=True, categories are subsampled (seeded, without
    replacement) down to the smallest category's count. Returns per-category
    stats."""
    from pathlib import Path

    manifest = read_manifest(play_manifest)
    manifest_dir = Path(play_manifest).parent
    all_records = []
    for entry in manifest:
        traj = read_episode(manifest_dir / entry["path"])
        all_records.extend(detect_events(traj, episode_id=entry["episode"]))

    if balance:
        rng = Stream(stream_key(balance_seed, "paraphrase", salt=1))
        by_cat = {c: [] for c in CATEGORIES}
        for r in all_records:
            by_cat[RULES[r.rule_id].category].append(r)
        quota = min((len(v) for v in by_cat.values() if v), default=0)
        kept = []
        for cat in CATEGORIES:
            recs = by_cat[cat]
            idx = list(range(len(recs)))
            rng.shuffle(idx)
            kept.extend(recs[i] for i in sorted(idx[:quota]))
        all_records = sorted(kept, key=lambda r: (r.episode_id, r.t, r.rule_id))

    stats = {c: 0 for c in CATEGORIES}
    try:
        with open(out_path, "w") as out:
            for r in all_records:
                rule = RULES[r.rule_id]
                stats[rule.category] += 1
                out.write(json.dumps(
                    {"episode_id": r.episode_id, "t": r.t, "rule_id": r.rule_id,
                     "rule": rule.name, "category": rule.category,
                     "caption": r.caption, "frame_start": r.frame_start,
                     "frame_end": r.frame_end}, sort_keys=True) + "\n")
    except OSError as e:
        raise IoFailure(str(e)) from e
    stats["total"] = len(all_records)
    return stats
