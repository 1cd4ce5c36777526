"""Scripted expert: survival reflexes + a goal-stack planner over the tech
tree, with BFS navigation and dig-through routing. No learning anywhere;
behaviour is a deterministic function of (state, planner state, seed).

Also home to the instruction planner used for task chaining (it monitors
inventory and task progress and emits the next caption from the fixed
vocabulary) and to rollout/generate_play, the demonstration recorders.
"""

from __future__ import annotations

import json
import os
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernel as K
from .datakit import Trajectory, TrajectoryRecorder, write_episode
from .errors import IoFailure, UnknownTask
from .mechanics import (ACHIEVEMENTS, ITEMS, Action, EnvConfig, EnvState,
                        legal_effective_action, reset, step)
from .rng import Seed, Stream
from .world import SIZE, TileKind

# survival interrupt thresholds
EAT_BELOW = 5
DRINK_BELOW = 4
SLEEP_BELOW = 3
RETREAT_HEALTH = 3       # flee hostiles rather than trade hits below this
FIGHT_HEALTH = 7         # only hunt hostiles at or above this

_WALKABLE = {int(TileKind.GRASS), int(TileKind.SAND), int(TileKind.PATH),
             int(TileKind.DARK)}
_MINEABLE_BY_TOOL = {
    int(TileKind.STONE): 6, int(TileKind.COAL_ORE): 6,   # wood pickaxe slot
    int(TileKind.IRON_ORE): 7,                            # stone pickaxe
    int(TileKind.DIAMOND_ORE): 8,                         # iron pickaxe
}
_COLLECT_TILE = {"wood": int(TileKind.TREE), "stone": int(TileKind.STONE),
                 "coal": int(TileKind.COAL_ORE), "iron": int(TileKind.IRON_ORE),
                 "diamond": int(TileKind.DIAMOND_ORE)}
_MOVE_FOR_DIR = (Action.MOVE_LEFT, Action.MOVE_RIGHT, Action.MOVE_UP, Action.MOVE_DOWN)
# BFS neighbor order: up, down, left, right (deterministic tie-break)
_BFS_DIRS = ((0, -1, 2), (0, 1, 3), (-1, 0, 0), (1, 0, 1))

_PLACE_ACTION = {"stone": Action.PLACE_STONE, "table": Action.PLACE_TABLE,
                 "furnace": Action.PLACE_FURNACE, "plant": Action.PLACE_PLANT}
_CRAFT_ACTION = {"wood_pickaxe": Action.MAKE_WOOD_PICKAXE,
                 "stone_pickaxe": Action.MAKE_STONE_PICKAXE,
                 "iron_pickaxe": Action.MAKE_IRON_PICKAXE,
                 "wood_sword": Action.MAKE_WOOD_SWORD,
                 "stone_sword": Action.MAKE_STONE_SWORD,
                 "iron_sword": Action.MAKE_IRON_SWORD}
_CRAFT_NEEDS = {"wood_pickaxe": {"wood": 1}, "wood_sword": {"wood": 1},
                "stone_pickaxe": {"wood": 1, "stone": 1},
                "stone_sword": {"wood": 1, "stone": 1},
                "iron_pickaxe": {"wood": 1, "coal": 1, "iron": 1},
                "iron_sword": {"wood": 1, "coal": 1, "iron": 1}}
_IRON_TOOLS = ("iron_pickaxe", "iron_sword")

# achievement pursuit order: cheap and prerequisite-consistent first
_GOAL_ORDER = (
    "collect_wood", "place_table", "make_wood_pickaxe", "make_wood_sword",
    "collect_stone", "place_stone", "collect_coal", "make_stone_pickaxe",
    "make_stone_sword", "collect_sapling", "place_plant", "collect_drink",
    "eat_plant", "eat_cow", "place_furnace", "collect_iron",
    "make_iron_pickaxe", "make_iron_sword", "collect_diamond",
    "defeat_zombie", "defeat_skeleton", "wake_up",
)


@dataclass
class Subgoal:
    kind: str                # collect/craft/place/attack/drink/eat/sleep/explore/wait
    arg: str | None = None
    data: dict = field(default_factory=dict)


@dataclass
class PlannerState:
    rng: Stream
    goal_stack: list = field(default_factory=list)
    task_script: list | None = None
    progress_cursor: int = 0
    path: deque = field(default_factory=deque)
    path_goal: tuple | None = None
    retry_after: dict = field(default_factory=dict)
    explore_target: tuple | None = None
    scan_cache: tuple | None = None  # (unlock_mask, inv bytes) last scanned


def _tiles_bytes(state: EnvState) -> bytes:
    return state.tiles.tobytes()


def _facing_cell(state: EnvState):
    f = int(state.p[K.P_FACING])
    return int(state.p[K.P_X]) + int(K._DX[f]), int(state.p[K.P_Y]) + int(K._DY[f])


def _tile(tiles: bytes, x: int, y: int) -> int:
    return tiles[x * SIZE + y]


_PASSABLE_WALK = np.zeros(16, dtype=np.uint8)
for _t in _WALKABLE:
    _PASSABLE_WALK[_t] = 1
_PARENT_SCRATCH = np.empty(SIZE * SIZE, dtype=np.int32)


def _passable_lookup(state: EnvState, dig: bool) -> np.ndarray:
    if not dig:
        return _PASSABLE_WALK
    table = _PASSABLE_WALK.copy()
    inv = state.inv
    if inv[6] > 0 or inv[7] > 0 or inv[8] > 0:
        table[int(TileKind.STONE)] = 1
        table[int(TileKind.COAL_ORE)] = 1
    if inv[7] > 0 or inv[8] > 0:
        table[int(TileKind.IRON_ORE)] = 1
    if inv[8] > 0:
        table[int(TileKind.DIAMOND_ORE)] = 1
    return table


def _bfs_to(state: EnvState, target_mask: np.ndarray, dig: bool = False):
    """Shortest path to the nearest cell flagged in target_mask.

    Returns a deque of (x, y) cells excluding the start, or None. Mob-held
    cells block; targets must be stand-able cells.
    """
    passable = _passable_lookup(state, dig)
    sx, sy = int(state.p[K.P_X]), int(state.p[K.P_Y])
    found = int(K.bfs_parents(state.tiles, state.mobmap, passable,
                              target_mask, sx, sy, _PARENT_SCRATCH))
    if found < 0:
        return None
    path = deque()
    cur = found
    start = sx * SIZE + sy
    while cur != start:
        path.appendleft(divmod(cur, SIZE))
        cur = int(_PARENT_SCRATCH[cur])
    return path


def _adjacent_to_tile(state: EnvState, wanted) -> np.ndarray:
    """uint8 mask of cells with a cardinal neighbor of a wanted tile kind."""
    wanted = {int(w) for w in (wanted if isinstance(wanted, (set, tuple, list))
                               else (wanted,))}
    t2d = state.tiles.reshape(SIZE, SIZE)
    hit = np.isin(t2d, list(wanted))
    near = np.zeros_like(hit)
    near[1:, :] |= hit[:-1, :]
    near[:-1, :] |= hit[1:, :]
    near[:, 1:] |= hit[:, :-1]
    near[:, :-1] |= hit[:, 1:]
    return near.reshape(-1).astype(np.uint8)


def _point_mask(x: int, y: int, radius: int = 0) -> np.ndarray:
    mask = np.zeros(SIZE * SIZE, dtype=np.uint8)
    for dx in range(-radius, radius + 1):
        for dy in range(-radius, radius + 1):
            if abs(dx) + abs(dy) <= radius:
                nx, ny = x + dx, y + dy
                if 0 <= nx < SIZE and 0 <= ny < SIZE:
                    mask[nx * SIZE + ny] = 1
    return mask


def _mob_adjacency_mask(state: EnvState, kind_code: int) -> np.ndarray:
    """Cells adjacent to any live mob of the kind; BFS finds the nearest
    reachable one rather than the nearest as the crow flies."""
    mask = np.zeros(SIZE * SIZE, dtype=np.uint8)
    for s_ in range(K.N_MOB_SLOTS):
        if int(state.mob_arr[s_, 0]) == kind_code:
            x, y = int(state.mob_arr[s_, 1]), int(state.mob_arr[s_, 2])
            for dx, dy, _a in _BFS_DIRS:
                nx, ny = x + dx, y + dy
                if 0 <= nx < SIZE and 0 <= ny < SIZE:
                    mask[nx * SIZE + ny] = 1
    return mask


def _dir_toward(state: EnvState, tx: int, ty: int):
    px, py = int(state.p[K.P_X]), int(state.p[K.P_Y])
    dx, dy = tx - px, ty - py
    if abs(dx) + abs(dy) != 1:
        return None
    if dx == -1:
        return Action.MOVE_LEFT
    if dx == 1:
        return Action.MOVE_RIGHT
    if dy == -1:
        return Action.MOVE_UP
    return Action.MOVE_DOWN


def _face_or_act(state: EnvState, tx: int, ty: int, act: Action):
    """Face the adjacent cell (tx, ty), then perform act."""
    move = _dir_toward(state, tx, ty)
    if move is None:
        return None
    fx, fy = _facing_cell(state)
    if (fx, fy) == (tx, ty):
        return act
    return move


def _nearest_mob(state: EnvState, kind_code: int):
    px, py = int(state.p[K.P_X]), int(state.p[K.P_Y])
    best = None
    best_d = 10_000
    for s in range(K.N_MOB_SLOTS):
        if int(state.mob_arr[s, 0]) == kind_code:
            x, y = int(state.mob_arr[s, 1]), int(state.mob_arr[s, 2])
            d = abs(x - px) + abs(y - py)
            if d < best_d:
                best_d = d
                best = (x, y)
    return best, best_d


def _tile_exists(state: EnvState, tile: int) -> bool:
    return bool((state.tiles == tile).any())


def _inv(state: EnvState, item: str) -> int:
    return int(state.inv[ITEMS.index(item)])


def _unlocked(state: EnvState, name: str) -> bool:
    return bool(int(state.p[K.P_UNLOCK]) >> ACHIEVEMENTS.index(name) & 1)


def _station_nearby(state: EnvState, tile: TileKind) -> bool:
    px, py = int(state.p[K.P_X]), int(state.p[K.P_Y])
    t2d = state.tiles.reshape(SIZE, SIZE)
    win = t2d[max(0, px - 1):px + 2, max(0, py - 1):py + 2]
    return bool((win == int(tile)).any())


class ExpertPolicy:
    """Deterministic survival + achievement-pursuit controller.

    Call survival_policy(state, planner) (or the instance) each step.
    """

    def __init__(self, seed: int = 0):
        self.planner = PlannerState(rng=Stream.from_seed(seed, "expert"))

    def __call__(self, state: EnvState) -> Action:
        action, self.planner = survival_policy(state, self.planner)
        return action


def survival_policy(state: EnvState, planner: PlannerState):
    """One decision step; returns (action, planner). Deterministic."""
    if state.p[K.P_SLEEPING]:
        return Action.NOOP, planner

    act = _threat_reflex(state, planner)
    if act is not None:
        return act, planner

    _maybe_push_survival_goals(state, planner)

    # craft/place scans only pay off after inventory or unlock changes
    sig = (int(state.p[K.P_UNLOCK]), state.inv.tobytes(),
           int(state.p[K.P_X]), int(state.p[K.P_Y]))
    if planner.scan_cache != sig:
        planner.scan_cache = sig
        act = _immediate_unlock(state)
        if act is not None:
            return act, planner

    for _ in range(6):  # pop completed / push prerequisites, then act
        if not planner.goal_stack:
            _select_next_goal(state, planner)
        top = planner.goal_stack[-1]
        if _goal_done(state, planner, top):
            planner.goal_stack.pop()
            continue
        act = _execute(state, planner, top)
        if act is not None:
            return act, planner
    return Action.NOOP, planner


def _flee_move(state: EnvState, zx: int, zy: int):
    """Walkable neighbor move maximizing distance from the threat."""
    px, py = int(state.p[K.P_X]), int(state.p[K.P_Y])
    tiles = _tiles_bytes(state)
    best = None
    best_d = abs(px - zx) + abs(py - zy)
    for dx, dy, _a in _BFS_DIRS:
        nx, ny = px + dx, py + dy
        if not (0 <= nx < SIZE and 0 <= ny < SIZE):
            continue
        if _tile(tiles, nx, ny) not in _WALKABLE or state.mobmap[nx * SIZE + ny]:
            continue
        d = abs(nx - zx) + abs(ny - zy)
        if d > best_d:
            best_d = d
            best = _dir_toward(state, nx, ny)
    return best


def _threat_reflex(state: EnvState, planner: PlannerState):
    px, py = int(state.p[K.P_X]), int(state.p[K.P_Y])
    (zpos, zd) = _nearest_mob(state, K.M_ZOMBIE)
    if zpos is not None and zd <= 4:
        health = int(state.p[K.P_HEALTH])
        pack = sum(1 for m in range(K.ZOMBIE_LO, K.ZOMBIE_HI)
                   if state.mob_arr[m, 0] == K.M_ZOMBIE
                   and abs(int(state.mob_arr[m, 1]) - px)
                   + abs(int(state.mob_arr[m, 2]) - py) <= 4)
        outnumbered = pack >= 2 and health <= 6
        if (health <= RETREAT_HEALTH or outnumbered) and zd <= 3:
            move = _flee_move(state, zpos[0], zpos[1])
            if move is not None:
                return move
    if zpos is not None and zd == 1:
        return _face_or_act(state, zpos[0], zpos[1], Action.DO)
    if zpos is not None and zd == 2 and _inv(state, "stone") > 0:
        fx, fy = _facing_cell(state)
        if abs(fx - zpos[0]) + abs(fy - zpos[1]) == 1 and \
                legal_effective_action(state, Action.PLACE_STONE) == Action.PLACE_STONE:
            return Action.PLACE_STONE
    # sidestep arrows flying down our row/column
    for s in range(K.ARROW_LO, K.ARROW_HI):
        if int(state.mob_arr[s, 0]) != K.M_ARROW:
            continue
        ax, ay = int(state.mob_arr[s, 1]), int(state.mob_arr[s, 2])
        d = int(state.mob_arr[s, 5])
        dx, dy = int(K._DX[d]), int(K._DY[d])
        for k in range(1, 4):
            if (ax + k * dx, ay + k * dy) == (px, py):
                side = (dy, dx)  # perpendicular
                for sxn, syn in ((px + side[0], py + side[1]),
                                 (px - side[0], py - side[1])):
                    move = _dir_toward(state, sxn, syn)
                    if move and 0 <= sxn < SIZE and 0 <= syn < SIZE \
                            and _tile(_tiles_bytes(state), sxn, syn) in _WALKABLE \
                            and state.mobmap[sxn * SIZE + syn] == 0:
                        return move
                break
    return None


def _maybe_push_survival_goals(state: EnvState, planner: PlannerState) -> None:
    if not state.config.health_decay_enabled:
        return
    kinds = {g.kind for g in planner.goal_stack}
    p = state.p
    energy = int(p[K.P_ENERGY])
    rested = int(p[K.P_DRINK]) >= 2 and int(p[K.P_FOOD]) >= 2
    dusk_nap = state.light_level < 0.45 and energy <= 6 and int(p[K.P_HEALTH]) >= 6
    if (energy <= SLEEP_BELOW or dusk_nap) and rested and "sleep" not in kinds \
            and planner.retry_after.get("sleep_block", -1) <= state.step_count:
        planner.goal_stack.append(Subgoal("sleep", data={"tag": "sleep_block"}))
    if int(p[K.P_FOOD]) <= EAT_BELOW and "eat" not in kinds:
        planner.goal_stack.append(Subgoal("eat"))
    if int(p[K.P_DRINK]) <= DRINK_BELOW and "drink" not in kinds:
        planner.goal_stack.append(Subgoal("drink"))
    # critical needs preempt whatever is being pursued
    for kind_, level in (("drink", int(p[K.P_DRINK])), ("eat", int(p[K.P_FOOD]))):
        if level <= 2 and planner.goal_stack and planner.goal_stack[-1].kind != kind_:
            for g in planner.goal_stack:
                if g.kind == kind_:
                    planner.goal_stack.remove(g)
                    planner.goal_stack.append(g)
                    planner.path_goal = None
                    break


def _immediate_unlock(state: EnvState):
    """Craft/place that is legal right now and unlocks a new achievement."""
    inv = state.inv
    for name, action in _CRAFT_ACTION.items():
        ach = f"make_{name}"
        if _unlocked(state, ach):
            continue
        needs = _CRAFT_NEEDS[name]
        if all(_inv(state, k) >= v for k, v in needs.items()):
            if legal_effective_action(state, action) == action:
                return action
    for name, action in _PLACE_ACTION.items():
        if _unlocked(state, f"place_{name}"):
            continue
        if legal_effective_action(state, action) == action:
            return action
    return None


def _goal_done(state: EnvState, planner: PlannerState, goal: Subgoal) -> bool:
    if goal.kind == "collect":
        want = goal.data.get("count", 1)
        if goal.arg == "sapling":
            return _inv(state, "sapling") >= want or _unlocked(state, "collect_sapling")
        return _inv(state, goal.arg) >= want
    if goal.kind == "craft":
        return _inv(state, goal.arg) >= goal.data.get("count", 1)
    if goal.kind == "place":
        if goal.arg == "table":
            return _station_nearby(state, TileKind.TABLE)
        if goal.arg == "furnace":
            return _station_nearby(state, TileKind.FURNACE)
        if goal.arg == "plant":
            return bool((state.plant_arr[:, 0] >= 0).any())
        return _unlocked(state, "place_stone")
    if goal.kind == "attack":
        if goal.data.get("tag") == "cow_hunt" and int(state.p[K.P_FOOD]) >= 8:
            return True
        return goal.data.get("satisfied", False)
    if goal.kind == "drink":
        return int(state.p[K.P_DRINK]) >= 9
    if goal.kind == "eat":
        return int(state.p[K.P_FOOD]) >= 8
    if goal.kind == "eat_plant":
        return _unlocked(state, "eat_plant")
    if goal.kind == "sleep":
        return int(state.p[K.P_ENERGY]) >= 8
    if goal.kind == "explore":
        return goal.data.get("steps", 0) >= goal.data.get("budget", 60)
    if goal.kind == "wait":
        return state.step_count >= goal.data.get("until", 0)
    return False


def _select_next_goal(state: EnvState, planner: PlannerState) -> None:
    now = state.step_count
    for name in _GOAL_ORDER:
        if _unlocked(state, name):
            continue
        if planner.retry_after.get(name, -1) > now:
            continue
        plan = _plan_for(state, name)
        if plan:
            planner.goal_stack.extend(plan)
            planner.goal_stack[-1].data["ach"] = name
            return
    planner.goal_stack.append(
        Subgoal("explore", data={"budget": 80 + planner.rng.randint(0, 80)}))


def _plan_for(state: EnvState, name: str):
    """Subgoal list for one achievement (stack order: last = first to run)."""
    if name == "collect_wood":
        return [Subgoal("collect", "wood")]
    if name == "place_table":
        return [Subgoal("place", "table")]
    if name == "make_wood_pickaxe":
        return [Subgoal("craft", "wood_pickaxe")]
    if name == "make_wood_sword":
        return [Subgoal("craft", "wood_sword")]
    if name == "collect_stone":
        return [Subgoal("collect", "stone")]
    if name == "place_stone":
        return [Subgoal("place", "stone")]
    if name == "collect_coal":
        if not _tile_exists(state, int(TileKind.COAL_ORE)):
            return None
        return [Subgoal("collect", "coal")]
    if name == "make_stone_pickaxe":
        return [Subgoal("craft", "stone_pickaxe")]
    if name == "make_stone_sword":
        return [Subgoal("craft", "stone_sword")]
    if name == "collect_sapling":
        return [Subgoal("collect", "sapling")]
    if name == "place_plant":
        return [Subgoal("place", "plant")]
    if name == "collect_drink":
        return [Subgoal("drink")]
    if name == "eat_plant":
        return [Subgoal("eat_plant")]
    if name == "eat_cow":
        if _nearest_mob(state, K.M_COW)[0] is None:
            return None
        return [Subgoal("attack", "cow")]
    if name == "place_furnace":
        return [Subgoal("place", "furnace")]
    if name == "collect_iron":
        if not _tile_exists(state, int(TileKind.IRON_ORE)):
            return None
        return [Subgoal("collect", "iron")]
    if name == "make_iron_pickaxe":
        return [Subgoal("craft", "iron_pickaxe")]
    if name == "make_iron_sword":
        return [Subgoal("craft", "iron_sword")]
    if name == "collect_diamond":
        if not _tile_exists(state, int(TileKind.DIAMOND_ORE)):
            return None
        return [Subgoal("collect", "diamond")]
    if name == "defeat_zombie":
        if _nearest_mob(state, K.M_ZOMBIE)[0] is None:
            return None
        if int(state.p[K.P_HEALTH]) < FIGHT_HEALTH or not \
                (state.inv[10] or state.inv[11]):  # stone sword or better
            return None
        return [Subgoal("attack", "zombie")]
    if name == "defeat_skeleton":
        if _nearest_mob(state, K.M_SKELETON)[0] is None:
            return None
        if int(state.p[K.P_HEALTH]) < FIGHT_HEALTH or not \
                (state.inv[9] or state.inv[10] or state.inv[11]):
            return None
        return [Subgoal("attack", "skeleton")]
    if name == "wake_up":
        if state.light_level >= 0.5:
            return None  # wait for night
        return [Subgoal("sleep")]
    return None


def _give_up(planner: PlannerState, state: EnvState, goal: Subgoal,
             cooldown: int = 300) -> None:
    for key in (goal.data.get("ach"), goal.data.get("tag")):
        if key:
            planner.retry_after[key] = state.step_count + cooldown
    if goal in planner.goal_stack:
        planner.goal_stack.remove(goal)
    planner.path.clear()
    planner.path_goal = None


def _follow_path(state: EnvState, planner: PlannerState):
    """Next action along the cached path, or None when it is exhausted."""
    px, py = int(state.p[K.P_X]), int(state.p[K.P_Y])
    while planner.path and tuple(planner.path[0]) == (px, py):
        planner.path.popleft()
    if not planner.path:
        return None
    nx, ny = planner.path[0]
    if abs(nx - px) + abs(ny - py) != 1:
        planner.path.clear()
        return None
    tiles = _tiles_bytes(state)
    t = _tile(tiles, nx, ny)
    move = _dir_toward(state, nx, ny)
    if state.mobmap[nx * SIZE + ny] != 0:
        kind = int(state.mob_arr[int(state.mobmap[nx * SIZE + ny]) - 1, 0])
        if kind in (K.M_COW, K.M_ZOMBIE, K.M_SKELETON):
            return _face_or_act(state, nx, ny, Action.DO)
        planner.path.clear()
        return None
    if t in _WALKABLE:
        return move
    if t in _MINEABLE_BY_TOOL:
        return _face_or_act(state, nx, ny, Action.DO)
    planner.path.clear()
    return None


NO_ROUTE = object()  # _navigate sentinel: BFS found no route at all


def _navigate(state: EnvState, planner: PlannerState, goal_key: tuple,
              make_target_mask, dig: bool):
    """Next action along a cached path to the target mask.

    Returns an Action while traveling, None when already at / just arrived
    at a target cell (callers handle arrival), or NO_ROUTE when no path
    exists even with digging."""
    for _ in range(2):
        if planner.path_goal != goal_key or not planner.path:
            mask = make_target_mask()
            path = _bfs_to(state, mask, dig=False)
            if path is None and dig:
                path = _bfs_to(state, mask, dig=True)
            if path is None:
                planner.path_goal = None
                return NO_ROUTE
            planner.path = path
            planner.path_goal = goal_key
            if not path:
                planner.path_goal = None
                return None  # standing on a target cell already
        act = _follow_path(state, planner)
        if act is not None:
            return act
        planner.path_goal = None  # desync or arrival: replan once
    return None


def _execute(state: EnvState, planner: PlannerState, goal: Subgoal):
    kind = goal.kind
    tiles = _tiles_bytes(state)
    px, py = int(state.p[K.P_X]), int(state.p[K.P_Y])

    if kind == "collect":
        item = goal.arg
        if item == "sapling":
            return _do_on_adjacent_tile(state, planner, {int(TileKind.GRASS)},
                                        ("collect", "sapling"))
        tile = _COLLECT_TILE[item]
        if not _tile_exists(state, tile):
            _give_up(planner, state, goal)
            return None
        need_tool = _MINEABLE_BY_TOOL.get(tile)
        if need_tool and not _has_tool(state, need_tool):
            planner.goal_stack.append(Subgoal("craft", ITEMS[need_tool]))
            return None
        return _do_on_adjacent_tile(state, planner, {tile}, ("collect", item),
                                    dig=True, on_fail=lambda: _give_up(planner, state, goal))

    if kind == "craft":
        item = goal.arg
        for ing, count in _CRAFT_NEEDS[item].items():
            if _inv(state, ing) < count:
                planner.goal_stack.append(Subgoal("collect", ing, {"count": count}))
                return None
        if not _station_nearby(state, TileKind.TABLE):
            if _tile_exists(state, int(TileKind.TABLE)):
                act = _navigate(state, planner, ("goto", "table"),
                                lambda: _adjacent_to_tile(state, TileKind.TABLE), dig=False)
                if act is not None and act is not NO_ROUTE:
                    return act
            planner.goal_stack.append(Subgoal("place", "table"))
            return None
        if item in _IRON_TOOLS and not _station_nearby(state, TileKind.FURNACE):
            if _tile_exists(state, int(TileKind.FURNACE)):
                # stations must be adjacent simultaneously; approach furnace
                act = _navigate(state, planner, ("goto", "furnace"),
                                lambda: _adjacent_to_tile(state, TileKind.FURNACE), dig=False)
                if act is not None and act is not NO_ROUTE:
                    return act
            planner.goal_stack.append(Subgoal("place", "furnace"))
            return None
        act = _CRAFT_ACTION[item]
        if legal_effective_action(state, act) == act:
            return act
        _give_up(planner, state, goal, cooldown=100)
        return None

    if kind == "place":
        item = goal.arg
        uses = {"stone": ("stone", 1), "table": ("wood", 1),
                "furnace": ("stone", 1), "plant": ("sapling", 1)}[item]
        if _inv(state, uses[0]) < uses[1]:
            planner.goal_stack.append(Subgoal("collect", uses[0], {"count": uses[1]}))
            return None
        act = _PLACE_ACTION[item]
        if legal_effective_action(state, act) == act:
            # keep stations near each other so iron recipes can see both
            if item == "furnace" and not _station_nearby(state, TileKind.TABLE) \
                    and _tile_exists(state, int(TileKind.TABLE)):
                pass
            else:
                return act
        move = _step_to_make_placeable(state, planner)
        if move is not None:
            return move
        _give_up(planner, state, goal, cooldown=150)
        return None

    if kind == "attack":
        code = {"cow": K.M_COW, "zombie": K.M_ZOMBIE, "skeleton": K.M_SKELETON}[goal.arg]
        pos, d = _nearest_mob(state, code)
        if pos is None:
            goal.data["satisfied"] = True
            return None
        px, py = int(state.p[K.P_X]), int(state.p[K.P_Y])
        for dx, dy, _a in _BFS_DIRS:
            nx, ny = px + dx, py + dy
            if 0 <= nx < SIZE and 0 <= ny < SIZE and state.mobmap[nx * SIZE + ny]:
                slot = int(state.mobmap[nx * SIZE + ny]) - 1
                if int(state.mob_arr[slot, 0]) == code:
                    return _face_or_act(state, nx, ny, Action.DO)
        tx, ty = pos
        key = ("attack", goal.arg, tx // 2, ty // 2)
        act = _navigate(state, planner, key,
                        lambda: _mob_adjacency_mask(state, code),
                        dig=bool(state.inv[6] or state.inv[7] or state.inv[8]))
        if act is NO_ROUTE:
            _give_up(planner, state, goal, cooldown=120)
            return None
        return act

    if kind == "drink":
        return _do_on_adjacent_tile(state, planner, {int(TileKind.WATER)},
                                    ("drink",), dig=True,
                                    on_fail=lambda: _give_up(planner, state, goal, 200))

    if kind == "eat":
        ripe = _ripe_plant(state)
        if ripe is not None:
            return _do_on_adjacent_tile(state, planner, {int(TileKind.PLANT)}, ("eatp",))
        pos, d = _nearest_mob(state, K.M_COW)
        if pos is not None and planner.retry_after.get("cow_hunt", -1) <= state.step_count:
            planner.goal_stack.append(Subgoal("attack", "cow", {"tag": "cow_hunt"}))
            return None
        if _any_plant(state) is not None or _inv(state, "sapling") > 0:
            planner.goal_stack.append(Subgoal("eat_plant"))
            return None
        # roam until a cow spawns or appears in range
        planner.goal_stack.append(Subgoal("explore", data={"budget": 40}))
        return None

    if kind == "eat_plant":
        slot = _any_plant(state)
        if slot is None:
            if _inv(state, "sapling") > 0:
                planner.goal_stack.append(Subgoal("place", "plant"))
            else:
                planner.goal_stack.append(Subgoal("collect", "sapling"))
            return None
        x, y, planted = slot
        ripe_at = planted + int(state.pack.ci[K.CI_PLANT_RIPE])
        if state.step_count >= ripe_at:
            return _do_on_adjacent_tile(state, planner, {int(TileKind.PLANT)},
                                        ("eatp",))
        # break camp for any cow that wanders into reach
        cow_pos, cow_d = _nearest_mob(state, K.M_COW)
        if cow_pos is not None and cow_d <= 12 and \
                planner.retry_after.get("cow_hunt", -1) <= state.step_count:
            planner.goal_stack.append(Subgoal("attack", "cow", {"tag": "cow_hunt"}))
            return None
        act = _navigate(state, planner, ("wait_plant", x, y),
                        lambda: _adjacent_to_tile(state, TileKind.PLANT), dig=False)
        px, py = int(state.p[K.P_X]), int(state.p[K.P_Y])
        if act is NO_ROUTE:
            _give_up(planner, state, goal, cooldown=100)
            return None
        if act is not None:
            return act
        if abs(px - x) + abs(py - y) <= 1:
            return Action.NOOP  # camp beside the plant until it ripens
        return None

    if kind == "sleep":
        # sleeping takes heavy bonus damage: never bed down in chase range
        zpos, zd = _nearest_mob(state, K.M_ZOMBIE)
        if zpos is not None and zd <= 9:
            if zd == 1:
                return _face_or_act(state, zpos[0], zpos[1], Action.DO)
            move = _flee_move(state, zpos[0], zpos[1])
            if move is not None:
                return move
            _give_up(planner, state, goal, cooldown=40)  # cornered: yield
            return None
        return Action.SLEEP

    if kind == "explore":
        goal.data["steps"] = goal.data.get("steps", 0) + 1
        if planner.explore_target is None or planner.path_goal != ("explore",):
            for _ in range(8):
                tx = planner.rng.randint(2, SIZE - 3)
                ty = planner.rng.randint(2, SIZE - 3)
                if _tile(tiles, tx, ty) in _WALKABLE:
                    planner.explore_target = (tx, ty)
                    break
        target = planner.explore_target
        if target is None:
            return Action.NOOP
        act = _navigate(state, planner, ("explore",),
                        lambda: _point_mask(target[0], target[1]), dig=True)
        if act is NO_ROUTE or act is None:
            planner.explore_target = None
            return Action.NOOP
        return act

    if kind == "wait":
        return Action.NOOP

    return None


def _has_tool(state: EnvState, slot: int) -> bool:
    if slot == 6:
        return bool(state.inv[6] or state.inv[7] or state.inv[8])
    if slot == 7:
        return bool(state.inv[7] or state.inv[8])
    return bool(state.inv[8])


def _ripe_plant(state: EnvState):
    ripe_steps = int(state.pack.ci[K.CI_PLANT_RIPE])
    for i in range(state.plant_arr.shape[0]):
        if state.plant_arr[i, 0] >= 0 and \
                state.step_count - int(state.plant_arr[i, 2]) >= ripe_steps:
            return (int(state.plant_arr[i, 0]), int(state.plant_arr[i, 1]))
    return None


def _any_plant(state: EnvState):
    for i in range(state.plant_arr.shape[0]):
        if state.plant_arr[i, 0] >= 0:
            return (int(state.plant_arr[i, 0]), int(state.plant_arr[i, 1]),
                    int(state.plant_arr[i, 2]))
    return None


def _do_on_adjacent_tile(state: EnvState, planner: PlannerState, wanted: set,
                         goal_key: tuple, dig: bool = False, on_fail=None):
    """Navigate next to a wanted tile, face it, then DO."""
    tiles = _tiles_bytes(state)
    fx, fy = _facing_cell(state)
    if 0 <= fx < SIZE and 0 <= fy < SIZE and _tile(tiles, fx, fy) in wanted:
        return Action.DO
    px, py = int(state.p[K.P_X]), int(state.p[K.P_Y])
    if wanted == {int(TileKind.GRASS)}:
        # grass is walkable, so facing it means stepping onto it; pick a
        # step whose follow-up facing cell is grass again, else any grass step
        fallback = None
        for dx, dy, _a in _BFS_DIRS:
            nx, ny = px + dx, py + dy
            if not (0 <= nx < SIZE and 0 <= ny < SIZE):
                continue
            if _tile(tiles, nx, ny) != int(TileKind.GRASS) \
                    or state.mobmap[nx * SIZE + ny]:
                continue
            move = _dir_toward(state, nx, ny)
            fx2, fy2 = px + 2 * dx, py + 2 * dy
            if 0 <= fx2 < SIZE and 0 <= fy2 < SIZE \
                    and _tile(tiles, fx2, fy2) == int(TileKind.GRASS):
                return move
            fallback = fallback or move
        if fallback is not None:
            return fallback
    else:
        for dx, dy, _a in _BFS_DIRS:
            nx, ny = px + dx, py + dy
            if 0 <= nx < SIZE and 0 <= ny < SIZE and _tile(tiles, nx, ny) in wanted:
                return _face_or_act(state, nx, ny, Action.DO)
    act = _navigate(state, planner, goal_key,
                    lambda: _adjacent_to_tile(state, wanted), dig)
    if act is NO_ROUTE:
        if on_fail is not None:
            on_fail()
        return None
    return act


def _step_to_make_placeable(state: EnvState, planner: PlannerState):
    """Move so that next step the facing cell accepts a placement."""
    tiles = _tiles_bytes(state)
    px, py = int(state.p[K.P_X]), int(state.p[K.P_Y])
    placeable = {int(TileKind.GRASS), int(TileKind.SAND), int(TileKind.PATH)}
    for dx, dy, _a in _BFS_DIRS:
        nx, ny = px + dx, py + dy       # cell to step into
        fx, fy = px + 2 * dx, py + 2 * dy  # cell that will be faced
        if not (0 <= nx < SIZE and 0 <= ny < SIZE and 0 <= fx < SIZE and 0 <= fy < SIZE):
            continue
        if _tile(tiles, nx, ny) in _WALKABLE and state.mobmap[nx * SIZE + ny] == 0 \
                and _tile(tiles, fx, fy) in placeable \
                and state.mobmap[fx * SIZE + fy] == 0:
            return _dir_toward(state, nx, ny)
    return None


# --- instruction planner --------------------------------------------------------

def heuristic_instruction_planner(state: EnvState, task, completed: int | None = None) -> str:
    """Caption (from the 61-caption vocabulary) for the first incomplete
    sub-task's current prerequisite. `task` is a TaskSpec, a sub-task list,
    or a built-in task id."""
    subtasks = _resolve_subtasks(task)
    idx = completed if completed is not None else _progress_guess(state, subtasks)
    if idx >= len(subtasks):
        return "stay"
    return _instruction_for(state, subtasks[idx])


def _resolve_subtasks(task) -> list:
    if isinstance(task, str):
        from .evalkit import TASKS
        if task not in TASKS:
            raise UnknownTask(task)
        return list(TASKS[task].subtasks)
    if hasattr(task, "subtasks"):
        return list(task.subtasks)
    if isinstance(task, (list, tuple)):
        return list(task)
    raise UnknownTask(repr(task))


def _progress_guess(state: EnvState, subtasks: list) -> int:
    idx = 0
    for name in subtasks:
        if _unlocked(state, name) if name in ACHIEVEMENTS else False:
            idx += 1
        else:
            break
    return idx


def _instruction_for(state: EnvState, event: str) -> str:
    inv = state.player.inventory
    has_table = _tile_exists(state, int(TileKind.TABLE))
    has_furnace = _tile_exists(state, int(TileKind.FURNACE))

    def craft_chain(tool: str, extra_wood: int = 0):
        needs = _CRAFT_NEEDS[tool]
        if not has_table:
            if inv["wood"] < needs.get("wood", 0) + 1 + extra_wood:
                return "obtain wood"
            return "place table on grass"
        for ing, count in needs.items():
            if inv[ing] < count:
                if ing == "stone" and not _has_tool(state, 6):
                    return craft_chain("wood_pickaxe")
                if ing in ("coal", "iron") and not _has_tool(state, 7 if ing == "iron" else 6):
                    return craft_chain("stone_pickaxe" if ing == "iron" else "wood_pickaxe")
                return f"obtain {ing}"
        if tool in _IRON_TOOLS and not has_furnace:
            if inv["stone"] < 1:
                return craft_chain("wood_pickaxe") if not _has_tool(state, 6) else "obtain stone"
            return "place furnace on grass"
        return f"craft {tool.replace('_', ' ')}"

    if event == "collect_wood":
        return "obtain wood"
    if event == "collect_sapling":
        return "obtain sapling"
    if event == "collect_drink":
        return "obtain drink"
    if event == "place_table":
        return "place table on grass" if inv["wood"] >= 1 else "obtain wood"
    if event == "place_furnace":
        if inv["stone"] >= 1:
            return "place furnace on grass"
        return craft_chain("wood_pickaxe") if not _has_tool(state, 6) else "obtain stone"
    if event == "place_plant":
        return "place plant on grass" if inv["sapling"] >= 1 else "obtain sapling"
    if event == "place_stone":
        if inv["stone"] >= 1:
            return "place stone on grass"
        return craft_chain("wood_pickaxe") if not _has_tool(state, 6) else "obtain stone"
    if event.startswith("make_"):
        return craft_chain(event[len("make_"):])
    if event in ("collect_stone", "collect_coal"):
        if not _has_tool(state, 6):
            return craft_chain("wood_pickaxe")
        return f"obtain {event.split('_')[1]}"
    if event == "collect_iron":
        if not _has_tool(state, 7):
            return craft_chain("stone_pickaxe")
        return "obtain iron"
    if event == "collect_diamond":
        if not _has_tool(state, 8):
            return craft_chain("iron_pickaxe")
        return "obtain diamond"
    if event == "eat_plant":
        plant = _any_plant(state)
        if plant is None:
            return "place plant on grass" if inv["sapling"] >= 1 else "obtain sapling"
        ripe_at = plant[2] + int(state.pack.ci[K.CI_PLANT_RIPE])
        return "obtain plant" if state.step_count >= ripe_at else "stay"
    if event == "eat_cow":
        return "kill cow"
    if event == "defeat_zombie":
        return "kill zombie"
    if event == "defeat_skeleton":
        return "kill skeleton"
    if event == "wake_up":
        return "go to sleep"
    raise UnknownTask(event)


class ChainedAgent:
    """Instruction-chaining controller: planner captions drive the expert
    machinery one sub-goal at a time."""

    _CAPTION_GOALS = {
        "obtain wood": Subgoal("collect", "wood"),
        "obtain stone": Subgoal("collect", "stone"),
        "obtain coal": Subgoal("collect", "coal"),
        "obtain iron": Subgoal("collect", "iron"),
        "obtain diamond": Subgoal("collect", "diamond"),
        "obtain sapling": Subgoal("collect", "sapling"),
        "obtain drink": Subgoal("drink"),
        "obtain plant": Subgoal("eat_plant"),
        "go to sleep": Subgoal("sleep"),
        "kill cow": Subgoal("attack", "cow"),
        "kill zombie": Subgoal("attack", "zombie"),
        "kill skeleton": Subgoal("attack", "skeleton"),
    }

    def __init__(self, task, seed: int = 0):
        self.task = task
        self.planner = PlannerState(rng=Stream.from_seed(seed, "expert"))
        self.completed = 0

    def observe_events(self, events, expected: str) -> None:
        if expected in events:
            self.completed += 1

    def __call__(self, state: EnvState) -> Action:
        subtasks = _resolve_subtasks(self.task)
        caption = heuristic_instruction_planner(state, subtasks,
                                                completed=self.completed)
        goal = self._goal_for(state, caption)
        if state.p[K.P_SLEEPING]:
            return Action.NOOP
        act = _threat_reflex(state, self.planner)
        if act is not None:
            return act
        if goal is None:
            return Action.NOOP
        self.planner.goal_stack = [goal]
        for _ in range(4):
            top = self.planner.goal_stack[-1]
            if _goal_done(state, self.planner, top):
                self.planner.goal_stack.pop()
                if not self.planner.goal_stack:
                    return Action.NOOP
                continue
            act = _execute(state, self.planner, top)
            if act is not None:
                return act
        return Action.NOOP

    def _goal_for(self, state: EnvState, caption: str):
        if caption == "stay":
            plant = _any_plant(state)
            if plant is not None:
                return Subgoal("eat_plant")
            return None
        if caption in self._CAPTION_GOALS:
            g = self._CAPTION_GOALS[caption]
            goal = Subgoal(g.kind, g.arg, dict(g.data))
            if goal.kind == "collect" and goal.arg != "sapling":
                # the instruction means "one more than you have now"
                goal.data["count"] = _inv(state, goal.arg) + 1
            return goal
        if caption.startswith("place "):
            return Subgoal("place", caption.split()[1])
        if caption.startswith("craft "):
            tool = caption[len("craft "):].replace(" ", "_")
            return Subgoal("craft", tool, {"count": _inv(state, tool) + 1})
        return None


# --- rollout and dataset generation ----------------------------------------------

def make_policy(name: str, seed: int = 0):
    """Built-in policies: expert, noop, random."""
    if name == "expert":
        return ExpertPolicy(seed)
    if name == "noop":
        return lambda state: Action.NOOP
    if name == "random":
        rng = Stream.from_seed(seed, "expert")
        return lambda state: Action(rng.randint(0, 16))
    raise ValueError(f"unknown policy {name!r}")


def rollout(seed, config: EnvConfig | None = None, policy=None,
            max_steps: int = 10000, record_frames: bool = False) -> Trajectory:
    """Run reset+step until done or max_steps, recording the full layout."""
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    base = seed.base if isinstance(seed, Seed) else int(seed)
    config = config or EnvConfig()
    policy = policy if policy is not None else ExpertPolicy(base)
    env = reset(base, config)
    rec = TrajectoryRecorder(max_steps, record_frames=record_frames)
    rec.record_state(env)
    survived = True
    for _ in range(max_steps):
        action = policy(env)
        r = step(env, int(action))
        rec.record_step(int(action), r.reward)
        rec.record_state(env)
        if r.done:
            survived = env.player.health > 0
            break
    return rec.finish(base, config, survived)


def _episode_filename(index: int) -> str:
    return f"ep{index:05d}.cdj"


def _run_episode(args):
    base_seed, index, out_dir, max_steps, record_frames, config_dict = args
    config = EnvConfig.from_dict(config_dict)
    seed = base_seed + index
    traj = rollout(seed, config, ExpertPolicy(seed), max_steps, record_frames)
    path = Path(out_dir) / _episode_filename(index)
    write_episode(traj, path)
    unlock_mask = int(traj.arrays["player_achievements"][-1]
                      .astype(np.int64) @ (1 << np.arange(22, dtype=np.int64)))
    return {
        "episode": index,
        "seed": seed,
        "path": _episode_filename(index),
        "length": traj.length,
        "survived": traj.survived,
        "unlock_mask": unlock_mask,
        "achievements": int(traj.arrays["player_achievements"][-1].sum()),
        "return": round(float(traj.arrays["reward"].astype(np.float64).sum()), 6),
    }


def generate_play(base_seed: int, n_episodes: int, out_dir,
                  workers: int = 1, max_steps: int = 10000,
                  record_frames: bool = False,
                  config: EnvConfig | None = None):
    """Expert demonstration dataset: one container per episode + manifest.

    Episode i uses seed base_seed + i. Partial outputs are removed if any
    episode fails. Returns the manifest path.
    """
    if n_episodes < 1:
        raise ValueError("n_episodes must be >= 1")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    config = config or EnvConfig()
    jobs = [(base_seed, i, str(out_dir), max_steps, record_frames,
             config.to_dict()) for i in range(n_episodes)]
    entries = []
    try:
        if workers > 1:
            import concurrent.futures as cf
            with cf.ProcessPoolExecutor(max_workers=workers) as pool:
                entries = list(pool.map(_run_episode, jobs))
        else:
            entries = [_run_episode(j) for j in jobs]
    except Exception:
        for i in range(n_episodes):
            p = out_dir / _episode_filename(i)
            if p.exists():
                os.unlink(p)
        raise
    manifest = out_dir / "manifest.jsonl"
    try:
        with open(manifest, "w") as fh:
            for entry in sorted(entries, key=lambda e: e["episode"]):
                fh.write(json.dumps(entry, sort_keys=True) + "\n")
    except OSError as e:
        raise IoFailure(str(e)) from e
    return manifest
