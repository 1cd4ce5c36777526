"""Environment dynamics: actions, survival, crafting, combat, mobs, rewards.

All mechanics constants live in defaults.yaml and are packed into flat
config arrays consumed by the compiled kernel; nothing tunable is hard-coded
at call sites. EnvState owns the packed arrays and exposes friendly views
(PlayerState, MobState, WorldGrid) built on demand, so the hot step loop
never touches Python objects.

A state is exclusively owned by one logical worker: step() mutates it in
place and returns it inside the StepResult. Use copy() to snapshot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from functools import lru_cache
from importlib import resources

import numpy as np
import yaml

from . import _kernel as K
from .errors import SteppedTerminal
from .rng import Seed, Stream, stream_key
from .world import (SIZE, MAX_PLANTS, PlantSlot, TileKind, WorldGrid,
                    generate_world)


class Action(IntEnum):
    NOOP = 0
    MOVE_LEFT = 1
    MOVE_RIGHT = 2
    MOVE_UP = 3
    MOVE_DOWN = 4
    DO = 5
    SLEEP = 6
    PLACE_STONE = 7
    PLACE_TABLE = 8
    PLACE_FURNACE = 9
    PLACE_PLANT = 10
    MAKE_WOOD_PICKAXE = 11
    MAKE_STONE_PICKAXE = 12
    MAKE_IRON_PICKAXE = 13
    MAKE_WOOD_SWORD = 14
    MAKE_STONE_SWORD = 15
    MAKE_IRON_SWORD = 16


ACTION_NAMES = tuple(a.name.lower() for a in Action)

ACHIEVEMENTS = (
    "collect_wood", "place_table", "eat_cow", "collect_sapling",
    "collect_drink", "make_wood_pickaxe", "make_wood_sword", "place_plant",
    "defeat_zombie", "collect_stone", "place_stone", "eat_plant",
    "defeat_skeleton", "collect_coal", "make_stone_pickaxe",
    "make_stone_sword", "wake_up", "place_furnace", "collect_iron",
    "make_iron_pickaxe", "make_iron_sword", "collect_diamond",
)

ITEMS = (
    "wood", "stone", "coal", "iron", "diamond", "sapling",
    "wood_pickaxe", "stone_pickaxe", "iron_pickaxe",
    "wood_sword", "stone_sword", "iron_sword",
)

FACINGS = ("left", "right", "up", "down")
FACING_DELTA = {"left": (-1, 0), "right": (1, 0), "up": (0, -1), "down": (0, 1)}
MOB_KINDS = (None, "cow", "zombie", "skeleton", "arrow")
MOB_CAPS = {"cow": 4, "zombie": 4, "skeleton": 2, "arrow": 4}
_MOB_SLOT_BASE = {"cow": K.COW_LO, "zombie": K.ZOMBIE_LO,
                  "skeleton": K.SKEL_LO, "arrow": K.ARROW_LO}
DEATH_CAUSES = (None, "zombie", "arrow", "lava", "starvation")

_PLACE_ORDER = ("stone", "table", "furnace", "plant")
_PLACE_RESULT = {"stone": TileKind.STONE, "table": TileKind.TABLE,
                 "furnace": TileKind.FURNACE, "plant": TileKind.PLANT}
_MAKE_ORDER = ("wood_pickaxe", "stone_pickaxe", "iron_pickaxe",
               "wood_sword", "stone_sword", "iron_sword")


def list_achievements() -> list:
    """The 22 achievement names in their fixed benchmark order."""
    return list(ACHIEVEMENTS)


@lru_cache(maxsize=1)
def load_defaults() -> dict:
    """Mechanics constants table shipped with the package."""
    text = (resources.files("crafterkit") / "defaults.yaml").read_text()
    return yaml.safe_load(text)


@dataclass(frozen=True)
class EnvConfig:
    death_penalty_enabled: bool = True
    death_penalty: float = -10.0
    health_decay_enabled: bool = True
    mobs_enabled: bool = True
    episode_limit: int = 10000

    def __post_init__(self):
        if self.episode_limit < 1:
            raise ValueError("episode_limit must be >= 1")

    def to_dict(self) -> dict:
        return {
            "death_penalty_enabled": self.death_penalty_enabled,
            "death_penalty": self.death_penalty,
            "health_decay_enabled": self.health_decay_enabled,
            "mobs_enabled": self.mobs_enabled,
            "episode_limit": self.episode_limit,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EnvConfig":
        return cls(**d)


class ConfigPack:
    """Kernel-ready arrays for one EnvConfig + defaults table."""

    __slots__ = ("ci", "cf", "light", "place_req", "place_where",
                 "make_req", "make_nearby", "make_gives", "config")

    def __init__(self, config: EnvConfig, d: dict):
        self.config = config
        ci = np.zeros(K.N_CI, dtype=np.int64)
        cf = np.zeros(K.N_CF, dtype=np.float64)
        surv, mobs, items = d["survival"], d["mobs"], d["items"]
        day = d["daynight"]

        ci[K.CI_EPISODE_LIMIT] = config.episode_limit
        ci[K.CI_DP_ON] = int(config.death_penalty_enabled)
        ci[K.CI_DP_DECIS] = round(config.death_penalty * 10)
        ci[K.CI_DECAY_ON] = int(config.health_decay_enabled)
        ci[K.CI_MOBS_ON] = int(config.mobs_enabled)
        ci[K.CI_STACK_CAP] = items["stack_cap"]
        ci[K.CI_STAT_MAX] = surv["stat_max"]
        ci[K.CI_COW_MOVE_PERIOD] = mobs["cow_move_period"]
        ci[K.CI_COW_FOOD_GAIN] = mobs["cow_food_gain"]
        ci[K.CI_ZOMBIE_DAMAGE] = mobs["zombie_damage"]
        ci[K.CI_ZOMBIE_DAMAGE_SLEEP] = mobs["zombie_damage_sleeping"]
        ci[K.CI_ZOMBIE_ATTACK_CD] = mobs["zombie_attack_cooldown"]
        ci[K.CI_ZOMBIE_CHASE] = mobs["zombie_chase_radius"]
        ci[K.CI_ZOMBIE_SPAWN_DIST] = mobs["zombie_spawn_min_dist"]
        ci[K.CI_ZOMBIE_DESPAWN_DIST] = mobs["zombie_despawn_dist"]
        ci[K.CI_SKEL_RANGE] = mobs["skeleton_range"]
        ci[K.CI_SKEL_SHOOT_CD] = mobs["skeleton_shoot_cooldown"]
        ci[K.CI_ARROW_DAMAGE] = mobs["arrow_damage"]
        ci[K.CI_SPAWN_PERIOD] = mobs["spawn_period"]
        ci[K.CI_COW_SPAWN_PERIOD] = mobs["cow_spawn_period"]
        ci[K.CI_COW_SPAWN_DIST] = mobs["cow_spawn_min_dist"]
        ci[K.CI_DMG_BASE] = d["combat"]["base_damage"]
        ci[K.CI_DMG_WOOD] = d["combat"]["wood_sword_damage"]
        ci[K.CI_DMG_STONE] = d["combat"]["stone_sword_damage"]
        ci[K.CI_DMG_IRON] = d["combat"]["iron_sword_damage"]
        ci[K.CI_PLANT_RIPE] = items["plant_ripe_steps"]
        ci[K.CI_PLANT_FOOD_GAIN] = items["plant_food_gain"]
        ci[K.CI_CRAFT_RADIUS] = d["recipes"]["craft_radius"]
        ci[K.CI_DAY_LENGTH] = d["world"]["day_length"]
        ci[K.CI_ZOMBIE_HEALTH] = mobs["zombie_health"]
        ci[K.CI_SKEL_HEALTH] = mobs["skeleton_health"]
        ci[K.CI_COW_HEALTH] = mobs["cow_health"]

        cf[K.CF_HUNGER_RATE] = surv["hunger_rate"]
        cf[K.CF_HUNGER_RATE_SLEEP] = surv["hunger_rate_sleep"]
        cf[K.CF_HUNGER_LIMIT] = surv["hunger_limit"]
        cf[K.CF_THIRST_RATE] = surv["thirst_rate"]
        cf[K.CF_THIRST_RATE_SLEEP] = surv["thirst_rate_sleep"]
        cf[K.CF_THIRST_LIMIT] = surv["thirst_limit"]
        cf[K.CF_FATIGUE_RATE] = surv["fatigue_rate"]
        cf[K.CF_FATIGUE_LIMIT] = surv["fatigue_limit"]
        cf[K.CF_FATIGUE_SLEEP_RECOVER] = surv["fatigue_sleep_recover"]
        cf[K.CF_ENERGY_REGEN_LIMIT] = surv["energy_regen_limit"]
        cf[K.CF_RECOVER_RATE] = surv["recover_rate"]
        cf[K.CF_RECOVER_RATE_SLEEP] = surv["recover_rate_sleep"]
        cf[K.CF_RECOVER_LIMIT] = surv["recover_limit"]
        cf[K.CF_STARVE_RATE] = surv["starve_rate"]
        cf[K.CF_STARVE_LIMIT] = surv["starve_limit"]
        cf[K.CF_WAKE_LIGHT] = day["wake_light"]
        cf[K.CF_NIGHT_LIGHT] = day["night_light"]
        cf[K.CF_DAY_LIGHT] = day["day_light"]
        cf[K.CF_SAPLING_PROB] = items["sapling_prob"]
        cf[K.CF_ZOMBIE_JITTER] = mobs["zombie_jitter_prob"]

        n = d["world"]["day_length"]
        offset = day["phase_offset"]
        self.light = np.array(
            [1.0 - abs(math.cos(math.pi * ((i / n + offset) % 1.0))) ** 3
             for i in range(n)], dtype=np.float64)

        place = d["recipes"]["place"]
        self.place_req = np.zeros((4, 3), dtype=np.int64)
        self.place_where = np.zeros((4, 14), dtype=np.int64)
        for row, name in enumerate(_PLACE_ORDER):
            spec = place[name]
            (item, qty), = spec["uses"].items()
            self.place_req[row, 0] = ITEMS.index(item)
            self.place_req[row, 1] = qty
            self.place_req[row, 2] = int(_PLACE_RESULT[name])
            for tname in spec["where"]:
                self.place_where[row, int(TileKind[tname.upper()])] = 1

        make = d["recipes"]["make"]
        self.make_req = np.zeros((6, 12), dtype=np.int64)
        self.make_nearby = np.zeros((6, 2), dtype=np.int64)
        self.make_gives = np.zeros(6, dtype=np.int64)
        for row, name in enumerate(_MAKE_ORDER):
            spec = make[name]
            for item, qty in spec["uses"].items():
                self.make_req[row, ITEMS.index(item)] = qty
            self.make_nearby[row, 0] = int("table" in spec["nearby"])
            self.make_nearby[row, 1] = int("furnace" in spec["nearby"])
            self.make_gives[row] = ITEMS.index(name)

        for arr in (ci, cf, self.light, self.place_req, self.place_where,
                    self.make_req, self.make_nearby, self.make_gives):
            arr.setflags(write=False)
        self.ci = ci
        self.cf = cf


@lru_cache(maxsize=32)
def _pack_for(config: EnvConfig) -> ConfigPack:
    return ConfigPack(config, load_defaults())


@dataclass
class PlayerState:
    position: tuple
    facing: str
    health: int
    food: int
    drink: int
    energy: int
    recover: float
    hunger: float
    thirst: float
    fatigue: float
    sleeping: bool
    inventory: dict


@dataclass
class MobState:
    kind: str
    position: tuple
    health: int
    cooldown: int = 0
    direction: tuple = (0, 0)


@dataclass
class StepResult:
    state: "EnvState"
    reward: float
    done: bool
    info: dict


class EnvState:
    """Full environment snapshot backed by kernel arrays."""

    __slots__ = ("tiles", "p", "f", "inv", "mob_arr", "mobmap", "plant_arr",
                 "rng", "pack", "spawn_point", "base_seed", "_out")

    def __init__(self, tiles, p, f, inv, mob_arr, mobmap, plant_arr, rng,
                 pack, spawn_point, base_seed):
        self.tiles = tiles
        self.p = p
        self.f = f
        self.inv = inv
        self.mob_arr = mob_arr
        self.mobmap = mobmap
        self.plant_arr = plant_arr
        self.rng = rng
        self.pack = pack
        self.spawn_point = spawn_point
        self.base_seed = base_seed
        self._out = np.zeros(K.N_OUT, dtype=np.int64)  # per-step scratch

    # --- views -------------------------------------------------------------

    @property
    def config(self) -> EnvConfig:
        return self.pack.config

    @property
    def step_count(self) -> int:
        return int(self.p[K.P_STEP])

    @property
    def done(self) -> bool:
        return bool(self.p[K.P_DONE])

    @property
    def death_cause(self):
        return DEATH_CAUSES[int(self.p[K.P_DEATH])]

    @property
    def light_level(self) -> float:
        return float(self.pack.light[self.step_count % len(self.pack.light)])

    @property
    def unlock_mask(self) -> int:
        return int(self.p[K.P_UNLOCK])

    @property
    def achievements(self) -> dict:
        mask = self.unlock_mask
        return {name: bool(mask >> i & 1) for i, name in enumerate(ACHIEVEMENTS)}

    @property
    def player(self) -> PlayerState:
        p, f = self.p, self.f
        return PlayerState(
            position=(int(p[K.P_X]), int(p[K.P_Y])),
            facing=FACINGS[int(p[K.P_FACING])],
            health=int(p[K.P_HEALTH]), food=int(p[K.P_FOOD]),
            drink=int(p[K.P_DRINK]), energy=int(p[K.P_ENERGY]),
            recover=float(f[K.F_RECOVER]), hunger=float(f[K.F_HUNGER]),
            thirst=float(f[K.F_THIRST]), fatigue=float(f[K.F_FATIGUE]),
            sleeping=bool(p[K.P_SLEEPING]),
            inventory={name: int(self.inv[i]) for i, name in enumerate(ITEMS)},
        )

    @property
    def mobs(self) -> list:
        out = []
        for s in range(K.N_MOB_SLOTS):
            kind = int(self.mob_arr[s, 0])
            if kind == K.M_NONE:
                continue
            d = int(self.mob_arr[s, 5])
            out.append(MobState(
                kind=MOB_KINDS[kind],
                position=(int(self.mob_arr[s, 1]), int(self.mob_arr[s, 2])),
                health=int(self.mob_arr[s, 3]),
                cooldown=int(self.mob_arr[s, 4]),
                direction=(int(K._DX[d]), int(K._DY[d])) if kind == K.M_ARROW else (0, 0),
            ))
        return out

    @property
    def grid(self) -> WorldGrid:
        slots = []
        for i in range(MAX_PLANTS):
            if self.plant_arr[i, 0] >= 0:
                slots.append(PlantSlot(
                    position=(int(self.plant_arr[i, 0]), int(self.plant_arr[i, 1])),
                    growth_timer=self.step_count - int(self.plant_arr[i, 2])))
        return WorldGrid(tiles=self.tiles.reshape(SIZE, SIZE),
                         spawn_point=self.spawn_point, plant_slots=slots)

    # --- lifecycle ----------------------------------------------------------

    def copy(self) -> "EnvState":
        return EnvState(self.tiles.copy(), self.p.copy(), self.f.copy(),
                        self.inv.copy(), self.mob_arr.copy(), self.mobmap.copy(),
                        self.plant_arr.copy(), self.rng.copy(), self.pack,
                        self.spawn_point, self.base_seed)

    def canonical_bytes(self) -> bytes:
        """Deterministic byte serialization of the full dynamic state."""
        head = (f"{self.base_seed},{self.spawn_point[0]},{self.spawn_point[1]},"
                f"{self.config.to_dict()}").encode()
        return b"|".join([
            head, self.tiles.tobytes(), self.p.tobytes(), self.f.tobytes(),
            self.inv.tobytes(), self.mob_arr.tobytes(), self.plant_arr.tobytes(),
            self.rng.tobytes(),
        ])


def _spawn_initial_mobs(state: EnvState, base_seed: int, defaults: dict) -> None:
    stream = Stream.from_seed(base_seed, "mobs")
    tiles, mobmap = state.tiles, state.mobmap
    px, py = state.spawn_point
    placed = {"cow": 0, "skeleton": 0}
    want = {"cow": defaults["mobs"]["initial_cows"],
            "skeleton": defaults["mobs"]["initial_skeletons"]}
    ground = {"cow": int(TileKind.GRASS), "skeleton": int(TileKind.DARK)}
    hp = {"cow": defaults["mobs"]["cow_health"],
          "skeleton": defaults["mobs"]["skeleton_health"]}
    kind_code = {"cow": K.M_COW, "skeleton": K.M_SKELETON}
    for kind in ("cow", "skeleton"):
        for _ in range(60):
            if placed[kind] >= want[kind]:
                break
            x = stream.randint(0, SIZE - 1)
            y = stream.randint(0, SIZE - 1)
            if abs(x - px) + abs(y - py) < 5:
                continue
            if tiles[x * SIZE + y] != ground[kind] or mobmap[x * SIZE + y] != 0:
                continue
            slot = _MOB_SLOT_BASE[kind] + placed[kind]
            state.mob_arr[slot] = (kind_code[kind], x, y, hp[kind], 0, 0)
            mobmap[x * SIZE + y] = slot + 1
            placed[kind] += 1


@lru_cache(maxsize=64)
def _world_template(base: int) -> WorldGrid:
    return generate_world(Seed(base, "terrain"))


def reset(seed, config: EnvConfig | None = None) -> EnvState:
    """Fresh episode: generated world, player at spawn with full stats."""
    base = seed.base if isinstance(seed, Seed) else int(seed)
    config = config or EnvConfig()
    pack = _pack_for(config)
    world = _world_template(base)

    tiles = np.ascontiguousarray(world.tiles).reshape(-1).copy()
    p = np.zeros(16, dtype=np.int64)
    stat_max = load_defaults()["survival"]["stat_max"]
    p[K.P_X], p[K.P_Y] = world.spawn_point
    p[K.P_FACING] = 3  # down
    p[K.P_HEALTH] = p[K.P_FOOD] = p[K.P_DRINK] = p[K.P_ENERGY] = stat_max
    f = np.zeros(4, dtype=np.float64)
    inv = np.zeros(12, dtype=np.int64)
    mob_arr = np.zeros((K.N_MOB_SLOTS, 6), dtype=np.int64)
    mobmap = np.zeros(SIZE * SIZE, dtype=np.int16)
    plant_arr = np.full((MAX_PLANTS, 3), -1, dtype=np.int64)
    rng = np.array([stream_key(base, "episode"), 0], dtype=np.uint64)

    state = EnvState(tiles, p, f, inv, mob_arr, mobmap, plant_arr, rng,
                     pack, world.spawn_point, base)
    if config.mobs_enabled:
        _spawn_initial_mobs(state, base, load_defaults())
    return state


_EMPTY = ()
_ACTION_BY_ID = tuple(Action)
_ATTACKER_NAMES = {2: ("zombie",), 4: ("arrow",), 6: ("zombie", "arrow")}


def step(state: EnvState, action) -> StepResult:
    """Advance one timestep. Mutates `state` and returns it in the result."""
    p = state.p
    if p[K.P_DONE]:
        raise SteppedTerminal("episode already ended")
    prev_mask = int(p[K.P_UNLOCK])
    pack = state.pack
    out = state._out
    K.step_kernel(state.tiles, p, state.f, state.inv, state.mob_arr,
                  state.mobmap, state.plant_arr, state.rng,
                  pack.ci, pack.cf, pack.light,
                  pack.place_req, pack.place_where,
                  pack.make_req, pack.make_nearby, pack.make_gives,
                  int(action), out)
    res = out.tolist()
    reward_decis, eff, events, damage, attacker = res[0], res[1], res[2], res[3], res[4]
    done = bool(p[K.P_DONE])
    if events:
        new_bits = int(p[K.P_UNLOCK]) & ~prev_mask
        unlocked = _EMPTY if new_bits == 0 else tuple(
            name for i, name in enumerate(ACHIEVEMENTS) if new_bits >> i & 1)
        event_names = tuple(
            name for i, name in enumerate(ACHIEVEMENTS) if events >> i & 1)
    else:
        unlocked = event_names = _EMPTY
    info = {
        "unlocked": unlocked,
        "events": event_names,
        "effective_action": _ACTION_BY_ID[eff],
        "reward_tenths": reward_decis,
        "damage_taken": damage,
        "attackers": _ATTACKER_NAMES[attacker] if attacker else _EMPTY,
        "death_cause": state.death_cause if done else None,
    }
    return StepResult(state, reward_decis / 10.0, done, info)


def compute_reward(prev: EnvState, next_state: EnvState,
                   config: EnvConfig | None = None) -> float:
    """Reward for the prev -> next transition, recomputed from snapshots.

    Matches step() exactly: +1 per new unlock, +-0.1 per health point,
    death penalty once on the step health reaches zero.
    """
    config = config or next_state.config
    new_bits = next_state.unlock_mask & ~prev.unlock_mask
    decis = 10 * new_bits.bit_count()
    ph = int(prev.p[K.P_HEALTH])
    nh = int(next_state.p[K.P_HEALTH])
    decis += nh - ph
    if nh == 0 and ph > 0 and next_state.done and config.death_penalty_enabled:
        decis += round(config.death_penalty * 10)
    return decis / 10.0


def _facing_target(state: EnvState):
    dx, dy = FACING_DELTA[FACINGS[int(state.p[K.P_FACING])]]
    x = int(state.p[K.P_X]) + dx
    y = int(state.p[K.P_Y]) + dy
    if 0 <= x < SIZE and 0 <= y < SIZE:
        return x, y
    return None


def legal_effective_action(state: EnvState, action) -> Action:
    """The action that would actually take effect, without stepping.

    Mirrors the kernel's legality rules; a property test keeps the two in
    lock-step. Movement always takes effect (a blocked move still turns).
    """
    action = Action(action)
    if state.p[K.P_SLEEPING]:
        return Action.NOOP
    if action == Action.NOOP or action.value in (1, 2, 3, 4):
        return action
    if action == Action.SLEEP:
        return action

    pack = state.pack
    if action == Action.DO:
        tgt = _facing_target(state)
        if tgt is None:
            return Action.NOOP
        x, y = tgt
        m = int(state.mobmap[x * SIZE + y])
        if m > 0 and int(state.mob_arr[m - 1, 0]) != K.M_ARROW:
            return action
        t = int(state.tiles[x * SIZE + y])
        inv = state.inv
        has_pick = inv[K.I_WOOD_PICK] > 0 or inv[K.I_STONE_PICK] > 0 or inv[K.I_IRON_PICK] > 0
        if t in (int(TileKind.TREE), int(TileKind.WATER), int(TileKind.GRASS)):
            return action
        if t in (int(TileKind.STONE), int(TileKind.COAL_ORE)) and has_pick:
            return action
        if t == int(TileKind.IRON_ORE) and (inv[K.I_STONE_PICK] > 0 or inv[K.I_IRON_PICK] > 0):
            return action
        if t == int(TileKind.DIAMOND_ORE) and inv[K.I_IRON_PICK] > 0:
            return action
        if t == int(TileKind.PLANT):
            return action
        return Action.NOOP

    if action.value in (7, 8, 9, 10):
        row = action.value - 7
        item = int(pack.place_req[row, 0])
        if state.inv[item] < int(pack.place_req[row, 1]):
            return Action.NOOP
        tgt = _facing_target(state)
        if tgt is None:
            return Action.NOOP
        x, y = tgt
        if state.mobmap[x * SIZE + y] != 0:
            return Action.NOOP
        if not pack.place_where[row, int(state.tiles[x * SIZE + y])]:
            return Action.NOOP
        if row == 3 and not (state.plant_arr[:, 0] < 0).any():
            return Action.NOOP
        return action

    row = action.value - 11
    if (state.inv < pack.make_req[row]).any():
        return Action.NOOP
    px, py = int(state.p[K.P_X]), int(state.p[K.P_Y])
    r = int(pack.ci[K.CI_CRAFT_RADIUS])
    tiles2d = state.tiles.reshape(SIZE, SIZE)
    window = tiles2d[max(0, px - r):px + r + 1, max(0, py - r):py + r + 1]
    if pack.make_nearby[row, 0] and not (window == int(TileKind.TABLE)).any():
        return Action.NOOP
    if pack.make_nearby[row, 1] and not (window == int(TileKind.FURNACE)).any():
        return Action.NOOP
    return action


def make_state(tiles=None, player_pos=None, facing="down", health=9, food=9,
               drink=9, energy=9, sleeping=False, inventory=None, mobs=None,
               plants=None, step_count=0, unlock_mask=0, config=None,
               base_seed=0) -> EnvState:
    """Hand-built state for scenario construction (tests, golden captions).

    tiles: (64, 64) array-like of tile ids, defaults to all grass.
    mobs: iterable of (kind, x, y) or (kind, x, y, health) or MobState.
    plants: iterable of (x, y, planted_step); the tile is set to plant.
    """
    config = config or EnvConfig()
    pack = _pack_for(config)
    if tiles is None:
        arr = np.full((SIZE, SIZE), int(TileKind.GRASS), dtype=np.int8)
    else:
        arr = np.asarray(tiles, dtype=np.int8).copy()
        if arr.shape != (SIZE, SIZE):
            raise ValueError("tiles must be 64x64")
    flat = np.ascontiguousarray(arr).reshape(-1)

    p = np.zeros(16, dtype=np.int64)
    pos = player_pos or (SIZE // 2, SIZE // 2)
    p[K.P_X], p[K.P_Y] = pos
    p[K.P_FACING] = FACINGS.index(facing)
    p[K.P_HEALTH], p[K.P_FOOD], p[K.P_DRINK], p[K.P_ENERGY] = health, food, drink, energy
    p[K.P_SLEEPING] = int(sleeping)
    p[K.P_STEP] = step_count
    p[K.P_UNLOCK] = unlock_mask
    f = np.zeros(4, dtype=np.float64)
    inv = np.zeros(12, dtype=np.int64)
    for name, count in (inventory or {}).items():
        inv[ITEMS.index(name)] = count

    mob_arr = np.zeros((K.N_MOB_SLOTS, 6), dtype=np.int64)
    mobmap = np.zeros(SIZE * SIZE, dtype=np.int16)
    used = {"cow": 0, "zombie": 0, "skeleton": 0, "arrow": 0}
    default_hp = {"cow": 3, "zombie": 5, "skeleton": 3, "arrow": 1}
    dir_code = {( -1, 0): 0, (1, 0): 1, (0, -1): 2, (0, 1): 3}
    for mob in (mobs or ()):
        if isinstance(mob, MobState):
            kind, (x, y), hp, direction = mob.kind, mob.position, mob.health, mob.direction
        else:
            kind, x, y = mob[0], mob[1], mob[2]
            hp = mob[3] if len(mob) > 3 else default_hp[mob[0]]
            direction = mob[4] if len(mob) > 4 else (0, 1)
        if used[kind] >= MOB_CAPS[kind]:
            raise ValueError(f"too many {kind}s (cap {MOB_CAPS[kind]})")
        slot = _MOB_SLOT_BASE[kind] + used[kind]
        used[kind] += 1
        d = dir_code.get(tuple(direction), 3) if kind == "arrow" else 0
        mob_arr[slot] = (MOB_KINDS.index(kind), x, y, hp, 0, d)
        mobmap[x * SIZE + y] = slot + 1

    plant_arr = np.full((MAX_PLANTS, 3), -1, dtype=np.int64)
    for i, (x, y, planted) in enumerate(plants or ()):
        plant_arr[i] = (x, y, planted)
        flat[x * SIZE + y] = int(TileKind.PLANT)

    rng = np.array([stream_key(base_seed, "episode"), 0], dtype=np.uint64)
    return EnvState(flat, p, f, inv, mob_arr, mobmap, plant_arr, rng,
                    pack, pos, base_seed)
