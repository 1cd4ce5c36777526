"""Numba-compiled environment core.

The step loop has a hard throughput target (50k+ symbolic steps/second on
modest hardware), far beyond what interpreted per-step logic reaches, so
all hot-path state lives in flat numpy arrays and the transition function
is JIT-compiled. mechanics.py owns the friendly object API and is the only
caller.

Array layouts (one environment):
  grid   int8[4096]     tile ids, index = x*64 + y
  P      int64[16]      player/episode scalars (see P_* indices)
  F      float64[4]     fractional survival counters
  inv    int64[12]      inventory counts
  mobs   int64[14,6]    kind,x,y,hp,cooldown,dir; fixed slots per kind:
                        cows 0-3, zombies 4-7, skeletons 8-9, arrows 10-13
  mobmap int16[4096]    slot+1 of the mob occupying a cell, 0 if empty
  plants int64[10,3]    x,y,planted_step (x = -1 for a free slot)
  rng    uint64[2]      stream key, counter
  ci/cf  config scalars packed by mechanics.build_config
  out    int64[8]       per-step results (reward decis, effective action, ...)

The RNG is the same splitmix64 counter stream as rng.py; the two
implementations are cross-checked by tests.
"""

import numpy as np
from numba import njit

# --- tile ids (match world.TileKind) ---
T_WATER, T_SAND, T_GRASS, T_TREE, T_STONE, T_PATH = 0, 1, 2, 3, 4, 5
T_COAL, T_IRON, T_DIAMOND, T_LAVA, T_TABLE, T_FURNACE, T_PLANT, T_DARK = 6, 7, 8, 9, 10, 11, 12, 13

# --- P scalar indices ---
P_X, P_Y, P_FACING, P_HEALTH, P_FOOD, P_DRINK, P_ENERGY, P_SLEEPING = range(8)
P_STEP, P_UNLOCK, P_SLEEP_DARK, P_DONE, P_DEATH = 8, 9, 10, 11, 12

# --- F counter indices ---
F_RECOVER, F_HUNGER, F_THIRST, F_FATIGUE = range(4)

# --- inventory indices ---
I_WOOD, I_STONE, I_COAL, I_IRON, I_DIAMOND, I_SAPLING = range(6)
I_WOOD_PICK, I_STONE_PICK, I_IRON_PICK, I_WOOD_SWORD, I_STONE_SWORD, I_IRON_SWORD = range(6, 12)

# --- mob kinds and slot ranges ---
M_NONE, M_COW, M_ZOMBIE, M_SKELETON, M_ARROW = 0, 1, 2, 3, 4
COW_LO, COW_HI = 0, 4
ZOMBIE_LO, ZOMBIE_HI = 4, 8
SKEL_LO, SKEL_HI = 8, 10
ARROW_LO, ARROW_HI = 10, 14
N_MOB_SLOTS = 14

# --- achievement bit indices (order fixed by mechanics.ACHIEVEMENTS) ---
A_COLLECT_WOOD, A_PLACE_TABLE, A_EAT_COW, A_COLLECT_SAPLING = 0, 1, 2, 3
A_COLLECT_DRINK, A_MAKE_WOOD_PICK, A_MAKE_WOOD_SWORD, A_PLACE_PLANT = 4, 5, 6, 7
A_DEFEAT_ZOMBIE, A_COLLECT_STONE, A_PLACE_STONE, A_EAT_PLANT = 8, 9, 10, 11
A_DEFEAT_SKELETON, A_COLLECT_COAL, A_MAKE_STONE_PICK, A_MAKE_STONE_SWORD = 12, 13, 14, 15
A_WAKE_UP, A_PLACE_FURNACE, A_COLLECT_IRON = 16, 17, 18
A_MAKE_IRON_PICK, A_MAKE_IRON_SWORD, A_COLLECT_DIAMOND = 19, 20, 21

# --- death cause codes ---
D_NONE, D_ZOMBIE, D_ARROW, D_LAVA, D_STARVE = 0, 1, 2, 3, 4

# --- config int indices ---
CI_EPISODE_LIMIT, CI_DP_ON, CI_DP_DECIS, CI_DECAY_ON, CI_MOBS_ON = range(5)
CI_STACK_CAP, CI_STAT_MAX = 5, 6
CI_COW_MOVE_PERIOD, CI_COW_FOOD_GAIN = 7, 8
CI_ZOMBIE_DAMAGE, CI_ZOMBIE_DAMAGE_SLEEP, CI_ZOMBIE_ATTACK_CD, CI_ZOMBIE_CHASE = 9, 10, 11, 12
CI_ZOMBIE_SPAWN_DIST, CI_ZOMBIE_DESPAWN_DIST = 13, 14
CI_SKEL_RANGE, CI_SKEL_SHOOT_CD, CI_ARROW_DAMAGE = 15, 16, 17
CI_SPAWN_PERIOD, CI_COW_SPAWN_PERIOD, CI_COW_SPAWN_DIST = 18, 19, 20
CI_DMG_BASE, CI_DMG_WOOD, CI_DMG_STONE, CI_DMG_IRON = 21, 22, 23, 24
CI_PLANT_RIPE, CI_PLANT_FOOD_GAIN, CI_CRAFT_RADIUS, CI_DAY_LENGTH = 25, 26, 27, 28
CI_ZOMBIE_HEALTH, CI_SKEL_HEALTH, CI_COW_HEALTH = 29, 30, 31
N_CI = 32

# --- config float indices ---
CF_HUNGER_RATE, CF_HUNGER_RATE_SLEEP, CF_HUNGER_LIMIT = 0, 1, 2
CF_THIRST_RATE, CF_THIRST_RATE_SLEEP, CF_THIRST_LIMIT = 3, 4, 5
CF_FATIGUE_RATE, CF_FATIGUE_LIMIT, CF_FATIGUE_SLEEP_RECOVER, CF_ENERGY_REGEN_LIMIT = 6, 7, 8, 9
CF_RECOVER_RATE, CF_RECOVER_RATE_SLEEP, CF_RECOVER_LIMIT = 10, 11, 12
CF_STARVE_RATE, CF_STARVE_LIMIT = 13, 14
CF_WAKE_LIGHT, CF_NIGHT_LIGHT, CF_DAY_LIGHT = 15, 16, 17
CF_SAPLING_PROB, CF_ZOMBIE_JITTER = 18, 19
N_CF = 20

# --- out indices ---
OUT_REWARD_DECIS, OUT_EFFECTIVE, OUT_EVENTS, OUT_DAMAGE, OUT_ATTACKER = range(5)
N_OUT = 8

_DX = np.array([-1, 1, 0, 0], dtype=np.int64)
_DY = np.array([0, 0, -1, 1], dtype=np.int64)

_U = np.uint64


@njit(cache=True)
def draw_u64(rng):
    z = rng[0] + rng[1] * _U(0x9E3779B97F4A7C15)
    rng[1] += _U(1)
    z = (z ^ (z >> _U(30))) * _U(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> _U(27))) * _U(0x94D049BB133111EB)
    return z ^ (z >> _U(31))


@njit(cache=True)
def rand01(rng):
    return (draw_u64(rng) >> _U(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def _randn(rng, n):
    return np.int64(draw_u64(rng) % _U(n))


@njit(cache=True)
def _walkable(t):
    return t == T_GRASS or t == T_SAND or t == T_PATH or t == T_DARK


@njit(cache=True)
def _mob_ground(t):
    # surface mobs (cows, zombies)
    return t == T_GRASS or t == T_SAND or t == T_PATH


@njit(cache=True)
def _flyable(t):
    # arrows and skeleton line of sight
    return t == T_GRASS or t == T_SAND or t == T_PATH or t == T_DARK \
        or t == T_WATER or t == T_LAVA


@njit(cache=True)
def _event(P, out, bit):
    out[OUT_EVENTS] |= np.int64(1) << bit
    P[P_UNLOCK] |= np.int64(1) << bit


@njit(cache=True)
def _remove_mob(mobs, mobmap, s):
    mobmap[mobs[s, 1] * 64 + mobs[s, 2]] = 0
    mobs[s, 0] = M_NONE


@njit(cache=True)
def _move_mob(mobs, mobmap, s, nx, ny):
    mobmap[mobs[s, 1] * 64 + mobs[s, 2]] = 0
    mobs[s, 1] = nx
    mobs[s, 2] = ny
    mobmap[nx * 64 + ny] = s + 1


@njit(cache=True)
def _hurt_player(P, out, amount, cause):
    if P[P_SLEEPING] == 1:
        P[P_SLEEPING] = 0      # damage interrupts sleep, no wake_up credit
        P[P_SLEEP_DARK] = 0
    P[P_HEALTH] -= amount
    out[OUT_DAMAGE] += amount
    out[OUT_ATTACKER] |= np.int64(1) << cause
    if P[P_HEALTH] <= 0 and P[P_DEATH] == D_NONE:
        P[P_DEATH] = cause


@njit(cache=True)
def _sword_damage(inv, ci):
    if inv[I_IRON_SWORD] > 0:
        return ci[CI_DMG_IRON]
    if inv[I_STONE_SWORD] > 0:
        return ci[CI_DMG_STONE]
    if inv[I_WOOD_SWORD] > 0:
        return ci[CI_DMG_WOOD]
    return ci[CI_DMG_BASE]


@njit(cache=True)
def _gain(inv, item, ci):
    if inv[item] < ci[CI_STACK_CAP]:
        inv[item] += 1


@njit(cache=True)
def _nearby_station(grid, px, py, tile, radius):
    for ox in range(-radius, radius + 1):
        x = px + ox
        if x < 0 or x >= 64:
            continue
        for oy in range(-radius, radius + 1):
            y = py + oy
            if 0 <= y < 64 and grid[x * 64 + y] == tile:
                return True
    return False


@njit(cache=True)
def _plant_slot_at(plants, x, y):
    for i in range(plants.shape[0]):
        if plants[i, 0] == x and plants[i, 1] == y:
            return i
    return -1


@njit(cache=True)
def _do_action(grid, P, F, inv, mobs, mobmap, plants, rng, ci, cf, out):
    """Returns 1 if the do had a target (counts as effective), else 0."""
    px, py = P[P_X], P[P_Y]
    f = P[P_FACING]
    tx = px + _DX[f]
    ty = py + _DY[f]
    if tx < 0 or tx >= 64 or ty < 0 or ty >= 64:
        return 0
    tidx = tx * 64 + ty

    m = mobmap[tidx]
    if m > 0 and mobs[m - 1, 0] != M_ARROW:
        s = m - 1
        kind = mobs[s, 0]
        mobs[s, 3] -= _sword_damage(inv, ci)
        if mobs[s, 3] <= 0:
            _remove_mob(mobs, mobmap, s)
            if kind == M_COW:
                food = P[P_FOOD] + ci[CI_COW_FOOD_GAIN]
                P[P_FOOD] = food if food < ci[CI_STAT_MAX] else ci[CI_STAT_MAX]
                _event(P, out, A_EAT_COW)
            elif kind == M_ZOMBIE:
                _event(P, out, A_DEFEAT_ZOMBIE)
            elif kind == M_SKELETON:
                _event(P, out, A_DEFEAT_SKELETON)
        return 1

    t = grid[tidx]
    if t == T_TREE:
        _gain(inv, I_WOOD, ci)
        _event(P, out, A_COLLECT_WOOD)
        return 1
    if t == T_STONE:
        if inv[I_WOOD_PICK] > 0 or inv[I_STONE_PICK] > 0 or inv[I_IRON_PICK] > 0:
            _gain(inv, I_STONE, ci)
            grid[tidx] = T_PATH
            _event(P, out, A_COLLECT_STONE)
            return 1
        return 0
    if t == T_COAL:
        if inv[I_WOOD_PICK] > 0 or inv[I_STONE_PICK] > 0 or inv[I_IRON_PICK] > 0:
            _gain(inv, I_COAL, ci)
            grid[tidx] = T_PATH
            _event(P, out, A_COLLECT_COAL)
            return 1
        return 0
    if t == T_IRON:
        if inv[I_STONE_PICK] > 0 or inv[I_IRON_PICK] > 0:
            _gain(inv, I_IRON, ci)
            grid[tidx] = T_PATH
            _event(P, out, A_COLLECT_IRON)
            return 1
        return 0
    if t == T_DIAMOND:
        if inv[I_IRON_PICK] > 0:
            _gain(inv, I_DIAMOND, ci)
            grid[tidx] = T_PATH
            _event(P, out, A_COLLECT_DIAMOND)
            return 1
        return 0
    if t == T_WATER:
        drink = P[P_DRINK] + 1
        P[P_DRINK] = drink if drink < ci[CI_STAT_MAX] else ci[CI_STAT_MAX]
        _event(P, out, A_COLLECT_DRINK)
        return 1
    if t == T_GRASS:
        if rand01(rng) < cf[CF_SAPLING_PROB]:
            _gain(inv, I_SAPLING, ci)
            _event(P, out, A_COLLECT_SAPLING)
        return 1
    if t == T_PLANT:
        slot = _plant_slot_at(plants, tx, ty)
        if slot < 0:
            return 0
        if P[P_STEP] - plants[slot, 2] >= ci[CI_PLANT_RIPE]:
            food = P[P_FOOD] + ci[CI_PLANT_FOOD_GAIN]
            P[P_FOOD] = food if food < ci[CI_STAT_MAX] else ci[CI_STAT_MAX]
            plants[slot, 2] = P[P_STEP]   # regrows from zero
            _event(P, out, A_EAT_PLANT)
        else:
            grid[tidx] = T_GRASS          # trampled before it matured
            plants[slot, 0] = -1
            plants[slot, 1] = -1
        return 1
    return 0


@njit(cache=True)
def _place_action(grid, P, inv, mobmap, plants, ci, place_req, place_where, which, out):
    """which: 0 stone, 1 table, 2 furnace, 3 plant. Returns success flag."""
    item = place_req[which, 0]
    qty = place_req[which, 1]
    result = place_req[which, 2]
    if inv[item] < qty:
        return 0
    tx = P[P_X] + _DX[P[P_FACING]]
    ty = P[P_Y] + _DY[P[P_FACING]]
    if tx < 0 or tx >= 64 or ty < 0 or ty >= 64:
        return 0
    tidx = tx * 64 + ty
    if mobmap[tidx] != 0:
        return 0
    if place_where[which, grid[tidx]] == 0:
        return 0
    if which == 3:
        slot = -1
        for i in range(plants.shape[0]):
            if plants[i, 0] < 0:
                slot = i
                break
        if slot < 0:
            return 0
        plants[slot, 0] = tx
        plants[slot, 1] = ty
        plants[slot, 2] = P[P_STEP]
        _event(P, out, A_PLACE_PLANT)
    elif which == 0:
        _event(P, out, A_PLACE_STONE)
    elif which == 1:
        _event(P, out, A_PLACE_TABLE)
    else:
        _event(P, out, A_PLACE_FURNACE)
    inv[item] -= qty
    grid[tidx] = result
    return 1


@njit(cache=True)
def _make_action(grid, P, inv, ci, make_req, make_nearby, make_gives, which, out):
    """which: craft recipe row. Returns success flag."""
    for i in range(12):
        if inv[i] < make_req[which, i]:
            return 0
    r = ci[CI_CRAFT_RADIUS]
    if make_nearby[which, 0] == 1 and not _nearby_station(grid, P[P_X], P[P_Y], T_TABLE, r):
        return 0
    if make_nearby[which, 1] == 1 and not _nearby_station(grid, P[P_X], P[P_Y], T_FURNACE, r):
        return 0
    for i in range(12):
        inv[i] -= make_req[which, i]
    tool = make_gives[which]
    if inv[tool] < ci[CI_STACK_CAP]:
        inv[tool] += 1
    if which == 0:
        _event(P, out, A_MAKE_WOOD_PICK)
    elif which == 1:
        _event(P, out, A_MAKE_STONE_PICK)
    elif which == 2:
        _event(P, out, A_MAKE_IRON_PICK)
    elif which == 3:
        _event(P, out, A_MAKE_WOOD_SWORD)
    elif which == 4:
        _event(P, out, A_MAKE_STONE_SWORD)
    else:
        _event(P, out, A_MAKE_IRON_SWORD)
    return 1


@njit(cache=True)
def _update_cow(grid, P, mobs, mobmap, rng, ci, s):
    if (P[P_STEP] + s) % ci[CI_COW_MOVE_PERIOD] != 0:
        return
    d = _randn(rng, 4)
    nx = mobs[s, 1] + _DX[d]
    ny = mobs[s, 2] + _DY[d]
    if nx < 0 or nx >= 64 or ny < 0 or ny >= 64:
        return
    if (nx == P[P_X] and ny == P[P_Y]) or mobmap[nx * 64 + ny] != 0:
        return
    if _mob_ground(grid[nx * 64 + ny]):
        _move_mob(mobs, mobmap, s, nx, ny)


@njit(cache=True)
def _update_zombie(grid, P, mobs, mobmap, rng, ci, cf, s, out):
    px, py = P[P_X], P[P_Y]
    dx = px - mobs[s, 1]
    dy = py - mobs[s, 2]
    dist = abs(dx) + abs(dy)
    if dist == 1:
        if mobs[s, 4] <= 0:
            dmg = ci[CI_ZOMBIE_DAMAGE_SLEEP] if P[P_SLEEPING] == 1 else ci[CI_ZOMBIE_DAMAGE]
            _hurt_player(P, out, dmg, D_ZOMBIE)
            mobs[s, 4] = ci[CI_ZOMBIE_ATTACK_CD]
        else:
            mobs[s, 4] -= 1
        return
    if mobs[s, 4] > 0:
        mobs[s, 4] -= 1
    if dist <= ci[CI_ZOMBIE_CHASE]:
        if rand01(rng) < cf[CF_ZOMBIE_JITTER]:
            d = _randn(rng, 4)
            nx = mobs[s, 1] + _DX[d]
            ny = mobs[s, 2] + _DY[d]
            if 0 <= nx < 64 and 0 <= ny < 64 and not (nx == px and ny == py) \
                    and mobmap[nx * 64 + ny] == 0 and _mob_ground(grid[nx * 64 + ny]):
                _move_mob(mobs, mobmap, s, nx, ny)
            return
        # primary axis first (larger delta; ties go horizontal), then the other
        if abs(dx) >= abs(dy):
            d1 = 1 if dx > 0 else 0
            d2 = 3 if dy > 0 else 2
            second_ok = dy != 0
        else:
            d1 = 3 if dy > 0 else 2
            d2 = 1 if dx > 0 else 0
            second_ok = dx != 0
        nx = mobs[s, 1] + _DX[d1]
        ny = mobs[s, 2] + _DY[d1]
        if 0 <= nx < 64 and 0 <= ny < 64 and not (nx == px and ny == py) \
                and mobmap[nx * 64 + ny] == 0 and _mob_ground(grid[nx * 64 + ny]):
            _move_mob(mobs, mobmap, s, nx, ny)
            return
        if second_ok:
            nx = mobs[s, 1] + _DX[d2]
            ny = mobs[s, 2] + _DY[d2]
            if 0 <= nx < 64 and 0 <= ny < 64 and not (nx == px and ny == py) \
                    and mobmap[nx * 64 + ny] == 0 and _mob_ground(grid[nx * 64 + ny]):
                _move_mob(mobs, mobmap, s, nx, ny)
    elif P[P_STEP] % 4 == 0:
        d = _randn(rng, 4)
        nx = mobs[s, 1] + _DX[d]
        ny = mobs[s, 2] + _DY[d]
        if 0 <= nx < 64 and 0 <= ny < 64 and not (nx == px and ny == py) \
                and mobmap[nx * 64 + ny] == 0 and _mob_ground(grid[nx * 64 + ny]):
            _move_mob(mobs, mobmap, s, nx, ny)


@njit(cache=True)
def _update_skeleton(grid, P, mobs, mobmap, rng, ci, s):
    px, py = P[P_X], P[P_Y]
    sx, sy = mobs[s, 1], mobs[s, 2]
    dx = px - sx
    dy = py - sy
    aligned = (dx == 0) != (dy == 0)
    if mobs[s, 4] > 0:
        mobs[s, 4] -= 1
    if aligned and abs(dx) + abs(dy) <= ci[CI_SKEL_RANGE]:
        if dx == 0:
            d = 3 if dy > 0 else 2
        else:
            d = 1 if dx > 0 else 0
        clear = True
        steps = abs(dx) + abs(dy)
        cx, cy = sx, sy
        for _ in range(steps - 1):
            cx += _DX[d]
            cy += _DY[d]
            if not _flyable(grid[cx * 64 + cy]):
                clear = False
                break
        if clear and mobs[s, 4] <= 0:
            # fire from the adjacent cell toward the player
            ax = sx + _DX[d]
            ay = sy + _DY[d]
            for a in range(ARROW_LO, ARROW_HI):
                if mobs[a, 0] == M_NONE:
                    if (ax == px and ay == py) or \
                            (mobmap[ax * 64 + ay] == 0 and _flyable(grid[ax * 64 + ay])):
                        mobs[a, 0] = M_ARROW
                        mobs[a, 1] = ax
                        mobs[a, 2] = ay
                        mobs[a, 3] = 1
                        mobs[a, 4] = 0
                        mobs[a, 5] = d
                        if not (ax == px and ay == py):
                            mobmap[ax * 64 + ay] = a + 1
                    break
            mobs[s, 4] = ci[CI_SKEL_SHOOT_CD]
        return
    if (P[P_STEP] + s) % 3 == 0:
        d = _randn(rng, 4)
        nx = sx + _DX[d]
        ny = sy + _DY[d]
        if 0 <= nx < 64 and 0 <= ny < 64 and not (nx == px and ny == py) \
                and mobmap[nx * 64 + ny] == 0:
            t = grid[nx * 64 + ny]
            if t == T_PATH or t == T_DARK:
                _move_mob(mobs, mobmap, s, nx, ny)


@njit(cache=True)
def _update_arrow(grid, P, mobs, mobmap, ci, s, out):
    px, py = P[P_X], P[P_Y]
    ax, ay = mobs[s, 1], mobs[s, 2]
    if ax == px and ay == py:
        # spawned directly onto the player by a point-blank shot
        _hurt_player(P, out, ci[CI_ARROW_DAMAGE], D_ARROW)
        mobs[s, 0] = M_NONE
        return
    d = mobs[s, 5]
    nx = ax + _DX[d]
    ny = ay + _DY[d]
    if nx < 0 or nx >= 64 or ny < 0 or ny >= 64:
        _remove_mob(mobs, mobmap, s)
        return
    if nx == px and ny == py:
        _hurt_player(P, out, ci[CI_ARROW_DAMAGE], D_ARROW)
        _remove_mob(mobs, mobmap, s)
        return
    nidx = nx * 64 + ny
    hit = mobmap[nidx]
    if hit != 0:
        t = hit - 1
        mobs[t, 3] -= ci[CI_ARROW_DAMAGE]
        if mobs[t, 3] <= 0:
            _remove_mob(mobs, mobmap, t)
        _remove_mob(mobs, mobmap, s)
        return
    if _flyable(grid[nidx]):
        _move_mob(mobs, mobmap, s, nx, ny)
    else:
        _remove_mob(mobs, mobmap, s)


@njit(cache=True)
def _spawn_cycle(grid, P, mobs, mobmap, rng, ci, cf, light_now):
    px, py = P[P_X], P[P_Y]
    if light_now < cf[CF_NIGHT_LIGHT]:
        for s in range(ZOMBIE_LO, ZOMBIE_HI):
            if mobs[s, 0] == M_NONE:
                h = draw_u64(rng)
                sx = px + np.int64(h % _U(49)) - 24
                sy = py + np.int64((h >> _U(8)) % _U(49)) - 24
                if 0 <= sx < 64 and 0 <= sy < 64:
                    dist = abs(sx - px) + abs(sy - py)
                    if ci[CI_ZOMBIE_SPAWN_DIST] <= dist and dist <= 30 \
                            and mobmap[sx * 64 + sy] == 0 and _mob_ground(grid[sx * 64 + sy]):
                        mobs[s, 0] = M_ZOMBIE
                        mobs[s, 1] = sx
                        mobs[s, 2] = sy
                        mobs[s, 3] = ci[CI_ZOMBIE_HEALTH]
                        mobs[s, 4] = 0
                        mobmap[sx * 64 + sy] = s + 1
                break
    elif light_now > cf[CF_DAY_LIGHT]:
        for s in range(ZOMBIE_LO, ZOMBIE_HI):
            if mobs[s, 0] == M_ZOMBIE:
                if abs(mobs[s, 1] - px) + abs(mobs[s, 2] - py) > ci[CI_ZOMBIE_DESPAWN_DIST]:
                    _remove_mob(mobs, mobmap, s)
    for s in range(SKEL_LO, SKEL_HI):
        if mobs[s, 0] == M_NONE:
            h = draw_u64(rng)
            sx = px + np.int64(h % _U(49)) - 24
            sy = py + np.int64((h >> _U(8)) % _U(49)) - 24
            if 0 <= sx < 64 and 0 <= sy < 64 and abs(sx - px) + abs(sy - py) >= 6 \
                    and mobmap[sx * 64 + sy] == 0 and grid[sx * 64 + sy] == T_DARK:
                mobs[s, 0] = M_SKELETON
                mobs[s, 1] = sx
                mobs[s, 2] = sy
                mobs[s, 3] = ci[CI_SKEL_HEALTH]
                mobs[s, 4] = 0
                mobmap[sx * 64 + sy] = s + 1
            break
    if P[P_STEP] % ci[CI_COW_SPAWN_PERIOD] == 0:
        for s in range(COW_LO, COW_HI):
            if mobs[s, 0] == M_NONE:
                h = draw_u64(rng)
                sx = px + np.int64(h % _U(49)) - 24
                sy = py + np.int64((h >> _U(8)) % _U(49)) - 24
                if 0 <= sx < 64 and 0 <= sy < 64 \
                        and abs(sx - px) + abs(sy - py) >= ci[CI_COW_SPAWN_DIST] \
                        and mobmap[sx * 64 + sy] == 0 and grid[sx * 64 + sy] == T_GRASS:
                    mobs[s, 0] = M_COW
                    mobs[s, 1] = sx
                    mobs[s, 2] = sy
                    mobs[s, 3] = ci[CI_COW_HEALTH]
                    mobs[s, 4] = 0
                    mobmap[sx * 64 + sy] = s + 1
                break


@njit(cache=True)
def _survival_decay(P, F, cf, ci):
    sleeping = P[P_SLEEPING] == 1
    F[F_HUNGER] += cf[CF_HUNGER_RATE_SLEEP] if sleeping else cf[CF_HUNGER_RATE]
    if F[F_HUNGER] >= cf[CF_HUNGER_LIMIT]:
        F[F_HUNGER] = 0.0
        if P[P_FOOD] > 0:
            P[P_FOOD] -= 1
    F[F_THIRST] += cf[CF_THIRST_RATE_SLEEP] if sleeping else cf[CF_THIRST_RATE]
    if F[F_THIRST] >= cf[CF_THIRST_LIMIT]:
        F[F_THIRST] = 0.0
        if P[P_DRINK] > 0:
            P[P_DRINK] -= 1
    if sleeping:
        F[F_FATIGUE] -= cf[CF_FATIGUE_SLEEP_RECOVER]
        if F[F_FATIGUE] <= cf[CF_ENERGY_REGEN_LIMIT]:
            F[F_FATIGUE] = 0.0
            if P[P_ENERGY] < ci[CI_STAT_MAX]:
                P[P_ENERGY] += 1
    else:
        F[F_FATIGUE] += cf[CF_FATIGUE_RATE]
        if F[F_FATIGUE] >= cf[CF_FATIGUE_LIMIT]:
            F[F_FATIGUE] = 0.0
            if P[P_ENERGY] > 0:
                P[P_ENERGY] -= 1
    fed = P[P_FOOD] > 0
    watered = P[P_DRINK] > 0
    rested = P[P_ENERGY] > 0 or sleeping
    if fed and watered and rested:
        F[F_RECOVER] += cf[CF_RECOVER_RATE_SLEEP] if sleeping else cf[CF_RECOVER_RATE]
        if F[F_RECOVER] >= cf[CF_RECOVER_LIMIT]:
            F[F_RECOVER] = 0.0
            if P[P_HEALTH] < ci[CI_STAT_MAX] and P[P_HEALTH] > 0:
                P[P_HEALTH] += 1
    else:
        F[F_RECOVER] -= cf[CF_STARVE_RATE]
        if F[F_RECOVER] <= cf[CF_STARVE_LIMIT]:
            F[F_RECOVER] = 0.0
            P[P_HEALTH] -= 1
            if P[P_HEALTH] <= 0 and P[P_DEATH] == D_NONE:
                P[P_DEATH] = D_STARVE


@njit(cache=True)
def bfs_parents(grid, mobmap, passable, target, sx, sy, parent):
    """Breadth-first search over the tile grid.

    passable: uint8[16] lookup by tile id; target: uint8[4096] goal mask;
    parent: int32[4096] scratch, filled with predecessor indices (-2 start,
    -1 unvisited). Mob-occupied cells block. Neighbor order: up, down,
    left, right. Returns the first target index reached, or -1.
    """
    for i in range(4096):
        parent[i] = -1
    start = sx * 64 + sy
    parent[start] = -2
    if target[start] == 1:
        return start
    queue = np.empty(4096, dtype=np.int32)
    queue[0] = start
    head = 0
    tail = 1
    while head < tail:
        cur = queue[head]
        head += 1
        cx = cur // 64
        cy = cur - cx * 64
        for k in range(4):
            if k == 0:
                nx, ny = cx, cy - 1
            elif k == 1:
                nx, ny = cx, cy + 1
            elif k == 2:
                nx, ny = cx - 1, cy
            else:
                nx, ny = cx + 1, cy
            if nx < 0 or nx >= 64 or ny < 0 or ny >= 64:
                continue
            idx = nx * 64 + ny
            if parent[idx] != -1:
                continue
            if passable[grid[idx]] == 0 or mobmap[idx] != 0:
                continue
            parent[idx] = cur
            if target[idx] == 1:
                return idx
            queue[tail] = idx
            tail += 1
    return -1


@njit(cache=True)
def step_kernel(grid, P, F, inv, mobs, mobmap, plants, rng, ci, cf, light,
                place_req, place_where, make_req, make_nearby, make_gives,
                action, out):
    for i in range(N_OUT):
        out[i] = 0
    prev_mask = P[P_UNLOCK]
    prev_health = P[P_HEALTH]

    eff = action
    if P[P_SLEEPING] == 1:
        eff = 0

    # --- action phase ---
    if 1 <= eff <= 4:
        f = eff - 1
        P[P_FACING] = f
        nx = P[P_X] + _DX[f]
        ny = P[P_Y] + _DY[f]
        if 0 <= nx < 64 and 0 <= ny < 64 and mobmap[nx * 64 + ny] == 0:
            t = grid[nx * 64 + ny]
            if _walkable(t):
                P[P_X] = nx
                P[P_Y] = ny
            elif t == T_LAVA and ci[CI_DECAY_ON] == 1:
                P[P_X] = nx
                P[P_Y] = ny
                P[P_HEALTH] = 0
                P[P_DEATH] = D_LAVA
    elif eff == 5:
        if _do_action(grid, P, F, inv, mobs, mobmap, plants, rng, ci, cf, out) == 0:
            eff = 0
    elif eff == 6:
        P[P_SLEEPING] = 1
        lt = light[P[P_STEP] % ci[CI_DAY_LENGTH]]
        P[P_SLEEP_DARK] = 1 if lt < cf[CF_WAKE_LIGHT] else 0
    elif 7 <= eff <= 10:
        if _place_action(grid, P, inv, mobmap, plants, ci,
                         place_req, place_where, eff - 7, out) == 0:
            eff = 0
    elif 11 <= eff <= 16:
        if _make_action(grid, P, inv, ci, make_req, make_nearby, make_gives,
                        eff - 11, out) == 0:
            eff = 0

    # --- world dynamics ---
    if ci[CI_MOBS_ON] == 1:
        for s in range(COW_LO, COW_HI):
            if mobs[s, 0] == M_COW:
                _update_cow(grid, P, mobs, mobmap, rng, ci, s)
        for s in range(ZOMBIE_LO, ZOMBIE_HI):
            if mobs[s, 0] == M_ZOMBIE:
                _update_zombie(grid, P, mobs, mobmap, rng, ci, cf, s, out)
        for s in range(SKEL_LO, SKEL_HI):
            if mobs[s, 0] == M_SKELETON:
                _update_skeleton(grid, P, mobs, mobmap, rng, ci, s)
        for s in range(ARROW_LO, ARROW_HI):
            if mobs[s, 0] == M_ARROW:
                _update_arrow(grid, P, mobs, mobmap, ci, s, out)
        if P[P_STEP] % ci[CI_SPAWN_PERIOD] == 0:
            _spawn_cycle(grid, P, mobs, mobmap, rng, ci, cf,
                         light[P[P_STEP] % ci[CI_DAY_LENGTH]])

    if ci[CI_DECAY_ON] == 1:
        _survival_decay(P, F, cf, ci)

    # --- time and wake ---
    P[P_STEP] += 1
    lt = light[P[P_STEP] % ci[CI_DAY_LENGTH]]
    if P[P_SLEEPING] == 1:
        if lt < cf[CF_WAKE_LIGHT]:
            P[P_SLEEP_DARK] = 1
        else:
            P[P_SLEEPING] = 0
            if P[P_SLEEP_DARK] == 1:
                _event(P, out, A_WAKE_UP)
            P[P_SLEEP_DARK] = 0

    # --- terminal and reward ---
    if P[P_HEALTH] <= 0:
        P[P_HEALTH] = 0
        P[P_DONE] = 1
    elif P[P_STEP] >= ci[CI_EPISODE_LIMIT]:
        P[P_DONE] = 1

    new_bits = P[P_UNLOCK] & ~prev_mask
    unlocks = 0
    b = new_bits
    while b != 0:
        unlocks += 1
        b &= b - 1
    r = 10 * unlocks + (P[P_HEALTH] - prev_health)
    if P[P_DONE] == 1 and P[P_HEALTH] == 0 and prev_health > 0 and ci[CI_DP_ON] == 1:
        r += ci[CI_DP_DECIS]
    out[OUT_REWARD_DECIS] = r
    out[OUT_EFFECTIVE] = eff
