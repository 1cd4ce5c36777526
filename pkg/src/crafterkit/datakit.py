"""Bit-exact episode containers, noop filtering, and hindsight relabeling.

The episode container is a deliberately simple binary format so that
readers stay trivial in any language:

    bytes 0..3    magic "CDJ1"
    bytes 4..7    u32 little-endian header length H
    bytes 8..8+H  canonical JSON header (sorted keys, no spaces)
    8+H..         packed little-endian arrays, C order, at the offsets
                  the header's array table declares (relative to 8+H)

The header lists schema, seed, length, survived, the env config, and one
entry per array: {name, dtype, shape, offset}. Array order follows the
trajectory layout (rgb first when present, reward appended last). See
docs/formats.md for the byte-level walkthrough.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernel as K
from .errors import (EmptyEpisode, IoFailure, MalformedContainer,
                     MismatchedInputs)
from .mechanics import ACHIEVEMENTS, EnvConfig, EnvState, reset, step
from .rng import Stream, stream_key
from .world import SIZE

MAGIC = b"CDJ1"
SCHEMA_VERSION = 1

# (name, dtype, per-entry shape, leading dim: "L+1" or "L", optional)
ARRAY_SPECS = (
    ("rgb", "<u1", (3, 144, 144), "L+1", True),
    ("action", "<u1", (), "L", False),
    ("map", "<u1", (SIZE, SIZE), "L+1", False),
    ("light_level", "<f4", (), "L+1", False),
    ("plants_position", "<i2", (10, 2), "L+1", False),
    ("plants_status", "<i4", (10, 2), "L+1", False),
    ("player_position", "<i2", (2,), "L+1", False),
    ("player_direction", "<u1", (), "L+1", False),
    ("player_stats", "<u1", (4,), "L+1", False),
    ("player_counters", "<f4", (4,), "L+1", False),
    ("player_sleeping", "<u1", (), "L+1", False),
    ("player_inventory", "<u1", (12,), "L+1", False),
    ("player_achievements", "<u1", (22,), "L+1", False),
    ("mob_map", "<u1", (SIZE, SIZE), "L+1", False),
    ("cow_position", "<i2", (4, 2), "L+1", False),
    ("cow_status", "<i2", (4, 3), "L+1", False),
    ("zombie_position", "<i2", (4, 2), "L+1", False),
    ("zombie_status", "<i2", (4, 3), "L+1", False),
    ("skeleton_position", "<i2", (2, 2), "L+1", False),
    ("skeleton_status", "<i2", (2, 3), "L+1", False),
    ("arrow_position", "<i2", (4, 2), "L+1", False),
    ("arrow_status", "<i2", (4, 3), "L+1", False),
    ("arrow_direction", "<i1", (4, 2), "L+1", False),
    ("reward", "<f4", (), "L", False),
)
_SPEC_BY_NAME = {s[0]: s for s in ARRAY_SPECS}

_MOB_SLOTS = {"cow": (K.COW_LO, K.COW_HI), "zombie": (K.ZOMBIE_LO, K.ZOMBIE_HI),
              "skeleton": (K.SKEL_LO, K.SKEL_HI), "arrow": (K.ARROW_LO, K.ARROW_HI)}


@dataclass
class Trajectory:
    """Columnar per-episode record.

    arrays holds every ARRAY_SPECS entry except that "rgb" may be absent
    when frames were not recorded. Indexing convention: state arrays have
    L+1 entries, action/reward have L.
    """

    seed: int
    config: EnvConfig
    survived: bool
    arrays: dict

    @property
    def length(self) -> int:
        return int(self.arrays["action"].shape[0])

    @property
    def actions(self) -> np.ndarray:
        return self.arrays["action"]

    @property
    def rewards(self) -> np.ndarray:
        return self.arrays["reward"]

    @property
    def frames(self):
        return self.arrays.get("rgb")

    def state_view(self, t: int) -> "StateView":
        return StateView(self, t)

    def validate(self) -> None:
        L = self.length
        for name, dtype, shape, lead, optional in ARRAY_SPECS:
            arr = self.arrays.get(name)
            if arr is None:
                if optional:
                    continue
                raise ValueError(f"missing array {name}")
            want = ((L + 1) if lead == "L+1" else L,) + shape
            if tuple(arr.shape) != want:
                raise ValueError(f"{name}: shape {arr.shape} != {want}")


class StateView:
    """Cheap per-timestep view used by caption rule checkers."""

    __slots__ = ("traj", "t")

    def __init__(self, traj: Trajectory, t: int):
        self.traj = traj
        self.t = t

    @property
    def player_pos(self):
        x, y = self.traj.arrays["player_position"][self.t]
        return int(x), int(y)

    @property
    def facing(self) -> int:
        return int(self.traj.arrays["player_direction"][self.t])

    @property
    def stats(self):
        return self.traj.arrays["player_stats"][self.t]

    @property
    def health(self) -> int:
        return int(self.stats[0])

    @property
    def sleeping(self) -> bool:
        return bool(self.traj.arrays["player_sleeping"][self.t])

    @property
    def inventory(self) -> np.ndarray:
        return self.traj.arrays["player_inventory"][self.t]

    @property
    def achievements(self) -> np.ndarray:
        return self.traj.arrays["player_achievements"][self.t]

    def tile(self, x: int, y: int) -> int:
        return int(self.traj.arrays["map"][self.t, x, y])

    def mobs(self, kind: str):
        """Live (x, y, health) tuples for one mob kind at this timestep."""
        pos = self.traj.arrays[f"{kind}_position"][self.t]
        status = self.traj.arrays[f"{kind}_status"][self.t]
        return [(int(pos[i, 0]), int(pos[i, 1]), int(status[i, 1]))
                for i in range(pos.shape[0]) if status[i, 0]]

    def arrows(self):
        """Live (x, y, dx, dy) arrow tuples."""
        pos = self.traj.arrays["arrow_position"][self.t]
        status = self.traj.arrays["arrow_status"][self.t]
        dirs = self.traj.arrays["arrow_direction"][self.t]
        return [(int(pos[i, 0]), int(pos[i, 1]), int(dirs[i, 0]), int(dirs[i, 1]))
                for i in range(pos.shape[0]) if status[i, 0]]

    def plant_grown(self, x: int, y: int):
        """Growth steps of the plant at (x, y), or None."""
        pos = self.traj.arrays["plants_position"][self.t]
        status = self.traj.arrays["plants_status"][self.t]
        for i in range(pos.shape[0]):
            if status[i, 0] and pos[i, 0] == x and pos[i, 1] == y:
                return int(status[i, 1])
        return None


def _achievement_row(mask: int) -> bytes:
    return bytes((mask >> i) & 1 for i in range(len(ACHIEVEMENTS)))


class TrajectoryRecorder:
    """Accumulates per-step rows during a rollout; preallocates for speed."""

    def __init__(self, max_steps: int, record_frames: bool):
        n = max_steps + 1
        self.record_frames = record_frames
        self.map = np.empty((n, SIZE, SIZE), dtype=np.uint8)
        self.light = np.empty(n, dtype=np.float32)
        self.plants_pos = np.empty((n, 10, 2), dtype=np.int16)
        self.plants_status = np.empty((n, 10, 2), dtype=np.int32)
        self.player_pos = np.empty((n, 2), dtype=np.int16)
        self.player_dir = np.empty(n, dtype=np.uint8)
        self.player_stats = np.empty((n, 4), dtype=np.uint8)
        self.player_counters = np.empty((n, 4), dtype=np.float32)
        self.player_sleeping = np.empty(n, dtype=np.uint8)
        self.inventory = np.empty((n, 12), dtype=np.uint8)
        self.achievements = np.empty((n, 22), dtype=np.uint8)
        self.mob_map = np.zeros((n, SIZE, SIZE), dtype=np.uint8)
        self.mob_pos = {k: np.empty((n, hi - lo, 2), dtype=np.int16)
                        for k, (lo, hi) in _MOB_SLOTS.items()}
        self.mob_status = {k: np.empty((n, hi - lo, 3), dtype=np.int16)
                           for k, (lo, hi) in _MOB_SLOTS.items()}
        self.arrow_dir = np.empty((n, 4, 2), dtype=np.int8)
        self.frames = [] if record_frames else None
        self.actions = []
        self.rewards = []
        self.t = 0

    def record_state(self, state: EnvState) -> None:
        t = self.t
        p = state.p
        self.map[t] = state.tiles.reshape(SIZE, SIZE)
        self.light[t] = state.light_level
        step_now = int(p[K.P_STEP])
        for i in range(10):
            x = int(state.plant_arr[i, 0])
            if x >= 0:
                self.plants_pos[t, i] = (x, int(state.plant_arr[i, 1]))
                self.plants_status[t, i] = (1, step_now - int(state.plant_arr[i, 2]))
            else:
                self.plants_pos[t, i] = (-1, -1)
                self.plants_status[t, i] = (0, 0)
        self.player_pos[t] = (int(p[K.P_X]), int(p[K.P_Y]))
        self.player_dir[t] = int(p[K.P_FACING])
        self.player_stats[t] = (int(p[K.P_HEALTH]), int(p[K.P_FOOD]),
                                int(p[K.P_DRINK]), int(p[K.P_ENERGY]))
        self.player_counters[t] = state.f
        self.player_sleeping[t] = int(p[K.P_SLEEPING])
        self.inventory[t] = state.inv
        self.achievements[t] = np.frombuffer(
            _achievement_row(int(p[K.P_UNLOCK])), dtype=np.uint8)
        mm = self.mob_map[t]
        for kind, (lo, hi) in _MOB_SLOTS.items():
            pos = self.mob_pos[kind][t]
            status = self.mob_status[kind][t]
            for i, s in enumerate(range(lo, hi)):
                if int(state.mob_arr[s, 0]) != K.M_NONE:
                    x, y = int(state.mob_arr[s, 1]), int(state.mob_arr[s, 2])
                    pos[i] = (x, y)
                    status[i] = (1, int(state.mob_arr[s, 3]), int(state.mob_arr[s, 4]))
                    mm[x, y] = int(state.mob_arr[s, 0])
                    if kind == "arrow":
                        d = int(state.mob_arr[s, 5])
                        self.arrow_dir[t, i] = (int(K._DX[d]), int(K._DY[d]))
                else:
                    pos[i] = (-1, -1)
                    status[i] = (0, 0, 0)
                    if kind == "arrow":
                        self.arrow_dir[t, i] = (0, 0)
        if self.record_frames:
            from .render import render
            self.frames.append(render(state).transpose(2, 0, 1).tobytes())
        self.t += 1

    def record_step(self, action: int, reward: float) -> None:
        self.actions.append(action)
        self.rewards.append(reward)

    def finish(self, seed: int, config: EnvConfig, survived: bool) -> Trajectory:
        n = self.t
        arrays = {
            "action": np.array(self.actions, dtype=np.uint8),
            "map": self.map[:n].copy(),
            "light_level": self.light[:n].copy(),
            "plants_position": self.plants_pos[:n].copy(),
            "plants_status": self.plants_status[:n].copy(),
            "player_position": self.player_pos[:n].copy(),
            "player_direction": self.player_dir[:n].copy(),
            "player_stats": self.player_stats[:n].copy(),
            "player_counters": self.player_counters[:n].copy(),
            "player_sleeping": self.player_sleeping[:n].copy(),
            "player_inventory": self.inventory[:n].copy(),
            "player_achievements": self.achievements[:n].copy(),
            "mob_map": self.mob_map[:n].copy(),
            "arrow_direction": self.arrow_dir[:n].copy(),
            "reward": np.array(self.rewards, dtype=np.float32),
        }
        for kind in _MOB_SLOTS:
            arrays[f"{kind}_position"] = self.mob_pos[kind][:n].copy()
            arrays[f"{kind}_status"] = self.mob_status[kind][:n].copy()
        if self.record_frames:
            arrays["rgb"] = np.frombuffer(b"".join(self.frames), dtype=np.uint8) \
                .reshape(n, 3, 144, 144).copy()
        traj = Trajectory(seed=seed, config=config, survived=survived, arrays=arrays)
        traj.validate()
        return traj


def trajectory_from_states(states, actions, rewards=None, frames=None,
                           seed: int = 0, config: EnvConfig | None = None,
                           survived: bool = True) -> Trajectory:
    """Build a Trajectory from explicit EnvState snapshots (test scenarios)."""
    if len(states) != len(actions) + 1:
        raise ValueError("need L+1 states for L actions")
    rec = TrajectoryRecorder(len(actions), record_frames=False)
    for s in states:
        rec.record_state(s)
    rewards = rewards if rewards is not None else [0.0] * len(actions)
    for a, r in zip(actions, rewards):
        rec.record_step(int(a), float(r))
    traj = rec.finish(seed, config or states[0].config, survived)
    if frames is not None:
        traj.arrays["rgb"] = np.asarray(frames, dtype=np.uint8)
        traj.validate()
    return traj


# --- container io -----------------------------------------------------------

def _canonical_header(traj: Trajectory) -> tuple:
    entries = []
    offset = 0
    for name, dtype, shape, lead, optional in ARRAY_SPECS:
        arr = traj.arrays.get(name)
        if arr is None:
            continue
        entries.append({"name": name, "dtype": dtype,
                        "shape": list(arr.shape), "offset": offset})
        offset += arr.nbytes
    header = {
        "schema": SCHEMA_VERSION,
        "seed": traj.seed,
        "length": traj.length,
        "survived": traj.survived,
        "config": traj.config.to_dict(),
        "arrays": entries,
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    return blob, offset


def write_episode(traj: Trajectory, path) -> None:
    """Serialize losslessly; read_episode(write_episode(t)) == t."""
    traj.validate()
    blob, total = _canonical_header(traj)
    try:
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(len(blob).to_bytes(4, "little"))
            fh.write(blob)
            for name, *_ in ARRAY_SPECS:
                arr = traj.arrays.get(name)
                if arr is not None:
                    fh.write(np.ascontiguousarray(arr).tobytes())
    except OSError as e:
        raise IoFailure(str(e)) from e


def read_episode(path) -> Trajectory:
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise IoFailure(str(e)) from e
    if len(raw) < 8 or raw[:4] != MAGIC:
        raise MalformedContainer("bad magic")
    hlen = int.from_bytes(raw[4:8], "little")
    if 8 + hlen > len(raw):
        raise MalformedContainer("truncated header")
    try:
        header = json.loads(raw[8:8 + hlen].decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise MalformedContainer(f"unparseable header: {e}") from e
    if header.get("schema") != SCHEMA_VERSION:
        raise MalformedContainer(f"unsupported schema {header.get('schema')!r}")
    L = header.get("length")
    if not isinstance(L, int) or L < 0:
        raise MalformedContainer("bad length")
    payload = raw[8 + hlen:]
    arrays = {}
    expected_offset = 0
    listed = [e.get("name") for e in header.get("arrays", [])]
    order = [s[0] for s in ARRAY_SPECS if s[0] in listed]
    if listed != order:
        raise MalformedContainer("array table out of order or unknown arrays")
    for entry in header["arrays"]:
        name = entry["name"]
        spec = _SPEC_BY_NAME.get(name)
        if spec is None:
            raise MalformedContainer(f"unknown array {name}")
        _, dtype, shape, lead, optional = spec
        want = ((L + 1) if lead == "L+1" else L,) + shape
        if tuple(entry.get("shape", ())) != want:
            raise MalformedContainer(f"{name}: shape {entry.get('shape')} != {list(want)}")
        if entry.get("dtype") != dtype:
            raise MalformedContainer(f"{name}: dtype {entry.get('dtype')!r}")
        if entry.get("offset") != expected_offset:
            raise MalformedContainer(f"{name}: offset {entry.get('offset')} != {expected_offset}")
        nbytes = int(np.dtype(dtype).itemsize * np.prod(want, dtype=np.int64))
        if expected_offset + nbytes > len(payload):
            raise MalformedContainer(f"{name}: payload truncated")
        arrays[name] = np.frombuffer(
            payload, dtype=dtype, count=int(np.prod(want, dtype=np.int64)),
            offset=expected_offset).reshape(want)
        expected_offset += nbytes
    if expected_offset != len(payload):
        raise MalformedContainer("payload size mismatch")
    missing = [s[0] for s in ARRAY_SPECS if not s[4] and s[0] not in arrays]
    if missing:
        raise MalformedContainer(f"missing arrays: {missing}")
    return Trajectory(seed=header["seed"],
                      config=EnvConfig.from_dict(header["config"]),
                      survived=header["survived"], arrays=arrays)


def replay_matches(traj: Trajectory) -> bool:
    """Re-run the stored actions from the stored seed; exact array equality."""
    env = reset(traj.seed, traj.config)
    rec = TrajectoryRecorder(traj.length, record_frames=False)
    rec.record_state(env)
    for a in traj.actions:
        r = step(env, int(a))
        rec.record_step(int(a), r.reward)
        rec.record_state(env)
    regen = rec.finish(traj.seed, traj.config, survived=not env.done
                       or env.player.health > 0)
    for name, arr in traj.arrays.items():
        if name in ("rgb",):
            continue
        if name == "reward":
            if not np.array_equal(regen.arrays[name], arr):
                return False
            continue
        if not np.array_equal(regen.arrays[name], arr):
            return False
    return True


# --- noop filtering ---------------------------------------------------------

def noop_filter(actions, threshold: int = 20) -> np.ndarray:
    """Keep mask over actions: maximal noop runs shorter than `threshold`
    are dropped; longer runs and all non-noop steps are kept."""
    if threshold < 1:
        raise ValueError("threshold must be >= 1")
    actions = np.asarray(actions)
    mask = np.ones(len(actions), dtype=bool)
    i = 0
    n = len(actions)
    while i < n:
        if actions[i] == 0:
            j = i
            while j < n and actions[j] == 0:
                j += 1
            if j - i < threshold:
                mask[i:j] = False
            i = j
        else:
            i += 1
    return mask


def mask_to_drop_runs(mask) -> list:
    """[[start, end]] inclusive runs of dropped steps, for the mask file."""
    runs = []
    i = 0
    mask = np.asarray(mask)
    while i < len(mask):
        if not mask[i]:
            j = i
            while j < len(mask) and not mask[j]:
                j += 1
            runs.append([i, j - 1])
            i = j
        else:
            i += 1
    return runs


# --- event segmentation and relabeling ---------------------------------------

@dataclass(frozen=True)
class Segment:
    start: int
    end: int          # inclusive
    label: str | None


def segment_events(records, L: int) -> list:
    """Partition [0, L) into maximal runs of identical caption labels.

    records: caption records (need .t, .rule_id, .caption) sorted by t.
    When several records share a timestep the lowest rule id wins, matching
    the rule table's category priority. Uncaptioned steps form their own
    segments with label None.
    """
    if L <= 0:
        return []
    labels = [None] * L
    best = [None] * L
    for r in records:
        t = r.t
        if not 0 <= t < L:
            continue
        if best[t] is None or r.rule_id < best[t]:
            best[t] = r.rule_id
            labels[t] = r.caption
    segments = []
    start = 0
    for t in range(1, L):
        if labels[t] != labels[t - 1]:
            segments.append(Segment(start, t - 1, labels[t - 1]))
            start = t
    segments.append(Segment(start, L - 1, labels[L - 1]))
    return segments


@dataclass(frozen=True)
class RelabelConfig:
    min_goal_steps: int = 1
    max_goal_steps: int = 10
    uncond_probability: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.min_goal_steps <= self.max_goal_steps:
            raise ValueError("need 1 <= min <= max")
        if not 0.0 <= self.uncond_probability <= 1.0:
            raise ValueError("uncond_probability in [0,1]")


@dataclass(frozen=True)
class RelabeledChunk:
    start: int
    end: int                 # inclusive; the goal timestep when conditioned
    goal_start: int | None   # 6-frame goal segment [goal_start, goal_end]
    goal_end: int | None

    @property
    def unconditional(self) -> bool:
        return self.goal_start is None


def _kept_runs(mask) -> list:
    runs = []
    i = 0
    n = len(mask)
    while i < n:
        if mask[i]:
            j = i
            while j < n and mask[j]:
                j += 1
            runs.append((i, j - 1))
            i = j
        else:
            i += 1
    return runs


def event_relabel(trajectory: Trajectory, records, cfg: RelabelConfig,
                  keep_mask=None, ignore_events: bool = False) -> list:
    """Packed hindsight relabeling with event-segment boundaries.

    Walks caption-event segments (intersected with the keep mask) in order;
    inside each, goal timesteps are drawn uniformly min..max steps ahead and
    each chunk [cursor, g] is tagged with the 6-frame goal range ending at
    g+1, or a null goal with the configured probability. Chunks never cross
    segment or mask boundaries. ignore_events drops the segment boundaries
    (the plain packed-relabeling ablation).
    """
    L = trajectory.length
    if L == 0:
        raise EmptyEpisode("cannot relabel an empty episode")
    if keep_mask is None:
        keep_mask = np.ones(L, dtype=bool)
    keep_mask = np.asarray(keep_mask, dtype=bool)
    if len(keep_mask) != L:
        raise ValueError("keep_mask length mismatch")

    if ignore_events:
        boundaries = _kept_runs(keep_mask)
    else:
        boundaries = []
        for seg in segment_events(records, L):
            for (a, b) in _kept_runs(keep_mask[seg.start:seg.end + 1]):
                boundaries.append((seg.start + a, seg.start + b))
        boundaries.sort()

    rng = Stream(stream_key(cfg.seed, "relabel", salt=trajectory.seed))
    chunks = []
    for (s0, s1) in boundaries:
        cursor = s0
        while cursor <= s1:
            lo = cursor + cfg.min_goal_steps
            hi = min(cursor + cfg.max_goal_steps, s1)
            g = rng.randint(lo, hi) if lo <= hi else s1
            null_goal = rng.random() < cfg.uncond_probability
            if null_goal:
                chunks.append(RelabeledChunk(cursor, g, None, None))
            else:
                chunks.append(RelabeledChunk(cursor, g, max(0, g - 4), g + 1))
            cursor = g + 1
    return chunks


# --- dataset assembly --------------------------------------------------------

def read_manifest(path) -> list:
    entries = []
    try:
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if line:
                    entries.append(json.loads(line))
    except OSError as e:
        raise IoFailure(str(e)) from e
    return entries


class _RecordTuple:
    __slots__ = ("t", "rule_id", "caption")

    def __init__(self, t, rule_id, caption):
        self.t = t
        self.rule_id = rule_id
        self.caption = caption


def export_goal_dataset(play_manifest, caption_dataset, cfg: RelabelConfig,
                        out_path, noop_threshold: int = 20,
                        ignore_events: bool = False) -> dict:
    """Join the play dataset with its caption dataset into relabeled chunks.

    Applies noop filtering before chunking, so masked timesteps never land
    inside a chunk. One JSONL record per chunk, grouped by episode in
    manifest order. Returns summary stats.
    """
    manifest = read_manifest(play_manifest)
    by_episode = {}
    try:
        with open(caption_dataset) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                by_episode.setdefault(rec["episode_id"], []).append(
                    _RecordTuple(rec["t"], rec["rule_id"], rec["caption"]))
    except OSError as e:
        raise IoFailure(str(e)) from e

    known = {e["episode"] for e in manifest}
    unknown = set(by_episode) - known
    if unknown:
        raise MismatchedInputs(f"caption records for unknown episodes: {sorted(unknown)}")

    manifest_dir = Path(play_manifest).parent
    stats = {"episodes": 0, "chunks": 0, "null_chunks": 0, "kept_steps": 0}
    try:
        with open(out_path, "w") as out:
            for entry in manifest:
                ep = entry["episode"]
                traj = read_episode(manifest_dir / entry["path"])
                mask = noop_filter(traj.actions, threshold=noop_threshold)
                records = sorted(by_episode.get(ep, []), key=lambda r: (r.t, r.rule_id))
                chunks = event_relabel(traj, records, cfg, keep_mask=mask,
                                       ignore_events=ignore_events)
                for c in chunks:
                    out.write(json.dumps(
                        {"episode": ep, "start": c.start, "end": c.end,
                         "goal_start": c.goal_start, "goal_end": c.goal_end},
                        sort_keys=True) + "\n")
                stats["episodes"] += 1
                stats["chunks"] += len(chunks)
                stats["null_chunks"] += sum(c.unconditional for c in chunks)
                stats["kept_steps"] += int(mask.sum())
    except OSError as e:
        raise IoFailure(str(e)) from e
    return stats
