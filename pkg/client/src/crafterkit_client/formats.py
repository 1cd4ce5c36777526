"""Readers for the crafterkit dataset file formats.

Episode container layout (docs/formats.md):

    bytes 0..3    magic "CDJ1"
    bytes 4..7    u32 little-endian header length H
    bytes 8..8+H  canonical JSON header
    8+H..         packed little-endian arrays at declared offsets

The header carries schema, seed, length L, survived, the env config, and
an ordered array table [{name, dtype, shape, offset}]. Caption, goal, and
manifest datasets are JSON lines.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

MAGIC = b"CDJ1"
SCHEMA_VERSION = 1

# canonical array order with per-entry shapes; leading dim is L+1 unless
# flagged as per-action ("L"); rgb is optional
ARRAY_ORDER = (
    ("rgb", "<u1", (3, 144, 144), "L+1"),
    ("action", "<u1", (), "L"),
    ("map", "<u1", (64, 64), "L+1"),
    ("light_level", "<f4", (), "L+1"),
    ("plants_position", "<i2", (10, 2), "L+1"),
    ("plants_status", "<i4", (10, 2), "L+1"),
    ("player_position", "<i2", (2,), "L+1"),
    ("player_direction", "<u1", (), "L+1"),
    ("player_stats", "<u1", (4,), "L+1"),
    ("player_counters", "<f4", (4,), "L+1"),
    ("player_sleeping", "<u1", (), "L+1"),
    ("player_inventory", "<u1", (12,), "L+1"),
    ("player_achievements", "<u1", (22,), "L+1"),
    ("mob_map", "<u1", (64, 64), "L+1"),
    ("cow_position", "<i2", (4, 2), "L+1"),
    ("cow_status", "<i2", (4, 3), "L+1"),
    ("zombie_position", "<i2", (4, 2), "L+1"),
    ("zombie_status", "<i2", (4, 3), "L+1"),
    ("skeleton_position", "<i2", (2, 2), "L+1"),
    ("skeleton_status", "<i2", (2, 3), "L+1"),
    ("arrow_position", "<i2", (4, 2), "L+1"),
    ("arrow_status", "<i2", (4, 3), "L+1"),
    ("arrow_direction", "<i1", (4, 2), "L+1"),
    ("reward", "<f4", (), "L"),
)
_SPEC = {name: (dtype, shape, lead) for name, dtype, shape, lead in ARRAY_ORDER}
_REQUIRED = tuple(n for n, *_ in ARRAY_ORDER if n != "rgb")


class MalformedContainer(Exception):
    """Episode file failed magic/header/shape validation."""


class Episode:
    """Decoded episode: header fields plus an arrays dict."""

    def __init__(self, seed, length, survived, config, arrays):
        self.seed = seed
        self.length = length
        self.survived = survived
        self.config = config
        self.arrays = arrays

    @property
    def actions(self) -> np.ndarray:
        return self.arrays["action"]

    @property
    def rewards(self) -> np.ndarray:
        return self.arrays["reward"]

    @property
    def frames(self):
        return self.arrays.get("rgb")


def read_episode(path) -> Episode:
    raw = Path(path).read_bytes()
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

    listed = [e.get("name") for e in header.get("arrays", ())]
    order = [n for n, *_ in ARRAY_ORDER if n in listed]
    if listed != order:
        raise MalformedContainer("array table out of order or unknown arrays")
    missing = [n for n in _REQUIRED if n not in listed]
    if missing:
        raise MalformedContainer(f"missing arrays: {missing}")

    payload = raw[8 + hlen:]
    arrays = {}
    offset = 0
    for entry in header["arrays"]:
        name = entry["name"]
        dtype, shape, lead = _SPEC[name]
        want = ((L + 1) if lead == "L+1" else L,) + shape
        if tuple(entry.get("shape", ())) != want:
            raise MalformedContainer(f"{name}: bad shape {entry.get('shape')}")
        if entry.get("dtype") != dtype:
            raise MalformedContainer(f"{name}: bad dtype {entry.get('dtype')!r}")
        if entry.get("offset") != offset:
            raise MalformedContainer(f"{name}: bad offset {entry.get('offset')}")
        count = int(np.prod(want, dtype=np.int64))
        nbytes = count * np.dtype(dtype).itemsize
        if offset + nbytes > len(payload):
            raise MalformedContainer(f"{name}: payload truncated")
        arrays[name] = np.frombuffer(payload, dtype=dtype, count=count,
                                     offset=offset).reshape(want)
        offset += nbytes
    if offset != len(payload):
        raise MalformedContainer("payload size mismatch")
    return Episode(seed=header["seed"], length=L, survived=header["survived"],
                   config=header["config"], arrays=arrays)


def _read_jsonl(path) -> list:
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out


def read_manifest(path) -> list:
    """Play manifest entries: episode, seed, path, length, survived, ..."""
    return _read_jsonl(path)


def read_caption_dataset(path) -> list:
    """Caption records: episode, t, rule_id, rule, category, caption,
    frame_start, frame_end."""
    return _read_jsonl(path)


def read_goal_dataset(path) -> list:
    """Relabeled chunks: episode, start, end, goal_start, goal_end
    (nulls mark unconditional chunks)."""
    return _read_jsonl(path)
