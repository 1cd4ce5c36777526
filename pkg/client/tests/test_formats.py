import hashlib
import json

import numpy as np
import pytest

from crafterkit_client import (MalformedContainer, read_caption_dataset,
                               read_episode, read_goal_dataset, read_manifest)


def test_episode_against_checksums(fixtures_dir):
    """Decode the fixture corpus and match the recorded per-array digests."""
    sums = json.loads((fixtures_dir / "checksums.json").read_text())
    for name, expected in sums["episodes"].items():
        ep = read_episode(fixtures_dir / name)
        assert ep.length == expected["length"]
        assert ep.seed == expected["seed"]
        assert ep.survived == expected["survived"]
        assert set(ep.arrays) == set(expected["arrays"])
        for arr_name, meta in expected["arrays"].items():
            arr = ep.arrays[arr_name]
            assert list(arr.shape) == meta["shape"], arr_name
            assert str(arr.dtype) == meta["dtype"], arr_name
            digest = hashlib.sha256(
                np.ascontiguousarray(arr).tobytes()).hexdigest()
            assert digest == meta["sha256"], arr_name


def test_framed_episode_shapes(fixtures_dir):
    ep = read_episode(fixtures_dir / "episode_framed.cdj")
    L = ep.length
    assert ep.frames.shape == (L + 1, 3, 144, 144)
    assert ep.actions.shape == (L,)
    assert ep.arrays["map"].shape == (L + 1, 64, 64)
    assert ep.arrays["player_inventory"].shape == (L + 1, 12)
    assert ep.arrays["player_achievements"].shape == (L + 1, 22)


def test_parity_with_reference_reader(fixtures_dir):
    """Byte-level agreement with the reference implementation's reader."""
    ref = pytest.importorskip("crafterkit.datakit")
    for name in ("episode_framed.cdj", "play/ep00000.cdj"):
        ours = read_episode(fixtures_dir / name)
        theirs = ref.read_episode(fixtures_dir / name)
        assert ours.length == theirs.length
        assert set(ours.arrays) == set(theirs.arrays)
        for arr_name in ours.arrays:
            a = ours.arrays[arr_name]
            b = theirs.arrays[arr_name]
            assert a.shape == b.shape and a.dtype == b.dtype, arr_name
            assert a.tobytes() == b.tobytes(), arr_name


def test_malformed_rejected(fixtures_dir, tmp_path):
    raw = bytearray((fixtures_dir / "play/ep00000.cdj").read_bytes())
    bad = tmp_path / "bad.cdj"

    bad.write_bytes(b"NOPE" + bytes(raw[4:]))
    with pytest.raises(MalformedContainer):
        read_episode(bad)

    bad.write_bytes(bytes(raw[: len(raw) // 3]))
    with pytest.raises(MalformedContainer):
        read_episode(bad)

    hlen = int.from_bytes(raw[4:8], "little")
    header = json.loads(raw[8:8 + hlen].decode())
    header["arrays"][0]["dtype"] = "<f8"
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    bad.write_bytes(bytes(raw[:4]) + len(blob).to_bytes(4, "little")
                    + blob + bytes(raw[8 + hlen:]))
    with pytest.raises(MalformedContainer):
        read_episode(bad)


def test_goal_dataset_reader(fixtures_dir):
    chunks = read_goal_dataset(fixtures_dir / "goals.jsonl")
    manifest = read_manifest(fixtures_dir / "play/manifest.jsonl")
    episodes = {e["episode"]: e for e in manifest}
    assert chunks
    by_episode = {}
    for c in chunks:
        assert c["episode"] in episodes
        assert 0 <= c["start"] <= c["end"] < episodes[c["episode"]]["length"]
        null = c["goal_start"] is None
        assert null == (c["goal_end"] is None)
        if not null:
            assert c["goal_end"] == c["end"] + 1
        by_episode.setdefault(c["episode"], []).append(c)
    for ep, cs in by_episode.items():
        cs = sorted(cs, key=lambda c: c["start"])
        for a, b in zip(cs, cs[1:]):
            assert a["end"] < b["start"]


def test_caption_dataset_reader(fixtures_dir):
    records = read_caption_dataset(fixtures_dir / "captions.jsonl")
    assert records
    for r in records:
        assert isinstance(r["episode_id"], int)
        assert r["frame_end"] == r["t"] + 1
        assert 2 <= r["frame_end"] - r["frame_start"] + 1 <= 6
        assert r["category"] in ("achievement", "movement", "construction",
                                 "combat")
        assert isinstance(r["caption"], str) and r["caption"]
