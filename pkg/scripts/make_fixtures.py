#!/usr/bin/env python3
"""Regenerate the cross-implementation fixture corpus under fixtures/.

Everything here is deterministic; rerunning must be a no-op diff. The
fixtures let independent readers and bridge clients verify conformance
without importing this package.
"""

import hashlib
import json
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from crafterkit.caption import generate_caption_dataset
from crafterkit.datakit import RelabelConfig, export_goal_dataset, read_episode
from crafterkit.expert import generate_play, rollout, ExpertPolicy
from crafterkit.datakit import write_episode
from crafterkit.mechanics import EnvConfig, reset, step

FIX = ROOT / "fixtures"


def sha(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def main() -> None:
    FIX.mkdir(exist_ok=True)

    # small framed episode for reader tests
    traj = rollout(123, EnvConfig(), ExpertPolicy(123), max_steps=8,
                   record_frames=True)
    write_episode(traj, FIX / "episode_framed.cdj")

    # mini play dataset -> captions -> goals
    manifest = generate_play(2000, 2, FIX / "play", max_steps=40)
    generate_caption_dataset(manifest, FIX / "captions.jsonl")
    export_goal_dataset(manifest, FIX / "captions.jsonl",
                        RelabelConfig(seed=7), FIX / "goals.jsonl")

    # bridge parity script: actions plus native rewards/done/unlocks
    script_seed = 321
    actions = [3, 3, 5, 1, 5, 2, 2, 5, 4, 5, 0, 0, 6, 1, 5, 2, 5, 3, 5, 4,
               5, 0, 5, 1, 1, 5, 2, 5, 7, 8, 11, 14, 5, 3, 5, 4, 5, 0, 5, 1]
    env = reset(script_seed)
    expected = []
    for a in actions:
        r = step(env, a)
        expected.append({"reward": r.reward, "done": r.done,
                         "unlocked": list(r.info["unlocked"]),
                         "effective_action": int(r.info["effective_action"])})
        if r.done:
            break
    (FIX / "bridge_script.json").write_text(json.dumps(
        {"seed": script_seed, "actions": actions[:len(expected)],
         "expected": expected}, indent=2, sort_keys=True) + "\n")

    # per-array digests so independent readers can verify decode exactness
    digests = {}
    for name in ("episode_framed.cdj", "play/ep00000.cdj", "play/ep00001.cdj"):
        traj = read_episode(FIX / name)
        digests[name] = {
            "length": traj.length,
            "seed": traj.seed,
            "survived": traj.survived,
            "arrays": {
                arr_name: {
                    "shape": list(arr.shape),
                    "dtype": str(arr.dtype),
                    "sha256": hashlib.sha256(
                        np.ascontiguousarray(arr).tobytes()).hexdigest(),
                }
                for arr_name, arr in traj.arrays.items()
            },
        }
    files = {name: sha(FIX / name) for name in
             ("episode_framed.cdj", "captions.jsonl", "goals.jsonl",
              "play/manifest.jsonl", "play/ep00000.cdj", "play/ep00001.cdj",
              "bridge_script.json")}
    (FIX / "checksums.json").write_text(json.dumps(
        {"files": files, "episodes": digests}, indent=2, sort_keys=True) + "\n")
    print(f"fixtures written under {FIX}")


if __name__ == "__main__":
    main()
