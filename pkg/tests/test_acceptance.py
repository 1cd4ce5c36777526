"""Release acceptance criteria.

Each test enforces one acceptance criterion at its stated tolerance and
prints a PASS line with the measured numbers (run with -s to see them).
Budgets are wall-clock seconds measured on modest hardware.
"""

import itertools
import json
import math
import time

import numpy as np
import pytest

from crafterkit.caption import detect_events, list_caption_vocabulary
from crafterkit.datakit import (RelabelConfig, event_relabel, noop_filter,
                                read_episode, replay_matches, segment_events,
                                write_episode)
from crafterkit.errors import MalformedContainer
from crafterkit.evalkit import cfg_combine, crafter_score, run_task, \
    chained_agent_factory
from crafterkit.expert import ExpertPolicy, generate_play, rollout
from crafterkit.mechanics import (ACHIEVEMENTS, Action, EnvConfig, reset,
                                  step)
from crafterkit.rng import Stream

pytestmark = pytest.mark.acceptance

# independent high-precision oracle value (mpmath, 50 digits):
# exp(ln(101)/22) - 1
SINGLE_100 = 0.23340446705691514


def report(name, elapsed, budget, detail=""):
    print(f"\nPASS {name}: {elapsed:.2f}s (budget {budget}s) {detail}")


def test_metric_exactness(warm_kernel):
    t0 = time.perf_counter()
    assert crafter_score([0.0] * 22) == 0.0
    assert crafter_score([100.0] * 22) == 100.0
    got = crafter_score([0.0] * 21 + [100.0])
    assert abs(got - SINGLE_100) < 1e-12
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0
    report("metric exactness", elapsed, 1, f"single-100 -> {got!r}")


def test_reward_contract(warm_kernel):
    t0 = time.perf_counter()
    rng = Stream.from_seed(99, "expert")
    total_steps = 0
    episodes = 0
    deaths = 0
    while total_steps < 10_000:
        env = reset(rng.randint(0, 100_000))
        unlock_count = 0
        dh_gain = 0
        dh_loss = 0
        sum_decis = 0
        penalties = 0
        prev_hp = env.player.health
        prev_mask = 0
        while total_steps < 10_000:
            r = step(env, rng.randint(0, 16))
            total_steps += 1
            decis = r.info["reward_tenths"]
            sum_decis += decis
            mask = env.unlock_mask
            unlock_count += (mask ^ prev_mask).bit_count()
            hp = env.player.health
            if hp > prev_hp:
                dh_gain += hp - prev_hp
            else:
                dh_loss += prev_hp - hp
            if r.done and hp == 0 and prev_hp > 0:
                penalties += 1
            prev_hp, prev_mask = hp, mask
            if r.done:
                break
        # exact identity in integer tenths: zero tolerance
        expected = 10 * unlock_count + dh_gain - dh_loss - 100 * penalties
        assert sum_decis == expected
        assert penalties <= 1
        episodes += 1
        deaths += penalties
    elapsed = time.perf_counter() - t0
    assert elapsed < 30.0
    report("reward contract", elapsed, 30,
           f"{total_steps} steps over {episodes} episodes, {deaths} deaths")


def test_caption_rule_suite(warm_kernel):
    t0 = time.perf_counter()
    # delegated goldens: re-run the per-rule scenario tests in-process
    from test_caption import (test_golden_approach, test_golden_attacked_by,
                              test_golden_block_attack, test_golden_craft,
                              test_golden_explore, test_golden_flee,
                              test_golden_harvest, test_golden_kill,
                              test_golden_move, test_golden_place,
                              test_golden_path, test_golden_shelter_worked_example,
                              test_golden_sleep, test_golden_stay,
                              test_golden_tunnel)

    goldens = (test_golden_harvest, test_golden_place, test_golden_craft,
               test_golden_kill, test_golden_sleep, test_golden_stay,
               test_golden_move, test_golden_approach, test_golden_flee,
               test_golden_explore, test_golden_shelter_worked_example,
               test_golden_path, test_golden_tunnel, test_golden_attacked_by,
               test_golden_block_attack)
    assert len(goldens) == 15
    for fn in goldens:
        fn(True)
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0
    report("caption rule suite", elapsed, 10, "15 golden scenarios")


def test_noop_filter_property(warm_kernel):
    t0 = time.perf_counter()
    rng = Stream.from_seed(5, "relabel")
    for _ in range(10_000):
        n = rng.randint(1, 64)
        actions = [0 if rng.random() < 0.55 else rng.randint(1, 16)
                   for _ in range(n)]
        threshold = rng.randint(1, 30)
        mask = noop_filter(actions, threshold)
        for is_noop, group in itertools.groupby(
                enumerate(actions), key=lambda p: p[1] == 0):
            idx = [i for i, _ in group]
            flags = {bool(mask[i]) for i in idx}
            assert len(flags) == 1
            if is_noop and flags == {True}:
                assert len(idx) >= threshold
            if not is_noop:
                assert flags == {True}
    assert not noop_filter([0] * 19, 20).any()
    assert noop_filter([0] * 20, 20).all()
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0
    report("noop filter", elapsed, 10, "10k sequences + boundaries")


def test_relabeling(warm_kernel):
    t0 = time.perf_counter()
    cfg = RelabelConfig(min_goal_steps=1, max_goal_steps=10,
                        uncond_probability=0.1, seed=17)
    total_chunks = 0
    nulls = 0
    for seed in range(100):
        traj = rollout(seed, EnvConfig(), ExpertPolicy(seed), max_steps=800)
        records = detect_events(traj, episode_id=seed)
        mask = noop_filter(traj.actions, threshold=20)
        chunks = event_relabel(traj, records, cfg, keep_mask=mask)
        segments = segment_events(records, traj.length)
        seg_of = {}
        for si, seg in enumerate(segments):
            for t in range(seg.start, seg.end + 1):
                seg_of[t] = si

        covered = []
        for c in chunks:
            assert c.start <= c.end
            # never cross caption-event boundaries
            assert seg_of[c.start] == seg_of[c.end], (seed, c)
            offset = c.end - c.start
            assert offset <= cfg.max_goal_steps
            if offset < cfg.min_goal_steps:
                # only the clamped tail of a segment/mask run may undershoot
                assert c.end == c.start
            if not c.unconditional:
                assert c.goal_end == c.end + 1
                assert c.goal_start == max(0, c.end - 4)
            covered.extend(range(c.start, c.end + 1))
            nulls += c.unconditional
        kept = [t for t in range(traj.length) if mask[t]]
        assert sorted(covered) == kept, seed
        total_chunks += len(chunks)
    assert total_chunks >= 10_000
    p = cfg.uncond_probability
    sigma = math.sqrt(p * (1 - p) / total_chunks)
    frac = nulls / total_chunks
    assert abs(frac - p) <= 3 * sigma, (frac, sigma)
    elapsed = time.perf_counter() - t0
    assert elapsed < 120.0
    report("relabeling", elapsed, 120,
           f"{total_chunks} chunks, null fraction {frac:.4f}")


def test_determinism(tmp_path, warm_kernel):
    t0 = time.perf_counter()
    m1 = generate_play(100, 10, tmp_path / "a", max_steps=400)
    m2 = generate_play(100, 10, tmp_path / "b", max_steps=400)
    assert m1.read_text() == m2.read_text()
    for i in range(10):
        name = f"ep{i:05d}.cdj"
        assert (tmp_path / "a" / name).read_bytes() == \
            (tmp_path / "b" / name).read_bytes(), name
    for i in (0, 4, 9):
        traj = read_episode(tmp_path / "a" / f"ep{i:05d}.cdj")
        assert replay_matches(traj), i
    elapsed = time.perf_counter() - t0
    assert elapsed < 120.0
    report("determinism", elapsed, 120,
           "10 episodes byte-identical twice + exact replay")


def test_desk_scale_expert_capability(warm_kernel):
    t0 = time.perf_counter()
    distinct = set()
    for seed in range(100):
        env = reset(seed)
        policy = ExpertPolicy(seed)
        steps = 0
        while steps < 10_000:
            r = step(env, int(policy(env)))
            steps += 1
            if r.done:
                break
        distinct.update(n for n, got in env.achievements.items() if got)
        if len(distinct) == 22 and seed >= 30:
            break  # floor already proven with margin
    assert len(distinct) >= 12, sorted(distinct)

    t1 = run_task("T1", chained_agent_factory, n_episodes=50)
    assert t1["success_rate"] >= 0.8, t1["success_rate"]
    elapsed = time.perf_counter() - t0
    assert elapsed < 600.0
    report("desk-scale expert", elapsed, 600,
           f"{len(distinct)}/22 distinct, T1 {t1['success_rate'] * 100:.0f}%")


def test_throughput(warm_kernel):
    from crafterkit.cli import _measure_throughput

    t0 = time.perf_counter()
    stats = _measure_throughput()
    assert stats["steps_per_second"] >= 50_000, stats
    assert stats["frames_per_second"] >= 2_000, stats
    elapsed = time.perf_counter() - t0
    report("throughput", elapsed, 120,
           f"{stats['steps_per_second']:,.0f} steps/s, "
           f"{stats['frames_per_second']:,.0f} frames/s")


def test_format_conformance(tmp_path, warm_kernel):
    t0 = time.perf_counter()
    rng = Stream.from_seed(31, "relabel")
    base = rollout(0, EnvConfig(), ExpertPolicy(0), max_steps=12,
                   record_frames=False)
    path = tmp_path / "fz.cdj"
    mismatches = 0
    for i in range(1000):
        arrays = {}
        L = rng.randint(1, 6)
        for name, arr in base.arrays.items():
            n = L + 1 if arr.shape[0] == base.length + 1 else L
            tiled = np.tile(arr, (max(1, -(-n // arr.shape[0])),)
                            + (1,) * (arr.ndim - 1))[:n].copy()
            flat = tiled.reshape(-1)
            if flat.size and tiled.dtype.kind in "iu":
                flat[rng.randint(0, flat.size - 1)] ^= 1
            arrays[name] = tiled
        traj = type(base)(seed=i, config=base.config,
                          survived=bool(i & 1), arrays=arrays)
        write_episode(traj, path)
        back = read_episode(path)
        for name, arr in arrays.items():
            if not np.array_equal(back.arrays[name], arr):
                mismatches += 1
    assert mismatches == 0

    # corrupted headers always rejected
    good = path.read_bytes()
    rejected = 0
    cases = 0
    for corrupt in (
        b"ZZZZ" + good[4:],
        good[:40],
        good[:4] + (10 ** 8).to_bytes(4, "little") + good[8:],
        good[:8] + b"X" + good[9:],
    ):
        cases += 1
        bad = tmp_path / "bad.cdj"
        bad.write_bytes(corrupt)
        try:
            read_episode(bad)
        except MalformedContainer:
            rejected += 1
    hlen = int.from_bytes(good[4:8], "little")
    header = json.loads(good[8:8 + hlen])
    for mutate in ("shape", "dtype", "offset"):
        cases += 1
        h = json.loads(json.dumps(header))
        if mutate == "shape":
            h["arrays"][0]["shape"][0] += 1
        elif mutate == "dtype":
            h["arrays"][0]["dtype"] = "<f8"
        else:
            h["arrays"][1]["offset"] += 8
        blob = json.dumps(h, sort_keys=True, separators=(",", ":")).encode()
        bad = tmp_path / "bad.cdj"
        bad.write_bytes(good[:4] + len(blob).to_bytes(4, "little") + blob
                        + good[8 + hlen:])
        try:
            read_episode(bad)
        except MalformedContainer:
            rejected += 1
    assert rejected == cases
    elapsed = time.perf_counter() - t0
    assert elapsed < 120.0
    report("format conformance", elapsed, 120,
           f"1000 round trips exact, {rejected}/{cases} corruptions rejected")


def test_cfg_utility(warm_kernel):
    t0 = time.perf_counter()
    cond = np.array([1.0, 2.0])
    uncond = np.array([0.0, 1.0])
    assert (cfg_combine(cond, uncond, 0.0) == cond).all()
    same = np.array([3.5, -1.25, 0.0])
    for lam in (0.0, 0.7, 1.5, 3.0):
        assert (cfg_combine(same, same, lam) == same).all()
    assert (cfg_combine(cond, uncond, 1.5) == np.array([2.5, 3.5])).all()
    elapsed = time.perf_counter() - t0
    report("cfg utility", elapsed, 1, "identity, fixed point, [2.5, 3.5]")
