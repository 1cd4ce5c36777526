import numpy as np
import pytest

from crafterkit.caption import (CaptionRecord, RULES, RULE_BY_NAME,
                                detect_events, generate_caption_dataset,
                                list_caption_vocabulary, load_paraphrases,
                                render_caption, sample_caption)
from crafterkit.datakit import trajectory_from_states
from crafterkit.errors import (MalformedTable, MissingBinding, UnknownCaption)
from crafterkit.mechanics import Action, EnvConfig, make_state, step
from crafterkit.rng import Stream
from crafterkit.world import TileKind

from conftest import NO_DECAY, grass_field

MOBS_ONLY = EnvConfig(health_decay_enabled=False)


def run_scenario(state, actions):
    """Step a constructed state through actions; returns (trajectory, records)."""
    states = [state.copy()]
    for a in actions:
        step(state, a)
        states.append(state.copy())
    traj = trajectory_from_states(states, [int(a) for a in actions], seed=0)
    return traj, detect_events(traj, episode_id=0)


def find(records, rule_name):
    rid = RULE_BY_NAME[rule_name].id
    return [r for r in records if r.rule_id == rid]


# --- rule table shape ---

def test_rule_partition_5_5_3_2():
    assert len(RULES) == 15
    by_cat = {}
    for r in RULES:
        by_cat.setdefault(r.category, []).append(r)
    assert {k: len(v) for k, v in by_cat.items()} == {
        "achievement": 5, "movement": 5, "construction": 3, "combat": 2}
    assert len({r.id for r in RULES}) == 15


# --- 15 golden scenarios, one per rule ---

def test_golden_harvest(warm_kernel):
    tiles = grass_field()
    tiles[33, 32] = int(TileKind.TREE)
    s = make_state(tiles=tiles, facing="right", config=NO_DECAY)
    _, records = run_scenario(s, [Action.DO])
    (rec,) = find(records, "harvest")
    assert rec.caption == "obtain wood"
    assert (rec.frame_start, rec.frame_end) == (0, 1)


def test_golden_place(warm_kernel):
    s = make_state(inventory={"wood": 1}, facing="right", config=NO_DECAY)
    _, records = run_scenario(s, [Action.PLACE_TABLE])
    (rec,) = find(records, "place")
    assert rec.caption == "place table on grass"
    assert (rec.frame_start, rec.frame_end) == (0, 1)


def test_golden_craft(warm_kernel):
    tiles = grass_field()
    tiles[31, 32] = int(TileKind.TABLE)
    s = make_state(tiles=tiles, inventory={"wood": 1}, config=NO_DECAY)
    _, records = run_scenario(s, [Action.MAKE_WOOD_PICKAXE])
    (rec,) = find(records, "craft")
    assert rec.caption == "craft wood pickaxe"


def test_golden_kill(warm_kernel):
    s = make_state(mobs=[("cow", 33, 32)], facing="right",
                   inventory={"iron_sword": 1}, config=NO_DECAY)
    _, records = run_scenario(s, [Action.DO])
    (rec,) = find(records, "kill")
    assert rec.caption == "kill cow"
    assert (rec.frame_start, rec.frame_end) == (0, 1)


def test_golden_sleep(warm_kernel):
    s = make_state(step_count=180, config=NO_DECAY)  # night
    _, records = run_scenario(s, [Action.SLEEP])
    (rec,) = find(records, "sleep")
    assert rec.caption == "go to sleep"


def test_golden_stay(warm_kernel):
    s = make_state(config=NO_DECAY)
    _, records = run_scenario(s, [Action.NOOP] * 6)
    recs = find(records, "stay")
    assert recs[0].t == 4
    assert recs[0].caption == "stay"
    assert (recs[0].frame_start, recs[0].frame_end) == (0, 5)
    assert [r.t for r in recs] == [4, 5]


def test_golden_move(warm_kernel):
    s = make_state(config=NO_DECAY)
    _, records = run_scenario(s, [Action.MOVE_UP] * 5)
    recs = find(records, "move")
    assert recs[0].t == 4
    assert recs[0].caption == "move to north"
    assert (recs[0].frame_start, recs[0].frame_end) == (0, 5)


def test_golden_approach(warm_kernel):
    s = make_state(mobs=[("cow", 40, 32)], player_pos=(32, 32),
                   config=NO_DECAY)
    _, records = run_scenario(s, [Action.MOVE_RIGHT] * 5)
    recs = find(records, "approach")
    assert recs and recs[0].caption == "approach cow"
    assert recs[0].t == 4


def test_golden_flee(warm_kernel):
    s = make_state(mobs=[("skeleton", 36, 32)], player_pos=(32, 32),
                   config=NO_DECAY)
    _, records = run_scenario(s, [Action.MOVE_LEFT] * 5)
    recs = find(records, "flee")
    assert recs and recs[0].caption == "flee from skeleton"


def test_golden_explore(warm_kernel):
    s = make_state(config=NO_DECAY)
    moves = [Action.MOVE_RIGHT, Action.MOVE_UP, Action.MOVE_LEFT,
             Action.MOVE_UP, Action.MOVE_RIGHT]
    _, records = run_scenario(s, moves)
    recs = find(records, "explore")
    assert recs and recs[0].t == 4
    assert recs[0].caption == "go explore"


def test_golden_shelter_worked_example(warm_kernel):
    """Placement at t=10 that seals the last opening: frames [6,11]."""
    tiles = grass_field()
    tiles[31, 32] = int(TileKind.WATER)   # west
    tiles[32, 31] = int(TileKind.WATER)   # north
    tiles[32, 33] = int(TileKind.WATER)   # south; east (33,32) stays open
    s = make_state(tiles=tiles, player_pos=(32, 32), facing="right",
                   inventory={"stone": 1}, config=NO_DECAY)
    # fillers that keep facing and fire no other rule (failed crafts)
    actions = [Action.MAKE_IRON_SWORD] * 10 + [Action.PLACE_STONE]
    _, records = run_scenario(s, actions)
    (rec,) = find(records, "shelter")
    assert rec.t == 10
    assert rec.caption == "place stone to build shelter"
    assert (rec.frame_start, rec.frame_end) == (6, 11)


def test_golden_path(warm_kernel):
    tiles = grass_field()
    tiles[33, 32] = int(TileKind.WATER)
    s = make_state(tiles=tiles, facing="right", inventory={"stone": 1},
                   config=NO_DECAY)
    _, records = run_scenario(s, [Action.PLACE_STONE])
    (rec,) = find(records, "path")
    assert rec.caption == "build path over water"


def test_golden_tunnel(warm_kernel):
    tiles = grass_field()
    tiles[33, 32] = int(TileKind.STONE)
    tiles[34, 32] = int(TileKind.STONE)
    s = make_state(tiles=tiles, facing="right",
                   inventory={"wood_pickaxe": 1}, config=NO_DECAY)
    _, records = run_scenario(s, [Action.DO, Action.MOVE_RIGHT, Action.DO])
    (rec,) = find(records, "tunnel")
    assert rec.t == 2
    assert rec.caption == "dig a tunnel"
    assert (rec.frame_start, rec.frame_end) == (0, 3)  # clamped at zero


def test_golden_attacked_by(warm_kernel):
    s = make_state(mobs=[("zombie", 33, 32)], config=MOBS_ONLY)
    _, records = run_scenario(s, [Action.NOOP])
    (rec,) = find(records, "attacked_by")
    assert rec.caption == "attacked by zombie"
    assert (rec.frame_start, rec.frame_end) == (0, 1)


def test_golden_block_attack(warm_kernel):
    s = make_state(mobs=[("zombie", 34, 32)], facing="right",
                   inventory={"stone": 1}, config=MOBS_ONLY)
    _, records = run_scenario(s, [Action.PLACE_STONE])
    (rec,) = find(records, "block_attack")
    assert rec.caption == "block attack from zombie with stone"


# --- extra rule coverage ---

def test_attacked_by_skeleton_via_arrow(warm_kernel):
    s = make_state(mobs=[("arrow", 33, 32, 1, (-1, 0))], config=MOBS_ONLY)
    _, records = run_scenario(s, [Action.NOOP])
    (rec,) = find(records, "attacked_by")
    assert rec.caption == "attacked by skeleton"


def test_block_attack_from_arrow(warm_kernel):
    s = make_state(mobs=[("arrow", 36, 32, 1, (-1, 0))], facing="right",
                   inventory={"stone": 1}, config=MOBS_ONLY)
    _, records = run_scenario(s, [Action.PLACE_STONE])
    (rec,) = find(records, "block_attack")
    assert rec.caption == "block attack from arrow with stone"


def test_obtain_plant_caption(warm_kernel):
    s = make_state(plants=[(33, 32, -400)], facing="right", food=3,
                   config=NO_DECAY)
    _, records = run_scenario(s, [Action.DO])
    (rec,) = find(records, "harvest")
    assert rec.caption == "obtain plant"


def test_obtain_drink_caption(warm_kernel):
    tiles = grass_field()
    tiles[33, 32] = int(TileKind.WATER)
    s = make_state(tiles=tiles, facing="right", drink=2, config=NO_DECAY)
    _, records = run_scenario(s, [Action.DO])
    (rec,) = find(records, "harvest")
    assert rec.caption == "obtain drink"


def test_failed_actions_emit_nothing(warm_kernel):
    s = make_state(config=NO_DECAY)  # empty inventory, nothing faced
    _, records = run_scenario(s, [Action.PLACE_STONE, Action.MAKE_WOOD_SWORD,
                                  Action.DO, Action.SLEEP][:3])
    assert find(records, "place") == []
    assert find(records, "craft") == []
    assert find(records, "harvest") == []


def test_records_sorted_and_within_vocabulary(warm_kernel):
    tiles = grass_field()
    tiles[33, 32] = int(TileKind.TREE)
    s = make_state(tiles=tiles, facing="right", config=NO_DECAY,
                   inventory={"stone": 2, "wood": 1})
    acts = [Action.DO, Action.DO, Action.NOOP, Action.NOOP, Action.NOOP,
            Action.NOOP, Action.NOOP, Action.MOVE_LEFT, Action.MOVE_LEFT,
            Action.MOVE_LEFT, Action.MOVE_LEFT, Action.MOVE_LEFT]
    _, records = run_scenario(s, acts)
    vocab = set(list_caption_vocabulary())
    keys = [(r.t, r.rule_id) for r in records]
    assert keys == sorted(keys)
    for r in records:
        assert r.caption in vocab
        assert 2 <= r.frame_end - r.frame_start + 1 <= 6
        assert r.frame_end == r.t + 1


def test_detection_is_pure(warm_kernel):
    s = make_state(mobs=[("zombie", 34, 32)], config=MOBS_ONLY,
                   inventory={"stone": 3})
    traj, records = run_scenario(s, [Action.PLACE_STONE, Action.NOOP, Action.NOOP])
    again = detect_events(traj, episode_id=0)
    assert records == again


# --- templates and vocabulary ---

def test_render_caption_examples():
    assert render_caption(RULE_BY_NAME["place"],
                          {"item": "table", "material": "grass"}) == "place table on grass"
    assert render_caption(RULE_BY_NAME["block_attack"],
                          {"mob": "zombie", "item": "stone"}) == \
        "block attack from zombie with stone"
    assert render_caption(RULE_BY_NAME["sleep"], {}) == "go to sleep"
    with pytest.raises(MissingBinding):
        render_caption(RULE_BY_NAME["place"], {"item": "table"})


def test_vocabulary_is_61():
    vocab = list_caption_vocabulary()
    assert len(vocab) == 61
    assert len(set(vocab)) == 61
    assert vocab == sorted(vocab)
    for needed in ("obtain stone", "flee from skeleton", "place table on grass",
                   "craft iron sword", "attacked by skeleton", "kill cow",
                   "move to north", "approach cow", "go to sleep", "stay",
                   "go explore", "dig a tunnel", "build path over water",
                   "place stone to build shelter", "obtain plant"):
        assert needed in vocab, needed


# --- paraphrase table ---

def test_load_paraphrases_fixture():
    table = load_paraphrases("fixtures/paraphrases.yaml")
    assert "craft iron sword" in table
    assert "forging an iron sword" in table["craft iron sword"]
    assert all(v for v in table.values())


def test_load_paraphrases_rejects_bad_tables(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("not a caption at all:\n  - variant\n")
    with pytest.raises(MalformedTable):
        load_paraphrases(bad)
    bad.write_text("craft iron sword: []\n")
    with pytest.raises(MalformedTable):
        load_paraphrases(bad)
    bad.write_text("- just\n- a list\n")
    with pytest.raises(MalformedTable):
        load_paraphrases(bad)


def test_sample_caption_degenerate_n1():
    table = load_paraphrases("fixtures/paraphrases.yaml")
    for seed in range(20):
        assert sample_caption(table, "craft iron sword", 1, seed) == "craft iron sword"


def test_sample_caption_unknown_base():
    table = load_paraphrases("fixtures/paraphrases.yaml")
    with pytest.raises(UnknownCaption):
        sample_caption(table, "ride a dragon", 5, 0)


def test_sample_caption_uniform_chi_square():
    table = load_paraphrases("fixtures/paraphrases.yaml")
    base = "craft iron sword"
    assert len(table[base]) >= 40
    n = 100_000
    rng = Stream.from_seed(0, "paraphrase")
    counts = {}
    for _ in range(n):
        c = sample_caption(table, base, 41, rng)
        counts[c] = counts.get(c, 0) + 1
    assert len(counts) == 41
    p = 1 / 41
    sigma = (p * (1 - p) / n) ** 0.5
    for c, k in counts.items():
        assert abs(k / n - p) <= 3 * sigma, c


def test_sample_caption_missing_entry_returns_base():
    # vocabulary caption without paraphrases: uniform over {base} alone
    table = {}
    assert sample_caption(table, "obtain wood", 41, 3) == "obtain wood"


# --- dataset generation ---

def test_caption_dataset_noop_field_episode(tmp_path, warm_kernel):
    import json

    from crafterkit.datakit import write_episode

    s = make_state(config=NO_DECAY)
    traj, _ = run_scenario(s, [Action.NOOP] * 30)
    p = tmp_path / "ep000.cdj"
    write_episode(traj, p)
    manifest = tmp_path / "manifest.jsonl"
    manifest.write_text(json.dumps({"episode": 0, "seed": 0, "path": "ep000.cdj"}) + "\n")
    out = tmp_path / "caps.jsonl"
    stats = generate_caption_dataset(manifest, out)
    lines = [json.loads(l) for l in out.read_text().splitlines()]
    assert lines, "pure noops in an empty field still produce stay records"
    assert all(l["category"] == "movement" for l in lines)
    assert all(l["caption"] == "stay" for l in lines)
    assert stats["movement"] == len(lines)

    # deterministic rerun
    out2 = tmp_path / "caps2.jsonl"
    generate_caption_dataset(manifest, out2)
    assert out.read_text() == out2.read_text()
