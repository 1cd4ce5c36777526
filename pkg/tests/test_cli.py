import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from crafterkit.cli import build_parser, main

HELP_DIR = Path(__file__).parent / "data" / "help"

SUBCOMMANDS = ("gen-play", "gen-captions", "relabel", "filter-noops",
               "benchmark", "task", "render", "serve", "inspect")


def test_usage_error_exit_code_1(capsys):
    assert main(["gen-captions"]) == 1  # missing required --play
    assert main(["no-such-command"]) == 1


def test_help_exit_code_0():
    assert main(["--help"]) == 0
    for sub in SUBCOMMANDS:
        assert main([sub, "--help"]) == 0


def test_help_snapshots(capsys):
    """Every subcommand documents all its flags; snapshots pinned."""
    os.environ["COLUMNS"] = "100"
    for sub in SUBCOMMANDS:
        main([sub, "--help"])
        text = capsys.readouterr().out
        golden = HELP_DIR / f"{sub}.txt"
        assert golden.exists(), f"missing snapshot for {sub}"
        assert text == golden.read_text(), sub


def test_pipeline_end_to_end(tmp_path, warm_kernel, capsys):
    play = tmp_path / "play"
    assert main(["gen-play", "--seed", "0", "--episodes", "2", "--out",
                 str(play), "--max-steps", "120"]) == 0
    manifest = play / "manifest.jsonl"
    assert manifest.exists()

    caps = tmp_path / "caps.jsonl"
    assert main(["gen-captions", "--play", str(manifest),
                 "--out", str(caps)]) == 0
    assert caps.exists() and caps.read_text().strip()

    goals = tmp_path / "goals.jsonl"
    assert main(["relabel", "--play", str(manifest), "--captions", str(caps),
                 "--out", str(goals), "--seed", "1"]) == 0
    lines = [json.loads(l) for l in goals.read_text().splitlines()]
    assert lines and all("start" in l and "goal_end" in l for l in lines)

    masks = tmp_path / "masks.jsonl"
    assert main(["filter-noops", "--play", str(manifest),
                 "--out", str(masks)]) == 0
    assert masks.exists()

    ep = play / "ep00000.cdj"
    assert main(["inspect", "--episode", str(ep), "--verify-replay"]) == 0
    out = capsys.readouterr().out
    assert "exact match" in out


def test_gen_play_determinism_cli(tmp_path, warm_kernel):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["gen-play", "--seed", "5", "--episodes", "2",
                     "--out", str(out), "--max-steps", "80"]) == 0
    assert (a / "manifest.jsonl").read_bytes() == (b / "manifest.jsonl").read_bytes()
    for i in range(2):
        name = f"ep{i:05d}.cdj"
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_render_subcommand(tmp_path, warm_kernel):
    play = tmp_path / "play"
    main(["gen-play", "--seed", "1", "--episodes", "1", "--out", str(play),
          "--max-steps", "12", "--frames"])
    png = tmp_path / "f.png"
    assert main(["render", "--episode", str(play / "ep00000.cdj"), "--t", "3",
                 "--out", str(png)]) == 0
    assert png.stat().st_size > 0
    gif = tmp_path / "clip.gif"
    assert main(["render", "--episode", str(play / "ep00000.cdj"),
                 "--range", "0:5", "--out", str(gif)]) == 0
    assert gif.stat().st_size > 0


def test_task_subcommand(tmp_path, warm_kernel, capsys):
    log = tmp_path / "t1.jsonl"
    assert main(["task", "--id", "T1", "--agent", "chained", "--episodes",
                 "2", "--out", str(log)]) == 0
    lines = [json.loads(l) for l in log.read_text().splitlines()]
    assert len(lines) == 2
    assert all("solved" in l and "completed" in l for l in lines)
    assert main(["task", "--id", "T99"]) == 1


def test_benchmark_subcommand(tmp_path, warm_kernel, capsys):
    out = tmp_path / "report"
    assert main(["benchmark", "--agent", "noop", "--episodes", "2",
                 "--max-steps", "5", "--out", str(out)]) == 0
    assert (out / "report.json").exists()
    assert (out / "achievements.csv").exists()


def test_runtime_error_exit_code_2(tmp_path, capsys):
    missing = tmp_path / "nope.cdj"
    assert main(["inspect", "--episode", str(missing)]) == 2


def test_module_invocation():
    proc = subprocess.run([sys.executable, "-m", "crafterkit.cli", "--help"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert "crafterkit" in proc.stdout


def test_default_out_dir_env_var(tmp_path, warm_kernel, monkeypatch):
    play = tmp_path / "play"
    main(["gen-play", "--seed", "2", "--episodes", "1", "--out", str(play),
          "--max-steps", "30"])
    outdir = tmp_path / "outputs"
    outdir.mkdir()
    monkeypatch.setenv("CRAFTERKIT_OUT_DIR", str(outdir))
    assert main(["gen-captions", "--play", str(play / "manifest.jsonl")]) == 0
    assert (outdir / "captions.jsonl").exists()
