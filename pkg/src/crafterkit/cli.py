"""Single entry point tying the toolkit together.

Every subcommand is deterministic given its flags; seeds are always
explicit flags. Exit codes: 0 success, 1 usage error, 2 runtime error.
CRAFTERKIT_OUT_DIR sets the default output directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from .errors import CrafterKitError


def _default_out() -> str:
    return os.environ.get("CRAFTERKIT_OUT_DIR", ".")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crafterkit",
        description="Deterministic survival-world environment, dataset "
                    "foundry, and evaluation harness.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-play", help="generate expert demonstration episodes")
    p.add_argument("--seed", type=int, default=0, help="base seed; episode i uses seed+i")
    p.add_argument("--episodes", type=int, default=10, help="number of episodes")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--workers", type=int, default=1, help="parallel episode workers")
    p.add_argument("--max-steps", type=int, default=10000, help="episode step cap")
    p.add_argument("--frames", action="store_true", help="record RGB frames")

    p = sub.add_parser("gen-captions", help="caption dataset from a play dataset")
    p.add_argument("--play", required=True, help="play manifest path")
    p.add_argument("--out", default=None, help="output JSONL path")
    p.add_argument("--balance", action="store_true",
                   help="subsample categories to the smallest one")
    p.add_argument("--balance-seed", type=int, default=0, help="subsampling seed")

    p = sub.add_parser("relabel", help="event-based packed hindsight relabeling")
    p.add_argument("--play", required=True, help="play manifest path")
    p.add_argument("--captions", required=True, help="caption dataset path")
    p.add_argument("--out", default=None, help="output JSONL path")
    p.add_argument("--min-goal", type=int, default=1, help="min steps between goals")
    p.add_argument("--max-goal", type=int, default=10, help="max steps between goals")
    p.add_argument("--uncond-p", type=float, default=0.1,
                   help="unconditional (null) goal probability")
    p.add_argument("--seed", type=int, default=0, help="sampling seed")
    p.add_argument("--noop-threshold", type=int, default=20,
                   help="drop noop runs shorter than this")
    p.add_argument("--ignore-events", action="store_true",
                   help="ablation: ignore caption-event boundaries")

    p = sub.add_parser("filter-noops", help="compute keep masks for a play dataset")
    p.add_argument("--play", required=True, help="play manifest path")
    p.add_argument("--out", default=None, help="output JSONL path")
    p.add_argument("--threshold", type=int, default=20,
                   help="drop noop runs shorter than this")

    p = sub.add_parser("benchmark", help="run the achievement benchmark")
    p.add_argument("--agent", default="expert", choices=("expert", "noop", "random"),
                   help="built-in agent")
    p.add_argument("--episodes", type=int, default=100, help="episode count")
    p.add_argument("--seed", type=int, default=0, help="base seed")
    p.add_argument("--max-steps", type=int, default=None, help="episode step cap")
    p.add_argument("--out", default=None, help="report directory")
    p.add_argument("--throughput", action="store_true",
                   help="measure stepping and rendering speed instead")

    p = sub.add_parser("task", help="run a long-horizon or single-instruction task")
    p.add_argument("--id", required=True, help="T1..T4 or a single-instruction id")
    p.add_argument("--agent", default="chained", choices=("chained", "expert", "noop"),
                   help="task agent")
    p.add_argument("--episodes", type=int, default=50, help="episode count")
    p.add_argument("--seed", type=int, default=0, help="base seed")
    p.add_argument("--out", default=None, help="per-episode log path (JSONL)")

    p = sub.add_parser("render", help="export PNG/GIF from a stored episode")
    p.add_argument("--episode", required=True, help="episode container path")
    p.add_argument("--t", type=int, default=0, help="timestep for PNG export")
    p.add_argument("--range", dest="frame_range", default=None,
                   help="START:END inclusive frame range for GIF export")
    p.add_argument("--out", default=None, help="output image path")

    p = sub.add_parser("serve", help="serve environments over the wire protocol")
    p.add_argument("--transport", default="stdio", choices=("stdio", "tcp"),
                   help="stdio or tcp")
    p.add_argument("--host", default="127.0.0.1", help="tcp bind host")
    p.add_argument("--port", type=int, default=7331, help="tcp port")

    p = sub.add_parser("inspect", help="print an episode container header")
    p.add_argument("--episode", required=True, help="episode container path")
    p.add_argument("--verify-replay", action="store_true",
                   help="re-run stored actions and compare states")
    return parser


def _cmd_gen_play(args) -> int:
    from .expert import generate_play

    out = Path(args.out or Path(_default_out()) / "play")
    manifest = generate_play(args.seed, args.episodes, out, workers=args.workers,
                             max_steps=args.max_steps, record_frames=args.frames)
    entries = [json.loads(l) for l in open(manifest)]
    survived = sum(e["survived"] for e in entries)
    print(f"wrote {len(entries)} episodes to {out}")
    print(f"manifest: {manifest}")
    print(f"survived: {survived}/{len(entries)}"
          f" ({100.0 * survived / len(entries):.1f}%)")
    return 0


def _cmd_gen_captions(args) -> int:
    from .caption import generate_caption_dataset

    out = args.out or str(Path(_default_out()) / "captions.jsonl")
    stats = generate_caption_dataset(args.play, out, balance=args.balance,
                                     balance_seed=args.balance_seed)
    print(f"wrote {stats['total']} records to {out}")
    for cat in ("achievement", "movement", "construction", "combat"):
        print(f"  {cat:<13} {stats[cat]}")
    return 0


def _cmd_relabel(args) -> int:
    from .datakit import RelabelConfig, export_goal_dataset

    out = args.out or str(Path(_default_out()) / "goals.jsonl")
    cfg = RelabelConfig(min_goal_steps=args.min_goal, max_goal_steps=args.max_goal,
                        uncond_probability=args.uncond_p, seed=args.seed)
    stats = export_goal_dataset(args.play, args.captions, cfg, out,
                                noop_threshold=args.noop_threshold,
                                ignore_events=args.ignore_events)
    print(f"wrote {stats['chunks']} chunks ({stats['null_chunks']} null goals) "
          f"over {stats['episodes']} episodes to {out}")
    return 0


def _cmd_filter_noops(args) -> int:
    from .datakit import mask_to_drop_runs, noop_filter, read_episode, read_manifest

    out = args.out or str(Path(_default_out()) / "masks.jsonl")
    manifest_dir = Path(args.play).parent
    kept_total = 0
    steps_total = 0
    with open(out, "w") as fh:
        for entry in read_manifest(args.play):
            traj = read_episode(manifest_dir / entry["path"])
            mask = noop_filter(traj.actions, threshold=args.threshold)
            kept_total += int(mask.sum())
            steps_total += len(mask)
            fh.write(json.dumps({"episode": entry["episode"], "length": len(mask),
                                 "kept": int(mask.sum()),
                                 "drop_runs": mask_to_drop_runs(mask)},
                                sort_keys=True) + "\n")
    pct = 100.0 * kept_total / max(1, steps_total)
    print(f"kept {kept_total}/{steps_total} steps ({pct:.1f}%); masks in {out}")
    return 0


def _measure_throughput() -> dict:
    """Single-worker stepping and rendering rates.

    Stepping time is accumulated around step() calls only; episode restarts
    reuse a small seed pool so world generation stays out of the measurement.
    """
    from .mechanics import EnvConfig, reset, step
    from .render import render

    config = EnvConfig(episode_limit=10_000_000)
    for seed in range(8):
        reset(seed, config)  # warm the world cache
    env = reset(0, config)
    step(env, 0)  # compile
    actions = [1, 2, 3, 4, 5, 0, 1, 5, 2, 5, 3, 5, 4, 0] * 500
    n_steps = 100_000
    done = 0
    step_dt = 0.0
    i = 0
    pc = time.perf_counter
    while i < n_steps:
        t0 = pc()
        r = step(env, actions[i % 7000])
        step_dt += pc() - t0
        i += 1
        if r.done:
            done += 1
            env = reset(done % 8, config)

    env = reset(1, config)
    render(env)
    n_frames = 5000
    render_time = 0.0
    for i in range(n_frames):
        r = step(env, actions[i % 7000])
        t0 = pc()
        render(env)
        render_time += pc() - t0
        if r.done:
            env = reset(i % 8, config)
    return {"steps_per_second": n_steps / step_dt,
            "frames_per_second": n_frames / render_time}


def _cmd_benchmark(args) -> int:
    if args.throughput:
        stats = _measure_throughput()
        print(f"symbolic stepping: {stats['steps_per_second']:,.0f} steps/s")
        print(f"rendering:         {stats['frames_per_second']:,.0f} frames/s")
        if args.out:
            Path(args.out).mkdir(parents=True, exist_ok=True)
            with open(Path(args.out) / "throughput.json", "w") as fh:
                json.dump(stats, fh, indent=2, sort_keys=True)
        return 0

    from .evalkit import run_benchmark, write_report

    report = run_benchmark(args.agent, n_episodes=args.episodes,
                           base_seed=args.seed, max_steps=args.max_steps)
    print(f"crafter score:     {report.score:.2f}")
    print(f"normalized return: {report.mean_return_pct:.2f}%")
    print(f"survived:          {report.survived_fraction * 100:.1f}%")
    if report.chunk_score_mean is not None:
        print(f"chunked score:     {report.chunk_score_mean:.2f} "
              f"+/- {report.chunk_score_std:.2f}")
        print(f"chunked return:    {report.chunk_return_mean:.2f}% "
              f"+/- {report.chunk_return_std:.2f}")
    if args.out:
        write_report(report, args.out)
        print(f"report written to {args.out}")
    return 0


def _cmd_task(args) -> int:
    from .evalkit import (TASKS, chained_agent_factory, expert_agent_factory,
                          run_task)

    if args.id not in TASKS:
        print(f"unknown task {args.id!r}; known: {', '.join(sorted(TASKS))}",
              file=sys.stderr)
        return 1
    factories = {
        "chained": chained_agent_factory,
        "expert": expert_agent_factory,
        "noop": lambda spec, seed: (lambda state: 0),
    }
    res = run_task(args.id, factories[args.agent], n_episodes=args.episodes,
                   base_seed=args.seed)
    print(f"task {args.id}: {res['success_rate'] * 100:.1f}% "
          f"over {args.episodes} episodes")
    if args.out:
        with open(args.out, "w") as fh:
            for r in res["results"]:
                fh.write(json.dumps(r, sort_keys=True) + "\n")
        print(f"per-episode log: {args.out}")
    return 0


def _cmd_render(args) -> int:
    import numpy as np

    from .datakit import read_episode
    from .render import export_gif, export_png

    traj = read_episode(args.episode)
    frames = traj.frames
    if frames is None:
        print("episode was recorded without frames; re-render from states "
              "is not stored in this container", file=sys.stderr)
        return 2

    def frame_at(t):
        return np.ascontiguousarray(frames[t].transpose(1, 2, 0))

    if args.frame_range:
        try:
            start, end = (int(x) for x in args.frame_range.split(":"))
        except ValueError:
            print("--range must be START:END", file=sys.stderr)
            return 1
        out = args.out or str(Path(_default_out()) / "episode.gif")
        export_gif([frame_at(t) for t in range(start, end + 1)], out)
    else:
        out = args.out or str(Path(_default_out()) / f"frame_{args.t:05d}.png")
        export_png(frame_at(args.t), out)
    print(f"wrote {out}")
    return 0


def _cmd_serve(args) -> int:
    from .bridge import serve

    def ready(addr):
        print(f"listening on {addr[0]}:{addr[1]}", flush=True)

    serve(transport=args.transport, host=args.host, port=args.port,
          ready_callback=ready if args.transport == "tcp" else None)
    return 0


def _cmd_inspect(args) -> int:
    from .datakit import read_episode, replay_matches

    traj = read_episode(args.episode)
    print(f"seed:     {traj.seed}")
    print(f"length:   {traj.length}")
    print(f"survived: {traj.survived}")
    print(f"config:   {traj.config.to_dict()}")
    print("arrays:")
    for name, arr in traj.arrays.items():
        print(f"  {name:<22} {str(arr.dtype):<8} {tuple(arr.shape)}")
    if args.verify_replay:
        ok = replay_matches(traj)
        print(f"replay:   {'exact match' if ok else 'MISMATCH'}")
        return 0 if ok else 2
    return 0


_COMMANDS = {
    "gen-play": _cmd_gen_play,
    "gen-captions": _cmd_gen_captions,
    "relabel": _cmd_relabel,
    "filter-noops": _cmd_filter_noops,
    "benchmark": _cmd_benchmark,
    "task": _cmd_task,
    "render": _cmd_render,
    "serve": _cmd_serve,
    "inspect": _cmd_inspect,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 1
    try:
        return _COMMANDS[args.command](args)
    except CrafterKitError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 2
    except OSError as e:
        print(f"io error: {e}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
