"""Command-line entry points: train, eval, serve, play, report."""

from __future__ import annotations

import argparse
import json
import os
import sys

# On CPU the update-step GEMMs are small; OpenBLAS threading only adds
# spin-wait contention with the numba kernels. Must be set before numpy loads.
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")

from .config import load_config, save_config  # noqa: E402


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="YAML run config (defaults apply when omitted)")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--scene", help="override the scene (square|hallway|crosswalk|path)")
    parser.add_argument("--checkpoint", help="checkpoint file")
    parser.add_argument("--out", help="output directory", default="runs/out")


def _load(args) -> "RunConfig":
    overrides = {"seed": args.seed, "scene": args.scene}
    return load_config(args.config, overrides)


def cmd_train(args) -> int:
    from ..hsac import TrainingRun

    cfg = _load(args)
    if args.steps is not None:
        cfg.total_steps = args.steps
    os.makedirs(args.out, exist_ok=True)
    save_config(cfg, os.path.join(args.out, "run.yaml"))
    run = TrainingRun(cfg.episode_settings(), cfg.model_spec(), cfg.hsac,
                      cfg.train_settings(), args.out)
    if args.resume:
        run.resume()
        if run.step >= cfg.total_steps:
            print(f"nothing to do: resumed at step {run.step} >= {cfg.total_steps}")
            return 0
    run.run()
    print(f"trained to step {run.step} ({run.episode_index} episodes, "
          f"{run.elapsed_hours:.2f} h); artifacts in {args.out}")
    return 0


def cmd_eval(args) -> int:
    from .evaluate import IncompatibleCheckpoint, evaluate_checkpoint

    cfg = _load(args)
    if not args.checkpoint:
        print("eval needs --checkpoint", file=sys.stderr)
        return 2
    episodes = args.episodes or cfg.final_eval_episodes
    try:
        report = evaluate_checkpoint(cfg, args.checkpoint, episodes, args.out)
    except IncompatibleCheckpoint as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(report.to_dict(), indent=1))
    return 0


def cmd_serve(args) -> int:
    from ..hsac.demo_policy import save_demo_checkpoint
    from .evaluate import load_policy
    from .server import serve_forever
    from .session import SessionEngine

    cfg = _load(args)
    checkpoint = args.checkpoint
    if checkpoint is None and args.demo:
        os.makedirs(args.out, exist_ok=True)
        checkpoint = os.path.join(args.out, "demo_checkpoint.npz")
        save_demo_checkpoint(checkpoint, n_codes=cfg.action_codes, grid_size=cfg.sensors.grid_size)
    if checkpoint is None:
        print("serve needs --checkpoint (or --demo)", file=sys.stderr)
        return 2
    policy = load_policy(checkpoint, cfg.action_codes)
    engine = SessionEngine(cfg, policy)
    port = args.port or cfg.session.port
    tick_hz = args.tick_hz or cfg.session.tick_hz
    print(f"serving ws://{cfg.session.host}:{port} at {tick_hz} ticks/s", flush=True)
    serve_forever(engine, cfg.session.host, port, tick_hz)
    return 0


def cmd_play(args) -> int:
    from .logs import LogParseError, read_episode_log
    from .play import render_episode

    if not args.log:
        print("play needs --log episodes.jsonl", file=sys.stderr)
        return 2
    try:
        episodes = read_episode_log(args.log)
    except LogParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not episodes:
        print("error: log holds no episodes", file=sys.stderr)
        return 2
    picked = episodes if args.episode is None else [episodes[args.episode]]
    for ep in picked:
        print(render_episode(ep, every=args.every))
    return 0


def cmd_report(args) -> int:
    from .evaluate import combine_reports

    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    rows = combine_reports(args.metrics, args.out)
    width = max(len(r["method"]) for r in rows) + 2
    print(f"{'scene':<12}{'method':<{width}}{'success':>9}{'collision':>10}{'step':>8}")
    for r in rows:
        step = "-" if r.get("step_mean") is None else f"{r['step_mean']:.2f}"
        print(f"{r['scene']:<12}{r['method']:<{width}}{r['success']:>9.3f}{r['collision']:>10.3f}{step:>8}")
    return 0


def cmd_demo_checkpoint(args) -> int:
    from ..hsac.demo_policy import save_demo_checkpoint

    cfg = _load(args)
    path = args.checkpoint or "demo_checkpoint.npz"
    save_demo_checkpoint(path, n_codes=cfg.action_codes, grid_size=cfg.sensors.grid_size)
    print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="socnav",
                                     description="socially-aware navigation lab")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a policy")
    _common(p)
    p.add_argument("--steps", type=int, help="override total environment steps")
    p.add_argument("--resume", action="store_true", help="continue from artifacts in --out")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint")
    _common(p)
    p.add_argument("--episodes", type=int, help="evaluation episodes (default from config)")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("serve", help="run the live human-in-the-loop session server")
    _common(p)
    p.add_argument("--port", type=int)
    p.add_argument("--tick-hz", type=float, dest="tick_hz")
    p.add_argument("--demo", action="store_true",
                   help="serve the built-in demo policy when no checkpoint is given")
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("play", help="render an episode log in the terminal")
    _common(p)
    p.add_argument("--log", help="episodes.jsonl produced by eval")
    p.add_argument("--episode", type=int, help="render only this episode index")
    p.add_argument("--every", type=int, default=5, help="render every Nth tick")
    p.set_defaults(fn=cmd_play)

    p = sub.add_parser("report", help="combine metrics.json files into one table")
    p.add_argument("metrics", nargs="+", help="metrics.json files")
    p.add_argument("--out", default="report.csv")
    p.set_defaults(fn=cmd_report)

    p = sub.add_parser("demo-checkpoint", help="write the hand-built responsive policy")
    _common(p)
    p.set_defaults(fn=cmd_demo_checkpoint)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
