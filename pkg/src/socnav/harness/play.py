"""Terminal rendering of episode logs: ASCII frames, dialogue, rewards."""

from __future__ import annotations

from ..scenes import builtin_scene
from .logs import EpisodeLog

CANVAS_W = 64
CANVAS_H = 24


def _canvas_for(bounds):
    xmin, ymin, xmax, ymax = bounds
    sx = (CANVAS_W - 1) / (xmax - xmin)
    sy = (CANVAS_H - 1) / (ymax - ymin)

    def to_cell(x, y):
        col = int(round((x - xmin) * sx))
        row = (CANVAS_H - 1) - int(round((y - ymin) * sy))
        return max(0, min(CANVAS_H - 1, row)), max(0, min(CANVAS_W - 1, col))

    return to_cell


def render_tick(tick: dict, spec) -> str:
    grid = [[" "] * CANVAS_W for _ in range(CANVAS_H)]
    to_cell = _canvas_for(spec.arena_bounds)
    for x1, y1, x2, y2 in spec.walls:
        steps = int(max(abs(x2 - x1), abs(y2 - y1)) * 8) + 1
        for i in range(steps + 1):
            t = i / steps
            r, c = to_cell(x1 + t * (x2 - x1), y1 + t * (y2 - y1))
            grid[r][c] = "#"
    gr, gc = to_cell(*tick["goal"])
    grid[gr][gc] = "G"
    pr, pc = to_cell(tick["pedestrian"][0], tick["pedestrian"][1])
    grid[pr][pc] = "P"
    rr, rc = to_cell(tick["robot"][0], tick["robot"][1])
    grid[rr][rc] = "R"
    lines = ["".join(row) for row in grid]
    reward = tick["reward"]
    lines.append(
        f"t={tick['tick']:3d} act={tick['action']['code']:>12} "
        f"v={tick['action']['v']:.2f} w={tick['action']['w']:+.2f} "
        f"d={tick['distance']:.2f} cond={tick['condition']}"
    )
    lines.append(
        "reward goal={goal:+.1f} shaping={shaping:+.1f} step={step:+.1f} "
        "interact={interact:+.1f} total={total:+.1f}".format(**reward)
    )
    for event in tick.get("events", []):
        lines.append(f"  [{event['initiator']}] ({event['intent']}) {event['text']}")
    return "\n".join(lines)


def render_episode(episode: EpisodeLog, every: int = 1) -> str:
    spec = builtin_scene(episode.header["scene"])
    parts = [
        f"episode {episode.header['episode']} scene={episode.header['scene']} "
        f"seed={episode.header['seed']}"
    ]
    for i, tick in enumerate(episode.ticks):
        if i % every == 0 or tick.get("events") or tick["terminal"] != "running":
            parts.append(render_tick(tick, spec))
            parts.append("-" * CANVAS_W)
    o = episode.outcome
    parts.append(
        f"outcome: {o.terminal.value} steps={o.steps} min_dh={o.min_human_distance:.2f} "
        f"return={o.episode_return:.1f} comfort={o.comfort_ticks}/{o.total_ticks}"
    )
    if o.dialogue:
        parts.append("dialogue transcript:")
        for e in o.dialogue:
            parts.append(f"  t={e.tick:3d} [{e.initiator.value}] ({e.intent.value}) {e.text}")
    return "\n".join(parts)
