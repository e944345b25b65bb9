"""Episode logs: newline-delimited JSON, one record per line.

Per episode: a header line, one line per tick (pose, action, reward
breakdown, dialogue events), and an end line with the outcome.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from ..rewards import EpisodeOutcome


class LogParseError(ValueError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no


@dataclass
class EpisodeLog:
    header: dict
    ticks: list[dict]
    outcome: EpisodeOutcome


def append_episode(fh, index: int, seed: int, scene: str,
                   records: list[dict], outcome: EpisodeOutcome) -> None:
    fh.write(json.dumps({"type": "header", "episode": index, "seed": seed,
                         "scene": scene, "version": 1}) + "\n")
    for rec in records:
        fh.write(json.dumps(rec) + "\n")
    fh.write(json.dumps({"type": "end", "outcome": outcome.to_dict()}) + "\n")


def write_episode_log(path: str, episodes: list[tuple[int, int, str, list[dict], EpisodeOutcome]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for index, seed, scene, records, outcome in episodes:
            append_episode(fh, index, seed, scene, records, outcome)


def read_episode_log(path: str) -> list[EpisodeLog]:
    episodes: list[EpisodeLog] = []
    header = None
    ticks: list[dict] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise LogParseError(line_no, f"invalid JSON ({exc.msg})") from exc
            kind = rec.get("type")
            if kind == "header":
                if header is not None:
                    raise LogParseError(line_no, "header before previous episode ended")
                header, ticks = rec, []
            elif kind == "tick":
                if header is None:
                    raise LogParseError(line_no, "tick record outside an episode")
                ticks.append(rec)
            elif kind == "end":
                if header is None:
                    raise LogParseError(line_no, "end record outside an episode")
                episodes.append(EpisodeLog(header, ticks, EpisodeOutcome.from_dict(rec["outcome"])))
                header, ticks = None, []
            else:
                raise LogParseError(line_no, f"unknown record type {kind!r}")
    if header is not None:
        raise LogParseError(line_no, "log ended mid-episode")
    return episodes
