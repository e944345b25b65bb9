"""Episode rollout and batch evaluation helpers."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .dialogue import IntentCode
from .episode import EpisodeRunner, EpisodeSettings
from .rewards import EpisodeOutcome, MetricsReport, aggregate_metrics
from .world import TerminalKind

ActFn = Callable[[object], tuple[IntentCode, float, float]]


def episode_seed(base_seed: int, stream: int, index: int) -> int:
    """Stateless per-episode seed derivation (stable across resume)."""
    ss = np.random.SeedSequence((base_seed, stream, index))
    return int(ss.generate_state(1, np.uint64)[0])


def rollout_episode(
    settings: EpisodeSettings, seed: int, act: ActFn
) -> tuple[EpisodeOutcome, list[dict]]:
    """Run one full episode with the given decision function."""
    runner = EpisodeRunner(settings, seed)
    obs = runner.observation()
    while runner.terminal == TerminalKind.RUNNING:
        code, v, w = act(obs)
        result = runner.step(code, v, w)
        obs = result.observation
    return runner.outcome(), runner.records


def run_eval(
    settings: EpisodeSettings,
    act: ActFn,
    episodes: int,
    eval_seed: int,
    training_time_hours: float | None = None,
) -> tuple[MetricsReport, list[EpisodeOutcome]]:
    """Deterministic evaluation sweep: fixed per-episode seeds, shared policy."""
    outcomes = []
    for i in range(episodes):
        outcome, _ = rollout_episode(settings, episode_seed(eval_seed, 0, i), act)
        outcomes.append(outcome)
    return aggregate_metrics(outcomes, training_time_hours), outcomes


def policy_act_fn(policy, mode: str = "deterministic", rng: np.random.Generator | None = None) -> ActFn:
    def act(obs):
        action = policy.act(obs, mode=mode, rng=rng)
        return action.code, action.v, action.w

    return act
