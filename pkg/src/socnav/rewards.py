"""Per-tick reward assembly and episode-level evaluation metrics.

The reward has four additive parts: a terminal goal term (arrival bonus, with
a penalty proportional to how far the episode's closest pedestrian approach
dipped under the safety distance, or a collision penalty), a dense progress
shaping term, a constant per-step penalty, and an interaction term granted
when dialogue resolves well (an aligned robot request, or robot behavior that
complies with a pedestrian request).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .dialogue import DialogueEvent, IntentCode
from .geometry import cross_z, moving_points_min_separation, unit
from .world import TerminalKind, WorldState


@dataclass
class RewardConfig:
    r_arrive: float = 500.0
    r_collide: float = -500.0
    r_step: float = -5.0
    d_safe: float = 1.0
    penalty_scale: float = 50.0      # per metre of safety-distance infraction
    shaping_scale: float = 200.0     # per metre of progress toward the goal
    r_req: float = 50.0              # aligned robot-initiated request
    r_res: float = 50.0              # compliant response to a pedestrian request
    d_comfort: float = 0.5           # comfort-space threshold for CSC
    align_cross_margin: float = 0.2  # extra radius when judging "paths cross"
    stop_speed: float = 0.05         # "stopped" means slower than this
    margin_offset: float = 0.4       # lateral shift that counts as compliance
    respond_window: int = 3          # ticks the robot has to answer a request
    margin_window: int = 8           # ticks to reach the demanded lateral offset


@dataclass
class RewardBreakdown:
    goal: float = 0.0
    shaping: float = 0.0
    step: float = 0.0
    interact: float = 0.0

    @property
    def total(self) -> float:
        return self.goal + self.shaping + self.step + self.interact

    def to_dict(self) -> dict:
        return {
            "goal": self.goal,
            "shaping": self.shaping,
            "step": self.step,
            "interact": self.interact,
            "total": self.total,
        }


def reward_goal(terminal: TerminalKind, d_min_episode: float, cfg: RewardConfig) -> float:
    """Terminal goal term; zero on running and timeout ticks.

    Arrival pays the full bonus only when the episode never dipped under the
    safety distance; otherwise the bonus is reduced proportionally to the
    worst infraction.
    """
    if terminal == TerminalKind.SUCCESS:
        if d_min_episode >= cfg.d_safe:
            return cfg.r_arrive
        return cfg.r_arrive - cfg.penalty_scale * (cfg.d_safe - d_min_episode)
    if terminal == TerminalKind.COLLISION:
        return cfg.r_collide
    return 0.0


def reward_shaping(p_prev, p_now, p_goal, cfg: RewardConfig) -> float:
    """Progress term: scaled reduction of the distance to goal this tick."""
    prev_d = float(np.linalg.norm(np.asarray(p_prev, float) - np.asarray(p_goal, float)))
    now_d = float(np.linalg.norm(np.asarray(p_now, float) - np.asarray(p_goal, float)))
    return cfg.shaping_scale * (prev_d - now_d)


# ---------------------------------------------------------------------------
# Interaction judging
# ---------------------------------------------------------------------------


def robot_request_aligned(world: WorldState, code: IntentCode, cfg: RewardConfig, horizon: float) -> bool:
    """Is a robot request sensible given the pedestrian's current trajectory?

    A stop request is aligned when, at current velocities, the two agents would
    come within touching range (plus a small margin) inside the horizon. A
    margin request is aligned when the demanded sideways shift moves the
    pedestrian further away from the robot's straight line to its goal.
    """
    if code == IntentCode.STOP:
        sep = moving_points_min_separation(
            world.robot.position, world.robot.linear_velocity,
            world.pedestrian.position, world.pedestrian.linear_velocity,
            horizon,
        )
        touch = world.robot.radius + world.pedestrian.radius + cfg.align_cross_margin
        return sep < touch
    if code in (IntentCode.MARGIN_LEFT, IntentCode.MARGIN_RIGHT):
        line = world.goal - world.robot.position
        norm = float(np.linalg.norm(line))
        if norm < 1e-9:
            return False
        line = line / norm
        n_line = np.array([-line[1], line[0]])            # left of the robot's path
        offset = float((world.pedestrian.position - world.robot.position) @ n_line)
        ped_dir = unit(world.pedestrian.heading)
        ped_left = np.array([-ped_dir[1], ped_dir[0]])
        shift = ped_left if code == IntentCode.MARGIN_LEFT else -ped_left
        gain = float(shift @ n_line)
        if abs(offset) < 1e-9:
            return False
        return offset * gain > 0.0
    return False


# demanded robot response per pedestrian request
RESPONSE_FOR_DEMAND = {
    IntentCode.ASK_STOP: IntentCode.STOP,
    IntentCode.CLAIM_PRIORITY: IntentCode.STOP,
    IntentCode.ASK_MARGIN_LEFT: IntentCode.MARGIN_LEFT,
    IntentCode.ASK_MARGIN_RIGHT: IntentCode.MARGIN_RIGHT,
    IntentCode.WARN_LEFT: IntentCode.MARGIN_RIGHT,       # danger left -> move right
    IntentCode.WARN_RIGHT: IntentCode.MARGIN_LEFT,
}


class TrackerStatus(str, enum.Enum):
    PENDING = "pending"
    COMPLIED = "complied"
    FAILED = "failed"


@dataclass
class ComplianceTracker:
    """Judges whether the robot honors one pedestrian request.

    The robot must announce the matching interaction code within the response
    window, and then actually do it: keep its speed under the stop threshold
    until the pedestrian has passed (stop-family demands), or shift its path
    laterally by the demanded offset within the margin window (margin-family).
    """

    demand: IntentCode
    t_request: int
    anchor: np.ndarray
    line_dir: np.ndarray          # robot's path direction at request time
    cfg: RewardConfig
    responded: bool = False
    status: TrackerStatus = TrackerStatus.PENDING
    _dist_prev: float = math.inf
    _incr_ticks: int = 0
    d_release: float = 3.5

    @classmethod
    def start(cls, world: WorldState, demand: IntentCode, cfg: RewardConfig, d_release: float) -> "ComplianceTracker":
        line = world.goal - world.robot.position
        n = float(np.linalg.norm(line))
        line = line / n if n > 1e-9 else unit(world.robot.heading)
        return cls(
            demand=demand,
            t_request=world.tick,
            anchor=world.robot.position.copy(),
            line_dir=line,
            cfg=cfg,
            d_release=d_release,
        )

    @property
    def wants_stop(self) -> bool:
        return RESPONSE_FOR_DEMAND[self.demand] == IntentCode.STOP

    @property
    def demanded_code(self) -> IntentCode:
        return RESPONSE_FOR_DEMAND[self.demand]

    def note_robot_code(self, tick: int, code: IntentCode) -> None:
        if self.status != TrackerStatus.PENDING or self.responded:
            return
        if tick - self.t_request <= self.cfg.respond_window and code == self.demanded_code:
            self.responded = True

    def _lateral_offset(self, world: WorldState) -> float:
        n_left = np.array([-self.line_dir[1], self.line_dir[0]])
        return float((world.robot.position - self.anchor) @ n_left)

    def update(self, world: WorldState, surface_distance: float, episode_over: bool) -> TrackerStatus:
        """Advance one tick after both agents moved; returns the (new) status."""
        if self.status != TrackerStatus.PENDING:
            return self.status
        elapsed = world.tick - self.t_request
        if not self.responded and elapsed > self.cfg.respond_window:
            self.status = TrackerStatus.FAILED
            return self.status

        if self.wants_stop:
            speed = float(np.linalg.norm(world.robot.linear_velocity))
            if self.responded and elapsed > self.cfg.respond_window and speed >= self.cfg.stop_speed:
                self.status = TrackerStatus.FAILED
            elif self.responded and self._pedestrian_passed(surface_distance):
                self.status = TrackerStatus.COMPLIED
        else:
            offset = self._lateral_offset(world)
            signed = offset if self.demanded_code == IntentCode.MARGIN_LEFT else -offset
            if self.responded and signed >= self.cfg.margin_offset:
                self.status = TrackerStatus.COMPLIED
            elif elapsed > self.cfg.margin_window:
                self.status = TrackerStatus.FAILED

        if self.status == TrackerStatus.PENDING and episode_over:
            self.status = TrackerStatus.FAILED
        self._dist_prev = surface_distance
        return self.status

    def _pedestrian_passed(self, surface_distance: float) -> bool:
        if surface_distance > self.d_release:
            return True
        if surface_distance > self._dist_prev + 1e-9:
            self._incr_ticks += 1
        else:
            self._incr_ticks = 0
        return self._incr_ticks >= 2


@dataclass
class InteractionResolution:
    """Outcome of one dialogue exchange, produced on the tick it resolves."""

    initiator: str                # "robot" | "pedestrian"
    fulfilled: bool
    tick: int
    intent: IntentCode


def reward_interact(resolution: InteractionResolution | None, cfg: RewardConfig) -> float:
    """Interaction term for the tick a dialogue exchange resolves; else zero."""
    if resolution is None or not resolution.fulfilled:
        return 0.0
    return cfg.r_req if resolution.initiator == "robot" else cfg.r_res


@dataclass
class TickContext:
    terminal: TerminalKind
    d_min_episode: float
    p_prev: np.ndarray
    p_now: np.ndarray
    p_goal: np.ndarray
    resolution: InteractionResolution | None = None


def tick_reward(ctx: TickContext, cfg: RewardConfig) -> RewardBreakdown:
    """Assemble the four reward parts for one tick."""
    goal = 0.0
    if ctx.terminal in (TerminalKind.SUCCESS, TerminalKind.COLLISION):
        goal = reward_goal(ctx.terminal, ctx.d_min_episode, cfg)
    return RewardBreakdown(
        goal=goal,
        shaping=reward_shaping(ctx.p_prev, ctx.p_now, ctx.p_goal, cfg),
        step=cfg.r_step,
        interact=reward_interact(ctx.resolution, cfg),
    )


# ---------------------------------------------------------------------------
# Episode outcomes and Table-style aggregation
# ---------------------------------------------------------------------------


@dataclass
class EpisodeOutcome:
    terminal: TerminalKind
    steps: int
    min_human_distance: float
    comfort_ticks: int
    total_ticks: int
    human_collision: bool
    episode_return: float
    dialogue: list[DialogueEvent] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "terminal": self.terminal.value,
            "steps": self.steps,
            "min_human_distance": self.min_human_distance,
            "comfort_ticks": self.comfort_ticks,
            "total_ticks": self.total_ticks,
            "human_collision": self.human_collision,
            "episode_return": self.episode_return,
            "dialogue": [e.to_dict() for e in self.dialogue],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EpisodeOutcome":
        return cls(
            terminal=TerminalKind(d["terminal"]),
            steps=int(d["steps"]),
            min_human_distance=float(d["min_human_distance"]),
            comfort_ticks=int(d["comfort_ticks"]),
            total_ticks=int(d["total_ticks"]),
            human_collision=bool(d["human_collision"]),
            episode_return=float(d["episode_return"]),
            dialogue=[DialogueEvent.from_dict(e) for e in d.get("dialogue", [])],
        )


@dataclass
class MetricsReport:
    episodes: int
    success: float
    collision: float
    timeout: float
    success_std: float
    step_mean: float | None       # successes only; None when no successes
    human_collisions: float
    mdh: float | None             # mean min human distance over successes
    csc: float                    # comfort-space compliance over all ticks
    return_mean: float
    training_time_hours: float | None = None

    def to_dict(self) -> dict:
        return {
            "episodes": self.episodes,
            "success": self.success,
            "collision": self.collision,
            "timeout": self.timeout,
            "success_std": self.success_std,
            "step_mean": self.step_mean,
            "human_collisions": self.human_collisions,
            "mdh": self.mdh,
            "csc": self.csc,
            "return_mean": self.return_mean,
            "training_time_hours": self.training_time_hours,
        }


N_SHARDS = 5  # Success std-dev is reported over this many equal eval shards.


def aggregate_metrics(
    outcomes: list[EpisodeOutcome], training_time_hours: float | None = None
) -> MetricsReport:
    """Fold per-episode outcomes into one Table-style report row."""
    if not outcomes:
        raise ValueError("aggregate_metrics needs at least one episode")
    n = len(outcomes)
    succ = [o for o in outcomes if o.terminal == TerminalKind.SUCCESS]
    coll = [o for o in outcomes if o.terminal == TerminalKind.COLLISION]
    tout = [o for o in outcomes if o.terminal == TerminalKind.TIMEOUT]
    flags = np.array([o.terminal == TerminalKind.SUCCESS for o in outcomes], dtype=float)
    shard_means = [float(s.mean()) for s in np.array_split(flags, min(N_SHARDS, n))]
    total_ticks = sum(o.total_ticks for o in outcomes)
    return MetricsReport(
        episodes=n,
        success=len(succ) / n,
        collision=len(coll) / n,
        timeout=len(tout) / n,
        success_std=float(np.std(shard_means)),
        step_mean=(sum(o.steps for o in succ) / len(succ)) if succ else None,
        human_collisions=sum(o.human_collision for o in outcomes) / n,
        mdh=(sum(o.min_human_distance for o in succ) / len(succ)) if succ else None,
        csc=(sum(o.comfort_ticks for o in outcomes) / total_ticks) if total_ticks else 0.0,
        return_mean=sum(o.episode_return for o in outcomes) / n,
        training_time_hours=training_time_hours,
    )
