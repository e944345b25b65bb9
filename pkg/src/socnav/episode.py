"""Episode driver: one robot, one pedestrian, dialogue, rewards, logging.

The driver owns the per-encounter dialogue protocol:

* An encounter opens when the surface distance first drops under the trigger
  distance while the agents are closing, and ends once they separate past the
  release distance. Each encounter carries at most one exchange.
* On opening, a single coin flip decides whether the pedestrian initiates
  (probability p_r). A pedestrian request changes its own behavior (assertive
  avoidance or a lane claim), sets the robot's condition input, and starts a
  compliance tracker that can pay the response reward.
* Otherwise the robot may initiate: its first non-none interaction code inside
  the encounter becomes a spoken request the pedestrian complies with, paying
  the request reward when the request fits the pedestrian's trajectory.

The robot's policy is external: callers pull an observation, decide
(code, v, w), and push it back through :meth:`EpisodeRunner.step`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import pedestrian as ped_mod
from .dialogue import (
    PED_PHRASES,
    DialogueEvent,
    Initiator,
    IntentCode,
    UtteranceGenerator,
    encode_condition,
)
from .observation import (
    Observation,
    SensorParams,
    assemble_observation,
    build_position_history,
    initial_position_history,
    rasterize,
    raycast,
)
from .rewards import (
    ComplianceTracker,
    EpisodeOutcome,
    InteractionResolution,
    RewardBreakdown,
    RewardConfig,
    TickContext,
    TrackerStatus,
    robot_request_aligned,
    tick_reward,
)
from .world import (
    ScenarioSpec,
    TerminalKind,
    WorldParams,
    WorldState,
    advance_tick,
    agents_overlap,
    check_termination,
    distance_robot_pedestrian,
    spawn_scenario,
    step_pedestrian,
    step_robot,
)


@dataclass
class EpisodeSettings:
    scene: ScenarioSpec
    world: WorldParams = field(default_factory=WorldParams)
    sensors: SensorParams = field(default_factory=SensorParams)
    irvo: ped_mod.IrvoParams = field(default_factory=ped_mod.IrvoParams)
    reward: RewardConfig = field(default_factory=RewardConfig)
    language_on: bool = True
    ped_source: str = "irvo"            # "irvo" | "external" (human-driven)


@dataclass
class StepResult:
    reward: RewardBreakdown
    terminal: TerminalKind
    observation: Observation
    events: list[DialogueEvent]
    resolution: InteractionResolution | None


class EpisodeRunner:
    """Runs one episode tick by tick; see module docstring for the protocol."""

    def __init__(self, settings: EpisodeSettings, seed: int,
                 utterances: UtteranceGenerator | None = None):
        self.s = settings
        self.world: WorldState = spawn_scenario(settings.scene, seed, settings.world)
        self.ped = ped_mod.PedestrianPolicyState(
            goal=self.world.ped_goal.copy(),
            preferred_speed=settings.irvo.preferred_speed,
        )
        self.hist = initial_position_history(self.world)
        self.utterances = utterances or UtteranceGenerator()
        self.cond_code = IntentCode.NONE
        self.tracker: ComplianceTracker | None = None
        self.ped_event: DialogueEvent | None = None
        self.encounter_active = False
        self.exchange_done = False
        self.robot_replied = False
        self.dialogue: list[DialogueEvent] = []
        self.records: list[dict] = []
        d0 = distance_robot_pedestrian(self.world)
        self.d_min = d0
        self._d_prev = float("inf")
        self.comfort_ticks = 0
        self.return_sum = 0.0
        self.human_collision = False
        self.terminal = TerminalKind.RUNNING

    # -- observation -------------------------------------------------------

    def observation(self) -> Observation:
        scan = raycast(self.world, self.s.sensors)
        grid = rasterize(self.world, scan, self.s.sensors)
        code = self.cond_code if self.s.language_on else IntentCode.NONE
        return assemble_observation(grid, self.hist, encode_condition(code), self.s.sensors)

    # -- dialogue plumbing ---------------------------------------------------

    def _open_encounter(self) -> list[DialogueEvent]:
        self.encounter_active = True
        self.exchange_done = False
        self.robot_replied = False
        events: list[DialogueEvent] = []
        if self.s.ped_source != "irvo":
            return events
        code = ped_mod.maybe_initiate_request(self.ped, self.world, self.s.irvo.p_r)
        if code is not None:
            events.append(self._register_ped_request(code, PED_PHRASES[code]))
        return events

    def _register_ped_request(self, code: IntentCode, text: str) -> DialogueEvent:
        event = DialogueEvent(self.world.tick, Initiator.PEDESTRIAN, code, text)
        self.dialogue.append(event)
        self.utterances.record("pedestrian", text)
        self.ped_event = event
        self.cond_code = code
        self.exchange_done = True
        self.robot_replied = False
        if self.s.ped_source == "irvo":
            self.ped = ped_mod.apply_self_claim(self.ped, code, self.world, self.s.irvo)
        self.tracker = ComplianceTracker.start(
            self.world, code, self.s.reward, self.s.irvo.d_release
        )
        return event

    def inject_chat(self, text: str) -> tuple[IntentCode, DialogueEvent | None]:
        """Human chat into the episode (session mode): parse and register.

        Returns the parsed intent and the registered event (None when the text
        carries no actionable intent).
        """
        from .dialogue import parse_utterance

        code = parse_utterance(text)
        if code == IntentCode.NONE:
            self.utterances.record("pedestrian", text)
            return code, None
        return code, self._register_ped_request(code, text)

    def _handle_robot_code(self, code: IntentCode) -> tuple[list[DialogueEvent], InteractionResolution | None]:
        events: list[DialogueEvent] = []
        resolution = None
        if code == IntentCode.NONE:
            return events, resolution
        if self.tracker is not None and self.tracker.status == TrackerStatus.PENDING and not self.robot_replied:
            # response slot of a pedestrian-initiated exchange
            self.tracker.note_robot_code(self.world.tick, code)
            text = self.utterances.generate(code, self.ped_event)
            event = DialogueEvent(self.world.tick, Initiator.ROBOT, code, text)
            self.dialogue.append(event)
            self.utterances.record("robot", text)
            events.append(event)
            self.robot_replied = True
        elif self.encounter_active and not self.exchange_done:
            # robot-initiated request
            text = self.utterances.generate(code, None)
            event = DialogueEvent(self.world.tick, Initiator.ROBOT, code, text)
            self.dialogue.append(event)
            self.utterances.record("robot", text)
            events.append(event)
            self.exchange_done = True
            aligned = robot_request_aligned(
                self.world, code, self.s.reward, self.s.irvo.n_stop * self.world.dt
            )
            if self.s.ped_source == "irvo":
                self.ped = ped_mod.apply_request(self.ped, code, self.world, self.s.irvo)
            resolution = InteractionResolution(
                initiator="robot", fulfilled=aligned, tick=self.world.tick, intent=code
            )
        return events, resolution

    def _close_encounter(self) -> None:
        self.encounter_active = False
        self.exchange_done = False
        self.robot_replied = False
        self.cond_code = IntentCode.NONE
        self.ped_event = None
        self.tracker = None
        self.ped = ped_mod.release(self.ped)

    # -- main tick -----------------------------------------------------------

    def step(self, code: IntentCode, v: float, w: float,
             ped_velocity: np.ndarray | None = None) -> StepResult:
        """Advance one tick with the robot command (code, v, w).

        In external pedestrian mode, ``ped_velocity`` is the human command for
        this tick (zero when absent).
        """
        if self.terminal != TerminalKind.RUNNING:
            raise RuntimeError("episode already terminated")

        events: list[DialogueEvent] = []
        d_now = distance_robot_pedestrian(self.world)
        closing = d_now < self._d_prev
        if not self.encounter_active and d_now < self.s.irvo.d_int and closing:
            events.extend(self._open_encounter())
        self._d_prev = d_now

        robot_events, resolution = self._handle_robot_code(code)
        events.extend(robot_events)

        # simultaneous motion: the pedestrian plans against the pre-move robot
        if self.s.ped_source == "irvo":
            ped_vel = ped_mod.select_velocity(self.ped, self.world, self.s.irvo)
        else:
            ped_vel = np.zeros(2) if ped_velocity is None else np.asarray(ped_velocity, float)
            speed = float(np.linalg.norm(ped_vel))
            if speed > self.ped.preferred_speed:
                ped_vel = ped_vel * (self.ped.preferred_speed / speed)
        p_prev = self.world.robot.position.copy()
        self.world = step_robot(self.world, v, w)
        self.world = step_pedestrian(self.world, ped_vel)
        self.world = advance_tick(self.world)
        self.ped = ped_mod.tick_compliance(self.ped)

        d_post = distance_robot_pedestrian(self.world)
        self.d_min = min(self.d_min, d_post)
        if d_post >= self.s.reward.d_comfort:
            self.comfort_ticks += 1
        self.terminal = check_termination(self.world)
        if self.terminal == TerminalKind.COLLISION:
            self.human_collision = agents_overlap(self.world.robot, self.world.pedestrian)

        if self.tracker is not None and self.tracker.status == TrackerStatus.PENDING:
            status = self.tracker.update(self.world, d_post, self.terminal != TerminalKind.RUNNING)
            if status == TrackerStatus.COMPLIED:
                resolution = InteractionResolution(
                    initiator="pedestrian", fulfilled=True,
                    tick=self.world.tick, intent=self.tracker.demand,
                )
                self.cond_code = IntentCode.NONE

        if self.encounter_active and d_post > self.s.irvo.d_release:
            self._close_encounter()

        ctx = TickContext(
            terminal=self.terminal,
            d_min_episode=self.d_min,
            p_prev=p_prev,
            p_now=self.world.robot.position,
            p_goal=self.world.goal,
            resolution=resolution,
        )
        breakdown = tick_reward(ctx, self.s.reward)
        self.return_sum += breakdown.total

        self.hist = build_position_history(self.hist, self.world)
        obs = self.observation()
        self.records.append(self._tick_record(code, v, w, breakdown, d_post, events))
        return StepResult(breakdown, self.terminal, obs, events, resolution)

    # -- bookkeeping ---------------------------------------------------------

    def _tick_record(self, code, v, w, breakdown, dist, events) -> dict:
        r, p = self.world.robot, self.world.pedestrian
        return {
            "type": "tick",
            "tick": self.world.tick,
            "robot": [r.position[0], r.position[1], r.heading,
                      r.linear_velocity[0], r.linear_velocity[1]],
            "pedestrian": [p.position[0], p.position[1], p.heading,
                           p.linear_velocity[0], p.linear_velocity[1]],
            "goal": [self.world.goal[0], self.world.goal[1]],
            "action": {"code": code.value, "v": v, "w": w},
            "reward": breakdown.to_dict(),
            "distance": dist,
            "condition": self.cond_code.value,
            "events": [e.to_dict() for e in events],
            "terminal": self.terminal.value,
        }

    def outcome(self) -> EpisodeOutcome:
        if self.terminal == TerminalKind.RUNNING:
            raise RuntimeError("episode still running")
        return EpisodeOutcome(
            terminal=self.terminal,
            steps=self.world.tick,
            min_human_distance=self.d_min,
            comfort_ticks=self.comfort_ticks,
            total_ticks=self.world.tick,
            human_collision=self.human_collision,
            episode_return=self.return_sum,
            dialogue=list(self.dialogue),
        )
