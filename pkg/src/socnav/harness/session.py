"""Live session engine: a human drives the pedestrian and chats with the robot.

Transport-free state machine spoken to in SessionMessage dicts (schema in
docs/protocol.md, version field in every message). The engine owns one
episode at a time; the pedestrian has no simulated policy here, it moves only
on the client's control commands, applied at the next tick boundary. Chat text
is parsed into an intent that conditions the policy from the next observation;
robot interaction codes surface back as chat messages. In session mode a chat
request opens its exchange regardless of distance (the human spoke, the robot
answers), while robot-initiated requests still require proximity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dialogue import IntentCode, UtteranceGenerator
from ..episode import EpisodeRunner, EpisodeSettings
from ..rewards import RewardBreakdown
from ..world import TerminalKind

PROTOCOL_VERSION = 1


def _agent_dict(agent) -> dict:
    return {
        "x": float(agent.position[0]),
        "y": float(agent.position[1]),
        "heading": float(agent.heading),
        "vx": float(agent.linear_velocity[0]),
        "vy": float(agent.linear_velocity[1]),
        "radius": float(agent.radius),
    }


@dataclass
class SessionState:
    awaiting_reset: bool = False


class SessionEngine:
    def __init__(self, run_config, policy, scene_name: str | None = None):
        self.cfg = run_config
        self.policy = policy
        self.scene_name = scene_name or run_config.scene
        self.seed = run_config.seed
        self.state = SessionState()
        self._control = np.zeros(2)
        self._last_reward = RewardBreakdown()
        self._start_episode(self.scene_name, self.seed)

    def _start_episode(self, scene: str, seed: int) -> None:
        cfg = self.cfg
        cfg.scene = scene
        settings: EpisodeSettings = cfg.episode_settings(ped_source="external")
        self.runner = EpisodeRunner(settings, seed, utterances=UtteranceGenerator(bridge=cfg.bridge()))
        self.obs = self.runner.observation()
        self._last_reward = RewardBreakdown()
        self.state.awaiting_reset = False

    # -- inbound -----------------------------------------------------------

    def handle_message(self, msg) -> list[dict]:
        """Apply one client message; returns immediate replies (not frames)."""
        if not isinstance(msg, dict) or "type" not in msg:
            return [self._error("malformed message: expected an object with a 'type'")]
        kind = msg.get("type")
        if kind == "control":
            try:
                self._control = np.array([float(msg["vx"]), float(msg["vy"])])
            except (KeyError, TypeError, ValueError):
                return [self._error("control needs numeric vx, vy")]
            return []
        if kind == "chat":
            text = msg.get("text", "")
            if not isinstance(text, str) or not text:
                return [self._error("chat needs nonempty text")]
            intent, event = self.runner.inject_chat(text)
            echo = self._chat_message("pedestrian", text, intent)
            return [echo]
        if kind == "reset":
            scene = msg.get("scene") or self.scene_name
            seed = msg.get("seed")
            self.seed = int(seed) if seed is not None else self.seed + 1
            self.scene_name = scene
            self._start_episode(scene, self.seed)
            return [{"v": PROTOCOL_VERSION, "type": "info", "kind": "status",
                     "text": f"reset scene={scene} seed={self.seed}"}]
        return [self._error(f"unknown message type {kind!r}")]

    # -- outbound ------------------------------------------------------------

    def tick(self) -> list[dict]:
        """Advance one simulation tick; returns frame plus any chat/info messages."""
        if self.state.awaiting_reset:
            return []
        action = self.policy.act(self.obs, mode="deterministic")
        result = self.runner.step(action.code, action.v, action.w, ped_velocity=self._control)
        self.obs = result.observation
        self._last_reward = result.reward
        out = []
        for event in result.events:
            if event.initiator.value == "robot":
                out.append(self._chat_message("robot", event.text, event.intent))
        out.append(self.frame_message())
        if result.terminal != TerminalKind.RUNNING:
            outcome = self.runner.outcome()
            out.append({
                "v": PROTOCOL_VERSION,
                "type": "info",
                "kind": "terminal",
                "terminal": result.terminal.value,
                "steps": outcome.steps,
                "min_human_distance": outcome.min_human_distance,
                "episode_return": outcome.episode_return,
            })
            if self.cfg.session.auto_reset:
                self.seed += 1
                self._start_episode(self.scene_name, self.seed)
            else:
                self.state.awaiting_reset = True
        return out

    def frame_message(self) -> dict:
        world = self.runner.world
        return {
            "v": PROTOCOL_VERSION,
            "type": "frame",
            "tick": world.tick,
            "robot": _agent_dict(world.robot),
            "pedestrian": _agent_dict(world.pedestrian),
            "goal": [float(world.goal[0]), float(world.goal[1])],
            "walls": [[float(x) for x in row] for row in world.spec.walls],
            "reward": self._last_reward.to_dict(),
            "distance": float(np.linalg.norm(world.robot.position - world.pedestrian.position)
                              - world.robot.radius - world.pedestrian.radius),
            "condition": self.runner.cond_code.value,
            "terminal": self.runner.terminal.value,
        }

    def _chat_message(self, sender: str, text: str, intent: IntentCode) -> dict:
        return {
            "v": PROTOCOL_VERSION,
            "type": "chat",
            "sender": sender,
            "text": text,
            "intent": intent.value,
            "tick": self.runner.world.tick,
        }

    def _error(self, text: str) -> dict:
        return {"v": PROTOCOL_VERSION, "type": "info", "kind": "error", "text": text}
