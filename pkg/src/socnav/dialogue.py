"""Dialogue layer: utterance parsing, robot utterance generation, intent encoding.

Text flows in two directions. Pedestrian (or human operator) text is parsed
into an intent code by a deterministic phrase grammar; the active intent is
encoded as a one-hot condition vector that conditions the policy. Robot
discrete actions are rendered to text from a fixed template table, optionally
replaced by an external language-model bridge whose output is validated and
falls back to the template on any failure. Intent codes, not text, drive the
simulation, so bridge availability never changes trajectories.
"""

from __future__ import annotations

import enum
import logging
import re
from dataclasses import dataclass, field

import numpy as np
import requests

log = logging.getLogger(__name__)


class IntentCode(str, enum.Enum):
    # robot-outgoing (the discrete action set)
    NONE = "none"
    STOP = "stop"
    MARGIN_RIGHT = "margin-right"
    MARGIN_LEFT = "margin-left"
    # pedestrian-incoming
    ASK_STOP = "ask-robot-stop"
    ASK_MARGIN_LEFT = "ask-robot-margin-left"
    ASK_MARGIN_RIGHT = "ask-robot-margin-right"
    CLAIM_PRIORITY = "claim-priority"
    WARN_LEFT = "warn-left"
    WARN_RIGHT = "warn-right"


ROBOT_CODES = (IntentCode.NONE, IntentCode.STOP, IntentCode.MARGIN_RIGHT, IntentCode.MARGIN_LEFT)
ROBOT_CODES_2D = (IntentCode.NONE, IntentCode.STOP)

# Incoming codes in condition-vector slot order; index 0 is reserved for "none".
INCOMING_CODES = (
    IntentCode.NONE,
    IntentCode.ASK_STOP,
    IntentCode.ASK_MARGIN_LEFT,
    IntentCode.ASK_MARGIN_RIGHT,
    IntentCode.CLAIM_PRIORITY,
    IntentCode.WARN_LEFT,
    IntentCode.WARN_RIGHT,
)
CONDITION_DIM = len(INCOMING_CODES)
_INCOMING_INDEX = {code: i for i, code in enumerate(INCOMING_CODES)}


class Initiator(str, enum.Enum):
    ROBOT = "robot"
    PEDESTRIAN = "pedestrian"


@dataclass
class DialogueEvent:
    tick: int
    initiator: Initiator
    intent: IntentCode
    text: str

    def __post_init__(self):
        if self.intent != IntentCode.NONE and not self.text:
            raise ValueError("dialogue event with a non-none intent needs utterance text")

    def to_dict(self) -> dict:
        return {
            "tick": self.tick,
            "initiator": self.initiator.value,
            "intent": self.intent.value,
            "text": self.text,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DialogueEvent":
        return cls(
            tick=int(d["tick"]),
            initiator=Initiator(d["initiator"]),
            intent=IntentCode(d["intent"]),
            text=d["text"],
        )


# ---------------------------------------------------------------------------
# Parsing: case-folded keyword rules, checked in priority order. The first
# family whose pattern fires wins; anything unmatched is "none".
# ---------------------------------------------------------------------------

_WARN_WORDS = ("watch out", "watch it", "careful", "look out", "heads up", "behind you")
_CLAIM_PHRASES = (
    "in a hurry", "in a rush", "i'm late", "im late", "running late", "urgent",
    "emergency", "no time", "rushing", "need to get through", "go first",
    "me first", "coming through", "make way",
)
_ANNOUNCE_RE = re.compile(r"\b(i will|i'll)\b")
_STOP_PHRASES = (
    "please stop", "can you stop", "could you stop", "would you stop",
    "let me pass", "let me through", "let me go", "wait for me",
    "wait a moment", "hold on", "hang on", "give way", "yield",
    "do not move", "don't move",
)
_STOP_WORD_RE = re.compile(r"\bstop\b")
_MOVE_WORDS = ("move", "go", "keep", "stay", "shift", "step", "scoot", "over")
_LEFT_RE = re.compile(r"\bleft\b")
_RIGHT_RE = re.compile(r"\bright\b")


def _side(text: str) -> str | None:
    left, right = bool(_LEFT_RE.search(text)), bool(_RIGHT_RE.search(text))
    if left == right:
        return None
    return "left" if left else "right"


def parse_utterance(text: str) -> IntentCode:
    """Map free text to an incoming intent code; unknown text maps to none."""
    t = text.casefold().strip()
    if not t:
        return IntentCode.NONE
    if any(w in t for w in _WARN_WORDS):
        side = _side(t)
        if side == "left":
            return IntentCode.WARN_LEFT
        if side == "right":
            return IntentCode.WARN_RIGHT
        return IntentCode.NONE
    if any(p in t for p in _CLAIM_PHRASES):
        return IntentCode.CLAIM_PRIORITY
    if _ANNOUNCE_RE.search(t):
        # first-person announcements ("I'll move...") are statements, not requests
        return IntentCode.NONE
    if any(p in t for p in _STOP_PHRASES) or _STOP_WORD_RE.search(t):
        return IntentCode.ASK_STOP
    if any(re.search(rf"\b{w}\b", t) for w in _MOVE_WORDS):
        side = _side(t)
        if side == "left":
            return IntentCode.ASK_MARGIN_LEFT
        if side == "right":
            return IntentCode.ASK_MARGIN_RIGHT
    return IntentCode.NONE


def encode_condition(code: IntentCode) -> np.ndarray:
    """One-hot condition vector over incoming codes; slot 0 is the none intent."""
    if code not in _INCOMING_INDEX:
        raise ValueError(f"{code} is not an incoming intent")
    vec = np.zeros(CONDITION_DIM, dtype=np.float32)
    vec[_INCOMING_INDEX[code]] = 1.0
    return vec


# ---------------------------------------------------------------------------
# Generation: fixed phrase per (robot code, pedestrian context intent).
# ---------------------------------------------------------------------------

_TEMPLATES: dict[tuple[IntentCode, IntentCode | None], str] = {
    (IntentCode.STOP, None): "Please stop for a moment so I can pass.",
    (IntentCode.STOP, IntentCode.CLAIM_PRIORITY): "OK, I will stop to let you pass.",
    (IntentCode.STOP, IntentCode.ASK_STOP): "OK, I will stop to let you pass.",
    (IntentCode.STOP, IntentCode.ASK_MARGIN_LEFT): "OK, I will stop to give you space.",
    (IntentCode.STOP, IntentCode.ASK_MARGIN_RIGHT): "OK, I will stop to give you space.",
    (IntentCode.STOP, IntentCode.WARN_LEFT): "Thanks for the warning, I will stop here.",
    (IntentCode.STOP, IntentCode.WARN_RIGHT): "Thanks for the warning, I will stop here.",
    (IntentCode.MARGIN_LEFT, None): "Please move to your left!",
    (IntentCode.MARGIN_RIGHT, None): "Please move to your right!",
    (IntentCode.MARGIN_LEFT, IntentCode.WARN_RIGHT): "I'll move to my left!",
    (IntentCode.MARGIN_RIGHT, IntentCode.WARN_LEFT): "I'll move to my right!",
    (IntentCode.MARGIN_LEFT, IntentCode.ASK_MARGIN_LEFT): "Sure, I'll keep to my left.",
    (IntentCode.MARGIN_RIGHT, IntentCode.ASK_MARGIN_RIGHT): "Sure, I'll keep to my right.",
    (IntentCode.MARGIN_LEFT, IntentCode.CLAIM_PRIORITY): "Go ahead, I'll move to my left.",
    (IntentCode.MARGIN_RIGHT, IntentCode.CLAIM_PRIORITY): "Go ahead, I'll move to my right.",
    (IntentCode.MARGIN_LEFT, IntentCode.ASK_STOP): "I'll step to my left so you can pass.",
    (IntentCode.MARGIN_RIGHT, IntentCode.ASK_STOP): "I'll step to my right so you can pass.",
}

MAX_UTTERANCE_CHARS = 200


def template_utterance(code: IntentCode, context: DialogueEvent | None = None) -> str:
    """Fixed template for a robot code, specialized on the pedestrian's intent."""
    if code == IntentCode.NONE:
        return ""
    ctx = context.intent if context is not None else None
    text = _TEMPLATES.get((code, ctx))
    if text is None:
        text = _TEMPLATES.get((code, None))
    if text is None:
        raise ValueError(f"{code} is not a robot-outgoing code")
    return text


# Canned pedestrian phrasing for simulator-initiated requests (the simulated
# pedestrian "speaks" these; a human session types free text instead).
PED_PHRASES = {
    IntentCode.CLAIM_PRIORITY: "I'm in a hurry",
    IntentCode.ASK_STOP: "Could you let me pass first?",
    IntentCode.ASK_MARGIN_LEFT: "Please move to your left!",
    IntentCode.ASK_MARGIN_RIGHT: "Please move to your right!",
    IntentCode.WARN_LEFT: "Watch out on your left!",
    IntentCode.WARN_RIGHT: "Watch out on your right!",
}


# ---------------------------------------------------------------------------
# Optional external language-model bridge.
# ---------------------------------------------------------------------------


class BridgeError(RuntimeError):
    """The external text service failed; callers fall back to templates."""


@dataclass
class BridgeConfig:
    endpoint: str
    timeout: float = 2.0


def llm_bridge(request: dict, config: BridgeConfig) -> str:
    """One POST to the external service; any failure raises BridgeError.

    Wire format: JSON body {role, intent, transcript}, JSON reply {text}.
    The hard timeout guarantees the simulation tick is never blocked.
    """
    try:
        resp = requests.post(config.endpoint, json=request, timeout=config.timeout)
    except requests.RequestException as exc:
        raise BridgeError(f"bridge request failed: {exc}") from exc
    if resp.status_code != 200:
        raise BridgeError(f"bridge returned status {resp.status_code}")
    try:
        body = resp.json()
    except ValueError as exc:
        raise BridgeError("bridge reply is not JSON") from exc
    if not isinstance(body, dict) or not isinstance(body.get("text"), str):
        raise BridgeError("bridge reply missing 'text'")
    return body["text"]


def _valid_bridge_text(text: str) -> bool:
    return 0 < len(text) <= MAX_UTTERANCE_CHARS and "\n" not in text


@dataclass
class UtteranceGenerator:
    """Template-backed generator with an optional validated bridge override."""

    bridge: BridgeConfig | None = None
    transcript: list[dict] = field(default_factory=list)

    def generate(self, code: IntentCode, context: DialogueEvent | None = None) -> str:
        fallback = template_utterance(code, context)
        if self.bridge is None or code == IntentCode.NONE:
            return fallback
        request = {
            "role": "robot",
            "intent": code.value,
            "transcript": list(self.transcript),
        }
        try:
            text = llm_bridge(request, self.bridge)
        except BridgeError as exc:
            log.warning("bridge failed (%s); using template", exc)
            return fallback
        if not _valid_bridge_text(text):
            log.warning("bridge reply failed validation; using template")
            return fallback
        return text

    def record(self, sender: str, text: str) -> None:
        self.transcript.append({"sender": sender, "text": text})
