"""Interactive RVO pedestrian.

The pedestrian walks toward its own goal with a sampled-candidate reciprocal
velocity obstacle policy, complies with robot requests (halt, shift left or
right), and can stochastically initiate its own request once per encounter.

A pedestrian that has just initiated a request behaves assertively until the
encounter ends: it expects the robot to resolve the conflict, so it avoids
late and cuts close (stop/priority claims) or commits to a lane of the shared
corridor (margin claims). A robot that cannot read the request has to survive
that behavior on geometry alone.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .dialogue import IntentCode
from .geometry import cross_z, time_to_circle_overlap
from .world import AgentState, WorldState

PED_REQUESTS = (
    IntentCode.ASK_STOP,
    IntentCode.ASK_MARGIN_LEFT,
    IntentCode.ASK_MARGIN_RIGHT,
    IntentCode.CLAIM_PRIORITY,
)


@dataclass
class IrvoParams:
    preferred_speed: float = 0.5
    k_candidates: int = 64
    avoid_weight: float = 1.0        # w in cost = w / ttc + deviation
    ttc_floor: float = 0.1
    left_bias: float = 1e-3          # tie-break: leftward candidates cost extra
    inertia_weight: float = 0.3      # damps side dithering between replans
    side_commit_ttc: float = 6.0     # commit to a passing side under this straight-path ttc
    side_penalty: float = 0.4        # cost for candidates crossing the committed side
    safety_margin: float = 0.25      # added to radius sum when predicting collisions
    sensing_radius: float = 4.0
    n_stop: int = 8                  # ticks a stop request freezes the pedestrian
    m_offset: float = 0.8            # lateral offset honored on margin requests
    d_int: float = 2.5               # encounter trigger distance (surface)
    d_release: float = 3.5           # encounter ends beyond this separation
    p_r: float = 0.5                 # chance the pedestrian initiates the dialogue
    lateral_rate: float = 0.35       # max sideways speed while executing a margin
    # assertive behavior after initiating a request
    assertive_weight: float = 0.4
    assertive_margin: float = 0.0
    claim_offset: float = 0.5        # lane offset committed to on margin claims


class ComplianceKind(str, enum.Enum):
    FREE = "free"
    STOPPED = "stopped"
    MARGINED = "margined"


@dataclass
class Compliance:
    kind: ComplianceKind = ComplianceKind.FREE
    ticks_remaining: int = 0
    side: str = ""                   # "left" / "right" in the pedestrian frame
    offset_target: float = 0.0
    anchor: np.ndarray = field(default_factory=lambda: np.zeros(2))
    direction: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0]))


@dataclass
class PedestrianPolicyState:
    goal: np.ndarray
    preferred_speed: float = 0.5
    compliance: Compliance = field(default_factory=Compliance)
    request_pending: IntentCode | None = None
    assertive: bool = False
    pass_side: str | None = None     # committed passing side for the active conflict


def time_to_collision(a: AgentState, b: AgentState, v_a: np.ndarray) -> float:
    """Seconds until the two discs touch if a moves at v_a and b keeps its velocity."""
    rel = np.asarray(v_a, dtype=np.float64) - b.linear_velocity
    return time_to_circle_overlap(a.position - b.position, rel, a.radius + b.radius)


def _toward(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    d = dst - src
    n = np.linalg.norm(d)
    return d / n if n > 1e-9 else np.array([1.0, 0.0])


def _margin_velocity(ped: PedestrianPolicyState, world: WorldState, params: IrvoParams) -> np.ndarray:
    """Scripted lane-shift: close the lateral error without overshoot, keep walking."""
    comp = ped.compliance
    pos = world.pedestrian.position
    d = comp.direction
    n_left = np.array([-d[1], d[0]])
    signed_target = comp.offset_target if comp.side == "left" else -comp.offset_target
    offset = float((pos - comp.anchor) @ n_left)
    err = signed_target - offset
    rate = min(abs(err) / world.dt, params.lateral_rate)
    lat = math.copysign(rate, err) if abs(err) > 1e-9 else 0.0
    fwd = math.sqrt(max(ped.preferred_speed ** 2 - lat * lat, 0.0))
    return fwd * d + lat * n_left


def select_velocity(
    ped: PedestrianPolicyState, world: WorldState, params: IrvoParams | None = None
) -> np.ndarray:
    """Pick the pedestrian's velocity for this tick.

    Compliance overrides (halt / scripted lane shift) take precedence; otherwise
    the minimum-cost velocity over sampled candidates plus the preferred velocity
    wins, with collision times computed under the RVO half-responsibility map
    (candidate u is evaluated as 2u - v_current against the robot's velocity).
    Deterministic given the world rng stream.
    """
    params = params or IrvoParams()
    if ped.compliance.kind == ComplianceKind.STOPPED:
        return np.zeros(2)

    pos = world.pedestrian.position
    to_goal = ped.goal - pos
    goal_dist = float(np.linalg.norm(to_goal))
    if goal_dist < 1e-3:
        return np.zeros(2)

    if ped.compliance.kind == ComplianceKind.MARGINED:
        return _margin_velocity(ped, world, params)

    speed_cap = min(ped.preferred_speed, goal_dist / world.dt)
    v_pref = _toward(pos, ped.goal) * speed_cap

    center_dist = float(np.linalg.norm(world.robot.position - pos))
    if center_dist > params.sensing_radius:
        return v_pref

    k = params.k_candidates
    radii = np.sqrt(world.rng.uniform(0.0, 1.0, size=k)) * speed_cap
    angles = world.rng.uniform(-math.pi, math.pi, size=k)
    candidates = np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
    candidates = np.vstack([v_pref[None, :], candidates])

    weight = params.assertive_weight if ped.assertive else params.avoid_weight
    margin = params.assertive_margin if ped.assertive else params.safety_margin
    radius_sum = world.pedestrian.radius + world.robot.radius + margin
    dp = pos - world.robot.position
    v_cur = world.pedestrian.linear_velocity

    if ped.pass_side is None:
        # On a conflict course, commit to passing on the side the robot is NOT
        # offset toward (right on a dead head-on). The commitment persists for
        # the encounter; without it the two symmetric escape routes alternate
        # with the candidate sampling and the pedestrian dithers into contact.
        rel0 = (2.0 * v_pref - v_cur) - world.robot.linear_velocity
        ttc0 = time_to_circle_overlap(dp, rel0, radius_sum)
        if ttc0 < params.side_commit_ttc:
            off = cross_z(v_pref, world.robot.position - pos)
            ped.pass_side = "left" if off < -0.15 else "right"

    best_cost, best_v = math.inf, v_pref
    for u in candidates:
        rel = (2.0 * u - v_cur) - world.robot.linear_velocity
        ttc = time_to_circle_overlap(dp, rel, radius_sum)
        lateral = cross_z(v_pref, u)
        cost = float(np.linalg.norm(u - v_pref))
        cost += params.inertia_weight * float(np.linalg.norm(u - v_cur))
        if math.isfinite(ttc):
            cost += weight / max(ttc, params.ttc_floor)
        if lateral > 1e-12:
            cost += params.left_bias
        if ped.pass_side == "right" and lateral > 1e-12:
            cost += params.side_penalty
        elif ped.pass_side == "left" and lateral < -1e-12:
            cost += params.side_penalty
        if cost < best_cost:
            best_cost, best_v = cost, u
    return best_v


def apply_request(
    ped: PedestrianPolicyState,
    code: IntentCode,
    world: WorldState,
    params: IrvoParams | None = None,
) -> PedestrianPolicyState:
    """Honor a robot request; a new request overwrites the previous compliance."""
    params = params or IrvoParams()
    if code == IntentCode.NONE:
        return ped
    if code == IntentCode.STOP:
        comp = Compliance(kind=ComplianceKind.STOPPED, ticks_remaining=params.n_stop)
    elif code in (IntentCode.MARGIN_LEFT, IntentCode.MARGIN_RIGHT):
        side = "left" if code == IntentCode.MARGIN_LEFT else "right"
        comp = Compliance(
            kind=ComplianceKind.MARGINED,
            side=side,
            offset_target=params.m_offset,
            anchor=world.pedestrian.position.copy(),
            direction=_toward(world.pedestrian.position, ped.goal),
        )
    else:
        raise ValueError(f"{code} is not a robot request the pedestrian can honor")
    return replace(ped, compliance=comp)


def apply_self_claim(
    ped: PedestrianPolicyState,
    code: IntentCode,
    world: WorldState,
    params: IrvoParams | None = None,
) -> PedestrianPolicyState:
    """Commit the pedestrian to the behavior backing its own request.

    Stop/priority claims make it assertive (late, close-cutting avoidance);
    margin claims commit it to the complementary lane: asking the robot to
    shift left means the pedestrian takes its own left lane, so the two clear
    each other only if the robot actually complies.
    """
    params = params or IrvoParams()
    if code in (IntentCode.ASK_STOP, IntentCode.CLAIM_PRIORITY):
        return replace(ped, assertive=True)
    if code in (IntentCode.ASK_MARGIN_LEFT, IntentCode.ASK_MARGIN_RIGHT):
        side = "left" if code == IntentCode.ASK_MARGIN_LEFT else "right"
        comp = Compliance(
            kind=ComplianceKind.MARGINED,
            side=side,
            offset_target=params.claim_offset,
            anchor=world.pedestrian.position.copy(),
            direction=_toward(world.pedestrian.position, ped.goal),
        )
        return replace(ped, compliance=comp, assertive=True)
    raise ValueError(f"{code} is not a pedestrian-initiated request")


def release(ped: PedestrianPolicyState) -> PedestrianPolicyState:
    """Encounter over: drop compliance, assertiveness and the side commitment."""
    return replace(ped, compliance=Compliance(), assertive=False,
                   request_pending=None, pass_side=None)


def tick_compliance(ped: PedestrianPolicyState) -> PedestrianPolicyState:
    """Advance timed compliance state by one tick (stop expires after n_stop)."""
    comp = ped.compliance
    if comp.kind != ComplianceKind.STOPPED:
        return ped
    remaining = comp.ticks_remaining - 1
    if remaining <= 0:
        return replace(ped, compliance=Compliance())
    return replace(ped, compliance=replace(comp, ticks_remaining=remaining))


def maybe_initiate_request(
    ped: PedestrianPolicyState,
    world: WorldState,
    p_r: float,
) -> IntentCode | None:
    """One coin flip per encounter: with probability p_r the pedestrian speaks.

    The episode driver calls this exactly once, on the tick an encounter opens.
    The request is uniform over the pedestrian request set.
    """
    if world.rng.random() >= p_r:
        return None
    return PED_REQUESTS[int(world.rng.integers(len(PED_REQUESTS)))]
