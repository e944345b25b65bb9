"""Deterministic 2D kinematic world: scenes, agent motion, collisions, episode lifecycle.

The robot is a unicycle driven by (v, w) commands; the pedestrian is a holonomic
point driven by a velocity vector chosen elsewhere. One simulation tick advances
both agents by ``dt`` seconds. All collision checks are discrete; with the
configured speed and step limits the per-step displacement is small enough that
tunneling through walls or agents is impossible (asserted in the integrators).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import point_segment_distance, unit, wrap_angle

V_MAX = 0.6          # robot linear velocity bound (m/s)
W_MAX = 0.9          # robot angular velocity bound (rad/s)
PED_SPEED = 0.5      # pedestrian preferred speed (m/s)

# Largest per-tick displacement that keeps discrete collision checks sound
# (must stay below the smallest agent diameter).
MAX_STEP_DISPLACEMENT = 0.45


class SceneKind(str, enum.Enum):
    SQUARE = "square"
    HALLWAY = "hallway"
    CROSSWALK = "crosswalk"


class TerminalKind(str, enum.Enum):
    RUNNING = "running"
    SUCCESS = "success"
    COLLISION = "collision"
    TIMEOUT = "timeout"


class ContractViolation(ValueError):
    """An operation was called outside its documented precondition."""


class SpawnError(RuntimeError):
    """Rejection sampling could not place agents; the scene spec is likely malformed."""


@dataclass
class WorldParams:
    """Fixed per-episode physical constants."""

    dt: float = 0.5
    max_steps: int = 100
    robot_radius: float = 0.3
    ped_radius: float = 0.3
    goal_radius: float = 0.4


@dataclass
class AgentState:
    """Pose, velocity and footprint radius of one agent in the world frame."""

    position: np.ndarray
    heading: float
    linear_velocity: np.ndarray
    radius: float

    def copy(self) -> "AgentState":
        return AgentState(
            position=self.position.copy(),
            heading=self.heading,
            linear_velocity=self.linear_velocity.copy(),
            radius=self.radius,
        )


@dataclass
class ScenarioSpec:
    """Scene geometry plus the spawn rule selected by ``kind``."""

    kind: SceneKind
    walls: np.ndarray                      # (N, 4) segments (x1, y1, x2, y2)
    arena_bounds: tuple[float, float, float, float]

    def validate(self) -> None:
        if self.walls.ndim != 2 or self.walls.shape[1] != 4:
            raise ContractViolation("walls must be an (N, 4) array of segments")
        xmin, ymin, xmax, ymax = self.arena_bounds
        if not (xmax > xmin and ymax > ymin):
            raise ContractViolation("arena_bounds must span a positive area")


@dataclass
class WorldState:
    robot: AgentState
    pedestrian: AgentState
    goal: np.ndarray
    ped_goal: np.ndarray
    tick: int
    dt: float
    rng: np.random.Generator
    spec: ScenarioSpec
    params: WorldParams = field(default_factory=WorldParams)

    def copy_shallow(self) -> "WorldState":
        """Copy agent state; shares spec/params/rng (rng advances globally per episode)."""
        return replace(
            self,
            robot=self.robot.copy(),
            pedestrian=self.pedestrian.copy(),
            goal=self.goal.copy(),
            ped_goal=self.ped_goal.copy(),
        )


def wall_clearance(position, walls: np.ndarray) -> float:
    """Distance from a point to the nearest wall segment (inf with no walls)."""
    if walls.size == 0:
        return math.inf
    return min(point_segment_distance(position, w[0:2], w[2:4]) for w in walls)


def _sample_point(rng, bounds, clearance, walls) -> np.ndarray | None:
    xmin, ymin, xmax, ymax = bounds
    p = np.array(
        [rng.uniform(xmin + clearance, xmax - clearance),
         rng.uniform(ymin + clearance, ymax - clearance)]
    )
    if wall_clearance(p, walls) < clearance:
        return None
    return p


def _spawn_square(spec, rng, params):
    clear = params.robot_radius + 0.1
    min_sep = 2.0 * (params.robot_radius + params.ped_radius)
    for _ in range(200):
        robot_pos = _sample_point(rng, spec.arena_bounds, clear, spec.walls)
        goal = _sample_point(rng, spec.arena_bounds, params.goal_radius, spec.walls)
        ped_pos = _sample_point(rng, spec.arena_bounds, clear, spec.walls)
        ped_goal = _sample_point(rng, spec.arena_bounds, clear, spec.walls)
        if any(p is None for p in (robot_pos, goal, ped_pos, ped_goal)):
            continue
        if np.linalg.norm(goal - robot_pos) < 3.0:
            continue
        if np.linalg.norm(ped_goal - ped_pos) < 2.0:
            continue
        if np.linalg.norm(ped_pos - robot_pos) < min_sep:
            continue
        return robot_pos, goal, ped_pos, ped_goal
    raise SpawnError("square spawn failed after 200 attempts")


def _spawn_hallway(spec, rng, params):
    xmin, ymin, xmax, ymax = spec.arena_bounds
    band = (ymin + 0.8, ymax - 0.8)
    robot_pos = np.array([rng.uniform(xmin + 0.6, xmin + 1.2), rng.uniform(*band)])
    goal = np.array([rng.uniform(xmax - 1.2, xmax - 0.6), rng.uniform(*band)])
    ped_pos = np.array([rng.uniform(xmax - 1.2, xmax - 0.6), rng.uniform(*band)])
    ped_goal = np.array([rng.uniform(xmin + 0.6, xmin + 1.2), rng.uniform(*band)])
    return robot_pos, goal, ped_pos, ped_goal


def _spawn_crosswalk(spec, rng, params):
    # Two 3 m corridors crossing at the center of an 8x8 footprint. The robot
    # travels the horizontal corridor, the pedestrian the vertical one; travel
    # directions are randomized independently.
    lo, hi = 3.2, 4.8  # usable band across each corridor width
    near, far = (0.6, 1.6), (6.4, 7.4)
    robot_west = bool(rng.integers(2))
    ped_north = bool(rng.integers(2))
    rx = rng.uniform(*(near if robot_west else far))
    gx = rng.uniform(*(far if robot_west else near))
    robot_pos = np.array([rx, rng.uniform(lo, hi)])
    goal = np.array([gx, rng.uniform(lo, hi)])
    py = rng.uniform(*(far if ped_north else near))
    pgy = rng.uniform(*(near if ped_north else far))
    ped_pos = np.array([rng.uniform(lo, hi), py])
    ped_goal = np.array([rng.uniform(lo, hi), pgy])
    return robot_pos, goal, ped_pos, ped_goal


_SPAWNERS = {
    SceneKind.SQUARE: _spawn_square,
    SceneKind.HALLWAY: _spawn_hallway,
    SceneKind.CROSSWALK: _spawn_crosswalk,
}


def spawn_scenario(spec: ScenarioSpec, seed: int, params: WorldParams | None = None) -> WorldState:
    """Place robot, goal and pedestrian per the scene's spawn rule.

    Deterministic for a fixed (spec, seed). The robot-pedestrian separation is
    at least twice the sum of their radii; all spawn points keep radius
    clearance from walls.
    """
    params = params or WorldParams()
    spec.validate()
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    min_sep = 2.0 * (params.robot_radius + params.ped_radius)
    spawner = _SPAWNERS[spec.kind]
    for _ in range(200):
        robot_pos, goal, ped_pos, ped_goal = spawner(spec, rng, params)
        if np.linalg.norm(ped_pos - robot_pos) < min_sep:
            continue
        clear_ok = (
            wall_clearance(robot_pos, spec.walls) >= params.robot_radius
            and wall_clearance(ped_pos, spec.walls) >= params.ped_radius
        )
        if not clear_ok:
            continue
        robot_heading = math.atan2(*(goal - robot_pos)[::-1])
        ped_heading = math.atan2(*(ped_goal - ped_pos)[::-1])
        robot = AgentState(robot_pos, wrap_angle(robot_heading), np.zeros(2), params.robot_radius)
        ped = AgentState(ped_pos, wrap_angle(ped_heading), np.zeros(2), params.ped_radius)
        return WorldState(
            robot=robot,
            pedestrian=ped,
            goal=goal,
            ped_goal=ped_goal,
            tick=0,
            dt=params.dt,
            rng=rng,
            spec=spec,
            params=params,
        )
    raise SpawnError(f"could not spawn scenario kind={spec.kind.value} after 200 attempts")


def step_robot(world: WorldState, v: float, w: float) -> WorldState:
    """Advance the robot one tick with a heading-first unicycle update.

    The tick counter is untouched; the episode driver advances it after both
    agents have moved.
    """
    if not (0.0 <= v <= V_MAX + 1e-9):
        raise ContractViolation(f"linear velocity {v} outside [0, {V_MAX}]")
    if not (-W_MAX - 1e-9 <= w <= W_MAX + 1e-9):
        raise ContractViolation(f"angular velocity {w} outside [-{W_MAX}, {W_MAX}]")
    new = world.copy_shallow()
    heading = wrap_angle(world.robot.heading + w * world.dt)
    step = v * world.dt * unit(heading)
    assert np.linalg.norm(step) <= MAX_STEP_DISPLACEMENT, "robot step too large for discrete collision checks"
    new.robot.heading = heading
    new.robot.position = world.robot.position + step
    new.robot.linear_velocity = v * unit(heading)
    return new


def step_pedestrian(world: WorldState, velocity: np.ndarray) -> WorldState:
    """Advance the pedestrian one tick along a velocity vector, sliding off walls."""
    new = world.copy_shallow()
    vel = np.asarray(velocity, dtype=np.float64)
    step = vel * world.dt
    assert np.linalg.norm(step) <= MAX_STEP_DISPLACEMENT, "pedestrian step too large"
    target = world.pedestrian.position + step
    # Pedestrians never clip through walls: drop the move if it would overlap.
    if wall_clearance(target, world.spec.walls) < world.pedestrian.radius:
        axis_x = world.pedestrian.position + np.array([step[0], 0.0])
        axis_y = world.pedestrian.position + np.array([0.0, step[1]])
        if wall_clearance(axis_x, world.spec.walls) >= world.pedestrian.radius:
            target, vel = axis_x, np.array([vel[0], 0.0])
        elif wall_clearance(axis_y, world.spec.walls) >= world.pedestrian.radius:
            target, vel = axis_y, np.array([0.0, vel[1]])
        else:
            target, vel = world.pedestrian.position.copy(), np.zeros(2)
    new.pedestrian.position = target
    new.pedestrian.linear_velocity = vel
    speed = np.linalg.norm(vel)
    if speed > 1e-9:
        new.pedestrian.heading = wrap_angle(math.atan2(vel[1], vel[0]))
    return new


def advance_tick(world: WorldState) -> WorldState:
    new = world.copy_shallow()
    new.tick = world.tick + 1
    return new


def robot_hits_wall(world: WorldState) -> bool:
    if world.spec.walls.size == 0:
        return False
    return wall_clearance(world.robot.position, world.spec.walls) < world.robot.radius


def agents_overlap(a: AgentState, b: AgentState) -> bool:
    return float(np.linalg.norm(a.position - b.position)) < a.radius + b.radius


def distance_robot_pedestrian(world: WorldState) -> float:
    """Surface separation: center distance minus both radii, floored at zero."""
    center = float(np.linalg.norm(world.robot.position - world.pedestrian.position))
    return max(0.0, center - world.robot.radius - world.pedestrian.radius)


def check_termination(world: WorldState) -> TerminalKind:
    """Episode status for the current tick; collision outranks success."""
    if robot_hits_wall(world) or agents_overlap(world.robot, world.pedestrian):
        return TerminalKind.COLLISION
    if float(np.linalg.norm(world.robot.position - world.goal)) < world.params.goal_radius:
        return TerminalKind.SUCCESS
    if world.tick >= world.params.max_steps:
        return TerminalKind.TIMEOUT
    return TerminalKind.RUNNING
