"""Sensor simulation and policy inputs.

The robot perceives the world through a simulated 180-degree laser scan and an
egocentric 4-channel grid (laser hits, pedestrian footprint, pedestrian
velocity in the robot frame), plus a 9-number relative-goal history and the
one-hot dialogue condition vector.

Grid frame convention: robot-frame x points along the heading (forward), y to
the robot's left. The grid window covers forward in [0, 6) m and lateral in
(-3, 3] m at 0.125 m per cell; array axes are [channel, row, col] with row 47
at the robot (bottom) and col 0 at the far left, so printing a channel shows
the scene as the robot sees it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import wrap_angle
from .world import WorldState


@dataclass
class SensorParams:
    n_beams: int = 180
    max_range: float = 6.0
    grid_size: int = 48
    resolution: float = 0.125

    @property
    def half_width(self) -> float:
        return self.grid_size * self.resolution / 2.0


@dataclass
class LaserScan:
    ranges: np.ndarray          # (n_beams,) beam i at angle (-90 + i) degrees
    max_range: float
    tick: int


@dataclass
class GridObservation:
    channels: np.ndarray        # (4, H, W) float32
    resolution: float
    tick: int


@dataclass
class PositionHistory:
    """Last three (goal distance, goal bearing, heading alignment) triples.

    Bearing is the goal direction in the robot frame. Alignment is the robot's
    heading relative to the episode-start robot-to-goal direction, i.e. how far
    the robot has turned off its nominal approach line.
    """

    triples: np.ndarray         # (3, 3), oldest first
    ref_bearing: float          # world-frame robot->goal angle at episode start
    tick: int

    def flat(self) -> np.ndarray:
        return self.triples.reshape(-1)


def _goal_triple(world: WorldState, ref_bearing: float) -> np.ndarray:
    delta = world.goal - world.robot.position
    dist = float(np.linalg.norm(delta))
    if dist > 1e-9:
        bearing = wrap_angle(math.atan2(delta[1], delta[0]) - world.robot.heading)
    else:
        bearing = 0.0
    alignment = wrap_angle(world.robot.heading - ref_bearing)
    return np.array([dist, bearing, alignment], dtype=np.float64)


def initial_position_history(world: WorldState) -> PositionHistory:
    """History at episode start: all three slots hold the tick-0 triple."""
    delta = world.goal - world.robot.position
    ref = math.atan2(delta[1], delta[0]) if np.linalg.norm(delta) > 1e-9 else world.robot.heading
    triple = _goal_triple(world, ref)
    return PositionHistory(np.tile(triple, (3, 1)), ref, world.tick)


def build_position_history(prev: PositionHistory, world: WorldState) -> PositionHistory:
    """Shift the window one tick and append the current triple."""
    triples = np.vstack([prev.triples[1:], _goal_triple(world, prev.ref_bearing)])
    return PositionHistory(triples, prev.ref_bearing, world.tick)


def raycast(world: WorldState, params: SensorParams | None = None) -> LaserScan:
    """Cast all beams from the robot center against walls and the pedestrian.

    Each range is the distance to the nearest intersection, clamped to
    max_range and floored just above zero.
    """
    params = params or SensorParams()
    angles = world.robot.heading + np.deg2rad(-90.0 + np.arange(params.n_beams, dtype=np.float64))
    dirs = np.stack([np.cos(angles), np.sin(angles)], axis=1)          # (B, 2)
    best = np.full(params.n_beams, np.inf)

    walls = world.spec.walls
    if walls.size:
        o = world.robot.position
        a = walls[:, 0:2]
        e = walls[:, 2:4] - a                                          # (S, 2)
        ao = a[None, :, :] - o[None, None, :]                          # (1, S, 2)
        denom = dirs[:, 0:1] * e[None, :, 1] - dirs[:, 1:2] * e[None, :, 0]   # (B, S)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (ao[..., 0] * e[None, :, 1] - ao[..., 1] * e[None, :, 0]) / denom
            s = (ao[..., 0] * dirs[:, 1:2] - ao[..., 1] * dirs[:, 0:1]) / denom
        t = np.where(np.isfinite(t) & (t >= 0.0) & (s >= 0.0) & (s <= 1.0), t, np.inf)
        best = t.min(axis=1)

    # pedestrian circle
    oc = world.robot.position - world.pedestrian.position
    b = dirs @ oc                                                      # (B,)
    c0 = float(oc @ oc) - world.pedestrian.radius ** 2
    if c0 <= 0.0:
        best = np.zeros_like(best)
    else:
        disc = b * b - c0
        ok = disc >= 0.0
        root = np.sqrt(np.where(ok, disc, 0.0))
        t_near = -b - root
        t_far = -b + root
        t_circ = np.where(t_near >= 0.0, t_near, np.where(t_far >= 0.0, t_far, np.inf))
        t_circ = np.where(ok, t_circ, np.inf)
        best = np.minimum(best, t_circ)

    ranges = np.clip(best, 1e-6, params.max_range)
    return LaserScan(ranges=ranges, max_range=params.max_range, tick=world.tick)


def _to_robot_frame(vec: np.ndarray, heading: float) -> np.ndarray:
    c, s = math.cos(-heading), math.sin(-heading)
    return np.array([c * vec[0] - s * vec[1], s * vec[0] + c * vec[1]])


def rasterize(world: WorldState, scan: LaserScan, params: SensorParams | None = None) -> GridObservation:
    """Paint laser hits and the pedestrian into the egocentric grid."""
    params = params or SensorParams()
    n = params.grid_size
    res = params.resolution
    half = params.half_width
    grid = np.zeros((4, n, n), dtype=np.float32)

    # ch0: endpoints of beams that actually hit something
    hit = scan.ranges < scan.max_range - 1e-9
    if hit.any():
        phis = np.deg2rad(-90.0 + np.arange(params.n_beams, dtype=np.float64))[hit]
        r = scan.ranges[hit]
        fwd = r * np.cos(phis)
        left = r * np.sin(phis)
        rows = (n - 1) - np.floor(fwd / res).astype(int)
        cols = np.floor((half - left) / res).astype(int)
        keep = (rows >= 0) & (rows < n) & (cols >= 0) & (cols < n)
        grid[0, rows[keep], cols[keep]] = 1.0

    # ch1..3: pedestrian footprint and robot-frame velocity
    rel = _to_robot_frame(world.pedestrian.position - world.robot.position, world.robot.heading)
    ped_r = world.pedestrian.radius
    row_c = np.arange(n)
    fwd_centers = ((n - 1) - row_c + 0.5) * res
    left_centers = half - (np.arange(n) + 0.5) * res
    df = fwd_centers[:, None] - rel[0]
    dl = left_centers[None, :] - rel[1]
    inside = df * df + dl * dl <= ped_r * ped_r
    if inside.any():
        v_rf = _to_robot_frame(world.pedestrian.linear_velocity, world.robot.heading)
        grid[1][inside] = 1.0
        grid[2][inside] = v_rf[0]
        grid[3][inside] = v_rf[1]
    return GridObservation(channels=grid, resolution=res, tick=world.tick)


@dataclass
class Observation:
    """Immutable policy input: grid channels plus the flat feature vector.

    The vector is [history with distances scaled by 1/max_range, condition
    one-hot]; velocities in the grid are already in m/s (unit scale).
    """

    grid: np.ndarray            # (4, H, W) float32
    vector: np.ndarray          # (9 + condition_dim,) float32
    tick: int


def assemble_observation(
    grid: GridObservation,
    hist: PositionHistory,
    cond: np.ndarray,
    params: SensorParams | None = None,
) -> Observation:
    """Bundle one tick's components; rejects mixed-tick inputs."""
    params = params or SensorParams()
    if grid.tick != hist.tick:
        raise ValueError(f"observation components from different ticks: {grid.tick} vs {hist.tick}")
    hist_scaled = hist.flat().astype(np.float32).copy()
    hist_scaled[0::3] /= params.max_range
    vector = np.concatenate([hist_scaled, np.asarray(cond, dtype=np.float32)])
    return Observation(grid=grid.channels, vector=vector, tick=grid.tick)
