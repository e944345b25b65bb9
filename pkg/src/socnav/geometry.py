"""Planar geometry helpers shared by the world, sensors and pedestrian model.

All positions are metres in the world frame, angles are radians.
Functions are pure and operate on plain numpy arrays of shape (2,) or (N, 2).
"""

from __future__ import annotations

import math

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_angle(theta: float) -> float:
    """Normalize an angle into (-pi, pi]; exact no-op for angles already there."""
    if -math.pi < theta <= math.pi:
        return theta
    wrapped = math.fmod(theta + math.pi, TWO_PI)
    if wrapped <= 0.0:
        wrapped += TWO_PI
    return wrapped - math.pi


def unit(theta: float) -> np.ndarray:
    """Unit vector at angle theta."""
    return np.array([math.cos(theta), math.sin(theta)], dtype=np.float64)


def norm(v) -> float:
    return float(math.hypot(float(v[0]), float(v[1])))


def rotate(v, theta: float) -> np.ndarray:
    """Rotate a 2-vector by theta (counter-clockwise)."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([c * v[0] - s * v[1], s * v[0] + c * v[1]], dtype=np.float64)


def cross_z(a, b) -> float:
    """z-component of the 3D cross product of two planar vectors."""
    return float(a[0] * b[1] - a[1] * b[0])


def point_segment_distance(p, a, b) -> float:
    """Distance from point p to segment [a, b]."""
    ab = np.asarray(b, dtype=np.float64) - np.asarray(a, dtype=np.float64)
    ap = np.asarray(p, dtype=np.float64) - np.asarray(a, dtype=np.float64)
    denom = float(ab @ ab)
    if denom == 0.0:
        return norm(ap)
    t = float(ap @ ab) / denom
    t = min(1.0, max(0.0, t))
    return norm(ap - t * ab)


def ray_segments_hits(origin, direction, segments: np.ndarray) -> float:
    """Smallest t >= 0 where origin + t*direction crosses any segment.

    segments has shape (N, 4) as (x1, y1, x2, y2). Returns inf when no hit.
    """
    if segments.size == 0:
        return math.inf
    o = np.asarray(origin, dtype=np.float64)
    d = np.asarray(direction, dtype=np.float64)
    a = segments[:, 0:2]
    e = segments[:, 2:4] - a  # segment direction
    # Solve o + t d = a + s e  =>  cross terms
    denom = d[0] * e[:, 1] - d[1] * e[:, 0]
    ao = a - o
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (ao[:, 0] * e[:, 1] - ao[:, 1] * e[:, 0]) / denom
        s = (ao[:, 0] * d[1] - ao[:, 1] * d[0]) / denom
    valid = np.isfinite(t) & (t >= 0.0) & (s >= 0.0) & (s <= 1.0)
    if not valid.any():
        return math.inf
    return float(t[valid].min())


def ray_circle_hit(origin, direction, center, radius: float) -> float:
    """Smallest t >= 0 where the ray enters the circle; inf when it misses.

    A ray starting inside the circle reports t = 0.
    """
    o = np.asarray(origin, dtype=np.float64)
    d = np.asarray(direction, dtype=np.float64)
    c = np.asarray(center, dtype=np.float64)
    oc = o - c
    b = float(oc @ d)
    cterm = float(oc @ oc) - radius * radius
    if cterm <= 0.0:
        return 0.0
    disc = b * b - cterm
    if disc < 0.0:
        return math.inf
    root = math.sqrt(disc)
    t_near = -b - root
    if t_near >= 0.0:
        return t_near
    t_far = -b + root
    if t_far >= 0.0:
        return t_far
    return math.inf


def moving_points_min_separation(p_a, v_a, p_b, v_b, horizon: float) -> float:
    """Minimum distance between two constant-velocity points within [0, horizon]."""
    dp = np.asarray(p_a, dtype=np.float64) - np.asarray(p_b, dtype=np.float64)
    dv = np.asarray(v_a, dtype=np.float64) - np.asarray(v_b, dtype=np.float64)
    dv2 = float(dv @ dv)
    if dv2 == 0.0:
        return norm(dp)
    t_star = -float(dp @ dv) / dv2
    t_star = min(horizon, max(0.0, t_star))
    return norm(dp + t_star * dv)


def time_to_circle_overlap(dp, dv, radius_sum: float) -> float:
    """Smallest t >= 0 with ||dp + t dv|| <= radius_sum; inf when never.

    dp is the current offset between centers, dv the relative velocity.
    Already-overlapping configurations report t = 0.
    """
    c = float(dp @ dp) - radius_sum * radius_sum
    if c <= 0.0:
        return 0.0
    a = float(dv @ dv)
    b = float(dp @ dv)
    if a == 0.0:
        return math.inf
    disc = b * b - a * c
    if disc < 0.0:
        return math.inf
    t = (-b - math.sqrt(disc)) / a
    return t if t >= 0.0 else math.inf
