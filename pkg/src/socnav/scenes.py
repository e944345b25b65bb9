"""Built-in scenes and the plain-text scene file loader.

Scene files are YAML with three keys (schema in docs/formats.md):

    kind: square | hallway | crosswalk    # selects the spawn rule
    bounds: [xmin, ymin, xmax, ymax]
    walls:
      - [x1, y1, x2, y2]
      - ...
"""

from __future__ import annotations

import numpy as np
import yaml

from .world import ContractViolation, ScenarioSpec, SceneKind


def _box_walls(xmin, ymin, xmax, ymax):
    return [
        [xmin, ymin, xmax, ymin],
        [xmax, ymin, xmax, ymax],
        [xmax, ymax, xmin, ymax],
        [xmin, ymax, xmin, ymin],
    ]


def square_scene() -> ScenarioSpec:
    return ScenarioSpec(
        kind=SceneKind.SQUARE,
        walls=np.array(_box_walls(0.0, 0.0, 8.0, 8.0), dtype=np.float64),
        arena_bounds=(0.0, 0.0, 8.0, 8.0),
    )


def hallway_scene() -> ScenarioSpec:
    return ScenarioSpec(
        kind=SceneKind.HALLWAY,
        walls=np.array(_box_walls(0.0, 0.0, 10.0, 3.0), dtype=np.float64),
        arena_bounds=(0.0, 0.0, 10.0, 3.0),
    )


def crosswalk_scene() -> ScenarioSpec:
    # Plus-shaped intersection: 3 m corridors crossing inside an 8x8 footprint.
    lo, hi, end = 2.5, 5.5, 8.0
    walls = [
        # horizontal corridor walls, interrupted by the vertical corridor
        [0.0, lo, lo, lo], [hi, lo, end, lo],
        [0.0, hi, lo, hi], [hi, hi, end, hi],
        # vertical corridor walls
        [lo, 0.0, lo, lo], [lo, hi, lo, end],
        [hi, 0.0, hi, lo], [hi, hi, hi, end],
        # end caps
        [0.0, lo, 0.0, hi], [end, lo, end, hi],
        [lo, 0.0, hi, 0.0], [lo, end, hi, end],
    ]
    return ScenarioSpec(
        kind=SceneKind.CROSSWALK,
        walls=np.array(walls, dtype=np.float64),
        arena_bounds=(0.0, 0.0, 8.0, 8.0),
    )


_BUILTIN = {
    SceneKind.SQUARE: square_scene,
    SceneKind.HALLWAY: hallway_scene,
    SceneKind.CROSSWALK: crosswalk_scene,
}


def builtin_scene(kind: SceneKind | str) -> ScenarioSpec:
    return _BUILTIN[SceneKind(kind)]()


def load_scene(path: str) -> ScenarioSpec:
    """Load a scene spec from a YAML file; missing keys fall back to the builtin."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict) or "kind" not in raw:
        raise ContractViolation(f"scene file {path} must define at least 'kind'")
    try:
        kind = SceneKind(raw["kind"])
    except ValueError as exc:
        raise ContractViolation(f"unknown scene kind {raw['kind']!r}") from exc
    spec = builtin_scene(kind)
    if "bounds" in raw:
        spec.arena_bounds = tuple(float(v) for v in raw["bounds"])
    if "walls" in raw:
        spec.walls = np.array(raw["walls"], dtype=np.float64).reshape(-1, 4)
    spec.validate()
    return spec
