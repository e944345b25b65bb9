import numpy as np
import pytest

from socnav.scenes import hallway_scene, square_scene
from socnav.world import AgentState, ScenarioSpec, SceneKind, WorldParams, WorldState


def make_world(
    robot_pos=(1.0, 1.5),
    robot_heading=0.0,
    ped_pos=(5.0, 1.5),
    ped_heading=np.pi,
    goal=(9.0, 1.5),
    ped_goal=(0.7, 1.5),
    robot_vel=(0.0, 0.0),
    ped_vel=(0.0, 0.0),
    spec: ScenarioSpec | None = None,
    tick=0,
    seed=0,
    params: WorldParams | None = None,
) -> WorldState:
    """Hand-assembled world for unit tests; hallway walls by default."""
    params = params or WorldParams()
    spec = spec or hallway_scene()
    robot = AgentState(np.array(robot_pos, float), robot_heading,
                       np.array(robot_vel, float), params.robot_radius)
    ped = AgentState(np.array(ped_pos, float), ped_heading,
                     np.array(ped_vel, float), params.ped_radius)
    return WorldState(
        robot=robot,
        pedestrian=ped,
        goal=np.array(goal, float),
        ped_goal=np.array(ped_goal, float),
        tick=tick,
        dt=params.dt,
        rng=np.random.Generator(np.random.PCG64(seed)),
        spec=spec,
        params=params,
    )


def open_square_world(**kw) -> WorldState:
    kw.setdefault("spec", square_scene())
    kw.setdefault("robot_pos", (4.0, 4.0))
    kw.setdefault("ped_pos", (0.7, 7.3))
    kw.setdefault("goal", (7.0, 4.0))
    kw.setdefault("ped_goal", (0.7, 0.7))
    return make_world(**kw)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
