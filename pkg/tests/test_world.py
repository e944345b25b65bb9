import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_world, open_square_world
from socnav.scenes import builtin_scene, crosswalk_scene, hallway_scene, square_scene
from socnav.world import (
    ContractViolation,
    SceneKind,
    SpawnError,
    TerminalKind,
    WorldParams,
    advance_tick,
    agents_overlap,
    check_termination,
    distance_robot_pedestrian,
    spawn_scenario,
    step_pedestrian,
    step_robot,
    wall_clearance,
)


class TestSpawn:
    def test_same_seed_same_world(self):
        a = spawn_scenario(hallway_scene(), 7)
        b = spawn_scenario(hallway_scene(), 7)
        assert np.array_equal(a.robot.position, b.robot.position)
        assert np.array_equal(a.pedestrian.position, b.pedestrian.position)
        assert np.array_equal(a.goal, b.goal)
        assert np.array_equal(a.ped_goal, b.ped_goal)

    def test_hallway_opposite_ends(self):
        w = spawn_scenario(hallway_scene(), 7)
        assert w.robot.position[0] < 2.0
        assert w.pedestrian.position[0] > 8.0
        assert w.goal[0] > 8.0
        assert w.ped_goal[0] < 2.0

    @pytest.mark.parametrize("seed", range(12))
    def test_square_inside_bounds_with_clearance(self, seed):
        w = spawn_scenario(square_scene(), seed)
        xmin, ymin, xmax, ymax = w.spec.arena_bounds
        for pos, radius in ((w.robot.position, w.robot.radius),
                            (w.pedestrian.position, w.pedestrian.radius)):
            assert xmin < pos[0] < xmax and ymin < pos[1] < ymax
            assert wall_clearance(pos, w.spec.walls) >= radius

    @pytest.mark.parametrize("kind", ["square", "hallway", "crosswalk"])
    @pytest.mark.parametrize("seed", [0, 3, 11])
    def test_min_separation(self, kind, seed):
        w = spawn_scenario(builtin_scene(kind), seed)
        sep = np.linalg.norm(w.robot.position - w.pedestrian.position)
        assert sep >= 2.0 * (w.robot.radius + w.pedestrian.radius)

    def test_crosswalk_different_corridors(self):
        w = spawn_scenario(crosswalk_scene(), 3)
        # robot travels the horizontal corridor, pedestrian the vertical one
        assert 2.5 < w.robot.position[1] < 5.5
        assert 2.5 < w.pedestrian.position[0] < 5.5

    def test_impossible_spec_raises(self):
        spec = square_scene()
        spec.arena_bounds = (0.0, 0.0, 1.6, 1.6)  # too small for the 3 m start-goal rule
        with pytest.raises(SpawnError):
            spawn_scenario(spec, 0)


class TestStepRobot:
    def test_forward_step(self):
        w = make_world(robot_pos=(1.0, 1.5), robot_heading=0.0)
        w2 = step_robot(w, 0.6, 0.0)
        assert np.allclose(w2.robot.position, [1.3, 1.5], atol=1e-12)

    def test_zero_action_keeps_pose(self):
        w = make_world(robot_pos=(1.0, 1.5), robot_heading=0.3)
        w2 = step_robot(w, 0.0, 0.0)
        assert np.array_equal(w2.robot.position, w.robot.position)
        assert w2.robot.heading == w.robot.heading

    def test_heading_wraps(self):
        w = make_world(robot_heading=math.pi - 0.01)
        w2 = step_robot(w, 0.0, 0.9)
        assert -math.pi < w2.robot.heading <= math.pi
        assert w2.robot.heading == pytest.approx(-math.pi + 0.44, abs=1e-12)

    @pytest.mark.parametrize("v,w", [(-0.1, 0.0), (0.7, 0.0), (0.3, 1.0), (0.3, -1.0)])
    def test_out_of_range_rejected(self, v, w):
        world = make_world()
        with pytest.raises(ContractViolation):
            step_robot(world, v, w)

    def test_tick_unchanged_by_agent_steps(self):
        w = make_world()
        assert step_robot(w, 0.3, 0.1).tick == w.tick
        assert step_pedestrian(w, np.array([0.1, 0.0])).tick == w.tick
        assert advance_tick(w).tick == w.tick + 1

    @given(st.lists(st.tuples(st.floats(0.0, 0.6), st.floats(-0.9, 0.9)),
                    min_size=1, max_size=60))
    @settings(max_examples=40, deadline=None)
    def test_heading_always_normalized(self, actions):
        w = open_square_world()
        for v, om in actions:
            w = step_robot(w, v, om)
            assert -math.pi < w.robot.heading <= math.pi
            step = np.linalg.norm(w.robot.linear_velocity) * w.dt
            assert step <= 0.3 + 1e-9


class TestTermination:
    def test_overlap_is_collision(self):
        w = make_world(robot_pos=(2.0, 1.5), ped_pos=(2.59, 1.5))
        assert check_termination(w) == TerminalKind.COLLISION

    def test_goal_reached_is_success(self):
        w = make_world(robot_pos=(8.8, 1.5), goal=(9.0, 1.5), ped_pos=(2.0, 1.5))
        assert check_termination(w) == TerminalKind.SUCCESS

    def test_timeout_at_max_steps(self):
        w = make_world(robot_pos=(5.0, 1.5), ped_pos=(8.0, 1.5), tick=100)
        assert check_termination(w) == TerminalKind.TIMEOUT

    def test_running_otherwise(self):
        w = make_world(robot_pos=(5.0, 1.5), ped_pos=(8.0, 1.5), tick=10)
        assert check_termination(w) == TerminalKind.RUNNING

    def test_collision_beats_success(self):
        w = make_world(robot_pos=(8.8, 1.5), goal=(9.0, 1.5), ped_pos=(9.3, 1.5))
        assert check_termination(w) == TerminalKind.COLLISION

    def test_wall_overlap_is_collision(self):
        w = make_world(robot_pos=(5.0, 0.2), ped_pos=(8.0, 1.5))
        assert check_termination(w) == TerminalKind.COLLISION

    def test_overlap_symmetric(self):
        w = make_world(robot_pos=(2.0, 1.5), ped_pos=(2.5, 1.5))
        assert agents_overlap(w.robot, w.pedestrian) == agents_overlap(w.pedestrian, w.robot)


class TestDistance:
    def test_surface_distance(self):
        w = make_world(robot_pos=(2.0, 1.5), ped_pos=(4.0, 1.5))
        assert distance_robot_pedestrian(w) == pytest.approx(1.4, abs=1e-12)

    def test_touching_is_zero(self):
        w = make_world(robot_pos=(2.0, 1.5), ped_pos=(2.6, 1.5))
        assert distance_robot_pedestrian(w) == pytest.approx(0.0, abs=1e-12)

    def test_coincident_floored(self):
        w = make_world(robot_pos=(2.0, 1.5), ped_pos=(2.0, 1.5))
        assert distance_robot_pedestrian(w) == 0.0


def test_identical_traces_for_identical_actions():
    actions = [(0.5, 0.2), (0.6, -0.4), (0.1, 0.9), (0.4, 0.0)] * 6
    traces = []
    for _ in range(2):
        w = spawn_scenario(hallway_scene(), 42)
        trace = []
        for v, om in actions:
            w = advance_tick(step_pedestrian(step_robot(w, v, om), np.array([-0.3, 0.05])))
            trace.append((w.robot.position.copy(), w.robot.heading,
                          w.pedestrian.position.copy()))
        traces.append(trace)
    for (p1, h1, q1), (p2, h2, q2) in zip(*traces):
        assert np.array_equal(p1, p2) and h1 == h2 and np.array_equal(q1, q2)


def test_pedestrian_never_enters_walls():
    w = make_world(ped_pos=(5.0, 0.4), ped_heading=-np.pi / 2)
    w2 = step_pedestrian(w, np.array([0.0, -0.5]))
    assert wall_clearance(w2.pedestrian.position, w.spec.walls) >= w.pedestrian.radius - 1e-9
    # sliding preserves the tangential component
    w3 = step_pedestrian(w, np.array([0.4, -0.3]))
    assert w3.pedestrian.position[0] > w.pedestrian.position[0]
