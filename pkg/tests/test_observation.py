import math

import numpy as np
import pytest

from conftest import make_world, open_square_world
from socnav.dialogue import IntentCode, encode_condition
from socnav.observation import (
    SensorParams,
    assemble_observation,
    build_position_history,
    initial_position_history,
    rasterize,
    raycast,
)


class TestRaycast:
    def test_beam_to_wall(self):
        # square room, robot centered and facing +x: the forward beam (#90)
        # travels 4 m to the x=8 wall
        w = open_square_world(robot_pos=(4.0, 4.0), robot_heading=0.0)
        scan = raycast(w)
        assert scan.ranges[90] == pytest.approx(4.0, abs=1e-9)

    def test_clamped_to_max_range(self):
        w = make_world(robot_pos=(1.0, 1.5), robot_heading=0.0, ped_pos=(9.0, 2.4))
        scan = raycast(w)
        assert scan.ranges[90] == pytest.approx(6.0)
        assert scan.ranges.max() <= 6.0
        assert scan.ranges.min() > 0.0

    def test_pedestrian_dead_ahead(self):
        # surface distance 1.4 puts the circle's near edge 1.7 m from the center
        w = make_world(robot_pos=(2.0, 1.5), robot_heading=0.0, ped_pos=(4.0, 1.5))
        scan = raycast(w)
        assert scan.ranges[90] == pytest.approx(1.7, abs=1e-9)

    def test_monotone_in_obstacle_distance(self):
        prev = 0.0
        for x in np.linspace(3.0, 7.0, 9):
            w = open_square_world(robot_pos=(1.0, 4.0), robot_heading=0.0,
                                  ped_pos=(x, 4.0))
            r = raycast(w).ranges[90]
            assert r >= prev - 1e-12
            prev = r

    def test_beam_count_and_order(self):
        w = open_square_world()
        scan = raycast(w)
        assert scan.ranges.shape == (180,)


class TestRasterize:
    def test_pedestrian_outside_window_all_zero(self):
        w = make_world(robot_pos=(1.0, 1.5), robot_heading=0.0, ped_pos=(9.0, 1.5))
        grid = rasterize(w, raycast(w))
        assert grid.channels[1:].sum() == 0.0

    def test_stationary_pedestrian_zero_velocity_channels(self):
        w = make_world(robot_pos=(2.0, 1.5), robot_heading=0.0, ped_pos=(4.0, 1.5))
        grid = rasterize(w, raycast(w))
        assert grid.channels[1].sum() > 0
        assert np.all(grid.channels[2] == 0.0)
        assert np.all(grid.channels[3] == 0.0)

    def test_velocity_rotated_into_robot_frame(self):
        w = make_world(robot_pos=(2.0, 1.5), robot_heading=0.0, ped_pos=(4.0, 1.5),
                       ped_vel=(-0.5, 0.0))
        grid = rasterize(w, raycast(w))
        occupied = grid.channels[1] > 0
        assert occupied.any()
        assert np.allclose(grid.channels[2][occupied], -0.5)
        assert np.allclose(grid.channels[3][occupied], 0.0)

    def test_rotating_world_and_robot_together_preserves_grid(self):
        # square walls are symmetric under 90-degree rotation about the center
        w1 = open_square_world(robot_pos=(4.0, 4.0), robot_heading=0.0,
                               ped_pos=(5.5, 4.25), ped_vel=(-0.4, 0.1))
        c, s = 0.0, 1.0  # rotate by +90 degrees about (4, 4)
        rel = np.array([1.5, 0.25])
        rel_rot = np.array([c * rel[0] - s * rel[1], s * rel[0] + c * rel[1]])
        vel_rot = np.array([c * -0.4 - s * 0.1, s * -0.4 + c * 0.1])
        w2 = open_square_world(robot_pos=(4.0, 4.0), robot_heading=math.pi / 2,
                               ped_pos=tuple(np.array([4.0, 4.0]) + rel_rot),
                               ped_vel=tuple(vel_rot))
        g1 = rasterize(w1, raycast(w1)).channels
        g2 = rasterize(w2, raycast(w2)).channels
        assert np.allclose(g1, g2)

    def test_laser_cells_within_max_range(self):
        w = open_square_world(robot_pos=(2.0, 2.0), robot_heading=0.7)
        params = SensorParams()
        grid = rasterize(w, raycast(w, params), params)
        rows, cols = np.nonzero(grid.channels[0])
        fwd = ((params.grid_size - 1) - rows + 0.5) * params.resolution
        left = params.half_width - (cols + 0.5) * params.resolution
        cell_diag = params.resolution * math.sqrt(2.0)
        assert np.all(np.hypot(fwd, left) <= params.max_range + cell_diag)


class TestPositionHistory:
    def test_initial_padding_repeats_tick0(self):
        w = make_world()
        hist = initial_position_history(w)
        assert np.array_equal(hist.triples[0], hist.triples[1])
        assert np.array_equal(hist.triples[1], hist.triples[2])

    def test_goal_straight_ahead(self):
        w = make_world(robot_pos=(6.0, 1.5), robot_heading=0.0, goal=(9.0, 1.5))
        hist = initial_position_history(w)
        assert np.allclose(hist.triples[-1], [3.0, 0.0, 0.0], atol=1e-12)

    def test_at_goal_distance_zero(self):
        w = make_world(robot_pos=(9.0, 1.5), goal=(9.0, 1.5))
        hist = initial_position_history(w)
        assert hist.triples[-1][0] == 0.0

    def test_window_shifts(self):
        w = make_world(robot_pos=(6.0, 1.5), robot_heading=0.0, goal=(9.0, 1.5))
        hist = initial_position_history(w)
        from socnav.world import advance_tick, step_robot

        w2 = advance_tick(step_robot(w, 0.6, 0.0))
        hist2 = build_position_history(hist, w2)
        assert hist2.triples[-1][0] == pytest.approx(2.7, abs=1e-9)
        assert np.array_equal(hist2.triples[0], hist.triples[1])
        assert hist2.tick == 1

    def test_identical_ticks_equal_triples(self):
        w = make_world()
        hist = initial_position_history(w)
        h2 = build_position_history(build_position_history(hist, w), w)
        assert np.allclose(h2.triples[0], h2.triples[2])


class TestAssemble:
    def test_mismatched_ticks_rejected(self):
        w = make_world()
        grid = rasterize(w, raycast(w))
        hist = initial_position_history(w)
        hist.tick = 1
        with pytest.raises(ValueError):
            assemble_observation(grid, hist, encode_condition(IntentCode.NONE))

    def test_shapes_and_scaling(self):
        w = make_world(robot_pos=(6.0, 1.5), robot_heading=0.0, goal=(9.0, 1.5),
                       ped_pos=(8.0, 1.5))
        obs = assemble_observation(rasterize(w, raycast(w)),
                                   initial_position_history(w),
                                   encode_condition(IntentCode.CLAIM_PRIORITY))
        assert obs.grid.shape == (4, 48, 48)
        assert obs.vector.shape == (16,)
        assert obs.vector[6] == pytest.approx(0.5)  # 3 m scaled by 1/max_range
        assert obs.vector[9 + 4] == 1.0             # claim-priority slot

    def test_zero_world_none_intent(self):
        w = make_world(robot_pos=(5.0, 1.5), ped_pos=(9.2, 2.4), goal=(5.0, 1.5))
        spec = w.spec
        spec.walls = np.zeros((0, 4))
        obs = assemble_observation(rasterize(w, raycast(w)),
                                   initial_position_history(w),
                                   encode_condition(IntentCode.NONE))
        assert obs.grid.sum() == 0.0
        assert obs.vector[9] == 1.0
        assert np.all(obs.vector[10:] == 0.0)
