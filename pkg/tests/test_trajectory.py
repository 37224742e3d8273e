#!/usr/bin/env python
# -*- coding: utf-8 -*-

import heapq
import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from navqagen.errors import NoPath, TooLong, TrajectoryError
from navqagen.scene import House, Room
from navqagen.synth import SynthConfig, synth_house
from navqagen.trajectory import (MAX_VIDEO_LENGTH, Pose, Trajectory, sample_endpoints,
                                 shortest_path, path_to_trajectory, plan_video, subsample_frames)

from conftest import three_room_house


def uniform_cost_length(grid, start, goal):
    """Dijkstra over walkable cells, unit weights; None if unreachable."""
    dist = {start: 1}
    heap = [(1, start)]
    while heap:
        d, (x, y) = heapq.heappop(heap)
        if (x, y) == goal:
            return d
        if d > dist[(x, y)]:
            continue
        for nx, ny in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if 0 <= ny < len(grid) and 0 <= nx < len(grid[0]) and grid[ny][nx] == '.':
                if d + 1 < dist.get((nx, ny), float('inf')):
                    dist[(nx, ny)] = d + 1
                    heapq.heappush(heap, (d + 1, (nx, ny)))
    return None


def open_house(grid):
    height, width = len(grid), len(grid[0])
    room = Room('r', 'gym', (0, 0, width - 1, height - 1))
    return House(id='g', grid=tuple(grid), rooms=(room,))


def test_endpoints_lie_in_distinct_rooms(gray_house):
    rng = np.random.default_rng(0)
    for _ in range(1000):
        start, goal = sample_endpoints(gray_house, rng)
        assert gray_house.room_at(start) != gray_house.room_at(goal)
        assert gray_house.room_at(start) is not None and gray_house.room_at(goal) is not None


def test_endpoints_need_two_rooms():
    with pytest.raises(TrajectoryError):
        sample_endpoints(open_house(['...']), np.random.default_rng(0))


@pytest.mark.slow
def test_endpoints_cover_every_room_pair(lexicon):
    house = synth_house(SynthConfig(lexicon, rooms=(8, 8)), 21)
    rng = np.random.default_rng(1)
    pairs = set()
    for _ in range(10000):
        start, goal = sample_endpoints(house, rng)
        pairs.add(frozenset((house.room_at(start), house.room_at(goal))))
    assert pairs == {frozenset(p) for p in itertools.combinations([r.id for r in house.rooms], 2)}


def test_shortest_path_trivial_cases():
    house = open_house(['...'])
    assert shortest_path(house, (1, 0), (1, 0)) == [(1, 0)]
    assert shortest_path(house, (0, 0), (1, 0)) == [(0, 0), (1, 0)]


def test_shortest_path_through_doorway(gray_house):
    path = shortest_path(gray_house, (1, 2), (7, 2))
    assert path == [(x, 2) for x in range(1, 8)]


def test_no_path():
    house = open_house(['.#.'])
    with pytest.raises(NoPath):
        shortest_path(house, (0, 0), (2, 0))
    with pytest.raises(TrajectoryError):
        shortest_path(house, (0, 0), (1, 0))


def test_shortest_path_matches_uniform_cost_search():
    rng = np.random.default_rng(7)
    for _ in range(200):
        grid = [''.join('.' if rng.random() < 0.7 else '#' for _ in range(20)) for _ in range(20)]
        cells = [(x, y) for y in range(20) for x in range(20) if grid[y][x] == '.']
        if len(cells) < 2:
            continue
        i, j = rng.choice(len(cells), size=2, replace=False)
        start, goal = cells[int(i)], cells[int(j)]
        house = open_house(grid)
        expected = uniform_cost_length(grid, start, goal)
        if expected is None:
            with pytest.raises(NoPath):
                shortest_path(house, start, goal)
            continue
        path = shortest_path(house, start, goal)
        assert len(path) == expected
        assert path[0] == start and path[-1] == goal
        for a, b in zip(path, path[1:]):
            assert abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1
            assert grid[b[1]][b[0]] == '.'


def test_straight_path_poses():
    house = open_house(['.....'])
    trajectory = path_to_trajectory(house, [(x, 0) for x in range(5)], 'v')
    assert trajectory.length == 5
    assert {p.heading for p in trajectory.poses} == {'E'}


def test_l_shaped_path_inserts_one_turn():
    house = open_house(['...', '...', '...'])
    path = [(0, 0), (1, 0), (2, 0), (2, 1), (2, 2)]
    trajectory = path_to_trajectory(house, path)
    assert trajectory.length == 6
    assert trajectory.poses[2] == Pose((2, 0), 'E')
    assert trajectory.poses[3] == Pose((2, 0), 'S')
    assert trajectory.poses[-1] == Pose((2, 2), 'S')


def test_single_cell_path_faces_north():
    trajectory = path_to_trajectory(open_house(['.']), [(0, 0)])
    assert trajectory.poses == (Pose((0, 0), 'N'),)


def test_too_long():
    house = open_house(['.' * 150])
    with pytest.raises(TooLong):
        path_to_trajectory(house, [(x, 0) for x in range(MAX_VIDEO_LENGTH + 1)])
    assert path_to_trajectory(house, [(x, 0) for x in range(MAX_VIDEO_LENGTH)]).length == 140
    with pytest.raises(TooLong):
        Trajectory('g', 'v', tuple(Pose((0, 0), 'N') for _ in range(141)))


def test_pose_count_is_cells_plus_turns(lexicon):
    rng = np.random.default_rng(5)
    for seed in range(10):
        house = synth_house(SynthConfig(lexicon), seed)
        trajectory = plan_video(house, rng)
        if trajectory is None:
            continue
        cells = [c for i, c in enumerate(p.cell for p in trajectory.poses)
                 if i == 0 or c != trajectory.poses[i - 1].cell]
        moves = [(b[0] - a[0], b[1] - a[1]) for a, b in zip(cells, cells[1:])]
        turns = sum(1 for m, n in zip(moves, moves[1:]) if m != n)
        assert trajectory.length == len(cells) + turns
        assert house.room_at(cells[0]) != house.room_at(cells[-1])


def test_plan_video_gives_up(three_room_house_blocked):
    assert plan_video(three_room_house_blocked, np.random.default_rng(0), attempts=3) is None


@pytest.fixture
def three_room_house_blocked():
    house = three_room_house()
    # wall up both doorway columns
    grid = tuple(r[:4] + '#' + r[5:8] + '#' + r[9:] for r in house.grid)
    return House(id=house.id, grid=grid, rooms=house.rooms, doorways=house.doorways)


def test_trajectory_round_trip():
    trajectory = Trajectory('h', 'v', (Pose((1, 2), 'E'), Pose((2, 2), 'E')))
    assert Trajectory.from_dict(trajectory.to_dict()) == trajectory


def test_subsample_140_to_35():
    frames = list(range(140))
    picked = subsample_frames(frames, np.random.default_rng(0))
    assert len(picked) == 35
    assert picked == sorted(picked)


def test_subsample_single_frame():
    assert subsample_frames(['only'], np.random.default_rng(0)) == ['only']


def test_subsample_empty():
    with pytest.raises(ValueError):
        subsample_frames([], np.random.default_rng(0))


def test_subsample_chunk_membership():
    rng = np.random.default_rng(9)
    seen = set()
    for _ in range(10000):
        first, second = subsample_frames(range(6), rng)
        assert 0 <= first <= 3
        assert 4 <= second <= 5
        seen.add((first, second))
    assert len(seen) == 8


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=1, max_value=MAX_VIDEO_LENGTH), st.integers(min_value=0))
def test_subsampling_law(length, seed):
    picked = subsample_frames(range(length), np.random.default_rng(seed))
    assert len(picked) == -(-length // 4)
    for k, frame in enumerate(picked):
        assert 4 * k <= frame < min(4 * k + 4, length)
