#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
navqagen.trajectory
-------------------

Shortest-path "videos": endpoint sampling in two different rooms,
breadth-first planning on the walkable grid, conversion of the cell path
into a pose stream, and the 4-to-1 frame sub-sampling.
"""

from collections import deque, namedtuple
from dataclasses import dataclass
import logging

from .errors import NoPath, TooLong, TrajectoryError
from .utils import ceil_div

logger = logging.getLogger(__name__)

MAX_VIDEO_LENGTH = 140
SUBSAMPLE_CHUNK = 4

# Neighbour order fixes BFS tie-breaking: N, E, S, W
HEADINGS = ('N', 'E', 'S', 'W')
STEPS = {'N': (0, -1), 'E': (1, 0), 'S': (0, 1), 'W': (-1, 0)}

Pose = namedtuple('Pose', 'cell heading')


@dataclass(frozen=True)
class Trajectory:

    house_id: str
    video_id: str
    poses: tuple

    def __post_init__(self):
        if len(self.poses) > MAX_VIDEO_LENGTH:
            raise TooLong('{} has {} poses (max {})'.format(self.video_id, len(self.poses),
                                                             MAX_VIDEO_LENGTH))

    @property
    def length(self):
        return len(self.poses)

    def to_dict(self):
        return {'house_id': self.house_id, 'video_id': self.video_id,
                'poses': [[p.cell[0], p.cell[1], p.heading] for p in self.poses]}

    @classmethod
    def from_dict(cls, d):
        return cls(house_id=d['house_id'], video_id=d['video_id'],
                   poses=tuple(Pose((int(x), int(y)), h) for x, y, h in d['poses']))


def sample_endpoints(house, rng):
    """
    Draw a start and a goal cell lying in two different rooms.

    Parameters
    ----------
    house : House
    rng : numpy.random.Generator

    Returns
    -------
    start, goal : tuple of int
    """
    if len(house.rooms) < 2:
        raise TrajectoryError('House {} has {} room(s); two are needed'.format(
            house.id, len(house.rooms)))
    i, j = rng.choice(len(house.rooms), size=2, replace=False)
    cells = []
    for index in (i, j):
        walkable = [c for c in house.rooms[int(index)].cells() if house.is_walkable(c)]
        if not walkable:
            raise TrajectoryError('Room {} has no walkable cell'.format(house.rooms[int(index)].id))
        cells.append(walkable[int(rng.integers(len(walkable)))])
    return cells[0], cells[1]


def shortest_path(house, start, goal):
    """
    Breadth-first search over 4-connected walkable cells.

    Returns
    -------
    path : list of tuple
        Cells from `start` to `goal`, both included.

    Raises
    ------
    NoPath
        If `goal` cannot be reached from `start`.
    """
    start, goal = tuple(start), tuple(goal)
    for cell in (start, goal):
        if not house.is_walkable(cell):
            raise TrajectoryError('Cell {} is not walkable in {}'.format(cell, house.id))
    parents = {start: None}
    queue = deque([start])
    while queue:
        cell = queue.popleft()
        if cell == goal:
            break
        for heading in HEADINGS:
            dx, dy = STEPS[heading]
            nxt = (cell[0] + dx, cell[1] + dy)
            if nxt not in parents and house.is_walkable(nxt):
                parents[nxt] = cell
                queue.append(nxt)
    if goal not in parents:
        raise NoPath('No path from {} to {} in {}'.format(start, goal, house.id))
    path = [goal]
    while parents[path[-1]] is not None:
        path.append(parents[path[-1]])
    return path[::-1]


def heading_between(a, b):
    delta = (b[0] - a[0], b[1] - a[1])
    for heading, step in STEPS.items():
        if step == delta:
            return heading
    raise TrajectoryError('Cells {} and {} are not 4-neighbours'.format(a, b))


def path_to_trajectory(house, path, video_id=''):
    """
    One pose per path cell, plus one extra pose, in place, for every 90°
    heading change. The first pose faces the first move (north for
    single-cell paths).

    Raises
    ------
    TooLong
        If the pose stream exceeds 140 poses.
    """
    path = [tuple(c) for c in path]
    if not path:
        raise TrajectoryError('Empty path')
    heading = heading_between(path[0], path[1]) if len(path) > 1 else 'N'
    poses = [Pose(path[0], heading)]
    for prev, cell in zip(path, path[1:]):
        step = heading_between(prev, cell)
        if step != heading:
            heading = step
            poses.append(Pose(prev, heading))
        poses.append(Pose(cell, heading))
    if len(poses) > MAX_VIDEO_LENGTH:
        raise TooLong('Path of {} cells needs {} poses (max {})'.format(
            len(path), len(poses), MAX_VIDEO_LENGTH))
    return Trajectory(house_id=house.id, video_id=video_id, poses=tuple(poses))


def plan_video(house, rng, video_id='', attempts=20):
    """
    Sample endpoints and plan until a trajectory fits, resampling on
    NoPath/TooLong at most `attempts` times.

    Returns
    -------
    trajectory : Trajectory or None
        None when every attempt failed; the caller skips the video slot.
    """
    for attempt in range(attempts):
        start, goal = sample_endpoints(house, rng)
        try:
            return path_to_trajectory(house, shortest_path(house, start, goal), video_id)
        except (NoPath, TooLong) as e:
            logger.debug('%s attempt %d: %s', video_id, attempt, e)
    return None


def subsample_frames(frames, rng, chunk=SUBSAMPLE_CHUNK):
    """
    Keep one uniformly drawn element from every run of `chunk` consecutive
    frames, preserving order. A 140-frame video becomes 35 frames.

    Parameters
    ----------
    frames : sequence
    rng : numpy.random.Generator

    Returns
    -------
    subsequence : list
    """
    frames = list(frames)
    if not frames:
        raise ValueError('Cannot sub-sample an empty sequence')
    picked = []
    for k in range(ceil_div(len(frames), chunk)):
        lo, hi = k * chunk, min(k * chunk + chunk, len(frames))
        picked.append(frames[int(rng.integers(lo, hi))])
    return picked
