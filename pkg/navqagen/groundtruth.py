#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
navqagen.groundtruth
--------------------

What the agent sees. Visibility is geometric: an object is visible from a
pose when it is close enough, inside the field of view, and the straight
line between the two cell centres crosses no wall cell. Visible objects
are then linked to the current room or to an adjacent one; anything
further away is dropped.
"""

from dataclasses import dataclass, field
import logging
import math

from .errors import ConfigError, TrajectoryError
from .scene import adjacent_rooms
from .trajectory import STEPS

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ViewConfig:

    fov: float = 90.0
    max_distance: float = 12.0
    min_seen_objects: int = 2

    def __post_init__(self):
        if not 0 < self.fov <= 360:
            raise ConfigError('view.fov must lie in (0, 360], got {}'.format(self.fov))
        if self.max_distance < 0:
            raise ConfigError('view.max_distance must be non-negative')
        if self.min_seen_objects < 0:
            raise ConfigError('view.min_seen_objects must be non-negative')

    @classmethod
    def from_dict(cls, d):
        known = {'fov', 'max_distance', 'min_seen_objects'}
        for key in set(d) - known:
            logger.warning('Option view.%s not recognized!', key)
        return cls(**{k: v for k, v in d.items() if k in known})

    def to_dict(self):
        return {'fov': self.fov, 'max_distance': self.max_distance,
                'min_seen_objects': self.min_seen_objects}


@dataclass(frozen=True)
class FrameGT:

    index: int
    current_room: str
    visible_objects: frozenset
    linked_rooms: frozenset

    def to_dict(self):
        return {'record': 'frame', 'index': self.index, 'current_room': self.current_room,
                'visible_objects': sorted(self.visible_objects),
                'linked_rooms': sorted(self.linked_rooms)}

    @classmethod
    def from_dict(cls, d):
        return cls(index=int(d['index']), current_room=d['current_room'],
                   visible_objects=frozenset(d['visible_objects']),
                   linked_rooms=frozenset(d['linked_rooms']))


@dataclass(frozen=True)
class TrajectoryGroundTruth:

    """
    Per-frame and aggregated ground truth of one video.

    `sightings` maps each seen object id to the ``(first, last)`` frame
    indices it was visible in.
    """

    house_id: str
    video_id: str
    frames: tuple
    seen_objects: frozenset
    seen_rooms: frozenset
    sightings: dict = field(default_factory=dict, hash=False)

    def first_seen(self, object_id):
        return self.sightings[object_id][0]

    def last_seen(self, object_id):
        return self.sightings[object_id][1]

    def aggregate_dict(self):
        return {'record': 'aggregate', 'house_id': self.house_id, 'video_id': self.video_id,
                'seen_objects': sorted(self.seen_objects),
                'seen_rooms': sorted(self.seen_rooms),
                'sightings': {k: list(v) for k, v in sorted(self.sightings.items())}}


def supercover_line(a, b):
    """
    Every grid cell touched by the segment joining the centres of cells `a`
    and `b`. When the segment passes exactly through a cell corner, both
    cells flanking the corner are included.
    """
    x, y = a
    dx, dy = b[0] - a[0], b[1] - a[1]
    nx, ny = abs(dx), abs(dy)
    sx = 1 if dx > 0 else -1
    sy = 1 if dy > 0 else -1
    cells = [(x, y)]
    ix = iy = 0
    while ix < nx or iy < ny:
        decision = (1 + 2 * ix) * ny - (1 + 2 * iy) * nx
        if decision == 0:
            cells.append((x + sx, y))
            cells.append((x, y + sy))
            x += sx
            y += sy
            ix += 1
            iy += 1
        elif decision < 0:
            x += sx
            ix += 1
        else:
            y += sy
            iy += 1
        cells.append((x, y))
    return cells


def in_view(pose, cell, view):
    """Distance and field-of-view test, walls ignored."""
    px, py = pose.cell
    dx, dy = cell[0] - px, cell[1] - py
    if dx == 0 and dy == 0:
        return True
    if math.hypot(dx, dy) > view.max_distance:
        return False
    fx, fy = STEPS[pose.heading]
    forward = dx * fx + dy * fy
    lateral = dx * -fy + dy * fx
    return abs(math.degrees(math.atan2(lateral, forward))) <= view.fov / 2.0 + 1e-9


def line_of_sight(house, a, b):
    return all(house.is_walkable(c) for c in supercover_line(a, b))


def visible_objects(house, pose, view=None):
    """
    Ids of the objects visible from `pose`.

    Parameters
    ----------
    house : House
    pose : Pose
    view : ViewConfig, optional
        Field of view and maximum distance. Defaults to 90° and 12 cells.

    Returns
    -------
    visible : set of str
    """
    view = view or ViewConfig()
    cell = tuple(pose.cell)
    return {obj.id for obj in house.objects
            if in_view(pose, obj.cell, view) and line_of_sight(house, cell, tuple(obj.cell))}


def frame_ground_truth(house, pose, index, view=None, previous_room=None):
    """
    Ground truth of a single frame.

    The current room is the room holding the pose cell. On a doorway
    cell it is `previous_room`, the room most recently entered. Visible
    objects outside the current room and its neighbours are dropped.

    Returns
    -------
    frame : FrameGT
    """
    current = house.room_at(pose.cell)
    if current is None:
        if previous_room is None:
            raise TrajectoryError('Pose {} is outside every room and no previous room '
                                  'was given'.format(pose))
        current = previous_room
    linkable = adjacent_rooms(house, current) | {current}
    retained = frozenset(oid for oid in visible_objects(house, pose, view)
                         if house.object(oid).room_id in linkable)
    linked = frozenset(house.object(oid).room_id for oid in retained) | {current}
    return FrameGT(index=index, current_room=current, visible_objects=retained,
                   linked_rooms=linked)


def trajectory_ground_truth(house, trajectory, view=None):
    """
    Frame-by-frame ground truth of `trajectory`, aggregated.
    """
    frames, current = [], None
    for index, pose in enumerate(trajectory.poses):
        frame = frame_ground_truth(house, pose, index, view, previous_room=current)
        current = frame.current_room
        frames.append(frame)
    return aggregate_gt(frames, house_id=trajectory.house_id, video_id=trajectory.video_id)


def aggregate_gt(frames, house_id=None, video_id=None):
    """
    Fold frames into a TrajectoryGroundTruth: unions of visible objects and
    linked rooms, and the first/last frame each object was seen in.
    """
    frames = tuple(frames)
    if not frames:
        raise ValueError('Cannot aggregate an empty list of frames')
    seen_objects, seen_rooms, sightings = set(), set(), {}
    for frame in frames:
        seen_objects |= frame.visible_objects
        seen_rooms |= frame.linked_rooms
        for oid in frame.visible_objects:
            first, last = sightings.get(oid, (frame.index, frame.index))
            sightings[oid] = (min(first, frame.index), max(last, frame.index))
    return TrajectoryGroundTruth(house_id=house_id, video_id=video_id, frames=frames,
                                 seen_objects=frozenset(seen_objects),
                                 seen_rooms=frozenset(seen_rooms),
                                 sightings=dict(sorted(sightings.items())))


def enough_objects(gt, view):
    """Minimum-visibility guard: videos seeing too few objects are discarded."""
    return len(gt.seen_objects) >= view.min_seen_objects
