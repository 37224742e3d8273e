#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
navqagen.synth
--------------

Procedural houses. The grid interior is recursively split into
rectangular rooms separated by one-cell walls, doorways are punched
through shared walls until every room is reachable, and each room is
furnished with objects drawn from the lexicon.

A house is a pure function of ``(SynthConfig, seed)``.
"""

from dataclasses import dataclass, field
import logging

import numpy as np

from .errors import ConfigError, PlacementError
from .scene import (House, Room, ObjectInstance, Doorway, Lexicon, doorway_span,
                    WALL, FLOOR)

logger = logging.getLogger(__name__)

SIZE_FACTORS = {'small': 0.6, 'large': 1.6}


@dataclass(frozen=True)
class SynthConfig:

    """
    Parameters controlling house synthesis.

    Parameters
    ----------
    lexicon : Lexicon
    grid : (int, int)
        Grid width and height, outer walls included.
    rooms : (int, int)
        Inclusive range of room counts.
    objects_per_room : (int, int)
        Inclusive range of objects placed in each room (capped by its area).
    min_room_size : int
        Minimum room side, in cells.
    attr_probabilities : dict
        Probability of each non-color attribute. They are mutually
        exclusive, so an object carries at most one of them.
    elevated_probability : float
        Probability that an object sits above floor level.
    duplicate_probability : float
        Per room, probability of adding a copy (same type and attributes)
        of an object already placed in the house.
    extra_door_probability : float
        Probability of adding a doorway between adjacent rooms that the
        spanning tree left unconnected.
    max_attempts : int
        Layout retries before giving up with PlacementError.
    """

    lexicon: Lexicon
    grid: tuple = (24, 24)
    rooms: tuple = (4, 8)
    objects_per_room: tuple = (3, 10)
    min_room_size: int = 3
    attr_probabilities: dict = field(default_factory=lambda: {'small': 0.3, 'large': 0.3},
                                     hash=False)
    elevated_probability: float = 0.2
    duplicate_probability: float = 0.15
    extra_door_probability: float = 0.3
    max_attempts: int = 50

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise ConfigError('Invalid synth configuration: ' + '; '.join(problems))

    @classmethod
    def from_dict(cls, d, lexicon):
        known = {'grid', 'rooms', 'objects_per_room', 'min_room_size', 'attr_probabilities',
                 'elevated_probability', 'duplicate_probability', 'extra_door_probability',
                 'max_attempts'}
        for key in set(d) - known:
            logger.warning('Option synth.%s not recognized!', key)
        kwargs = {k: v for k, v in d.items() if k in known}
        for key in ('grid', 'rooms', 'objects_per_room'):
            if key in kwargs:
                kwargs[key] = tuple(int(v) for v in kwargs[key])
        if 'attr_probabilities' in kwargs:
            kwargs['attr_probabilities'] = dict(kwargs['attr_probabilities'] or {})
        return cls(lexicon=lexicon, **kwargs)

    def to_dict(self):
        return {'grid': list(self.grid), 'rooms': list(self.rooms),
                'objects_per_room': list(self.objects_per_room),
                'min_room_size': self.min_room_size,
                'attr_probabilities': dict(self.attr_probabilities),
                'elevated_probability': self.elevated_probability,
                'duplicate_probability': self.duplicate_probability,
                'extra_door_probability': self.extra_door_probability,
                'max_attempts': self.max_attempts}

    def problems(self):
        problems = []
        for name in ('grid', 'rooms', 'objects_per_room'):
            value = getattr(self, name)
            if len(value) != 2:
                problems.append('{} must have two values'.format(name))
        if problems:
            return problems
        if self.rooms[0] < 1 or self.rooms[0] > self.rooms[1]:
            problems.append('rooms range {} is empty'.format(self.rooms))
        if self.objects_per_room[0] < 0 or self.objects_per_room[0] > self.objects_per_room[1]:
            problems.append('objects_per_room range {} is empty'.format(self.objects_per_room))
        if self.min_room_size < 1:
            problems.append('min_room_size must be positive')
        elif self.capacity() < self.rooms[1]:
            problems.append('grid {}x{} cannot hold {} rooms of side {}'.format(
                self.grid[0], self.grid[1], self.rooms[1], self.min_room_size))
        for attr, p in self.attr_probabilities.items():
            if attr not in self.lexicon.extra_attrs:
                problems.append('attribute {!r} is not in the lexicon extra_attrs'.format(attr))
            if not 0 <= p <= 1:
                problems.append('probability of {!r} outside [0, 1]'.format(attr))
        if sum(self.attr_probabilities.values()) > 1 + 1e-9:
            problems.append('attr_probabilities add up to more than 1')
        for name in ('elevated_probability', 'duplicate_probability', 'extra_door_probability'):
            if not 0 <= getattr(self, name) <= 1:
                problems.append('{} outside [0, 1]'.format(name))
        if self.max_attempts < 1:
            problems.append('max_attempts must be positive')
        return problems

    def capacity(self):
        """Rooms of minimum side that fit side by side in the grid interior."""
        per_row = (self.grid[0] - 1) // (self.min_room_size + 1)
        per_col = (self.grid[1] - 1) // (self.min_room_size + 1)
        return per_row * per_col


def synth_house(config, seed, house_id=None):
    """
    Synthesize a valid house.

    Parameters
    ----------
    config : SynthConfig
    seed : int
        64-bit seed; the house is a pure function of (config, seed).
    house_id : str, optional
        Defaults to ``'house_<seed>'``.

    Returns
    -------
    house : House

    Raises
    ------
    PlacementError
        When no layout with the requested room count fits after
        ``config.max_attempts`` tries.
    """
    rng = np.random.default_rng(int(seed) & ((1 << 64) - 1))
    house_id = house_id if house_id is not None else 'house_{}'.format(seed)
    lo, hi = config.rooms
    for attempt in range(config.max_attempts):
        n_rooms = int(rng.integers(lo, hi + 1))
        rects = _partition(rng, config, n_rooms)
        if rects is None:
            logger.debug('%s: layout attempt %d could not fit %d rooms', house_id, attempt, n_rooms)
            continue
        rooms = _assign_rooms(rng, config, rects)
        doorways = _connect(rng, config, rooms)
        grid = _carve(config, rooms, doorways)
        objects = _furnish(rng, config, rooms)
        return House(id=house_id, grid=grid, rooms=tuple(rooms),
                     doorways=tuple(doorways), objects=tuple(objects))
    raise PlacementError('Could not lay out {} in {} attempts: grid {}x{} is too tight '
                         'for {} rooms'.format(house_id, config.max_attempts,
                                               config.grid[0], config.grid[1], config.rooms))


def _partition(rng, config, n_rooms):
    """Guillotine split of the grid interior into `n_rooms` rectangles."""
    m = config.min_room_size
    width, height = config.grid
    rects = [(1, 1, width - 2, height - 2)]
    while len(rects) < n_rooms:
        splittable = [i for i, r in enumerate(rects) if _axes(r, m)]
        if not splittable:
            return None
        areas = np.array([_area(rects[i]) for i in splittable], dtype=float)
        index = splittable[int(rng.choice(len(splittable), p=areas / areas.sum()))]
        x0, y0, x1, y1 = rect = rects.pop(index)
        axes = _axes(rect, m)
        if len(axes) == 2:
            axis = 'x' if (x1 - x0) >= (y1 - y0) else 'y'
        else:
            axis = axes[0]
        if axis == 'x':
            wall = int(rng.integers(x0 + m, x1 - m + 1))
            rects[index:index] = [(x0, y0, wall - 1, y1), (wall + 1, y0, x1, y1)]
        else:
            wall = int(rng.integers(y0 + m, y1 - m + 1))
            rects[index:index] = [(x0, y0, x1, wall - 1), (x0, wall + 1, x1, y1)]
    return sorted(rects, key=lambda r: (r[1], r[0]))


def _axes(rect, m):
    x0, y0, x1, y1 = rect
    axes = []
    if x1 - x0 + 1 >= 2 * m + 1:
        axes.append('x')
    if y1 - y0 + 1 >= 2 * m + 1:
        axes.append('y')
    return axes


def _area(rect):
    return (rect[2] - rect[0] + 1) * (rect[3] - rect[1] + 1)


def _assign_rooms(rng, config, rects):
    room_types = config.lexicon.room_types
    return [Room('room_{}'.format(i), room_types[int(rng.integers(len(room_types)))], rect)
            for i, rect in enumerate(rects)]


def _connect(rng, config, rooms):
    """Random spanning tree of doorways over edge-adjacent rooms, plus extras."""
    candidates = []
    for i, a in enumerate(rooms):
        for b in rooms[i + 1:]:
            span = doorway_span(a, b)
            if span:
                candidates.append((a, b, span))
    order = rng.permutation(len(candidates))
    parent = {r.id: r.id for r in rooms}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    doorways, used_cells = [], set()
    for k in order:
        a, b, span = candidates[int(k)]
        ra, rb = find(a.id), find(b.id)
        if ra != rb:
            parent[ra] = rb
        elif rng.random() >= config.extra_door_probability:
            continue
        free = [c for c in span if c not in used_cells]
        if not free:
            continue
        cell = free[int(rng.integers(len(free)))]
        used_cells.add(cell)
        doorways.append(Doorway(a.id, b.id, cell))
    return sorted(doorways, key=lambda d: (d.room_a, d.room_b, d.cell))


def _carve(config, rooms, doorways):
    width, height = config.grid
    grid = [[WALL] * width for _ in range(height)]
    for room in rooms:
        for x, y in room.cells():
            grid[y][x] = FLOOR
    for door in doorways:
        x, y = door.cell
        grid[y][x] = FLOOR
    return tuple(''.join(row) for row in grid)


def _furnish(rng, config, rooms):
    lexicon = config.lexicon
    types, colors = lexicon.type_names, lexicon.colors
    attrs = sorted(config.attr_probabilities)
    probs = [config.attr_probabilities[a] for a in attrs]
    lo, hi = config.objects_per_room
    objects = []

    def place(room, cell, obj_type, color, extra):
        base = float(rng.uniform(0.5, 2.0))
        for attr in extra:
            base *= SIZE_FACTORS.get(attr, 1.0)
        elevation = int(rng.random() < config.elevated_probability)
        objects.append(ObjectInstance(id='obj_{:03d}'.format(len(objects)), obj_type=obj_type,
                                      color=color, extra_attrs=frozenset(extra),
                                      cell=cell, size=round(base, 4), room_id=room.id,
                                      elevation=elevation))

    for room in rooms:
        cells = room.cells()
        n = min(int(rng.integers(lo, hi + 1)), len(cells))
        picks = rng.choice(len(cells), size=n + 1 if n < len(cells) else n, replace=False)
        for k in picks[:n]:
            obj_type = types[int(rng.integers(len(types)))]
            color = colors[int(rng.integers(len(colors)))]
            extra = _draw_extra(rng, attrs, probs)
            place(room, cells[int(k)], obj_type, color, extra)
        spare = picks[n:]
        if objects and len(spare) and rng.random() < config.duplicate_probability:
            # same type, color and extra attributes as an earlier object
            twin = objects[int(rng.integers(len(objects)))]
            place(room, cells[int(spare[0])], twin.obj_type, twin.color, sorted(twin.extra_attrs))
    return objects


def _draw_extra(rng, attrs, probs):
    u = rng.random()
    for attr, p in zip(attrs, probs):
        if u < p:
            return [attr]
        u -= p
    return []
