#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
navqagen.scene
--------------

Environment data model:

- ``Lexicon``: names of object types (with plurals), room types, colors,
  non-color attributes, spatial relations and the answer ranges. The
  answer vocabulary is derived from it.
- ``House``: a walkable grid split into rectangular rooms joined by
  doorway cells, populated with ``ObjectInstance`` items.

Everything here is immutable after construction. ``validate_house``
reports structural problems as data instead of raising.
"""

from collections import namedtuple, deque
from dataclasses import dataclass
from functools import cached_property
import itertools
import logging

from .errors import LexiconError

logger = logging.getLogger(__name__)

WALL = '#'
FLOOR = '.'

Noun = namedtuple('Noun', 'singular plural')
Violation = namedtuple('Violation', 'invariant entity message')


###########################
# Lexicon
###########################

@dataclass(frozen=True)
class Lexicon:

    """
    Vocabulary used to build houses, realize questions and answer them.

    Parameters
    ----------
    object_types : tuple of Noun
    room_types, colors, extra_attrs, relations : tuple of str
    count_answers : (int, int)
        Inclusive range of counting answers.
    binary_answers : (str, str)
        Positive and negative answer, in that order.
    """

    object_types: tuple
    room_types: tuple
    colors: tuple
    extra_attrs: tuple
    relations: tuple
    count_answers: tuple = (0, 5)
    binary_answers: tuple = ('yes', 'no')

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise LexiconError('Invalid lexicon: ' + '; '.join(problems))

    @classmethod
    def from_dict(cls, d):
        try:
            nouns = []
            for item in d['object_types']:
                if isinstance(item, dict):
                    nouns.append(Noun(item['singular'], item.get('plural')))
                else:
                    singular, plural = (list(item) + [None])[:2]
                    nouns.append(Noun(singular, plural))
            return cls(object_types=tuple(nouns),
                       room_types=tuple(d['room_types']),
                       colors=tuple(d['colors']),
                       extra_attrs=tuple(d.get('extra_attrs', ())),
                       relations=tuple(d.get('relations', ())),
                       count_answers=tuple(int(x) for x in d.get('count_answers', (0, 5))),
                       binary_answers=tuple(d.get('binary_answers', ('yes', 'no'))))
        except (KeyError, TypeError) as e:
            raise LexiconError('Malformed lexicon section: {}'.format(e))

    def to_dict(self):
        return {'object_types': [list(n) for n in self.object_types],
                'room_types': list(self.room_types),
                'colors': list(self.colors),
                'extra_attrs': list(self.extra_attrs),
                'relations': list(self.relations),
                'count_answers': list(self.count_answers),
                'binary_answers': list(self.binary_answers)}

    def problems(self):
        problems = []
        for noun in self.object_types:
            if not noun.plural:
                problems.append('object type {!r} has no plural form'.format(noun.singular))
        names = list(itertools.chain(self.type_names, self.room_types, self.colors,
                                     self.extra_attrs, self.relations, self.binary_answers))
        seen, dupes = set(), set()
        for name in names:
            if name in seen:
                dupes.add(name)
            seen.add(name)
        if dupes:
            problems.append('names used more than once: {}'.format(', '.join(sorted(dupes))))
        if len(self.count_answers) != 2 or self.count_answers[0] > self.count_answers[1]:
            problems.append('count_answers must be an inclusive (low, high) range')
        if len(self.binary_answers) != 2:
            problems.append('binary_answers must hold exactly two strings')
        return problems

    @property
    def type_names(self):
        return tuple(n.singular for n in self.object_types)

    @property
    def attributes(self):
        """Every value an ``<attr>`` tag may take: colors first, then the rest."""
        return self.colors + self.extra_attrs

    @property
    def yes(self):
        return self.binary_answers[0]

    @property
    def no(self):
        return self.binary_answers[1]

    def binary(self, value):
        return self.yes if value else self.no

    @property
    def count_range(self):
        lo, hi = self.count_answers
        return range(lo, hi + 1)

    def plural(self, singular):
        try:
            plural = self._plurals[singular]
        except KeyError:
            raise LexiconError('No plural form for {!r}'.format(singular))
        if not plural:
            raise LexiconError('No plural form for {!r}'.format(singular))
        return plural

    @cached_property
    def _plurals(self):
        return {n.singular: n.plural for n in self.object_types}

    @cached_property
    def vocabulary(self):
        """
        Sorted answer vocabulary: binary answers, counts, colors, room types
        and object types.
        """
        words = set(self.binary_answers)
        words.update(str(i) for i in self.count_range)
        words.update(self.colors)
        words.update(self.room_types)
        words.update(self.type_names)
        return tuple(sorted(words))


###########################
# House
###########################

@dataclass(frozen=True)
class Room:

    """
    Axis-aligned rectangular room. `bbox` is ``(x0, y0, x1, y1)``, inclusive.
    """

    id: str
    room_type: str
    bbox: tuple

    @property
    def width(self):
        return self.bbox[2] - self.bbox[0] + 1

    @property
    def height(self):
        return self.bbox[3] - self.bbox[1] + 1

    @property
    def area_cells(self):
        return max(self.width, 0) * max(self.height, 0)

    def contains(self, cell):
        x, y = cell
        x0, y0, x1, y1 = self.bbox
        return x0 <= x <= x1 and y0 <= y <= y1

    def cells(self):
        x0, y0, x1, y1 = self.bbox
        return [(x, y) for y in range(y0, y1 + 1) for x in range(x0, x1 + 1)]


@dataclass(frozen=True)
class ObjectInstance:

    id: str
    obj_type: str
    color: str
    extra_attrs: frozenset
    cell: tuple
    size: float
    room_id: str
    elevation: int = 0

    @property
    def attributes(self):
        return frozenset((self.color,)) | self.extra_attrs

    def has_attr(self, attr):
        return attr == self.color or attr in self.extra_attrs


@dataclass(frozen=True)
class Doorway:

    room_a: str
    room_b: str
    cell: tuple

    def joins(self, room_id):
        return room_id in (self.room_a, self.room_b)

    def other(self, room_id):
        return self.room_b if room_id == self.room_a else self.room_a


@dataclass(frozen=True)
class House:

    """
    A synthetic house.

    Parameters
    ----------
    id : str
    grid : tuple of str
        One string per row; ``'#'`` marks walls and ``'.'`` walkable cells.
        Cells are addressed as ``(x, y)`` = (column, row).
    rooms : tuple of Room
    doorways : tuple of Doorway
    objects : tuple of ObjectInstance
    """

    id: str
    grid: tuple
    rooms: tuple
    doorways: tuple = ()
    objects: tuple = ()

    @property
    def width(self):
        return len(self.grid[0]) if self.grid else 0

    @property
    def height(self):
        return len(self.grid)

    def in_bounds(self, cell):
        x, y = cell
        return 0 <= x < self.width and 0 <= y < self.height

    def is_walkable(self, cell):
        return self.in_bounds(cell) and self.grid[cell[1]][cell[0]] == FLOOR

    def room(self, room_id):
        try:
            return self._rooms_by_id[room_id]
        except KeyError:
            raise KeyError('Unknown room {!r} in house {}'.format(room_id, self.id))

    def object(self, object_id):
        return self._objects_by_id[object_id]

    def room_at(self, cell):
        """Id of the room containing `cell`, or None for walls and doorways."""
        return self._room_by_cell.get(tuple(cell))

    def room_type_of(self, obj):
        return self.room(obj.room_id).room_type

    def is_doorway(self, cell):
        return tuple(cell) in self._doorway_cells

    def objects_in(self, room_id):
        return [o for o in self.objects if o.room_id == room_id]

    @cached_property
    def _rooms_by_id(self):
        return {r.id: r for r in self.rooms}

    @cached_property
    def _objects_by_id(self):
        return {o.id: o for o in self.objects}

    @cached_property
    def _room_by_cell(self):
        lookup = {}
        for room in self.rooms:
            for cell in room.cells():
                lookup.setdefault(cell, room.id)
        return lookup

    @cached_property
    def _doorway_cells(self):
        return frozenset(tuple(d.cell) for d in self.doorways)

    @cached_property
    def adjacency(self):
        adj = {r.id: set() for r in self.rooms}
        for door in self.doorways:
            if door.room_a == door.room_b:
                continue
            adj.setdefault(door.room_a, set()).add(door.room_b)
            adj.setdefault(door.room_b, set()).add(door.room_a)
        return {k: frozenset(v) for k, v in adj.items()}


def adjacent_rooms(house, room_id):
    """
    Rooms sharing a doorway with `room_id`. Never contains `room_id` itself.

    Raises
    ------
    KeyError
        If the house has no such room.
    """
    house.room(room_id)
    return set(house.adjacency.get(room_id, ()))


def doorway_span(a, b):
    """
    Wall cells where a doorway between rooms `a` and `b` may sit: the
    one-cell wall separating two edge-adjacent bboxes, restricted to the
    stretch both rooms face. Empty if the rooms are not edge-adjacent.
    """
    ax0, ay0, ax1, ay1 = a.bbox
    bx0, by0, bx1, by1 = b.bbox
    lo_y, hi_y = max(ay0, by0), min(ay1, by1)
    lo_x, hi_x = max(ax0, bx0), min(ax1, bx1)
    if lo_y <= hi_y:
        if bx0 == ax1 + 2:
            return [(ax1 + 1, y) for y in range(lo_y, hi_y + 1)]
        if ax0 == bx1 + 2:
            return [(bx1 + 1, y) for y in range(lo_y, hi_y + 1)]
    if lo_x <= hi_x:
        if by0 == ay1 + 2:
            return [(x, ay1 + 1) for x in range(lo_x, hi_x + 1)]
        if ay0 == by1 + 2:
            return [(x, by1 + 1) for x in range(lo_x, hi_x + 1)]
    return []


###########################
# Validation
###########################

def validate_house(house):
    """
    Check every structural invariant of `house`.

    Returns
    -------
    violations : list of Violation
        Empty iff the house is valid. Each entry names the broken invariant
        and the offending entity id.
    """
    violations = []

    def flag(invariant, entity, message, *args):
        violations.append(Violation(invariant, entity, message.format(*args)))

    width = len(house.grid[0]) if house.grid else 0
    for y, row in enumerate(house.grid):
        if len(row) != width or set(row) - {WALL, FLOOR}:
            flag('grid_shape', house.id, 'row {} is ragged or has unknown cell marks', y)

    room_ids = [r.id for r in house.rooms]
    for rid in set(room_ids):
        if room_ids.count(rid) > 1:
            flag('unique_ids', rid, 'room id used {} times', room_ids.count(rid))

    for room in house.rooms:
        x0, y0, x1, y1 = room.bbox
        if x1 < x0 or y1 < y0:
            flag('room_bbox', room.id, 'empty bbox {}', room.bbox)
        elif not (house.in_bounds((x0, y0)) and house.in_bounds((x1, y1))):
            flag('room_bbox', room.id, 'bbox {} outside the grid', room.bbox)
        elif room.area_cells != room.width * room.height:
            flag('room_area', room.id, 'area {} != {}x{}', room.area_cells, room.width, room.height)

    for a, b in itertools.combinations(house.rooms, 2):
        if _overlap(a.bbox, b.bbox):
            flag('rooms_disjoint', a.id, 'bbox overlaps room {}', b.id)

    door_cells = set()
    for door in house.doorways:
        entity = '{}|{}'.format(door.room_a, door.room_b)
        if door.room_a == door.room_b:
            flag('doorway_rooms', entity, 'doorway joins a room to itself')
            continue
        try:
            a, b = house.room(door.room_a), house.room(door.room_b)
        except KeyError as e:
            flag('doorway_rooms', entity, str(e))
            continue
        cell = tuple(door.cell)
        if cell not in doorway_span(a, b):
            flag('doorway_adjacent', entity, 'cell {} does not join edge-adjacent rooms', cell)
        if not house.is_walkable(cell):
            flag('doorway_walkable', entity, 'doorway cell {} is a wall', cell)
        door_cells.add(cell)

    for y, row in enumerate(house.grid):
        for x, mark in enumerate(row):
            if mark != FLOOR:
                continue
            owners = [r.id for r in house.rooms if r.contains((x, y))]
            if len(owners) > 1 or (not owners and (x, y) not in door_cells):
                flag('walkable_owner', '{},{}'.format(x, y),
                     'walkable cell belongs to {} rooms and is {}a doorway',
                     len(owners), '' if (x, y) in door_cells else 'not ')

    if house.rooms and not _connected(house):
        flag('connected', house.id, 'room adjacency graph is disconnected')

    object_ids, occupied = set(), {}
    for obj in house.objects:
        if obj.id in object_ids:
            flag('unique_ids', obj.id, 'object id used more than once')
        object_ids.add(obj.id)
        cell = tuple(obj.cell)
        owner = house.room_at(cell)
        try:
            room = house.room(obj.room_id)
        except KeyError:
            flag('object_room', obj.id, 'unknown room {}', obj.room_id)
            continue
        if not room.contains(cell):
            flag('object_in_bbox', obj.id, 'cell {} outside room {}', cell, obj.room_id)
        elif owner != obj.room_id:
            flag('object_room', obj.id, 'cell {} belongs to {}, not {}', cell, owner, obj.room_id)
        if obj.color in obj.extra_attrs:
            flag('object_color', obj.id, 'color {!r} repeated as extra attribute', obj.color)
        if not obj.size > 0:
            flag('object_size', obj.id, 'non-positive size {}', obj.size)
        if cell in occupied:
            flag('object_cell', obj.id, 'shares cell {} with {}', cell, occupied[cell])
        occupied.setdefault(cell, obj.id)

    return violations


def _overlap(a, b):
    return not (a[2] < b[0] or b[2] < a[0] or a[3] < b[1] or b[3] < a[1])


def _connected(house):
    start = house.rooms[0].id
    seen, queue = {start}, deque([start])
    while queue:
        for nxt in house.adjacency.get(queue.popleft(), ()):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return len(seen) == len({r.id for r in house.rooms})


###########################
# Serialization
###########################

def house_to_dict(house):
    return {
        'format_version': 1,
        'id': house.id,
        'grid': list(house.grid),
        'rooms': [{'id': r.id, 'room_type': r.room_type, 'bbox': list(r.bbox)}
                  for r in house.rooms],
        'doorways': [{'rooms': [d.room_a, d.room_b], 'cell': list(d.cell)}
                     for d in house.doorways],
        'objects': [{'id': o.id, 'obj_type': o.obj_type, 'color': o.color,
                     'extra_attrs': sorted(o.extra_attrs), 'cell': list(o.cell),
                     'size': o.size, 'room_id': o.room_id, 'elevation': o.elevation}
                    for o in house.objects],
    }


def house_from_dict(d):
    rooms = tuple(Room(r['id'], r['room_type'], tuple(r['bbox'])) for r in d['rooms'])
    doorways = tuple(Doorway(dw['rooms'][0], dw['rooms'][1], tuple(dw['cell']))
                     for dw in d.get('doorways', ()))
    objects = tuple(ObjectInstance(id=o['id'], obj_type=o['obj_type'], color=o['color'],
                                   extra_attrs=frozenset(o.get('extra_attrs', ())),
                                   cell=tuple(o['cell']), size=float(o['size']),
                                   room_id=o['room_id'], elevation=int(o.get('elevation', 0)))
                    for o in d.get('objects', ()))
    return House(id=d['id'], grid=tuple(d['grid']), rooms=rooms,
                 doorways=doorways, objects=objects)
