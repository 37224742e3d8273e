#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
navqagen.program
----------------

Functional programs and their interpreter.

A program is a linear pipeline of primitive operations run over the
ground truth of one video: it starts from the seen objects or the seen
rooms, narrows them with filters, and ends in an answer-producing op
(``EXIST``, ``COUNT``, ``GET_ATTR``...). Tag values reach the program
through a bindings dict keyed by tag key (``'attr1'``, ``'obj_type{0}'``).

Execution never raises on ill-posed questions: an ambiguous reference,
an empty universal, or an out-of-range count yield an ``Invalid`` value,
which the generator treats as a rejected instantiation. Programs that do
not type-check raise ``ProgramTypeError``.
"""

from collections import namedtuple
from dataclasses import dataclass
import logging

from .errors import ProgramTypeError

logger = logging.getLogger(__name__)

# Value kinds flowing between ops
OBJECTS, ROOMS, OBJECT, ROOM = 'objects', 'rooms', 'object', 'room'
BINARY, NUMBER = 'binary', 'count'
ATTRIBUTE_KINDS = ('color', 'room_type', 'obj_type')
ANSWER_KINDS = (BINARY, NUMBER) + ATTRIBUTE_KINDS

DEFAULT_COUNT_RANGE = (0, 5)
DEFAULT_BINARY = ('yes', 'no')


###########################
# Program representation
###########################

# A value taken from the bindings, e.g. Bound('comp')
Bound = namedtuple('Bound', 'key')
# Objects of a given attribute and type. Keys ending in '{}' denote a set group.
ObjSpec = namedtuple('ObjSpec', 'attr obj_type')
RoomSpec = namedtuple('RoomSpec', 'room_type')
# FOR_ALL predicate: attribute kind compared against a bound tag
Pred = namedtuple('Pred', 'kind key')

Invalid = namedtuple('Invalid', 'reason')
Invalid.__doc__ = 'A well-typed program that has no valid answer on this ground truth.'


@dataclass(frozen=True)
class Op:

    name: str
    args: tuple = ()

    def __str__(self):
        if not self.args:
            return self.name
        return '{}({})'.format(self.name, ', '.join(_format_arg(a) for a in self.args))

    def to_list(self):
        return [self.name] + [_export_arg(a) for a in self.args]

    @classmethod
    def from_list(cls, item):
        return cls(item[0], tuple(_import_arg(a) for a in item[1:]))


def _format_arg(arg):
    if isinstance(arg, Bound):
        return '<{}>'.format(arg.key)
    if isinstance(arg, ObjSpec):
        return '<{}> <{}>'.format(arg.attr, arg.obj_type)
    if isinstance(arg, RoomSpec):
        return '<{}>'.format(arg.room_type)
    if isinstance(arg, Pred):
        return '{}=<{}>'.format(arg.kind, arg.key)
    return str(arg)


def _export_arg(arg):
    for kind in (Bound, ObjSpec, RoomSpec, Pred):
        if isinstance(arg, kind):
            return {kind.__name__: list(arg)}
    return arg


def _import_arg(arg):
    if isinstance(arg, dict):
        (name, values), = arg.items()
        kinds = {'Bound': Bound, 'ObjSpec': ObjSpec, 'RoomSpec': RoomSpec, 'Pred': Pred}
        return kinds[name](*values)
    return arg


def INPUT_OBJECTS():
    return Op('INPUT_OBJECTS')


def INPUT_ROOMS():
    return Op('INPUT_ROOMS')


def FILTER_TYPE(key):
    return Op('FILTER_TYPE', (key,))


def FILTER_ATTR(key):
    return Op('FILTER_ATTR', (key,))


def FILTER_COLOR(key):
    return Op('FILTER_COLOR', (key,))


def FILTER_ROOM_TYPE(key):
    return Op('FILTER_ROOM_TYPE', (key,))


def FILTER_IN_ROOM_OF(ref):
    return Op('FILTER_IN_ROOM_OF', (ref,))


def RELATE(key, ref):
    return Op('RELATE', (key, ref))


def UNIQUE():
    return Op('UNIQUE')


def EXIST():
    return Op('EXIST')


def COUNT():
    return Op('COUNT')


def COUNT_ROOMS_WITH(spec):
    return Op('COUNT_ROOMS_WITH', (spec,))


def FOR_ALL(pred, *refs):
    return Op('FOR_ALL', (pred,) + refs)


def GET_ATTR(kind, *refs):
    return Op('GET_ATTR', (kind,) + refs)


def SAME_ATTR(kind, ref1, ref2):
    return Op('SAME_ATTR', (kind, ref1, ref2))


def COMPARE_COUNT(mode, spec1, spec2):
    return Op('COMPARE_COUNT', (mode, spec1, spec2))


def COMPARE_SIZE(mode, ref1, ref2):
    return Op('COMPARE_SIZE', (mode, ref1, ref2))


def SET_EXIST(spec, scope='anywhere', room_key=None):
    args = (spec, scope) if room_key is None else (spec, scope, room_key)
    return Op('SET_EXIST', args)


def SET_EXIST_ROOMS(spec):
    return Op('SET_EXIST_ROOMS', (spec,))


###########################
# Type checking
###########################

def _same(kinds):
    def rule(op, kind):
        if kind not in kinds:
            return None
        return kind
    return rule


def _fixed(kinds, out):
    def rule(op, kind):
        return out if kind in kinds else None
    return rule


def _unique_rule(op, kind):
    return {OBJECTS: OBJECT, ROOMS: ROOM}.get(kind)


def _for_all_rule(op, kind):
    pred, refs = op.args[0], op.args[1:]
    if not isinstance(pred, Pred) or pred.kind not in ATTRIBUTE_KINDS:
        return None
    if refs:
        return BINARY if kind == OBJECTS and all(isinstance(r, ObjSpec) for r in refs) else None
    return BINARY if kind in (OBJECTS, OBJECT) else None


def _get_attr_rule(op, kind):
    attribute, refs = op.args[0], op.args[1:]
    if attribute not in ATTRIBUTE_KINDS:
        return None
    if refs:
        return attribute if kind == OBJECTS and all(isinstance(r, ObjSpec) for r in refs) else None
    if kind == OBJECT or (kind == ROOM and attribute == 'room_type'):
        return attribute
    return None


def _compare_size_rule(op, kind):
    mode, ref1, ref2 = op.args
    if kind == OBJECTS and isinstance(ref1, ObjSpec) and isinstance(ref2, ObjSpec):
        return BINARY
    if kind == ROOMS and isinstance(ref1, RoomSpec) and isinstance(ref2, RoomSpec):
        return BINARY
    return None


SIGNATURES = {
    'INPUT_OBJECTS': (0, _fixed({None}, OBJECTS)),
    'INPUT_ROOMS': (0, _fixed({None}, ROOMS)),
    'FILTER_TYPE': (1, _same({OBJECTS})),
    'FILTER_ATTR': (1, _same({OBJECTS})),
    'FILTER_COLOR': (1, _same({OBJECTS})),
    'FILTER_ROOM_TYPE': (1, _same({OBJECTS, ROOMS})),
    'FILTER_IN_ROOM_OF': (1, _same({OBJECTS})),
    'RELATE': (2, _same({OBJECTS})),
    'UNIQUE': (0, _unique_rule),
    'EXIST': (0, _fixed({OBJECTS, ROOMS}, BINARY)),
    'COUNT': (0, _fixed({OBJECTS, ROOMS}, NUMBER)),
    'COUNT_ROOMS_WITH': (1, _fixed({ROOMS}, NUMBER)),
    'FOR_ALL': (None, _for_all_rule),
    'GET_ATTR': (None, _get_attr_rule),
    'SAME_ATTR': (3, _fixed({OBJECTS}, BINARY)),
    'COMPARE_COUNT': (3, _fixed({OBJECTS}, BINARY)),
    'COMPARE_SIZE': (3, _compare_size_rule),
    'SET_EXIST': (None, _fixed({OBJECTS}, BINARY)),
    'SET_EXIST_ROOMS': (1, _fixed({ROOMS}, BINARY)),
}


def typecheck(program):
    """
    Check that `program` is a well-formed linear pipeline.

    Returns
    -------
    kind : str
        The answer kind produced by the terminal op.

    Raises
    ------
    ProgramTypeError
    """
    kind = None
    if not program:
        raise ProgramTypeError('Empty program')
    for position, op in enumerate(program):
        try:
            arity, rule = SIGNATURES[op.name]
        except KeyError:
            raise ProgramTypeError('Unknown op {} at position {}'.format(op.name, position))
        if arity is not None and len(op.args) != arity:
            raise ProgramTypeError('{} takes {} argument(s), got {}'.format(op.name, arity,
                                                                            len(op.args)))
        out = rule(op, kind)
        if out is None:
            raise ProgramTypeError('{} cannot follow a value of kind {!r} (position {})'.format(
                op, kind, position))
        kind = out
    if kind not in ANSWER_KINDS:
        raise ProgramTypeError('Program ends with a {!r}, not an answer'.format(kind))
    return kind


def bound_keys(program):
    """Tag keys a program reads from its bindings, set-group keys left as ``'attr{}'``."""
    keys = set()

    def visit(arg):
        if isinstance(arg, Bound):
            keys.add(arg.key)
        elif isinstance(arg, ObjSpec):
            keys.update((arg.attr, arg.obj_type))
        elif isinstance(arg, RoomSpec):
            keys.add(arg.room_type)
        elif isinstance(arg, Pred):
            keys.add(arg.key)

    for op in program:
        for position, arg in enumerate(op.args):
            if isinstance(arg, str) and _is_key_position(op.name, position):
                keys.add(arg)
            else:
                visit(arg)
    return keys


def _is_key_position(name, position):
    if name in ('FILTER_TYPE', 'FILTER_ATTR', 'FILTER_COLOR', 'FILTER_ROOM_TYPE'):
        return True
    if name == 'RELATE':
        return position == 0
    if name == 'SET_EXIST':
        return position == 2
    return False


###########################
# Execution
###########################

def relation_holds(rel, a, b):
    """
    Spatial relation between two seen objects of the same room. Left and
    right follow grid columns; above and below need the objects to be
    neighbours at different elevations.
    """
    if a.id == b.id or a.room_id != b.room_id:
        return False
    (ax, ay), (bx, by) = a.cell, b.cell
    near = max(abs(ax - bx), abs(ay - by)) <= 1
    if rel == 'next to':
        return near
    if rel == 'left of':
        return ax < bx
    if rel == 'right of':
        return ax > bx
    if rel == 'above':
        return near and a.elevation > b.elevation
    if rel == 'below':
        return near and a.elevation < b.elevation
    raise ProgramTypeError('Unknown relation {!r}'.format(rel))


class _Context(object):

    def __init__(self, gt, house, bindings, lexicon=None):
        self.house = house
        self.bindings = bindings
        self.objects = [house.object(oid) for oid in sorted(gt.seen_objects)]
        self.rooms = [house.room(rid) for rid in sorted(gt.seen_rooms)]
        if lexicon is not None:
            self.count_range = tuple(lexicon.count_answers)
            self.yes, self.no = lexicon.binary_answers
        else:
            self.count_range = DEFAULT_COUNT_RANGE
            self.yes, self.no = DEFAULT_BINARY

    def value(self, key):
        if isinstance(key, Bound):
            key = key.key
        try:
            return self.bindings[key]
        except KeyError:
            raise ProgramTypeError('Tag {!r} is not bound'.format(key))

    def binary(self, flag):
        return self.yes if flag else self.no

    def specs(self, spec):
        """Concrete (attr, obj_type) pairs of a spec, expanding set groups."""
        if not spec.attr.endswith('{}'):
            return [(self.value(spec.attr), self.value(spec.obj_type))]
        pairs = []
        while spec.attr.replace('{}', '{%d}' % len(pairs)) in self.bindings:
            i = len(pairs)
            pairs.append((self.value(spec.attr.replace('{}', '{%d}' % i)),
                          self.value(spec.obj_type.replace('{}', '{%d}' % i))))
        if not pairs:
            raise ProgramTypeError('Set group {} has no bound members'.format(spec))
        return pairs

    def room_types(self, spec):
        if not spec.room_type.endswith('{}'):
            return [self.value(spec.room_type)]
        types = []
        while spec.room_type.replace('{}', '{%d}' % len(types)) in self.bindings:
            types.append(self.value(spec.room_type.replace('{}', '{%d}' % len(types))))
        if not types:
            raise ProgramTypeError('Set group {} has no bound members'.format(spec))
        return types

    def matching(self, attr, obj_type, pool=None):
        pool = self.objects if pool is None else pool
        return [o for o in pool if o.obj_type == obj_type and o.has_attr(attr)]

    def resolve(self, ref):
        """The single seen object (or room) a reference denotes, else None."""
        if isinstance(ref, RoomSpec):
            room_type = self.value(ref.room_type)
            found = [r for r in self.rooms if r.room_type == room_type]
        else:
            (attr, obj_type), = self.specs(ref)
            found = self.matching(attr, obj_type)
        return found[0] if len(found) == 1 else None

    def resolve_all(self, refs):
        found = []
        for ref in refs:
            if isinstance(ref, ObjSpec) and ref.attr.endswith('{}'):
                for attr, obj_type in self.specs(ref):
                    hits = self.matching(attr, obj_type)
                    found.append(hits[0] if len(hits) == 1 else None)
            else:
                found.append(self.resolve(ref))
        return found

    def attribute(self, item, kind):
        if kind == 'color':
            return item.color
        if kind == 'obj_type':
            return item.obj_type
        if hasattr(item, 'room_type'):
            return item.room_type
        return self.house.room_type_of(item)

    def count(self, n):
        lo, hi = self.count_range
        if not lo <= n <= hi:
            return Invalid('count {} outside {}..{}'.format(n, lo, hi))
        return str(n)


def execute(program, gt, house, bindings, lexicon=None):
    """
    Run `program` on the ground truth of one video.

    Parameters
    ----------
    program : sequence of Op
    gt : TrajectoryGroundTruth
    house : House
        The house the video was recorded in (room types, cells, sizes).
    bindings : dict
        Tag key -> lexicon value.
    lexicon : Lexicon, optional
        Supplies the count range and binary answer strings; defaults to
        0..5 and yes/no.

    Returns
    -------
    answer : str or Invalid
    """
    typecheck(program)
    ctx = _Context(gt, house, bindings, lexicon)
    value = None
    for op in program:
        value = _STEP[op.name](ctx, op, value)
        if isinstance(value, Invalid):
            return value
    return value


def _input_objects(ctx, op, value):
    return list(ctx.objects)


def _input_rooms(ctx, op, value):
    return list(ctx.rooms)


def _filter_type(ctx, op, value):
    wanted = ctx.value(op.args[0])
    return [o for o in value if o.obj_type == wanted]


def _filter_attr(ctx, op, value):
    wanted = ctx.value(op.args[0])
    return [o for o in value if o.has_attr(wanted)]


def _filter_color(ctx, op, value):
    wanted = ctx.value(op.args[0])
    return [o for o in value if o.color == wanted]


def _filter_room_type(ctx, op, value):
    wanted = ctx.value(op.args[0])
    return [item for item in value if ctx.attribute(item, 'room_type') == wanted]


def _filter_in_room_of(ctx, op, value):
    anchor = ctx.resolve(op.args[0])
    if anchor is None:
        return Invalid('reference {} is not unique'.format(_format_arg(op.args[0])))
    return [o for o in value if o.room_id == anchor.room_id]


def _relate(ctx, op, value):
    rel = ctx.value(op.args[0])
    anchor = ctx.resolve(op.args[1])
    if anchor is None:
        return Invalid('reference {} is not unique'.format(_format_arg(op.args[1])))
    return [o for o in value if relation_holds(rel, o, anchor)]


def _unique(ctx, op, value):
    if len(value) != 1:
        return Invalid('unique() saw {} candidates'.format(len(value)))
    return value[0]


def _exist(ctx, op, value):
    return ctx.binary(bool(value))


def _count(ctx, op, value):
    return ctx.count(len(value))


def _count_rooms_with(ctx, op, value):
    (attr, obj_type), = ctx.specs(op.args[0])
    holders = {o.room_id for o in ctx.matching(attr, obj_type)}
    return ctx.count(sum(1 for r in value if r.id in holders))


def _for_all(ctx, op, value):
    pred, refs = op.args[0], op.args[1:]
    if refs:
        items = ctx.resolve_all(refs)
        if any(item is None for item in items):
            return Invalid('a FOR_ALL reference is not unique')
    elif isinstance(value, list):
        items = value
    else:
        items = [value]
    if not items:
        return Invalid('FOR_ALL over an empty set')
    wanted = ctx.value(pred.key)
    return ctx.binary(all(ctx.attribute(item, pred.kind) == wanted for item in items))


def _get_attr(ctx, op, value):
    kind, refs = op.args[0], op.args[1:]
    if not refs:
        return ctx.attribute(value, kind)
    items = ctx.resolve_all(refs)
    if any(item is None for item in items):
        return Invalid('a GET_ATTR reference is not unique')
    values = {ctx.attribute(item, kind) for item in items}
    if len(values) != 1:
        return Invalid('references disagree on {}'.format(kind))
    return values.pop()


def _same_attr(ctx, op, value):
    kind, ref1, ref2 = op.args
    a, b = ctx.resolve(ref1), ctx.resolve(ref2)
    if a is None or b is None:
        return Invalid('a SAME_ATTR reference is not unique')
    return ctx.binary(ctx.attribute(a, kind) == ctx.attribute(b, kind))


def _compare_count(ctx, op, value):
    mode, spec1, spec2 = op.args
    mode = ctx.value(mode) if isinstance(mode, Bound) else mode
    (a1, t1), = ctx.specs(spec1)
    (a2, t2), = ctx.specs(spec2)
    n1, n2 = len(ctx.matching(a1, t1, value)), len(ctx.matching(a2, t2, value))
    if mode == 'more':
        return ctx.binary(n1 > n2)
    if mode == 'fewer':
        return ctx.binary(n1 < n2)
    if mode == 'as_many':
        return ctx.binary(n1 == n2)
    raise ProgramTypeError('Unknown count comparison {!r}'.format(mode))


def _compare_size(ctx, op, value):
    mode, ref1, ref2 = op.args
    mode = ctx.value(mode) if isinstance(mode, Bound) else mode
    a, b = ctx.resolve(ref1), ctx.resolve(ref2)
    if a is None or b is None:
        return Invalid('a COMPARE_SIZE operand is missing')
    size_a = a.area_cells if isinstance(ref1, RoomSpec) else a.size
    size_b = b.area_cells if isinstance(ref2, RoomSpec) else b.size
    if mode == 'bigger':
        return ctx.binary(size_a > size_b)
    if mode == 'smaller':
        return ctx.binary(size_a < size_b)
    raise ProgramTypeError('Unknown size comparison {!r}'.format(mode))


def _set_exist(ctx, op, value):
    spec, scope = op.args[0], op.args[1]
    pairs = ctx.specs(spec)
    if scope == 'anywhere':
        pools = [value]
    elif scope == 'one_room':
        pools = [[o for o in value if o.room_id == r.id] for r in ctx.rooms]
    elif scope == 'named_room':
        wanted = ctx.value(op.args[2])
        pools = [[o for o in value if ctx.attribute(o, 'room_type') == wanted]]
    else:
        raise ProgramTypeError('Unknown SET_EXIST scope {!r}'.format(scope))
    return ctx.binary(any(all(ctx.matching(a, t, pool) for a, t in pairs) for pool in pools))


def _set_exist_rooms(ctx, op, value):
    present = {r.room_type for r in value}
    return ctx.binary(all(t in present for t in ctx.room_types(op.args[0])))


_STEP = {
    'INPUT_OBJECTS': _input_objects,
    'INPUT_ROOMS': _input_rooms,
    'FILTER_TYPE': _filter_type,
    'FILTER_ATTR': _filter_attr,
    'FILTER_COLOR': _filter_color,
    'FILTER_ROOM_TYPE': _filter_room_type,
    'FILTER_IN_ROOM_OF': _filter_in_room_of,
    'RELATE': _relate,
    'UNIQUE': _unique,
    'EXIST': _exist,
    'COUNT': _count,
    'COUNT_ROOMS_WITH': _count_rooms_with,
    'FOR_ALL': _for_all,
    'GET_ATTR': _get_attr,
    'SAME_ATTR': _same_attr,
    'COMPARE_COUNT': _compare_count,
    'COMPARE_SIZE': _compare_size,
    'SET_EXIST': _set_exist,
    'SET_EXIST_ROOMS': _set_exist_rooms,
}
