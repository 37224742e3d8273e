#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
navqagen.oracle
---------------

Independent answers for the builtin templates, computed by enumerating
the ground-truth sets directly instead of running programs. Used to
cross-check the executor on random small worlds: a tiny lexicon, so
that types and colors collide and uniqueness fails often, and bindings
drawn from the whole lexicon, so that empty sets are common too.
"""

from collections import namedtuple
from dataclasses import dataclass
import itertools
import logging

from tqdm import tqdm

from .groundtruth import FrameGT, aggregate_gt
from .program import Invalid, execute
from .scene import Lexicon, Noun
from .synth import SynthConfig, synth_house
from .templates import SET_ARITIES, builtin_templates
from .utils import derive_stream, draw_seed

logger = logging.getLogger(__name__)

SMALL_LEXICON = Lexicon(
    object_types=(Noun('table', 'tables'), Noun('chair', 'chairs'), Noun('lamp', 'lamps'),
                  Noun('oven', 'ovens')),
    room_types=('kitchen', 'bedroom', 'office'),
    colors=('red', 'gray', 'orange'),
    extra_attrs=('small', 'large'),
    relations=('next to', 'left of', 'right of', 'above', 'below'),
    count_answers=(0, 5),
    binary_answers=('yes', 'no'))

SMALL_SYNTH = dict(grid=(13, 13), rooms=(2, 4), objects_per_room=(1, 6), min_room_size=2,
                   attr_probabilities={'small': 0.35, 'large': 0.35},
                   elevated_probability=0.4, duplicate_probability=0.6,
                   extra_door_probability=0.5)

Disagreement = namedtuple('Disagreement', 'world template_id bindings expected got')


@dataclass
class OracleResult:

    agree: int
    total: int
    disagreements: list

    @property
    def ok(self):
        return self.agree == self.total

    def __str__(self):
        return '{}/{} agree'.format(self.agree, self.total)


class World(object):

    """Seen objects and rooms of one random ground truth."""

    def __init__(self, house, gt):
        self.house = house
        self.gt = gt
        self.objects = frozenset(house.object(oid) for oid in gt.seen_objects)
        self.rooms = frozenset(house.room(rid) for rid in gt.seen_rooms)

    def where(self, obj):
        return self.house.room(obj.room_id).room_type

    def described(self, attr, obj_type, pool=None):
        pool = self.objects if pool is None else pool
        return {o for o in pool
                if o.obj_type == obj_type and (o.color == attr or attr in o.extra_attrs)}

    def the(self, attr, obj_type):
        found = self.described(attr, obj_type)
        return next(iter(found)) if len(found) == 1 else None

    def the_room(self, room_type):
        found = {r for r in self.rooms if r.room_type == room_type}
        return next(iter(found)) if len(found) == 1 else None

    def carrying(self, attr):
        return {o for o in self.objects if o.color == attr or attr in o.extra_attrs}


###########################
# Logical definitions
###########################

# (dx, dy, dz) = first minus second
RELATIONS = {
    'next to': lambda dx, dy, dz: abs(dx) <= 1 and abs(dy) <= 1,
    'left of': lambda dx, dy, dz: dx < 0,
    'right of': lambda dx, dy, dz: dx > 0,
    'above': lambda dx, dy, dz: abs(dx) <= 1 and abs(dy) <= 1 and dz > 0,
    'below': lambda dx, dy, dz: abs(dx) <= 1 and abs(dy) <= 1 and dz < 0,
}


def related(rel, a, b):
    if a is b or a.id == b.id or a.room_id != b.room_id:
        return False
    return RELATIONS[rel](a.cell[0] - b.cell[0], a.cell[1] - b.cell[1], a.elevation - b.elevation)


def yn(flag):
    return 'yes' if flag else 'no'


def count(n):
    lo, hi = SMALL_LEXICON.count_answers
    return str(n) if lo <= n <= hi else None


def members(b, *names):
    out, i = [], 0
    while '{}{{{}}}'.format(names[0], i) in b:
        out.append(tuple(b['{}{{{}}}'.format(name, i)] for name in names))
        i += 1
    return out


def _all_of(items, test):
    items = list(items)
    if not items:
        return None
    return yn(all(test(x) for x in items))


def _both(w, b, test):
    first, second = w.the(b['attr1'], b['obj_type1']), w.the(b['attr2'], b['obj_type2'])
    if first is None or second is None:
        return None
    return yn(test(first) and test(second))


def _single(candidates):
    return next(iter(candidates)) if len(candidates) == 1 else None


def _related_to(w, b, subject_pool):
    anchor = w.the(b['attr2'], b['obj_type2'])
    if anchor is None:
        return None
    return _single({o for o in subject_pool if related(b['rel'], o, anchor)})


def t1(w, b):
    return _all_of(w.described(b['attr'], b['obj_type']), lambda o: o.color == b['color'])


def t2(w, b):
    return _all_of(w.described(b['attr'], b['obj_type']), lambda o: w.where(o) == b['room_type'])


def t3(w, b):
    return _all_of(w.carrying(b['attr']), lambda o: o.obj_type == b['obj_type'])


def t4(w, b):
    return _both(w, b, lambda o: o.color == b['color'])


def t5(w, b):
    return _both(w, b, lambda o: w.where(o) == b['room_type'])


def t6(w, b):
    first, second = w.the(b['attr1'], b['obj_type1']), w.the(b['attr2'], b['obj_type2'])
    if first is None or second is None:
        return None
    return yn(first.color == second.color)


def t7(w, b):
    subject = _related_to(w, b, w.carrying(b['attr1']))
    return None if subject is None else yn(subject.obj_type == b['obj_type1'])


def t8(w, b):
    anchor = w.the(b['attr2'], b['obj_type2'])
    if anchor is None:
        return None
    return count(sum(1 for o in w.described(b['attr1'], b['obj_type1'])
                     if o.room_id == anchor.room_id))


def t9(w, b):
    return count(sum(1 for o in w.described(b['attr'], b['obj_type'])
                     if w.where(o) == b['room_type']))


def t10(w, b):
    return count(len(w.described(b['attr'], b['obj_type'])))


def t11(w, b):
    return count(len({r for r in w.rooms
                      if any(o.room_id == r.id for o in w.described(b['attr'], b['obj_type']))}))


def t12(w, b):
    n1 = len(w.described(b['attr1'], b['obj_type1']))
    n2 = len(w.described(b['attr2'], b['obj_type2']))
    return yn(n1 > n2 if b['comp'] == 'more' else n1 < n2)


def t13(w, b):
    return yn(len(w.described(b['attr1'], b['obj_type1'])) ==
              len(w.described(b['attr2'], b['obj_type2'])))


def _size_answer(first, second, how):
    if first is None or second is None:
        return None
    return yn(first > second if how == 'bigger' else first < second)


def t14(w, b):
    first, second = w.the(b['attr1'], b['obj_type']), w.the(b['attr2'], b['obj_type'])
    return _size_answer(first and first.size, second and second.size, b['comp_rel'])


def t15(w, b):
    first, second = w.the_room(b['room_type1']), w.the_room(b['room_type2'])
    return _size_answer(first and first.area_cells, second and second.area_cells, b['comp_rel'])


def t16(w, b):
    return yn(w.described(b['attr'], b['obj_type']))


def t17(w, b):
    return yn(any(r.room_type == b['room_type'] for r in w.rooms))


def t18(w, b):
    specs = members(b, 'attr', 'obj_type')
    return yn(any(all(w.described(a, t, {o for o in w.objects if o.room_id == r.id})
                      for a, t in specs) for r in w.rooms))


def t19(w, b):
    pool = {o for o in w.objects if w.where(o) == b['room_type']}
    return yn(all(w.described(a, t, pool) for a, t in members(b, 'attr', 'obj_type')))


def t20(w, b):
    return yn(all(w.described(a, t) for a, t in members(b, 'attr', 'obj_type')))


def t21(w, b):
    present = {r.room_type for r in w.rooms}
    return yn(all(t in present for t, in members(b, 'room_type')))


def t22(w, b):
    subject = _related_to(w, b, w.described(b['attr1'], b['obj_type1']))
    return None if subject is None else subject.color


def t23(w, b):
    subject = w.the(b['attr'], b['obj_type'])
    return None if subject is None else subject.color


def t24(w, b):
    subject = _related_to(w, b, w.carrying(b['attr1']))
    return None if subject is None else subject.obj_type


def t25(w, b):
    subject = _single(w.carrying(b['attr']))
    return None if subject is None else subject.obj_type


def t26(w, b):
    found = [w.the(a, t) for a, t in members(b, 'attr', 'obj_type')]
    if any(o is None for o in found):
        return None
    places = {w.where(o) for o in found}
    return places.pop() if len(places) == 1 else None


def t27(w, b):
    subject = _related_to(w, b, w.described(b['attr1'], b['obj_type1']))
    return None if subject is None else w.where(subject)


def t28(w, b):
    subject = w.the(b['attr'], b['obj_type'])
    return None if subject is None else w.where(subject)


DEFINITIONS = {i: globals()['t{}'.format(i)] for i in range(1, 29)}


###########################
# Random small worlds
###########################

def random_world(rng, lexicon=SMALL_LEXICON):
    """
    A small house and a random ground truth over it: a few frames, each
    standing in one room and seeing a random subset of the objects in
    that room and its neighbours.
    """
    config = SynthConfig(lexicon=lexicon, **SMALL_SYNTH)
    house = synth_house(config, draw_seed(rng), house_id='house_oracle')
    frames = []
    for index in range(int(rng.integers(1, 6))):
        current = house.rooms[int(rng.integers(len(house.rooms)))].id
        linkable = house.adjacency.get(current, frozenset()) | {current}
        visible = frozenset(o.id for o in house.objects
                            if o.room_id in linkable and rng.random() < 0.6)
        linked = frozenset(house.object(oid).room_id for oid in visible) | {current}
        frames.append(FrameGT(index=index, current_room=current, visible_objects=visible,
                              linked_rooms=linked))
    return World(house, aggregate_gt(frames, house_id=house.id, video_id='video_oracle'))


def random_bindings(template, world, rng, lexicon=SMALL_LEXICON):
    """
    Bindings for every tag of `template`. Half of the values come from
    what the world shows, the other half from anywhere in the lexicon.
    """
    seen = sorted(world.objects, key=lambda o: o.id)
    pools = {
        'obj_type': (lexicon.type_names, [o.obj_type for o in seen]),
        'attr': (lexicon.attributes, [a for o in seen for a in sorted(o.attributes)]),
        'color': (lexicon.colors, [o.color for o in seen]),
        'room_type': (lexicon.room_types, sorted(r.room_type for r in world.rooms)),
        'rel': (lexicon.relations, ()),
        'comp': (('more', 'fewer'), ()),
        'comp_rel': (('bigger', 'smaller'), ()),
        'art': (('a',), ()),
    }

    def pick(name):
        anywhere, attested = pools[name]
        source = attested if attested and rng.random() < 0.5 else anywhere
        return source[int(rng.integers(len(source)))]

    bindings, arity = {}, int(SET_ARITIES[int(rng.integers(len(SET_ARITIES)))])
    for key in template.pattern.keys:
        name = key.rstrip('{}').rstrip('12')
        if key.endswith('{}'):
            for i in range(arity):
                bindings[key.replace('{}', '{%d}' % i)] = pick(name)
        else:
            bindings[key] = pick(name)
    return bindings


def run_oracle(n=1000, seed=0, templates=None, progress=False):
    """
    Compare executor and enumeration answers for every template on `n`
    random small worlds.

    Returns
    -------
    result : OracleResult
    """
    templates = templates or builtin_templates()
    agree, disagreements = 0, []
    for k in tqdm(range(n), unit='world', disable=not progress):
        rng = derive_stream(seed, 'oracle', k)
        world = random_world(rng)
        before = len(disagreements)
        for template in templates:
            bindings = random_bindings(template, world, rng)
            expected = DEFINITIONS[template.id](world, bindings)
            got = execute(template.program, world.gt, world.house, bindings, SMALL_LEXICON)
            got = None if isinstance(got, Invalid) else got
            if got != expected:
                disagreements.append(Disagreement(k, template.id, bindings, expected, got))
        agree += len(disagreements) == before
    total = n
    for d in itertools.islice(disagreements, 10):
        logger.error('world %d, template %d, %s: expected %s, got %s', *d)
    return OracleResult(agree=agree, total=total, disagreements=disagreements)


def enumeration_answer(template_id, house, gt, bindings):
    """Enumeration-oracle answer for an arbitrary (house, gt), None when invalid."""
    return DEFINITIONS[template_id](World(house, gt), bindings)

