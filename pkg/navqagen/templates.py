#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
navqagen.templates
------------------

Question templates: a small text DSL with typed tags and a table of the
28 builtin templates, each paired with its functional program.

Tag syntax
    ``<name>``, ``<name1>``/``<name2>`` for ordinals, ``<obj_type-pl>``
    for plural object types, and ``<name{}>`` inside a
    ``set( ... )`` group, which is repeated two or three times when the
    question is realized. Valid names: attr, obj_type, room_type, color,
    rel, comp, comp_rel, art.
"""

from collections import OrderedDict
from dataclasses import dataclass
from functools import cached_property
import logging
import re

from .errors import QuestionTooLong, TemplateSyntaxError
from .program import (Bound, ObjSpec, RoomSpec, Pred, typecheck, bound_keys,
                      INPUT_OBJECTS, INPUT_ROOMS, FILTER_TYPE, FILTER_ATTR, FILTER_ROOM_TYPE,
                      FILTER_IN_ROOM_OF, RELATE, UNIQUE, EXIST, COUNT, COUNT_ROOMS_WITH,
                      FOR_ALL, GET_ATTR, SAME_ATTR, COMPARE_COUNT, COMPARE_SIZE, SET_EXIST,
                      SET_EXIST_ROOMS)

logger = logging.getLogger(__name__)

TAG_NAMES = ('attr', 'obj_type', 'room_type', 'color', 'rel', 'comp', 'comp_rel', 'art')
SET_ARITIES = (2, 3)
MAX_QUESTION_TOKENS = 56
SET_JOINER = ' and '

_TAG_RE = re.compile(r'^(?P<name>[a-z_]+?)(?P<ordinal>[1-9]|\{\})?(?P<plural>-pl)?$')
_TOKEN_RE = re.compile(r"\w+|[^\w\s]")
_ART = '\x00'
_ARTICLE_RE = re.compile(_ART + r'(\s+)(\w)')

# Question categories
EQUALS_ATTR = 'Equals_attr'
COUNT_CATEGORY = 'Count'
COMPARE_COUNT_CATEGORY = 'Compare_count'
COMPARE_SIZE_CATEGORY = 'Compare_size'
EXIST_CATEGORY = 'Exist'
QUERY_COLOR = 'Query_color'
QUERY_OBJ_TYPE = 'Query_obj_type'
QUERY_ROOM_LOCATION = 'Query_room_location'
CATEGORIES = (EQUALS_ATTR, COUNT_CATEGORY, COMPARE_COUNT_CATEGORY, COMPARE_SIZE_CATEGORY,
              EXIST_CATEGORY, QUERY_COLOR, QUERY_OBJ_TYPE, QUERY_ROOM_LOCATION)
BINARY_CATEGORIES = (EQUALS_ATTR, COMPARE_COUNT_CATEGORY, COMPARE_SIZE_CATEGORY, EXIST_CATEGORY)

# Question counts of the reference release, per template id. They seed
# the default quota weights and the audit comparison.
REFERENCE_COUNTS = OrderedDict([
    (1, 4014), (2, 3811), (3, 3539), (4, 3968), (5, 3804), (6, 4018), (7, 3315),
    (8, 3999), (9, 3763), (10, 4120), (11, 3834),
    (12, 4058), (13, 4100),
    (14, 3272), (15, 3148),
    (16, 4122), (17, 3335), (18, 3877), (19, 4025), (20, 4107), (21, 3750),
    (22, 2178), (23, 3592),
    (24, 3119), (25, 2883),
    (26, 3816), (27, 2284), (28, 3481),
])


###########################
# Patterns
###########################

@dataclass(frozen=True)
class Tag:

    """
    A typed slot in a template.

    `ordinal` is 1 or 2 for numbered tags, None otherwise. `in_set` marks
    the ``{}`` slots of a set group, whose binding keys carry the member
    index (``attr{0}``, ``attr{1}``...).
    """

    name: str
    ordinal: int = None
    plural: bool = False
    in_set: bool = False

    @property
    def key(self):
        """Binding key. Plural and singular forms of a tag share it."""
        ordinal = str(self.ordinal) if self.ordinal else ''
        return self.name + ordinal + ('{}' if self.in_set else '')

    def member_key(self, index):
        return self.key.replace('{}', '{%d}' % index)

    def __str__(self):
        return '<{}{}>'.format(self.key, '-pl' if self.plural else '')


@dataclass(frozen=True)
class SetGroup:

    chunks: tuple

    @property
    def tags(self):
        return tuple(c for c in self.chunks if isinstance(c, Tag))

    def __str__(self):
        return 'set({})'.format(''.join(str(c) for c in self.chunks))


@dataclass(frozen=True)
class TemplatePattern:

    chunks: tuple

    @property
    def text(self):
        return ''.join(str(c) for c in self.chunks)

    @property
    def tags(self):
        """Every tag, in textual order, set members included."""
        tags = []
        for chunk in self.chunks:
            if isinstance(chunk, Tag):
                tags.append(chunk)
            elif isinstance(chunk, SetGroup):
                tags.extend(chunk.tags)
        return tuple(tags)

    @property
    def keys(self):
        return tuple(OrderedDict.fromkeys(t.key for t in self.tags))

    @property
    def set_group(self):
        groups = [c for c in self.chunks if isinstance(c, SetGroup)]
        return groups[0] if groups else None


def parse_template(text):
    """
    Parse a template string into a TemplatePattern.

    Raises
    ------
    TemplateSyntaxError
        On malformed or unknown tags, unbalanced ``set(``, ``{}`` outside
        a set group and plural markers on anything but object types.
    """
    chunks, group, literal = [], None, []
    pos = 0

    def flush():
        if literal:
            (group if group is not None else chunks).append(''.join(literal))
            del literal[:]

    while pos < len(text):
        if text.startswith('set(', pos):
            if group is not None:
                raise TemplateSyntaxError('Nested set( groups', text, pos)
            flush()
            group, group_start = [], pos
            pos += 4
        elif text[pos] == ')' and group is not None:
            flush()
            members = tuple(group)
            group = None
            if not any(isinstance(c, Tag) and c.in_set for c in members):
                raise TemplateSyntaxError('set( group without {} tags', text, group_start)
            chunks.append(SetGroup(members))
            pos += 1
        elif text[pos] == '<':
            end = text.find('>', pos)
            if end < 0 or '<' in text[pos + 1:end]:
                raise TemplateSyntaxError('Unterminated tag', text, pos)
            flush()
            tag = _parse_tag(text, pos, text[pos + 1:end], in_set=group is not None)
            (group if group is not None else chunks).append(tag)
            pos = end + 1
        elif text[pos] == '>':
            raise TemplateSyntaxError('Stray >', text, pos)
        else:
            literal.append(text[pos])
            pos += 1
    if group is not None:
        raise TemplateSyntaxError('Unbalanced set( group', text, group_start)
    flush()
    return TemplatePattern(tuple(chunks))


def _parse_tag(text, pos, inner, in_set):
    match = _TAG_RE.match(inner)
    if match is None:
        raise TemplateSyntaxError('Malformed tag <{}>'.format(inner), text, pos)
    name, ordinal, plural = match.group('name', 'ordinal', 'plural')
    if name not in TAG_NAMES:
        raise TemplateSyntaxError('Unknown tag name {!r}'.format(name), text, pos)
    if plural and name != 'obj_type':
        raise TemplateSyntaxError('Only obj_type takes a plural form', text, pos)
    set_slot = ordinal == '{}'
    if set_slot and not in_set:
        raise TemplateSyntaxError('<{}> outside a set( group'.format(inner), text, pos)
    if in_set and not set_slot and name != 'art':
        raise TemplateSyntaxError('<{}> inside a set( group needs {{}}'.format(inner), text, pos)
    return Tag(name=name, ordinal=None if set_slot or not ordinal else int(ordinal),
               plural=bool(plural), in_set=set_slot)


###########################
# Templates
###########################

@dataclass(frozen=True)
class QuestionTemplate:

    """
    A template with its program.

    `noncolor_attrs` lists the attr keys that never take a color value,
    because the question already asks about color.
    """

    id: int
    category: str
    pattern: TemplatePattern
    program: tuple
    answer_kind: str
    noncolor_attrs: frozenset = frozenset()

    @property
    def text(self):
        return self.pattern.text

    @cached_property
    def set_arity_keys(self):
        group = self.pattern.set_group
        return tuple(t.key for t in group.tags if t.in_set) if group else ()

    @property
    def is_binary(self):
        return self.answer_kind == 'binary'

    def to_dict(self):
        return {'id': self.id, 'category': self.category, 'text': self.text,
                'answer_kind': self.answer_kind,
                'program': [op.to_list() for op in self.program],
                'noncolor_attrs': sorted(self.noncolor_attrs)}


def _ref(n):
    return ObjSpec('attr{}'.format(n), 'obj_type{}'.format(n))


_SET = ObjSpec('attr{}', 'obj_type{}')
_PLAIN = ObjSpec('attr', 'obj_type')

# id, category, text, program, attr keys without colors
_TABLE = [
    (1, EQUALS_ATTR, 'Are all <attr> <obj_type-pl> <color>?',
     [INPUT_OBJECTS(), FILTER_TYPE('obj_type'), FILTER_ATTR('attr'),
      FOR_ALL(Pred('color', 'color'))], {'attr'}),
    (2, EQUALS_ATTR, 'Are all <attr> <obj_type-pl> in the <room_type>?',
     [INPUT_OBJECTS(), FILTER_TYPE('obj_type'), FILTER_ATTR('attr'),
      FOR_ALL(Pred('room_type', 'room_type'))], ()),
    (3, EQUALS_ATTR, 'Are all <attr> things <obj_type-pl>?',
     [INPUT_OBJECTS(), FILTER_ATTR('attr'), FOR_ALL(Pred('obj_type', 'obj_type'))], ()),
    (4, EQUALS_ATTR, 'Are both the <attr1> <obj_type1> and the <attr2> <obj_type2> <color>?',
     [INPUT_OBJECTS(), FOR_ALL(Pred('color', 'color'), _ref(1), _ref(2))], {'attr1', 'attr2'}),
    (5, EQUALS_ATTR, 'Are both the <attr1> <obj_type1> and the <attr2> <obj_type2> in the '
                     '<room_type>?',
     [INPUT_OBJECTS(), FOR_ALL(Pred('room_type', 'room_type'), _ref(1), _ref(2))], ()),
    (6, EQUALS_ATTR, 'Are the <attr1> <obj_type1> and the <attr2> <obj_type2> the same color?',
     [INPUT_OBJECTS(), SAME_ATTR('color', _ref(1), _ref(2))], {'attr1', 'attr2'}),
    (7, EQUALS_ATTR, 'Is the <attr1> thing <rel> the <attr2> <obj_type2> <art> <obj_type1>?',
     [INPUT_OBJECTS(), FILTER_ATTR('attr1'), RELATE('rel', _ref(2)), UNIQUE(),
      FOR_ALL(Pred('obj_type', 'obj_type1'))], ()),
    (8, COUNT_CATEGORY, 'How many <attr1> <obj_type1-pl> are in the room containing the '
                        '<attr2> <obj_type2>?',
     [INPUT_OBJECTS(), FILTER_TYPE('obj_type1'), FILTER_ATTR('attr1'),
      FILTER_IN_ROOM_OF(_ref(2)), COUNT()], ()),
    (9, COUNT_CATEGORY, 'How many <attr> <obj_type-pl> are in the <room_type>?',
     [INPUT_OBJECTS(), FILTER_TYPE('obj_type'), FILTER_ATTR('attr'),
      FILTER_ROOM_TYPE('room_type'), COUNT()], ()),
    (10, COUNT_CATEGORY, 'How many <obj_type-pl> are <attr>?',
     [INPUT_OBJECTS(), FILTER_TYPE('obj_type'), FILTER_ATTR('attr'), COUNT()], ()),
    (11, COUNT_CATEGORY, 'How many rooms have <attr> <obj_type-pl>?',
     [INPUT_ROOMS(), COUNT_ROOMS_WITH(_PLAIN)], ()),
    (12, COMPARE_COUNT_CATEGORY, 'Are there <comp> <attr1> <obj_type1-pl> than <attr2> '
                                 '<obj_type2-pl>?',
     [INPUT_OBJECTS(), COMPARE_COUNT(Bound('comp'), _ref(1), _ref(2))], ()),
    (13, COMPARE_COUNT_CATEGORY, 'Are there as many <attr1> <obj_type1-pl> as there are '
                                 '<attr2> <obj_type2-pl>?',
     [INPUT_OBJECTS(), COMPARE_COUNT('as_many', _ref(1), _ref(2))], ()),
    (14, COMPARE_SIZE_CATEGORY, 'Is the <attr1> <obj_type> <comp_rel> than the <attr2> one?',
     [INPUT_OBJECTS(), COMPARE_SIZE(Bound('comp_rel'), ObjSpec('attr1', 'obj_type'),
                                    ObjSpec('attr2', 'obj_type'))], ()),
    (15, COMPARE_SIZE_CATEGORY, 'Is the <room_type1> <comp_rel> than the <room_type2>?',
     [INPUT_ROOMS(), COMPARE_SIZE(Bound('comp_rel'), RoomSpec('room_type1'),
                                  RoomSpec('room_type2'))], ()),
    (16, EXIST_CATEGORY, 'Is there <art> <attr> <obj_type>?',
     [INPUT_OBJECTS(), FILTER_TYPE('obj_type'), FILTER_ATTR('attr'), EXIST()], ()),
    (17, EXIST_CATEGORY, 'Is there <art> <room_type>?',
     [INPUT_ROOMS(), FILTER_ROOM_TYPE('room_type'), EXIST()], ()),
    (18, EXIST_CATEGORY, 'Is there a room that has set(<art> <attr{}> <obj_type{}>)?',
     [INPUT_OBJECTS(), SET_EXIST(_SET, 'one_room')], ()),
    (19, EXIST_CATEGORY, 'Is there set(<art> <attr{}> <obj_type{}>) in the <room_type>?',
     [INPUT_OBJECTS(), SET_EXIST(_SET, 'named_room', 'room_type')], ()),
    (20, EXIST_CATEGORY, 'Is there set(<art> <attr{}> <obj_type{}>)?',
     [INPUT_OBJECTS(), SET_EXIST(_SET, 'anywhere')], ()),
    (21, EXIST_CATEGORY, 'Is there set(<art> <room_type{}>)?',
     [INPUT_ROOMS(), SET_EXIST_ROOMS(RoomSpec('room_type{}'))], ()),
    (22, QUERY_COLOR, 'What color is the <attr1> <obj_type1> <rel> the <attr2> <obj_type2>?',
     [INPUT_OBJECTS(), FILTER_TYPE('obj_type1'), FILTER_ATTR('attr1'), RELATE('rel', _ref(2)),
      UNIQUE(), GET_ATTR('color')], {'attr1'}),
    (23, QUERY_COLOR, 'What color is the <attr> <obj_type>?',
     [INPUT_OBJECTS(), FILTER_TYPE('obj_type'), FILTER_ATTR('attr'), UNIQUE(),
      GET_ATTR('color')], {'attr'}),
    (24, QUERY_OBJ_TYPE, 'What is the <attr1> thing <rel> the <attr2> <obj_type2>?',
     [INPUT_OBJECTS(), FILTER_ATTR('attr1'), RELATE('rel', _ref(2)), UNIQUE(),
      GET_ATTR('obj_type')], ()),
    (25, QUERY_OBJ_TYPE, 'What is the <attr> thing?',
     [INPUT_OBJECTS(), FILTER_ATTR('attr'), UNIQUE(), GET_ATTR('obj_type')], ()),
    (26, QUERY_ROOM_LOCATION, 'Where are the set(<attr{}> <obj_type{}>)?',
     [INPUT_OBJECTS(), GET_ATTR('room_type', _SET)], ()),
    (27, QUERY_ROOM_LOCATION, 'Where is the <attr1> <obj_type1> <rel> the <attr2> <obj_type2>?',
     [INPUT_OBJECTS(), FILTER_TYPE('obj_type1'), FILTER_ATTR('attr1'), RELATE('rel', _ref(2)),
      UNIQUE(), GET_ATTR('room_type')], ()),
    (28, QUERY_ROOM_LOCATION, 'Where is the <attr> <obj_type>?',
     [INPUT_OBJECTS(), FILTER_TYPE('obj_type'), FILTER_ATTR('attr'), UNIQUE(),
      GET_ATTR('room_type')], ()),
]


def make_template(template_id, category, text, program, noncolor_attrs=()):
    """
    Build a QuestionTemplate, checking that the program type-checks and
    reads every tag of the text.
    """
    pattern = parse_template(text)
    program = tuple(program)
    answer_kind = typecheck(program)
    unread = set(pattern.keys) - bound_keys(program) - {'art'}
    if unread:
        raise TemplateSyntaxError('Template {}: tags {} are not used by its program'.format(
            template_id, ', '.join(sorted(unread))), text)
    return QuestionTemplate(id=template_id, category=category, pattern=pattern,
                            program=program, answer_kind=answer_kind,
                            noncolor_attrs=frozenset(noncolor_attrs))


def builtin_templates():
    """The 28 builtin templates, ordered by id."""
    return [make_template(*row) for row in _TABLE]


###########################
# Realization
###########################

def set_arity(template, bindings):
    """Number of members bound for the set group of `template` (0 without one)."""
    keys = template.set_arity_keys
    if not keys:
        return 0
    n = 0
    while keys[0].replace('{}', '{%d}' % n) in bindings:
        n += 1
    return n


def realize_text(template, bindings, lexicon):
    """
    Question text for `template` under `bindings`.

    Plural tags use the lexicon plural, ``<art>`` becomes "a" or "an"
    depending on the next word, and set groups are repeated once per
    bound member and joined with "and".

    Raises
    ------
    LexiconError
        If a plural is missing.
    QuestionTooLong
        If the question exceeds 56 tokens.
    """
    pieces = []
    for chunk in template.pattern.chunks:
        if isinstance(chunk, SetGroup):
            arity = set_arity(template, bindings)
            members = [''.join(_realize_chunk(c, bindings, lexicon, index)
                               for c in chunk.chunks) for index in range(arity)]
            pieces.append(SET_JOINER.join(members))
        else:
            pieces.append(_realize_chunk(chunk, bindings, lexicon))
    text = _ARTICLE_RE.sub(_article, ''.join(pieces)).replace(_ART, 'a')
    tokens = token_count(text)
    if tokens > MAX_QUESTION_TOKENS:
        raise QuestionTooLong('Question has {} tokens (max {}): {}'.format(
            tokens, MAX_QUESTION_TOKENS, text))
    return text


def _realize_chunk(chunk, bindings, lexicon, index=None):
    if isinstance(chunk, str):
        return chunk
    if chunk.name == 'art':
        return _ART
    key = chunk.member_key(index) if chunk.in_set else chunk.key
    value = bindings[key]
    if chunk.plural:
        return lexicon.plural(value)
    return value


def _article(match):
    article = 'an' if match.group(2).lower() in 'aeiou' else 'a'
    return article + match.group(1) + match.group(2)


def token_count(text):
    return len(_TOKEN_RE.findall(text))
