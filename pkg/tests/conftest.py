#!/usr/bin/env python
# -*- coding: utf-8 -*-

import json
import os
import sys

import pytest

HERE = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, HERE)

os.environ.setdefault('NAVQAGEN_QUIET', '1')

from navqagen.io import DEFAULT_CONFIG, load_house, read_video, prepare_config
from navqagen.scene import Lexicon, House, Room, Doorway, ObjectInstance


def get_file(path):
    return os.path.join(HERE, 'data', path)


def make_object(oid, obj_type, color, cell, room_id, extra=(), size=1.0, elevation=0):
    return ObjectInstance(id=oid, obj_type=obj_type, color=color, extra_attrs=frozenset(extra),
                          cell=tuple(cell), size=size, room_id=room_id, elevation=elevation)


def three_room_house(objects=()):
    """
    Three rooms in a row, joined by doorways at (4, 2) and (8, 2)::

        #############
        #...#...#...#
        #...........#
        #...#...#...#
        #############
    """
    grid = ('#############',
            '#...#...#...#',
            '#...........#',
            '#...#...#...#',
            '#############')
    rooms = (Room('room_0', 'kitchen', (1, 1, 3, 3)),
             Room('room_1', 'living room', (5, 1, 7, 3)),
             Room('room_2', 'bedroom', (9, 1, 11, 3)))
    doorways = (Doorway('room_0', 'room_1', (4, 2)), Doorway('room_1', 'room_2', (8, 2)))
    return House(id='house_row', grid=grid, rooms=rooms, doorways=doorways,
                 objects=tuple(objects))


@pytest.fixture(scope='session')
def lexicon():
    return prepare_config(DEFAULT_CONFIG)[0].lexicon


@pytest.fixture(scope='session')
def default_config():
    return prepare_config(DEFAULT_CONFIG)[0]


@pytest.fixture(scope='session')
def gray_lexicon():
    with open(get_file('gray/lexicon.json')) as f:
        return Lexicon.from_dict(json.load(f))


@pytest.fixture
def gray_house():
    return load_house(get_file('gray/houses/house_gray.json'))


@pytest.fixture
def gray_gt():
    return read_video(get_file('gray/videos/house_gray_v000.jsonl')).gt
