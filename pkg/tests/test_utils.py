#!/usr/bin/env python
# -*- coding: utf-8 -*-

import argparse
import os

import numpy as np
import pytest
from hypothesis import given, strategies as st

from navqagen.utils import (assert_not_exists, canonical_json, ceil_div, derive_stream, draw_seed,
                            extant_file, ignored_exceptions, sanitize_path_for_file, sha256_files,
                            sha256_text)


def draws(rng, n=8):
    return rng.integers(0, 1 << 32, size=n).tolist()


def test_derive_stream_is_reproducible():
    assert draws(derive_stream(7, 'house', 'house_003')) == \
        draws(derive_stream(7, 'house', 'house_003'))


@pytest.mark.parametrize('labels', [
    ('house', 'house_004'),
    ('video', 'house_003'),
    ('house_003', 'house'),
    ('house',),
])
def test_derive_stream_labels_matter(labels):
    assert draws(derive_stream(7, *labels)) != draws(derive_stream(7, 'house', 'house_003'))


def test_derive_stream_seed_matters_and_is_masked():
    assert draws(derive_stream(7, 'x')) != draws(derive_stream(8, 'x'))
    assert draws(derive_stream((1 << 64) + 5, 'x')) == draws(derive_stream(5, 'x'))


def test_draw_seed_range():
    rng = np.random.default_rng(0)
    seeds = [draw_seed(rng) for _ in range(200)]
    assert all(isinstance(s, int) and 0 <= s < (1 << 63) for s in seeds)
    assert len(set(seeds)) == len(seeds)


def test_canonical_json():
    assert canonical_json({'b': 1, 'a': [1, 2], 'c': 'é'}) == '{"a":[1,2],"b":1,"c":"é"}'


def test_sha256_text():
    empty = 'e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855'
    assert sha256_text('') == empty
    assert sha256_text(b'') == empty
    assert sha256_text('abc') != sha256_text('abd')


def test_sha256_files(tmpdir):
    tmpdir.join('a.json').write('{}')
    tmpdir.join('b.json').write('[]')
    root = str(tmpdir)
    both = sha256_files(root, ['a.json', 'b.json'])
    assert both == sha256_files(root, ['a.json', 'b.json'])
    assert both != sha256_files(root, ['b.json', 'a.json'])
    # names take part in the digest, not only contents
    tmpdir.join('c.json').write('{}')
    assert sha256_files(root, ['a.json']) != sha256_files(root, ['c.json'])


def test_assert_not_exists(tmpdir):
    path = str(tmpdir.join('dataset'))
    assert assert_not_exists(path) == path
    os.mkdir(path)
    assert assert_not_exists(path) == path + '.1'
    os.mkdir(path + '.1')
    assert assert_not_exists(path) == path + '.2'
    tmpdir.join('report.json').write('{}')
    assert assert_not_exists(str(tmpdir.join('report.json'))) == str(tmpdir.join('report.1.json'))


def test_extant_file(tmpdir):
    existing = tmpdir.join('config.yaml')
    existing.write('seed: 1\n')
    assert extant_file(str(existing)) == str(existing)
    with pytest.raises(argparse.ArgumentTypeError):
        extant_file(str(tmpdir.join('missing.yaml')))


def test_ignored_exceptions():
    with ignored_exceptions(KeyError, OSError):
        {}['missing']
    with pytest.raises(ValueError):
        with ignored_exceptions(KeyError):
            raise ValueError


def test_sanitize_path_for_file():
    config = os.path.join(os.sep, 'runs', 'small', 'config.yaml')
    assert sanitize_path_for_file('out', config) == os.path.join(os.sep, 'runs', 'small', 'out')
    absolute = os.path.join(os.sep, 'data', 'out')
    assert sanitize_path_for_file(absolute, config) == absolute


@pytest.mark.parametrize('a, b, expected', [(0, 4, 0), (1, 4, 1), (4, 4, 1), (5, 4, 2),
                                            (140, 4, 35), (141, 4, 36)])
def test_ceil_div(a, b, expected):
    assert ceil_div(a, b) == expected


@given(st.integers(min_value=0, max_value=10 ** 6), st.integers(min_value=1, max_value=100))
def test_ceil_div_bounds(a, b):
    q = ceil_div(a, b)
    assert q * b >= a
    assert (q - 1) * b < a or q == 0
