#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
navqagen.utils
--------------

Collection of miscelaneous functions: seeded stream derivation,
canonical serialization and digests, path helpers.
"""

from contextlib import contextmanager
import argparse
import hashlib
import json
import os

import numpy as np

SEED_MASK = (1 << 64) - 1


def derive_stream(master_seed, *labels):
    """
    Derive a reproducible child random stream from `master_seed` and a
    sequence of scope labels, such as ``derive_stream(7, 'house', 'house_003')``.

    Identical (seed, labels) always give the same stream; distinct label
    sequences give independent streams through numpy's SeedSequence
    spawn keys.

    Parameters
    ----------
    master_seed : int
        Non-negative integer; only the low 64 bits are used.
    labels : str or int
        Scope labels, hashed in order.

    Returns
    -------
    rng : numpy.random.Generator
    """
    spawn_key = tuple(_label_key(label) for label in labels)
    seq = np.random.SeedSequence(entropy=int(master_seed) & SEED_MASK, spawn_key=spawn_key)
    return np.random.default_rng(seq)


def _label_key(label):
    digest = hashlib.sha256(str(label).encode('utf-8')).digest()
    return int.from_bytes(digest[:8], 'little')


def draw_seed(rng):
    """A 63-bit seed drawn from `rng`, safe to store as a JSON number."""
    return int(rng.integers(0, 1 << 63))


def canonical_json(obj):
    """Compact JSON with sorted keys; the form every digest is computed on."""
    return json.dumps(obj, sort_keys=True, separators=(',', ':'), ensure_ascii=False)


def sha256_text(text):
    if isinstance(text, str):
        text = text.encode('utf-8')
    return hashlib.sha256(text).hexdigest()


def sha256_files(root, relpaths):
    """Single digest over several files, fed in the given order with their names."""
    h = hashlib.sha256()
    for rel in relpaths:
        h.update(rel.replace(os.sep, '/').encode('utf-8'))
        h.update(b'\0')
        with open(os.path.join(root, rel), 'rb') as f:
            for chunk in iter(lambda: f.read(1 << 16), b''):
                h.update(chunk)
        h.update(b'\0')
    return h.hexdigest()


def assert_not_exists(path, sep='.'):
    """
    If path exists, modify to add a counter in the name. Useful
    for preventing accidental overrides. For example, if `dataset`
    exists, check if `dataset.1` also exists. Repeat until we find
    a non-existing version, such as `dataset.12`.

    Parameters
    ----------
    path : str
        Path to be checked

    Returns
    -------
    newpath : str
        A modified version of path with a counter right before the extension.
    """
    name, ext = os.path.splitext(path)
    i = 1
    while os.path.exists(path):
        path = '{}{}{}{}'.format(name, sep, i, ext)
        i += 1
    return path


def extant_file(path):
    """
    Check if file exists with argparse
    """
    if not os.path.exists(path):
        raise argparse.ArgumentTypeError("{} does not exist".format(path))
    return path


@contextmanager
def ignored_exceptions(*exceptions):
    try:
        yield
    except exceptions:
        pass


def sanitize_path_for_file(path, config_file):
    basepath = os.path.dirname(config_file)
    path = os.path.expanduser(path)
    return os.path.join(basepath, path)


def ceil_div(a, b):
    return -(-a // b)
