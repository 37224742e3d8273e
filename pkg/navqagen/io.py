#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
navqagen.io
-----------

IO stuff:

- Parser logic for YAML configuration files, Jinja2-templated and with
  an ``!include`` tag, plus environment overrides.
- Dataset directories: writer, reader and validator.
- Non-normative ASCII rendering of a video for debugging.

Layout of a dataset directory::

    manifest.json
    config.yaml
    lexicon.json
    houses/<house_id>.json
    <split>/questions.jsonl
    <split>/videos/<video_id>.jsonl
"""

from collections import OrderedDict, Counter
import json
import logging
import os

import jinja2
from ruamel.yaml import YAML
from ruamel.yaml.constructor import SafeConstructor

from ._version import __version__
from .errors import ConfigError, DatasetError, SchemaError, NavQAError
from .generator import (GenConfig, QuotaPlan, Dataset, SplitData, VideoRecord, QARecord,
                        VIDEO_CAP, SPLIT_NAMES, candidate_sets)
from .groundtruth import ViewConfig, FrameGT, aggregate_gt, trajectory_ground_truth
from .program import Invalid, execute
from .scene import Lexicon, Violation, validate_house, house_to_dict, house_from_dict
from .synth import SynthConfig
from .templates import MAX_QUESTION_TOKENS, builtin_templates, realize_text, token_count
from .trajectory import Trajectory, MAX_VIDEO_LENGTH
from .utils import canonical_json, sha256_text, sha256_files, sanitize_path_for_file

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
DEFAULT_CONFIG = os.path.join(os.path.dirname(__file__), 'data', 'default.yaml')
TOP_LEVEL_KEYS = ('format_version', 'seed', 'houses', 'outputpath', 'workers', 'subsample',
                  'lexicon', 'synth', 'view', 'quota', 'splits')
MANIFEST = 'manifest.json'
DEFAULT_SPLITS = OrderedDict([('train', 622), ('validation', 65), ('test', 56)])


###########################
# Configuration
###########################

class IncludeConstructor(SafeConstructor):

    """
    Safe YAML constructor with an `!include` tag. YAML files are parsed,
    anything else is inserted as text. Paths are relative to `root`.
    """

    root = os.curdir

    def construct_include(self, node):
        filename = os.path.abspath(os.path.join(self.root, self.construct_scalar(node)))
        extension = os.path.splitext(filename)[1].lstrip('.')
        with open(filename, 'r') as f:
            if extension in ('yaml', 'yml'):
                return load_yaml(f.read(), root=os.path.dirname(filename))
            return f.read()


IncludeConstructor.add_constructor('!include', IncludeConstructor.construct_include)


def load_yaml(text, root=None):
    yaml = YAML(typ='safe', pure=True)
    yaml.Constructor = IncludeConstructor
    yaml.constructor.root = root or os.curdir
    return yaml.load(text)


def render_config(text, **context):
    jinja_env = jinja2.Environment(trim_blocks=True, lstrip_blocks=True)
    return jinja_env.from_string(text).render(**context)


def prepare_config(path=None, seed=None, houses=None, outputpath=None,
                   questions_per_video=None, subsample=None, workers=None):
    """
    Get, parse and prepare a configuration file.

    Values are taken from the file, then from the ``NAVQAGEN_SEED`` and
    ``NAVQAGEN_OUTPUTPATH`` environment variables, then from the keyword
    arguments that are not None.

    Returns
    -------
    config : GenConfig
    settings : dict
        Run settings: ``seed``, ``outputpath``, ``workers``.
    raw : str
        The configuration text as read from disk.

    Raises
    ------
    ConfigError
    """
    path = path or DEFAULT_CONFIG
    try:
        with open(path) as f:
            raw = f.read()
    except IOError as e:
        raise DatasetError('Could not read configuration {}: {}'.format(path, e))
    try:
        cfg = load_yaml(render_config(raw), root=os.path.dirname(os.path.abspath(path))) or {}
    except jinja2.TemplateError as e:
        raise ConfigError('Could not render {}: {}'.format(path, e))
    except Exception as e:
        if isinstance(e, NavQAError):
            raise
        raise ConfigError('Could not parse {}: {}'.format(path, e))
    if not isinstance(cfg, dict):
        raise ConfigError('{} does not hold a mapping'.format(path))
    for key in cfg:
        if key not in TOP_LEVEL_KEYS:
            logger.warning('Option %s not recognized!', key)
    if cfg.get('format_version', FORMAT_VERSION) != FORMAT_VERSION:
        raise ConfigError('Configuration format_version {} is not supported (expected {})'.format(
            cfg['format_version'], FORMAT_VERSION))

    if os.environ.get('NAVQAGEN_SEED'):
        cfg['seed'] = os.environ['NAVQAGEN_SEED']
    if os.environ.get('NAVQAGEN_OUTPUTPATH'):
        cfg['outputpath'] = os.environ['NAVQAGEN_OUTPUTPATH']
    overrides = dict(seed=seed, houses=houses, outputpath=outputpath, subsample=subsample,
                     workers=workers)
    cfg.update((k, v) for k, v in overrides.items() if v is not None)
    quota = dict(cfg.get('quota') or {})
    if questions_per_video is not None:
        quota['questions_per_video'] = questions_per_video

    try:
        lexicon = Lexicon.from_dict(cfg.get('lexicon') or {})
        config = GenConfig(
            lexicon=lexicon,
            synth=SynthConfig.from_dict(cfg.get('synth') or {}, lexicon),
            view=ViewConfig.from_dict(cfg.get('view') or {}),
            quota=QuotaPlan.from_dict(quota),
            splits=OrderedDict((k, float(v))
                               for k, v in (cfg.get('splits') or DEFAULT_SPLITS).items()),
            houses=int(cfg.get('houses', 20)),
            subsample=bool(cfg.get('subsample', True)))
        settings = {'seed': int(cfg.get('seed', 0)), 'workers': int(cfg.get('workers', 1))}
    except (TypeError, ValueError) as e:
        if isinstance(e, NavQAError):
            raise
        raise ConfigError('Invalid value in {}: {}'.format(path, e))
    if settings['seed'] < 0:
        raise ConfigError('seed must be non-negative')
    out = cfg.get('outputpath', 'dataset')
    from_file = outputpath is None and not os.environ.get('NAVQAGEN_OUTPUTPATH')
    if from_file and path != DEFAULT_CONFIG:
        out = sanitize_path_for_file(out, path)
    settings['outputpath'] = os.path.abspath(os.path.expanduser(out))
    return config, settings, raw


###########################
# Writing
###########################

def _dump_json(directory, rel, obj, written):
    path = os.path.join(directory, rel)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, 'w') as f:
        f.write(json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False))
        f.write('\n')
    written.append(rel)


def _dump_jsonl(directory, rel, records, written):
    path = os.path.join(directory, rel)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, 'w') as f:
        for record in records:
            f.write(canonical_json(record))
            f.write('\n')
    written.append(rel)


def video_records(video):
    """The lines of a video file: trajectory, frames, aggregate."""
    head = video.trajectory.to_dict()
    head.update({'record': 'trajectory', 'seed': video.seed, 'subsampled': video.subsampled})
    return [head] + [f.to_dict() for f in video.gt.frames] + [video.gt.aggregate_dict()]


def write_dataset(dataset, directory, config_text=None, debug_render=False):
    """
    Write `dataset` under `directory`.

    Parameters
    ----------
    dataset : Dataset
    directory : str
    config_text : str, optional
        Configuration used to generate the dataset, copied verbatim and
        digested into the manifest.
    debug_render : bool, optional
        Also write an ASCII map next to each video file.

    Returns
    -------
    manifest : dict
    """
    os.makedirs(directory, exist_ok=True)
    written = []
    if config_text is not None:
        with open(os.path.join(directory, 'config.yaml'), 'w') as f:
            f.write(config_text)
        written.append('config.yaml')
    _dump_json(directory, 'lexicon.json', dataset.lexicon.to_dict(), written)
    for house_id, house in sorted(dataset.houses.items()):
        _dump_json(directory, os.path.join('houses', house_id + '.json'), house_to_dict(house),
                   written)
    listings = OrderedDict()
    for name, split in dataset.splits.items():
        _dump_jsonl(directory, os.path.join(name, 'questions.jsonl'),
                    [q.to_dict() for q in split.questions], written)
        for video in split.videos:
            rel = os.path.join(name, 'videos', video.video_id + '.jsonl')
            _dump_jsonl(directory, rel, video_records(video), written)
            if debug_render:
                txt = os.path.join(name, 'videos', video.video_id + '.txt')
                with open(os.path.join(directory, txt), 'w') as f:
                    f.write(render_ascii(dataset.houses[video.house_id], video.trajectory))
                written.append(txt)
        listings[name] = {'houses': list(split.house_ids),
                          'videos': [v.video_id for v in split.videos],
                          'questions': [q.question_id for q in split.questions]}
    config = dataset.config
    manifest = {
        'format_version': FORMAT_VERSION,
        'generator': 'navqagen {}'.format(__version__),
        'master_seed': dataset.master_seed,
        'config_digest': sha256_text(config_text) if config_text is not None else None,
        'view': (config.view if config is not None else ViewConfig()).to_dict(),
        'splits': listings,
        'template_counts': {name: {str(k): v for k, v in counts.items()}
                            for name, counts in dataset.template_counts().items()},
        'telemetry': dict(dataset.telemetry),
        'content_digest': sha256_files(directory, sorted(written)),
    }
    _dump_json(directory, MANIFEST, manifest, [])
    logger.info('Dataset written to %s', directory)
    return manifest


def manifest_digest(manifest):
    return sha256_text(canonical_json(manifest))


def data_files(directory):
    """Relative paths of every file in a dataset directory but the manifest, sorted."""
    found = []
    for root, dirs, files in os.walk(directory):
        for name in files:
            rel = os.path.relpath(os.path.join(root, name), directory)
            if rel != MANIFEST:
                found.append(rel)
    return sorted(found)


###########################
# Reading
###########################

def _load_json(path):
    try:
        with open(path) as f:
            return json.load(f)
    except IOError:
        raise DatasetError('Missing file {}'.format(path))
    except ValueError as e:
        raise SchemaError('Malformed JSON ({})'.format(e), path)


def _iter_jsonl(path):
    try:
        f = open(path)
    except IOError:
        raise DatasetError('Missing file {}'.format(path))
    with f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                yield lineno, json.loads(line)
            except ValueError as e:
                raise SchemaError('Malformed JSON line ({})'.format(e), path, lineno)


def load_manifest(directory):
    manifest = _load_json(os.path.join(directory, MANIFEST))
    version = manifest.get('format_version')
    if version != FORMAT_VERSION:
        raise DatasetError('Format version mismatch in {}: found {}, expected {}'.format(
            directory, version, FORMAT_VERSION))
    return manifest


def load_house(path):
    d = _load_json(path)
    if d.get('format_version', FORMAT_VERSION) != FORMAT_VERSION:
        raise DatasetError('Format version mismatch in {}'.format(path))
    try:
        return house_from_dict(d)
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError('Bad house record: {!r}'.format(e), path)


def read_questions(path):
    questions = []
    for lineno, record in _iter_jsonl(path):
        try:
            questions.append(QARecord.from_dict(record))
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError('Bad question record: {!r}'.format(e), path, lineno)
    return questions


def read_video(path):
    """
    Parse a video file back into a VideoRecord.

    Raises
    ------
    SchemaError
        On misplaced or malformed records, or an aggregate record that
        disagrees with the frames.
    """
    head, frames, aggregate = None, [], None
    for lineno, record in _iter_jsonl(path):
        kind = record.get('record') if isinstance(record, dict) else None
        try:
            if lineno == 1:
                if kind != 'trajectory':
                    raise SchemaError('First record must be the trajectory', path, lineno)
                head = record
                trajectory = Trajectory.from_dict(record)
            elif aggregate is not None:
                raise SchemaError('Record after the aggregate', path, lineno)
            elif kind == 'frame':
                frames.append(FrameGT.from_dict(record))
            elif kind == 'aggregate':
                aggregate = record
            else:
                raise SchemaError('Unknown record kind {!r}'.format(kind), path, lineno)
        except (KeyError, TypeError, ValueError, NavQAError) as e:
            if isinstance(e, SchemaError):
                raise
            raise SchemaError('Bad {} record: {}'.format(kind, e), path, lineno)
    if head is None or aggregate is None or not frames:
        raise SchemaError('Video file needs a trajectory, frames and an aggregate', path)
    gt = aggregate_gt(frames, house_id=head['house_id'], video_id=head['video_id'])
    if gt.aggregate_dict() != aggregate:
        raise SchemaError('Aggregate record disagrees with the frames', path)
    return VideoRecord(trajectory=trajectory, gt=gt, seed=head.get('seed'),
                       subsampled=bool(head.get('subsampled', True)))


def _split_order(name):
    if name in SPLIT_NAMES:
        return SPLIT_NAMES.index(name), name
    return len(SPLIT_NAMES), name


def read_dataset(directory):
    """
    Read a dataset directory written by `write_dataset`.

    Returns
    -------
    dataset : Dataset

    Raises
    ------
    DatasetError
        Missing files or version mismatch.
    SchemaError
        Malformed records, with file and line.
    """
    manifest = load_manifest(directory)
    lexicon = Lexicon.from_dict(_load_json(os.path.join(directory, 'lexicon.json')))
    houses, splits = {}, OrderedDict()
    # the manifest is written with sorted keys
    for name in sorted(manifest['splits'], key=_split_order):
        listing = manifest['splits'][name]
        for house_id in listing['houses']:
            houses[house_id] = load_house(os.path.join(directory, 'houses', house_id + '.json'))
        videos = [read_video(os.path.join(directory, name, 'videos', video_id + '.jsonl'))
                  for video_id in listing['videos']]
        questions = read_questions(os.path.join(directory, name, 'questions.jsonl'))
        splits[name] = SplitData(name=name, house_ids=tuple(listing['houses']), videos=videos,
                                 questions=questions)
    return Dataset(lexicon=lexicon, master_seed=manifest['master_seed'],
                   houses=OrderedDict(sorted(houses.items())), splits=splits,
                   telemetry=dict(manifest.get('telemetry', {})))


def find_house(video_path):
    """Walk up from a video file until a ``houses/`` directory holds its house."""
    video = read_video(video_path)
    directory = os.path.dirname(os.path.abspath(video_path))
    while True:
        candidate = os.path.join(directory, 'houses', video.house_id + '.json')
        if os.path.exists(candidate):
            return load_house(candidate)
        parent = os.path.dirname(directory)
        if parent == directory:
            raise DatasetError('No houses/{}.json above {}'.format(video.house_id, video_path))
        directory = parent


###########################
# Validation
###########################

def validate_dataset(directory):
    """
    Schema and invariant check of a dataset directory.

    Returns
    -------
    violations : list of Violation
        Empty iff the dataset is sound.
    """
    try:
        manifest = load_manifest(directory)
        dataset = read_dataset(directory)
    except DatasetError as e:
        return [Violation('schema', directory, str(e))]

    violations = []

    def flag(invariant, entity, message, *args):
        violations.append(Violation(invariant, entity, message.format(*args)))

    if sha256_files(directory, data_files(directory)) != manifest.get('content_digest'):
        flag('content_digest', directory, 'data files do not match the manifest digest')

    for house in dataset.houses.values():
        for v in validate_house(house):
            flag('house:' + v.invariant, v.entity, v.message)

    owner = {}
    for name, split in dataset.splits.items():
        for house_id in split.house_ids:
            if house_id in owner:
                flag('split_disjoint', house_id, 'in both {} and {}', owner[house_id], name)
            owner[house_id] = name

    view = ViewConfig.from_dict(manifest.get('view') or {})
    templates = {t.id: t for t in builtin_templates()}
    per_house = Counter()
    for name, split in dataset.splits.items():
        listed = manifest['splits'][name]['questions']
        if [q.question_id for q in split.questions] != listed:
            flag('manifest_listing', name, 'questions.jsonl does not match the manifest listing')
        counts = {str(k): v for k, v in split.template_counts().items()}
        if counts != manifest.get('template_counts', {}).get(name):
            flag('template_counts', name, 'manifest template counts are stale')
        videos = {}
        for video in split.videos:
            videos[video.video_id] = video
            per_house[video.house_id] += 1
            if video.house_id not in split.house_ids:
                flag('video_split', video.video_id, 'house {} is not in split {}',
                     video.house_id, name)
            if video.trajectory.length > MAX_VIDEO_LENGTH:
                flag('video_length', video.video_id, '{} frames', video.trajectory.length)
            _check_frames(dataset, video, view, flag)
        for q in split.questions:
            _check_question(dataset, q, videos, templates, flag)
    for house_id, n in per_house.items():
        if n > VIDEO_CAP:
            flag('video_cap', house_id, '{} videos (cap {})', n, VIDEO_CAP)
    return violations


def _check_frames(dataset, video, view, flag):
    house = dataset.houses.get(video.house_id)
    if house is None:
        flag('video_house', video.video_id, 'unknown house {}', video.house_id)
        return
    full = trajectory_ground_truth(house, video.trajectory, view)
    for frame in video.gt.frames:
        if not 0 <= frame.index < len(full.frames) or full.frames[frame.index] != frame:
            flag('frame_gt', video.video_id, 'frame {} does not match recomputed visibility',
                 frame.index)


def _check_question(dataset, q, videos, templates, flag):
    video = videos.get(q.video_id)
    template = templates.get(q.template_id)
    if video is None or template is None:
        flag('question_refs', q.question_id, 'unknown video {} or template {}',
             q.video_id, q.template_id)
        return
    house = dataset.houses[video.house_id]
    lexicon = dataset.lexicon
    if q.category != template.category:
        flag('question_category', q.question_id, '{} is not the category of template {}',
             q.category, template.id)
    answer = execute(template.program, video.gt, house, q.bindings, lexicon)
    if isinstance(answer, Invalid) or answer != q.answer:
        flag('answer_reexecution', q.question_id, 'stored {!r}, recomputed {!r}', q.answer, answer)
    if q.answer not in lexicon.vocabulary:
        flag('answer_vocabulary', q.question_id, '{!r} is not in the vocabulary', q.answer)
    if token_count(q.question) > MAX_QUESTION_TOKENS:
        flag('question_length', q.question_id, '{} tokens', token_count(q.question))
    if realize_text(template, q.bindings, lexicon) != q.question:
        flag('question_text', q.question_id, 'text does not match its bindings')
    candidates = candidate_sets(template, video.gt, house, lexicon)
    for key, value in q.bindings.items():
        pool = candidates.get(key.split('{')[0] + '{}' if '{' in key else key)
        if pool is None or value not in pool:
            flag('binding_attested', q.question_id, '{}={!r} is not attested in the video',
                 key, value)


###########################
# Debug rendering
###########################

def render_ascii(house, trajectory):
    """
    Top-down map: ``#`` walls, ``o`` objects, ``*`` path, ``S``/``G``
    start and goal.
    """
    rows = [list(row) for row in house.grid]
    for obj in house.objects:
        rows[obj.cell[1]][obj.cell[0]] = 'o'
    cells = [p.cell for p in trajectory.poses]
    for x, y in cells:
        rows[y][x] = '*'
    (sx, sy), (gx, gy) = cells[0], cells[-1]
    rows[sy][sx], rows[gy][gx] = 'S', 'G'
    legend = '{} {} ({} poses)'.format(house.id, trajectory.video_id, trajectory.length)
    return '\n'.join([legend] + [''.join(r) for r in rows]) + '\n'
