#!/usr/bin/env python
# -*- coding: utf-8 -*-

import json
import os
import shutil

import pytest

from navqagen.errors import ConfigError, DatasetError, SchemaError
from navqagen.generator import build_dataset
from navqagen.io import (DEFAULT_CONFIG, MANIFEST, find_house, load_house, load_manifest,
                         manifest_digest, prepare_config, read_dataset, read_questions,
                         read_video, render_ascii, validate_dataset, write_dataset)
from navqagen.utils import sha256_text

from conftest import get_file

TINY = get_file('tiny/tiny.yaml')


@pytest.fixture(scope='module')
def tiny_dir(tmpdir_factory):
    config, settings, raw = prepare_config(TINY)
    dataset = build_dataset(config, settings['seed'])
    directory = str(tmpdir_factory.mktemp('tiny').join('dataset'))
    write_dataset(dataset, directory, config_text=raw)
    return directory


@pytest.fixture
def tampered(tiny_dir, tmpdir):
    directory = str(tmpdir.join('tampered'))
    shutil.copytree(tiny_dir, directory)
    return directory


def write_config(tmpdir, text):
    path = tmpdir.join('config.yaml')
    path.write('lexicon: !include {}\n'.format(get_file('tiny/lexicon.yaml')) + text)
    return str(path)


def test_default_config():
    config, settings, raw = prepare_config()
    assert config.houses == 20
    assert config.quota.videos_per_house == 120
    assert settings['seed'] == 1234
    assert settings['outputpath'] == os.path.abspath('dataset')
    assert 'washing machine' in config.lexicon.type_names
    with open(DEFAULT_CONFIG) as f:
        assert raw == f.read()


def test_include_and_templating():
    config, settings, raw = prepare_config(TINY)
    assert config.quota.videos_per_house == 4
    assert config.quota.video_cap == 8
    assert config.lexicon.type_names[-1] == 'television'
    assert config.view.min_seen_objects == 1
    assert '{{ 2 * 2 }}' in raw
    # relative output paths live next to the configuration file
    assert settings['outputpath'] == os.path.join(os.path.dirname(TINY), 'tiny_dataset')


def test_environment_overrides(monkeypatch, tmpdir):
    monkeypatch.setenv('NAVQAGEN_SEED', '99')
    monkeypatch.setenv('NAVQAGEN_OUTPUTPATH', str(tmpdir))
    config, settings, raw = prepare_config(TINY)
    assert settings['seed'] == 99
    assert settings['outputpath'] == str(tmpdir)
    # arguments win over the environment
    config, settings, raw = prepare_config(TINY, seed=5, houses=4, questions_per_video=3)
    assert settings['seed'] == 5
    assert config.houses == 4
    assert config.quota.questions_per_video == 3


def test_unknown_keys_warn(tmpdir, caplog):
    path = write_config(tmpdir, 'houses: 3\ncolour: red\n')
    config, settings, raw = prepare_config(path)
    assert config.houses == 3
    assert 'Option colour not recognized!' in caplog.text


@pytest.mark.parametrize('text', [
    'format_version: 2\n',
    '- a list\n',
    'houses: [unclosed\n',
    'seed: -1\n',
    'houses: many\n',
    'splits: {train: 1, test: 1}\n',
    '{% if %}\n',
])
def test_bad_configs(tmpdir, text):
    with pytest.raises(ConfigError):
        prepare_config(write_config(tmpdir, text))


def test_missing_config(tmpdir):
    with pytest.raises(DatasetError):
        prepare_config(str(tmpdir.join('nope.yaml')))


def test_written_dataset_layout(tiny_dir):
    manifest = load_manifest(tiny_dir)
    assert sorted(manifest['splits']) == ['test', 'train', 'validation']
    assert manifest['master_seed'] == 3
    with open(os.path.join(tiny_dir, 'config.yaml')) as f:
        assert sha256_text(f.read()) == manifest['config_digest']
    for name, listing in manifest['splits'].items():
        assert len(listing['houses']) == 1
        assert os.path.isfile(os.path.join(tiny_dir, name, 'questions.jsonl'))
        for video_id in listing['videos']:
            assert os.path.isfile(os.path.join(tiny_dir, name, 'videos', video_id + '.jsonl'))
    assert len(os.listdir(os.path.join(tiny_dir, 'houses'))) == 3
    assert len(manifest_digest(manifest)) == 64


def test_read_back(tiny_dir):
    config, settings, raw = prepare_config(TINY)
    original = build_dataset(config, settings['seed'])
    dataset = read_dataset(tiny_dir)
    assert dataset.houses == original.houses
    assert dataset.lexicon == original.lexicon
    assert [q.to_dict() for q in dataset.questions] == [q.to_dict() for q in original.questions]
    assert [v.gt for v in dataset.videos] == [v.gt for v in original.videos]
    assert [v.trajectory for v in dataset.videos] == [v.trajectory for v in original.videos]
    assert dataset.telemetry == original.telemetry


def test_same_seed_same_bytes(tiny_dir, tmpdir):
    config, settings, raw = prepare_config(TINY)
    again = str(tmpdir.join('again'))
    manifest = write_dataset(build_dataset(config, settings['seed']), again, config_text=raw)
    assert manifest == load_manifest(tiny_dir)


def test_fresh_dataset_validates(tiny_dir):
    assert validate_dataset(tiny_dir) == []


def test_tampered_answer_is_flagged(tampered):
    path = os.path.join(tampered, 'train', 'questions.jsonl')
    with open(path) as f:
        lines = f.readlines()
    record = json.loads(lines[0])
    record['answer'] = 'purple'
    lines[0] = json.dumps(record) + '\n'
    with open(path, 'w') as f:
        f.writelines(lines)
    flagged = {v.invariant for v in validate_dataset(tampered)}
    assert {'content_digest', 'answer_reexecution', 'answer_vocabulary'} <= flagged


def test_tampered_house_is_flagged(tampered):
    houses = os.path.join(tampered, 'houses')
    path = os.path.join(houses, sorted(os.listdir(houses))[0])
    with open(path) as f:
        house = json.load(f)
    house['objects'][0]['cell'] = [0, 0]
    with open(path, 'w') as f:
        json.dump(house, f)
    violations = validate_dataset(tampered)
    assert any(v.invariant.startswith('house:') for v in violations)


def test_stale_manifest_is_flagged(tampered):
    path = os.path.join(tampered, MANIFEST)
    with open(path) as f:
        manifest = json.load(f)
    manifest['template_counts']['train'] = {'1': 1000}
    manifest['splits']['test']['houses'] = manifest['splits']['train']['houses'] + \
        manifest['splits']['test']['houses']
    with open(path, 'w') as f:
        json.dump(manifest, f)
    flagged = {v.invariant for v in validate_dataset(tampered)}
    assert {'template_counts', 'split_disjoint'} <= flagged


def test_missing_manifest(tmpdir):
    violations = validate_dataset(str(tmpdir))
    assert [v.invariant for v in violations] == ['schema']
    with pytest.raises(DatasetError):
        read_dataset(str(tmpdir))


def test_version_mismatch(tampered):
    path = os.path.join(tampered, MANIFEST)
    with open(path) as f:
        manifest = json.load(f)
    manifest['format_version'] = 0
    with open(path, 'w') as f:
        json.dump(manifest, f)
    with pytest.raises(DatasetError) as excinfo:
        read_dataset(tampered)
    assert 'found 0, expected 1' in str(excinfo.value)


def test_schema_error_carries_line(tmpdir):
    path = tmpdir.join('questions.jsonl')
    path.write('{"question_id": "q"}\n{not json\n')
    with pytest.raises(SchemaError) as excinfo:
        read_questions(str(path))
    assert excinfo.value.line == 1
    path.write('\n{not json\n')
    with pytest.raises(SchemaError) as excinfo:
        read_questions(str(path))
    assert excinfo.value.line == 2
    assert excinfo.value.path == str(path)


def test_video_file_structure(tmpdir):
    with open(get_file('gray/videos/house_gray_v000.jsonl')) as f:
        lines = f.readlines()
    path = tmpdir.join('video.jsonl')
    path.write(''.join(lines[1:]))
    with pytest.raises(SchemaError) as excinfo:
        read_video(str(path))
    assert excinfo.value.line == 1
    path.write(''.join(lines[:2] + lines[3:]))
    with pytest.raises(SchemaError):
        read_video(str(path))
    path.write(''.join(lines + lines[1:2]))
    with pytest.raises(SchemaError) as excinfo:
        read_video(str(path))
    assert excinfo.value.line == len(lines) + 1


def test_gray_video(gray_house):
    video = read_video(get_file('gray/videos/house_gray_v000.jsonl'))
    assert video.video_id == 'house_gray_v000'
    assert video.seed == 7
    assert video.trajectory.length == 4
    assert [f.index for f in video.gt.frames] == [0, 3]
    assert find_house(get_file('gray/videos/house_gray_v000.jsonl')) == gray_house


def test_find_house_gives_up(tmpdir):
    path = tmpdir.join('lonely.jsonl')
    shutil.copy(get_file('gray/videos/house_gray_v000.jsonl'), str(path))
    with pytest.raises(DatasetError):
        find_house(str(path))


def test_house_version_mismatch(tmpdir):
    path = tmpdir.join('house.json')
    path.write(json.dumps({'format_version': 9, 'id': 'h'}))
    with pytest.raises(DatasetError):
        load_house(str(path))
    path.write(json.dumps({'id': 'h'}))
    with pytest.raises(SchemaError):
        load_house(str(path))


def test_render_ascii(gray_house):
    trajectory = read_video(get_file('gray/videos/house_gray_v000.jsonl')).trajectory
    assert render_ascii(gray_house, trajectory).splitlines() == [
        'house_gray house_gray_v000 (4 poses)',
        '#########',
        '#oo.#...#',
        '#.S**Go.#',
        '#..o#...#',
        '#########',
    ]
