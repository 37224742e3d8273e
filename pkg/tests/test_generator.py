#!/usr/bin/env python
# -*- coding: utf-8 -*-

from collections import Counter
from dataclasses import replace

import numpy as np
import pytest

from navqagen.audit import binary_fraction
from navqagen.errors import ConfigError, SplitError
from navqagen.generator import (QARecord, QuotaPlan, QuotaTracker, Rejected, GenConfig,
                                candidate_sets, instantiate, is_degenerate, generate_for_video,
                                split_houses, build_dataset, generate_house, house_id_for,
                                observe_video)
from navqagen.groundtruth import FrameGT, ViewConfig, aggregate_gt, trajectory_ground_truth
from navqagen.io import DEFAULT_CONFIG, prepare_config, read_video
from navqagen.program import execute
from navqagen.scene import House, Lexicon
from navqagen.templates import (MAX_QUESTION_TOKENS, REFERENCE_COUNTS, builtin_templates,
                                token_count)
from navqagen.trajectory import MAX_VIDEO_LENGTH

from conftest import get_file, make_object


@pytest.fixture(scope='module')
def templates():
    return {t.id: t for t in builtin_templates()}


@pytest.fixture(scope='module')
def small_config(default_config):
    return replace(default_config, houses=3,
                   quota=QuotaPlan(videos_per_house=4, video_cap=8,
                                   questions_per_video=2))


def seeing(house, object_ids):
    rooms = frozenset(house.object(o).room_id for o in object_ids)
    frame = FrameGT(0, sorted(rooms)[0], frozenset(object_ids), rooms)
    return aggregate_gt([frame], house_id=house.id, video_id='{}_v000'.format(house.id))


@pytest.fixture
def twin_tables(gray_house):
    twin = make_object('obj_004', 'table', 'gray', (3, 1), 'room_0', extra=['large'], size=1.8)
    return House(id=gray_house.id, grid=gray_house.grid, rooms=gray_house.rooms,
                 doorways=gray_house.doorways, objects=gray_house.objects + (twin,))


def test_room_type_candidates(gray_gt, gray_house, gray_lexicon, templates):
    candidates = candidate_sets(templates[9], gray_gt, gray_house, gray_lexicon)
    assert candidates['room_type'] == ('kitchen', 'living room')
    assert candidates['obj_type'] == ('chair', 'lamp', 'table')
    assert candidates['attr'] == ('gray', 'large', 'orange', 'red', 'small')


def test_noncolor_attr_candidates(gray_gt, gray_house, gray_lexicon, templates):
    candidates = candidate_sets(templates[23], gray_gt, gray_house, gray_lexicon)
    assert candidates['attr'] == ('large', 'small')


def test_set_group_and_fixed_candidates(gray_gt, gray_house, gray_lexicon, templates):
    candidates = candidate_sets(templates[18], gray_gt, gray_house, gray_lexicon)
    assert set(candidates) == {'art', 'attr{}', 'obj_type{}'}
    candidates = candidate_sets(templates[12], gray_gt, gray_house, gray_lexicon)
    assert candidates['comp'] == ('more', 'fewer')
    candidates = candidate_sets(templates[22], gray_gt, gray_house, gray_lexicon)
    assert candidates['rel'] == gray_lexicon.relations


def test_no_seen_objects(gray_house, gray_lexicon, templates):
    frame = FrameGT(0, 'room_1', frozenset(), frozenset({'room_1'}))
    gt = aggregate_gt([frame], house_id=gray_house.id, video_id='v')
    assert candidate_sets(templates[16], gt, gray_house, gray_lexicon)['obj_type'] == ()
    result = instantiate(templates[16], gt, gray_house, gray_lexicon, np.random.default_rng(0))
    assert isinstance(result, Rejected)
    assert result.reasons == {'empty_candidates': 1}


def test_singleton_candidates_succeed(gray_house, gray_lexicon, templates):
    gt = seeing(gray_house, ['obj_000'])
    record = instantiate(templates[28], gt, gray_house, gray_lexicon, np.random.default_rng(0),
                         retry_budget=1, question_id='q', seed=5)
    assert isinstance(record, QARecord)
    assert record.answer == 'kitchen'
    assert record.bindings['obj_type'] == 'table'
    assert record.seed == 5
    assert record.question in ('Where is the large table?', 'Where is the gray table?')


def test_duplicated_object_is_ambiguous(twin_tables, gray_lexicon, templates):
    gt = seeing(twin_tables, ['obj_000', 'obj_004'])
    result = instantiate(templates[23], gt, twin_tables, gray_lexicon, np.random.default_rng(1))
    assert isinstance(result, Rejected)
    assert result.reasons == {'invalid': 30}


def test_overlong_question_is_rejected(gray_house, gray_lexicon, templates):
    giant = ' '.join(['enormous'] * 60) + ' table'
    d = gray_lexicon.to_dict()
    d['object_types'].append([giant, giant + 's'])
    lexicon = Lexicon.from_dict(d)
    house = House(id=gray_house.id, grid=gray_house.grid, rooms=gray_house.rooms,
                  doorways=gray_house.doorways,
                  objects=gray_house.objects + (make_object('obj_009', giant, 'gray', (3, 1),
                                                            'room_0'),))
    gt = seeing(house, ['obj_009'])
    result = instantiate(templates[28], gt, house, lexicon, np.random.default_rng(0),
                         retry_budget=3)
    assert isinstance(result, Rejected)
    assert result.reasons == {'too_long': 3}



def test_instantiated_records_reexecute(gray_gt, gray_house, gray_lexicon, templates):
    rng = np.random.default_rng(11)
    produced = 0
    for template in templates.values():
        for _ in range(5):
            record = instantiate(template, gray_gt, gray_house, gray_lexicon, rng)
            if isinstance(record, Rejected):
                continue
            produced += 1
            assert not is_degenerate(record.bindings)
            answer = execute(template.program, gray_gt, gray_house, record.bindings,
                             gray_lexicon)
            assert answer == record.answer
            assert record.answer in gray_lexicon.vocabulary
            assert QARecord.from_dict(record.to_dict()) == record
    assert produced > 30


@pytest.mark.parametrize('bindings, degenerate', [
    ({'attr1': 'red', 'obj_type1': 'chair', 'attr2': 'red', 'obj_type2': 'chair'}, True),
    ({'attr1': 'red', 'obj_type1': 'chair', 'attr2': 'red', 'obj_type2': 'table'}, False),
    ({'attr1': 'red', 'attr2': 'red', 'obj_type': 'chair'}, True),
    ({'room_type1': 'kitchen', 'room_type2': 'kitchen'}, True),
    ({'attr{0}': 'red', 'obj_type{0}': 'bed', 'attr{1}': 'red', 'obj_type{1}': 'bed'}, True),
    ({'attr{0}': 'red', 'obj_type{0}': 'bed', 'attr{1}': 'blue', 'obj_type{1}': 'bed'}, False),
    ({'room_type{0}': 'gym', 'room_type{1}': 'gym', 'art': 'a'}, True),
    ({'attr': 'red', 'obj_type': 'bed'}, False),
])
def test_is_degenerate(bindings, degenerate):
    assert is_degenerate(bindings) == degenerate


def test_generate_for_video_one_question(gray_gt, gray_house, gray_lexicon, templates):
    quota = QuotaTracker(QuotaPlan(), 100)
    telemetry = Counter()
    records = generate_for_video(gray_gt, gray_house, list(templates.values()), quota,
                                 np.random.default_rng(3), gray_lexicon, telemetry, seed=9)
    assert len(records) == 1
    assert records[0].question_id == 'house_gray_v000_q0'
    template_id = records[0].template_id
    assert quota.remaining[template_id] == quota.targets[template_id] - 1


def test_generate_for_video_exhausted_quota(gray_gt, gray_house, gray_lexicon, templates):
    quota = QuotaTracker(QuotaPlan(), 10)
    for template_id in quota.remaining:
        quota.remaining[template_id] = 0
    assert quota.exhausted
    assert generate_for_video(gray_gt, gray_house, list(templates.values()), quota,
                              np.random.default_rng(3), gray_lexicon) == []


def test_quota_targets_add_up_over_houses():
    plan = QuotaPlan(questions_per_video=2)
    totals = Counter()
    for index in range(50):
        quota = QuotaTracker(plan, 4, index=index)
        assert quota.remaining == quota.targets
        assert all(n >= 0 for n in quota.targets.values())
        totals.update(quota.targets)
    for template_id, weight in plan.weights.items():
        assert abs(totals[template_id] - weight * 8 * 50) < 1
    # a house owing fewer questions than there are templates still gets some
    assert sum(QuotaTracker(plan, 4).targets.values()) > 0


def test_quota_serves_templates_that_often_fail():
    plan = QuotaPlan()
    success = {22: 0.25, 27: 0.25}
    rng = np.random.default_rng(0)
    realized = Counter()
    for index in range(20):
        quota = QuotaTracker(plan, plan.videos_per_house, index=index)
        for _ in range(plan.video_cap):
            if quota.exhausted:
                break
            for template_id in quota.draw_order(rng):
                if rng.random() < success.get(template_id, 1.0):
                    quota.consume(template_id)
                    realized[template_id] += 1
                    break
    total = float(sum(realized.values()))
    assert total >= 2000
    for template_id, weight in plan.weights.items():
        assert abs(realized[template_id] / total - weight) <= 0.5 * weight


def test_draw_order_favours_open_quota():
    quota = QuotaTracker(QuotaPlan(weights={1: 0.5, 2: 0.5}), 4)
    assert quota.targets == {1: 2, 2: 2}
    quota.consume(1)
    rng = np.random.default_rng(0)
    first = Counter(quota.draw_order(rng)[0] for _ in range(2000))
    # open fractions 1/2 and 2/2
    assert 0.6 < first[2] / 2000.0 < 0.73



def test_draw_order_is_a_permutation_of_positive_quota():
    quota = QuotaTracker(QuotaPlan(weights={1: 0.25, 2: 0.25, 3: 0.5}), 4)
    assert quota.targets == {1: 1, 2: 1, 3: 2}
    quota.consume(1)
    order = quota.draw_order(np.random.default_rng(0))
    assert sorted(order) == [2, 3]
    assert quota.draw_order(np.random.default_rng(0), available={3}) == [3]


def test_default_weights_follow_reference_counts():
    weights = QuotaPlan().weights
    assert weights[16] == pytest.approx(4122 / 101332.0)
    assert sum(weights.values()) == pytest.approx(1)
    assert list(weights) == sorted(REFERENCE_COUNTS)


@pytest.mark.parametrize('kwargs', [
    dict(videos_per_house=151),
    dict(videos_per_house=0),
    dict(questions_per_video=0),
    dict(retry_budget=0),
    dict(weights={1: 0.5, 2: 0.2}),
    dict(weights={1: 1.5, 2: -0.5}),
])
def test_bad_quota(kwargs):
    with pytest.raises(ConfigError):
        QuotaPlan(**kwargs)


def test_quota_from_dict_normalizes():
    plan = QuotaPlan.from_dict({'weights': {'1': 3, '2': 1}, 'videos_per_house': 10})
    assert plan.weights == {1: 0.75, 2: 0.25}
    assert QuotaPlan.from_dict(plan.to_dict()) == plan


def test_split_ten_houses():
    ids = [house_id_for(i) for i in range(10)]
    splits = split_houses(ids, {'train': 622, 'validation': 65, 'test': 56},
                          np.random.default_rng(0))
    assert [len(v) for v in splits.values()] == [8, 1, 1]
    assert sorted(sum(splits.values(), ())) == ids


def test_split_needs_three_houses():
    with pytest.raises(SplitError):
        split_houses(['a', 'b'], {'train': 1, 'validation': 1, 'test': 1},
                     np.random.default_rng(0))


def test_every_split_gets_a_house():
    splits = split_houses(['a', 'b', 'c'], {'train': 622, 'validation': 65, 'test': 56},
                          np.random.default_rng(0))
    assert [len(v) for v in splits.values()] == [1, 1, 1]


def test_gen_config_checks_splits(default_config):
    with pytest.raises(ConfigError):
        replace(default_config, splits={'train': 1, 'test': 1})
    with pytest.raises(ConfigError):
        replace(default_config, splits={'train': 1, 'validation': 0, 'test': 1})
    with pytest.raises(ConfigError):
        replace(default_config, houses=0)


def test_build_dataset_needs_three_houses(small_config):
    with pytest.raises(SplitError):
        build_dataset(replace(small_config, houses=2), 0)


def test_generate_house_is_deterministic(small_config):
    first = generate_house(small_config, 7, 1)
    second = generate_house(small_config, 7, 1)
    assert first.house == second.house
    assert [q.to_dict() for q in first.questions] == [q.to_dict() for q in second.questions]
    assert first.telemetry == second.telemetry


def test_build_dataset(small_config):
    dataset = build_dataset(small_config, 5)
    assert isinstance(small_config, GenConfig)
    assert list(dataset.splits) == ['train', 'validation', 'test']
    house_sets = [set(s.house_ids) for s in dataset.splits.values()]
    assert sum(len(s) for s in house_sets) == len(set().union(*house_sets)) == 3
    per_house = Counter(v.house_id for v in dataset.videos)
    assert max(per_house.values()) <= small_config.quota.video_cap
    videos = {v.video_id: v for v in dataset.videos}
    assert dataset.telemetry['videos'] == len(videos)
    assert dataset.telemetry['questions'] == len(dataset.questions)
    templates = {t.id: t for t in builtin_templates()}
    for name, split in dataset.splits.items():
        for q in split.questions:
            assert q.house_id in split.house_ids
            video = videos[q.video_id]
            assert video.trajectory.length <= MAX_VIDEO_LENGTH
            assert len(video.gt.frames) <= -(-video.trajectory.length // 4)
            house = dataset.houses[q.house_id]
            assert execute(templates[q.template_id].program, video.gt, house, q.bindings,
                           dataset.lexicon) == q.answer
            candidates = candidate_sets(templates[q.template_id], video.gt, house,
                                        dataset.lexicon)
            for key, value in q.bindings.items():
                assert value in candidates[key.split('{')[0] + '{}' if '{' in key else key]
        ids = [q.question_id for q in split.questions]
        assert ids == sorted(ids)


def test_build_dataset_same_seed_same_questions(small_config):
    first = build_dataset(small_config, 5)
    second = build_dataset(small_config, 5)
    assert [q.to_dict() for q in first.questions] == [q.to_dict() for q in second.questions]
    assert first.template_counts() == second.template_counts()


def test_parallel_equals_serial(small_config):
    serial = build_dataset(small_config, 13, workers=1)
    parallel = build_dataset(small_config, 13, workers=2)
    assert [q.to_dict() for q in serial.questions] == [q.to_dict() for q in parallel.questions]
    assert serial.telemetry == parallel.telemetry
    assert list(serial.houses) == list(parallel.houses)


def test_visibility_guard_uses_the_whole_walk(gray_house, default_config):
    trajectory = read_video(get_file('gray/videos/house_gray_v000.jsonl')).trajectory
    full = trajectory_ground_truth(gray_house, trajectory, ViewConfig())
    needed = len(full.seen_objects)
    config = replace(default_config, view=ViewConfig(min_seen_objects=needed))
    for seed in range(20):
        whole, kept = observe_video(gray_house, trajectory, config, np.random.default_rng(seed))
        assert whole.seen_objects == full.seen_objects
        assert kept is not None
        assert len(kept.frames) == 1
    strict = replace(config, view=ViewConfig(min_seen_objects=needed + 1))
    assert observe_video(gray_house, trajectory, strict, np.random.default_rng(0))[1] is None
    whole, kept = observe_video(gray_house, trajectory, replace(config, subsample=False),
                                np.random.default_rng(0))
    assert kept is whole


@pytest.mark.slow
def test_default_configuration_reproduces_the_template_mix():
    config, settings, _ = prepare_config(DEFAULT_CONFIG)
    dataset = build_dataset(config, settings['seed'], workers=4)
    questions = dataset.questions
    n = float(len(questions))
    assert n >= 2000
    counts = Counter(q.template_id for q in questions)
    assert sorted(counts) == list(range(1, 29))
    for template_id, weight in config.quota.weights.items():
        assert abs(counts[template_id] / n - weight) <= 0.5 * weight, template_id
    assert 0.58 <= binary_fraction(questions) <= 0.70
    assert max(token_count(q.question) for q in questions) <= MAX_QUESTION_TOKENS
    assert max(v.trajectory.length for v in dataset.videos) <= MAX_VIDEO_LENGTH
    assert max(Counter(v.house_id for v in dataset.videos).values()) <= config.quota.video_cap
