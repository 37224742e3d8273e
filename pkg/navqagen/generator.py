#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
navqagen.generator
------------------

From houses to question-answer pairs:

- Candidate sets: what each template tag may take on a given video.
- Instantiation: random bindings, validated by executing the program.
- Quotas: per-house ledgers steering the template mix.
- Dataset assembly: house splits, per-house work (optionally in
  parallel processes) and a deterministic merge.
"""

from collections import Counter, OrderedDict, namedtuple
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
import logging

import numpy as np
from tqdm import tqdm

from .errors import ConfigError, QuestionTooLong, SplitError
from .groundtruth import ViewConfig, trajectory_ground_truth, aggregate_gt, enough_objects
from .program import Invalid, execute
from .scene import Lexicon
from .synth import SynthConfig, synth_house
from .templates import REFERENCE_COUNTS, SET_ARITIES, builtin_templates, realize_text
from .trajectory import plan_video, subsample_frames
from .utils import derive_stream, draw_seed

logger = logging.getLogger(__name__)

VIDEO_CAP = 150
SPLIT_NAMES = ('train', 'validation', 'test')
COMPARATIVES = ('more', 'fewer')
SIZE_COMPARATIVES = ('bigger', 'smaller')

Rejected = namedtuple('Rejected', 'template_id reasons')
Rejected.__doc__ = 'Every attempt at instantiating a template failed; `reasons` is a Counter.'


###########################
# Records
###########################

@dataclass(frozen=True)
class QARecord:

    question_id: str
    house_id: str
    video_id: str
    template_id: int
    category: str
    question: str
    bindings: dict = field(hash=False)
    answer: str = None
    seed: int = None

    def to_dict(self):
        return {'question_id': self.question_id, 'house_id': self.house_id,
                'video_id': self.video_id, 'template_id': self.template_id,
                'category': self.category, 'question': self.question,
                'bindings': dict(sorted(self.bindings.items())), 'answer': self.answer,
                'seed': self.seed}

    @classmethod
    def from_dict(cls, d):
        return cls(question_id=d['question_id'], house_id=d['house_id'], video_id=d['video_id'],
                   template_id=int(d['template_id']), category=d['category'],
                   question=d['question'], bindings=dict(d['bindings']), answer=d['answer'],
                   seed=d.get('seed'))


@dataclass
class VideoRecord:

    """A planned video: its full pose stream and the (sub-sampled) ground truth."""

    trajectory: object
    gt: object
    seed: int
    subsampled: bool = True

    @property
    def video_id(self):
        return self.trajectory.video_id

    @property
    def house_id(self):
        return self.trajectory.house_id


@dataclass
class SplitData:

    name: str
    house_ids: tuple = ()
    videos: list = field(default_factory=list)
    questions: list = field(default_factory=list)

    def template_counts(self):
        counts = Counter(q.template_id for q in self.questions)
        return OrderedDict((tid, counts[tid]) for tid in sorted(counts))


@dataclass
class Dataset:

    lexicon: Lexicon
    master_seed: int
    houses: dict
    splits: OrderedDict
    telemetry: dict = field(default_factory=dict)
    config: object = field(default=None, compare=False)

    @property
    def questions(self):
        return [q for split in self.splits.values() for q in split.questions]

    @property
    def videos(self):
        return [v for split in self.splits.values() for v in split.videos]

    def template_counts(self):
        return OrderedDict((name, split.template_counts()) for name, split in self.splits.items())


###########################
# Configuration
###########################

@dataclass(frozen=True)
class QuotaPlan:

    """
    Template mix and per-house budgets.

    Parameters
    ----------
    weights : dict
        Template id -> target proportion; proportions add up to 1.
    videos_per_house : int
        Videos worth of template quota owed by each house.
    video_cap : int
        Videos attempted per house at most, extra ones included.
    questions_per_video : int
    retry_budget : int
        Random binding attempts per template instantiation.
    endpoint_attempts : int
        Endpoint resamplings before a video slot is dropped.
    """

    weights: dict = field(default_factory=lambda: normalized(REFERENCE_COUNTS), hash=False)
    videos_per_house: int = 120
    video_cap: int = VIDEO_CAP
    questions_per_video: int = 1
    retry_budget: int = 30
    endpoint_attempts: int = 20

    def __post_init__(self):
        problems = []
        if abs(sum(self.weights.values()) - 1.0) > 1e-9:
            problems.append('template weights add up to {}, not 1'.format(
                sum(self.weights.values())))
        if any(w < 0 for w in self.weights.values()):
            problems.append('template weights must be non-negative')
        if self.video_cap < 1:
            problems.append('video_cap must be at least 1')
        if not 1 <= self.videos_per_house <= self.video_cap:
            problems.append('videos_per_house must lie in 1..{}'.format(self.video_cap))
        for name in ('questions_per_video', 'retry_budget', 'endpoint_attempts'):
            if getattr(self, name) < 1:
                problems.append('{} must be positive'.format(name))
        if problems:
            raise ConfigError('Invalid quota configuration: ' + '; '.join(problems))

    @classmethod
    def from_dict(cls, d):
        known = {'weights', 'videos_per_house', 'video_cap', 'questions_per_video',
                 'retry_budget', 'endpoint_attempts'}
        for key in set(d) - known:
            logger.warning('Option quota.%s not recognized!', key)
        kwargs = {k: int(v) for k, v in d.items() if k in known and k != 'weights'}
        weights = d.get('weights')
        if weights:
            kwargs['weights'] = normalized({int(k): float(v) for k, v in weights.items()})
        return cls(**kwargs)

    def to_dict(self):
        return {'weights': {str(k): v for k, v in sorted(self.weights.items())},
                'videos_per_house': self.videos_per_house, 'video_cap': self.video_cap,
                'questions_per_video': self.questions_per_video,
                'retry_budget': self.retry_budget, 'endpoint_attempts': self.endpoint_attempts}


def normalized(counts):
    total = float(sum(counts.values()))
    if total <= 0:
        raise ConfigError('Template weights must have a positive sum')
    return OrderedDict((int(k), v / total) for k, v in sorted(counts.items()))


@dataclass(frozen=True)
class GenConfig:

    """Everything `build_dataset` needs, as loaded from a configuration file."""

    lexicon: Lexicon
    synth: SynthConfig
    view: ViewConfig = ViewConfig()
    quota: QuotaPlan = QuotaPlan()
    splits: dict = field(default_factory=lambda: OrderedDict(
        [('train', 622), ('validation', 65), ('test', 56)]), hash=False)
    houses: int = 20
    subsample: bool = True

    def __post_init__(self):
        if tuple(self.splits) != SPLIT_NAMES:
            raise ConfigError('splits must list {} in that order'.format(', '.join(SPLIT_NAMES)))
        if any(r <= 0 for r in self.splits.values()):
            raise ConfigError('split ratios must be positive')
        if self.houses < 1:
            raise ConfigError('houses must be positive')


###########################
# Quota tracking
###########################

class QuotaTracker(object):

    """
    Template quota of one house, decremented as questions are produced.

    Template ``t`` is owed ``p_t * videos * questions_per_video`` questions
    per house. Each house gets the integer share of that amount that falls
    between house ``index`` and ``index + 1`` on a cumulative scale, with a
    distinct rounding phase per template, so small houses still receive
    quota and the totals over consecutive houses track the weights to
    within one question per template.
    """

    def __init__(self, plan, videos, index=0):
        self.plan = plan
        owed = videos * plan.questions_per_video
        weights = sorted(plan.weights.items())
        self.targets = OrderedDict()
        for k, (tid, p) in enumerate(weights):
            phase = (k + 0.5) / len(weights)
            self.targets[tid] = (int(np.floor(p * owed * (index + 1) + phase))
                                 - int(np.floor(p * owed * index + phase)))
        self.remaining = OrderedDict(self.targets)

    def draw_order(self, rng, available=None):
        """
        Template ids with quota left, sampled without replacement with
        weights equal to the fraction of their quota still open, so
        templates that keep failing move ahead of the ones already served.
        """
        ids = [t for t, r in self.remaining.items()
               if r > 0 and (available is None or t in available)]
        weights = np.array([self.remaining[t] / float(max(self.targets[t], 1)) for t in ids])
        order = []
        while ids:
            k = int(rng.choice(len(ids), p=weights / weights.sum()))
            order.append(ids.pop(k))
            weights = np.delete(weights, k)
        return order

    def consume(self, template_id):
        self.remaining[template_id] -= 1

    @property
    def exhausted(self):
        return all(r <= 0 for r in self.remaining.values())

    @property
    def unfilled(self):
        return sum(max(r, 0) for r in self.remaining.values())


###########################
# Instantiation
###########################

def candidate_sets(template, gt, house, lexicon):
    """
    Values each tag of `template` may take on the video described by `gt`.

    Object types, attributes and colors come from the seen objects, room
    types from the seen rooms. Set-group tags are keyed ``'attr{}'``.

    Returns
    -------
    candidates : dict
        Tag key -> sorted tuple of values. An empty tuple means the template
        cannot be instantiated on this video.
    """
    seen = [house.object(oid) for oid in sorted(gt.seen_objects)]
    obj_types = sorted({o.obj_type for o in seen})
    attrs = sorted(set().union(*(o.attributes for o in seen))) if seen else []
    colors = sorted({o.color for o in seen})
    room_types = sorted({house.room(rid).room_type for rid in gt.seen_rooms})
    candidates = OrderedDict()
    for key in template.pattern.keys:
        name = key.rstrip('{}').rstrip('0123456789')
        if name == 'obj_type':
            values = obj_types
        elif name == 'attr':
            values = attrs
            if key in template.noncolor_attrs:
                values = [a for a in attrs if a not in lexicon.colors]
        elif name == 'color':
            values = colors
        elif name == 'room_type':
            values = room_types
        elif name == 'rel':
            values = list(lexicon.relations)
        elif name == 'comp':
            values = list(COMPARATIVES)
        elif name == 'comp_rel':
            values = list(SIZE_COMPARATIVES)
        else:
            values = ['a']
        candidates[key] = tuple(values)
    return candidates


def draw_bindings(template, candidates, rng):
    bindings, arity = OrderedDict(), None
    for key, values in candidates.items():
        if key.endswith('{}'):
            if arity is None:
                arity = int(SET_ARITIES[int(rng.integers(len(SET_ARITIES)))])
            for i in range(arity):
                bindings[key.replace('{}', '{%d}' % i)] = values[int(rng.integers(len(values)))]
        else:
            bindings[key] = values[int(rng.integers(len(values)))]
    return bindings


def is_degenerate(bindings):
    """
    Bindings that make a question trivial: two ordinal object specs that
    are identical, two equal room types, or repeated set-group members.
    """
    if 'attr1' in bindings and 'attr2' in bindings:
        first = (bindings['attr1'], bindings.get('obj_type1', bindings.get('obj_type')))
        second = (bindings['attr2'], bindings.get('obj_type2', bindings.get('obj_type')))
        if first == second:
            return True
    if 'room_type1' in bindings and bindings.get('room_type1') == bindings.get('room_type2'):
        return True
    members, i = [], 0
    while 'attr{%d}' % i in bindings or 'room_type{%d}' % i in bindings:
        members.append((bindings.get('attr{%d}' % i), bindings.get('obj_type{%d}' % i),
                        bindings.get('room_type{%d}' % i)))
        i += 1
    return len(set(members)) != len(members)


def instantiate(template, gt, house, lexicon, rng, retry_budget=30, question_id=None, seed=None):
    """
    Bind the tags of `template` to random ground-truth values until the
    program yields a valid answer.

    Parameters
    ----------
    template : QuestionTemplate
    gt : TrajectoryGroundTruth
    house : House
    lexicon : Lexicon
    rng : numpy.random.Generator
    retry_budget : int
        Random binding attempts before giving up.
    question_id : str, optional
    seed : int, optional
        Generation seed recorded on the QARecord.

    Returns
    -------
    QARecord or Rejected
    """
    candidates = candidate_sets(template, gt, house, lexicon)
    if not all(candidates.values()):
        return Rejected(template.id, Counter(empty_candidates=1))
    reasons = Counter()
    for attempt in range(retry_budget):
        bindings = draw_bindings(template, candidates, rng)
        if is_degenerate(bindings):
            reasons['degenerate'] += 1
            continue
        answer = execute(template.program, gt, house, bindings, lexicon)
        if isinstance(answer, Invalid):
            reasons['invalid'] += 1
            continue
        try:
            question = realize_text(template, bindings, lexicon)
        except QuestionTooLong:
            reasons['too_long'] += 1
            continue
        return QARecord(question_id=question_id, house_id=gt.house_id, video_id=gt.video_id,
                        template_id=template.id, category=template.category,
                        question=question, bindings=dict(bindings), answer=answer, seed=seed)
    return Rejected(template.id, reasons)


def generate_for_video(gt, house, templates, quota, rng, lexicon, telemetry=None, seed=None):
    """
    Produce up to ``questions_per_video`` records for one video.

    Templates are tried in the order given by `QuotaTracker.draw_order`;
    rejected templates are skipped for this question.

    Parameters
    ----------
    gt : TrajectoryGroundTruth
    house : House
    templates : list of QuestionTemplate
    quota : QuotaTracker
    rng : numpy.random.Generator
    lexicon : Lexicon
    telemetry : collections.Counter, optional
        Updated in place with rejection reasons.
    seed : int, optional
        Video seed stored on each record.

    Returns
    -------
    records : list of QARecord
    """
    by_id = {t.id: t for t in templates}
    telemetry = telemetry if telemetry is not None else Counter()
    records = []
    while len(records) < quota.plan.questions_per_video:
        record = None
        for template_id in quota.draw_order(rng, available=by_id):
            question_id = '{}_q{}'.format(gt.video_id, len(records))
            result = instantiate(by_id[template_id], gt, house, lexicon, rng,
                                 quota.plan.retry_budget, question_id=question_id, seed=seed)
            if isinstance(result, Rejected):
                telemetry['rejections'] += 1
                for reason, n in result.reasons.items():
                    telemetry['rejected_' + reason] += n
                logger.debug('%s: template %d rejected (%s)', gt.video_id, template_id,
                             dict(result.reasons))
                continue
            record = result
            break
        if record is None:
            break
        quota.consume(record.template_id)
        records.append(record)
    return records


###########################
# Dataset assembly
###########################

def split_houses(house_ids, ratios, rng):
    """
    Partition house ids into named splits following `ratios`, with at
    least one house each. Counts follow the largest-remainder rule.

    Raises
    ------
    SplitError
        When there are fewer houses than splits.
    """
    names = list(ratios)
    n = len(house_ids)
    if n < len(names):
        raise SplitError('{} house(s) cannot fill {} non-empty splits'.format(n, len(names)))
    total = float(sum(ratios.values()))
    exact = [n * ratios[name] / total for name in names]
    counts = [int(x) for x in exact]
    by_remainder = sorted(range(len(names)), key=lambda i: (-(exact[i] - counts[i]), i))
    for i in by_remainder[:n - sum(counts)]:
        counts[i] += 1
    for i, count in enumerate(counts):
        if count == 0:
            donor = max(range(len(counts)), key=lambda j: (counts[j], -j))
            counts[donor] -= 1
            counts[i] = 1
    shuffled = [house_ids[int(k)] for k in rng.permutation(n)]
    splits, start = OrderedDict(), 0
    for name, count in zip(names, counts):
        splits[name] = tuple(sorted(shuffled[start:start + count]))
        start += count
    return splits


HouseResult = namedtuple('HouseResult', 'house videos questions telemetry')


def house_id_for(index):
    return 'house_{:03d}'.format(index)


def observe_video(house, trajectory, config, rng):
    """
    Ground truth of one walk: the full one and the one questions are
    asked on, sub-sampled when the configuration says so. The kept ground
    truth is None when the whole walk sees fewer than
    ``view.min_seen_objects`` objects.
    """
    full = trajectory_ground_truth(house, trajectory, config.view)
    if not enough_objects(full, config.view):
        return full, None
    if not config.subsample:
        return full, full
    return full, aggregate_gt(subsample_frames(full.frames, rng), house_id=full.house_id,
                              video_id=full.video_id)


def generate_house(config, master_seed, index):
    """
    All the work for one house: synthesis, videos and questions. Depends
    only on (config, master_seed, index).

    The house owes ``videos_per_house`` videos worth of template quota.
    Videos keep coming past that number, up to ``video_cap``, while some
    template still has quota left; those late videos only serve the
    templates that are hard to instantiate.
    """
    house_id = house_id_for(index)
    rng = derive_stream(master_seed, 'house', house_id)
    house = synth_house(config.synth, draw_seed(rng), house_id=house_id)
    templates = builtin_templates()
    quota = QuotaTracker(config.quota, config.quota.videos_per_house, index=index)
    telemetry = Counter()
    videos, questions = [], []
    for v in range(config.quota.video_cap):
        if quota.exhausted:
            break
        if v >= config.quota.videos_per_house:
            telemetry['extra_videos'] += 1
        video_id = '{}_v{:03d}'.format(house_id, v)
        seed = draw_seed(derive_stream(master_seed, 'video', video_id))
        vrng = np.random.default_rng(seed)
        trajectory = plan_video(house, vrng, video_id, attempts=config.quota.endpoint_attempts)
        if trajectory is None:
            telemetry['discarded_unplannable'] += 1
            continue
        _, gt = observe_video(house, trajectory, config, vrng)
        if gt is None:
            telemetry['discarded_few_objects'] += 1
            continue
        records = generate_for_video(gt, house, templates, quota, vrng, config.lexicon,
                                     telemetry=telemetry, seed=seed)
        if not records:
            telemetry['discarded_no_question'] += 1
            continue
        videos.append(VideoRecord(trajectory=trajectory, gt=gt, seed=seed,
                                  subsampled=config.subsample))
        questions.extend(records)
    if quota.unfilled:
        telemetry['unfilled_quota'] += quota.unfilled
        logger.debug('%s: %d question(s) of quota left unfilled', house_id, quota.unfilled)
    telemetry['videos'] += len(videos)
    telemetry['questions'] += len(questions)
    logger.debug('%s: %d videos, %d questions', house_id, len(videos), len(questions))
    return HouseResult(house, videos, questions, telemetry)


def _quiet_worker():
    logging.getLogger('navqagen').setLevel(logging.WARNING)


def build_dataset(config, master_seed, workers=1, progress=False):
    """
    Generate a complete dataset.

    Parameters
    ----------
    config : GenConfig
    master_seed : int
    workers : int, optional
        Processes generating houses in parallel. The result does not
        depend on it.
    progress : bool, optional
        Show a progress bar over houses.

    Returns
    -------
    dataset : Dataset

    Raises
    ------
    SplitError
        With fewer than three houses.
    """
    house_ids = [house_id_for(i) for i in range(config.houses)]
    assignment = split_houses(house_ids, config.splits, derive_stream(master_seed, 'splits'))
    work = partial(generate_house, config, master_seed)
    bar = partial(tqdm, total=config.houses, unit='house', disable=not progress)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers, initializer=_quiet_worker) as pool:
            results = list(bar(pool.map(work, range(config.houses))))
    else:
        results = [work(i) for i in bar(range(config.houses))]

    telemetry = Counter()
    by_house = {}
    for result in results:
        telemetry.update(result.telemetry)
        by_house[result.house.id] = result
    splits = OrderedDict()
    for name, ids in assignment.items():
        videos = sorted((v for i in ids for v in by_house[i].videos), key=lambda v: v.video_id)
        questions = sorted((q for i in ids for q in by_house[i].questions),
                           key=lambda q: q.question_id)
        splits[name] = SplitData(name=name, house_ids=ids, videos=videos, questions=questions)
        logger.info('%s: %d houses, %d videos, %d questions', name, len(ids), len(videos),
                    len(questions))
    attempts = telemetry['questions'] + telemetry['rejections']
    if attempts:
        logger.info('Rejected %d of %d template instantiations (%.1f%%)',
                    telemetry['rejections'], attempts, 100.0 * telemetry['rejections'] / attempts)
    discarded = sum(n for k, n in telemetry.items() if k.startswith('discarded_'))
    if discarded:
        logger.info('Discarded %d videos', discarded)
    if telemetry['unfilled_quota']:
        logger.info('%d question(s) of template quota could not be filled',
                    telemetry['unfilled_quota'])
    return Dataset(lexicon=config.lexicon, master_seed=master_seed,
                   houses=OrderedDict((i, by_house[i].house) for i in house_ids),
                   splits=splits, telemetry=dict(sorted(telemetry.items())), config=config)

