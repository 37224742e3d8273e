#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
navqagen.audit
--------------

Dataset statistics and answer-prior baselines: category mix, question
and video lengths, answer frequencies, the share of binary questions,
and how far one gets by always answering the most frequent answer.
"""

from collections import Counter, OrderedDict, defaultdict
from dataclasses import dataclass, field
import logging

from .errors import DatasetError
from .templates import (BINARY_CATEGORIES, CATEGORIES, REFERENCE_COUNTS, MAX_QUESTION_TOKENS,
                        builtin_templates, token_count)
from .trajectory import MAX_VIDEO_LENGTH

logger = logging.getLogger(__name__)

STATED_BINARY_FRACTION = 0.66


def reference_category_proportions():
    """Category mix of the reference release, from its per-template counts."""
    category_of = {t.id: t.category for t in builtin_templates()}
    totals = Counter()
    for template_id, n in REFERENCE_COUNTS.items():
        totals[category_of[template_id]] += n
    grand = sum(totals.values())
    return OrderedDict((c, totals[c] / grand) for c in CATEGORIES)


def reference_binary_fraction():
    proportions = reference_category_proportions()
    return sum(proportions[c] for c in BINARY_CATEGORIES)


@dataclass
class Baselines:

    """Accuracies of answer-prior predictors fitted on a training split."""

    majority_answer: str
    global_accuracy: float
    per_template_accuracy: float
    per_category: dict
    fallbacks: int

    def to_dict(self):
        return {'majority_answer': self.majority_answer,
                'global_accuracy': self.global_accuracy,
                'per_template_accuracy': self.per_template_accuracy,
                'per_category': self.per_category, 'fallbacks': self.fallbacks}


@dataclass
class AuditReport:

    n_questions: int
    n_videos: int
    category_proportions: dict
    template_counts: dict
    question_lengths: dict
    video_lengths: dict
    answer_frequencies: dict
    binary_fraction: float
    references: dict = field(default_factory=dict)
    baselines: dict = field(default_factory=dict)

    def to_dict(self):
        return {'n_questions': self.n_questions, 'n_videos': self.n_videos,
                'category_proportions': self.category_proportions,
                'template_counts': {str(k): v for k, v in self.template_counts.items()},
                'question_lengths': {str(k): v for k, v in self.question_lengths.items()},
                'video_lengths': {str(k): v for k, v in self.video_lengths.items()},
                'answer_frequencies': self.answer_frequencies,
                'binary_fraction': self.binary_fraction,
                'references': self.references,
                'baselines': {k: v.to_dict() for k, v in self.baselines.items()}}

    @property
    def max_question_length(self):
        return max(self.question_lengths) if self.question_lengths else 0

    @property
    def max_video_length(self):
        return max(self.video_lengths) if self.video_lengths else 0

    def category_table(self):
        """Measured against reference category proportions, as a DataFrame."""
        import pandas as pd
        reference = self.references.get('category_proportions', {})
        rows = [(c, self.category_proportions.get(c, 0.0), reference.get(c)) for c in CATEGORIES]
        table = pd.DataFrame(rows, columns=['category', 'measured', 'reference'])
        return table.set_index('category')

    def baseline_table(self):
        import pandas as pd
        rows = []
        for split, b in self.baselines.items():
            rows.append((split, 'all', b.global_accuracy, b.per_template_accuracy))
            for category, (g, t) in b.per_category.items():
                rows.append((split, category, g, t))
        return pd.DataFrame(rows, columns=['split', 'category', 'global_majority',
                                           'per_template_majority'])


def _histogram(values):
    counts = Counter(values)
    return OrderedDict((k, counts[k]) for k in sorted(counts))


def binary_fraction(records):
    """
    Share of questions whose category has a binary answer.

    Raises
    ------
    ValueError
        If `records` is empty.
    """
    records = list(records)
    if not records:
        raise ValueError('Cannot compute the binary fraction of no questions')
    return sum(1 for r in records if r.category in BINARY_CATEGORIES) / float(len(records))


def dataset_stats(dataset):
    """
    Distribution statistics of every question and video in `dataset`.

    Returns
    -------
    report : AuditReport
        Without baselines; see `audit_dataset`.

    Raises
    ------
    DatasetError
        If the dataset holds no questions.
    """
    records = dataset.questions
    if not records:
        raise DatasetError('Dataset has no questions to audit')
    categories = Counter(r.category for r in records)
    n = len(records)
    report = AuditReport(
        n_questions=n,
        n_videos=len(dataset.videos),
        category_proportions=OrderedDict((c, categories[c] / float(n)) for c in CATEGORIES),
        template_counts=_histogram(r.template_id for r in records),
        question_lengths=_histogram(token_count(r.question) for r in records),
        video_lengths=_histogram(v.trajectory.length for v in dataset.videos),
        answer_frequencies=OrderedDict(sorted(Counter(r.answer for r in records).items())),
        binary_fraction=binary_fraction(records),
        references={'binary_fraction_stated': STATED_BINARY_FRACTION,
                    'binary_fraction_from_counts': round(reference_binary_fraction(), 4),
                    'category_proportions': reference_category_proportions(),
                    'max_question_length': MAX_QUESTION_TOKENS,
                    'max_video_length': MAX_VIDEO_LENGTH})
    if report.max_question_length > MAX_QUESTION_TOKENS:
        logger.warning('Longest question has %d tokens', report.max_question_length)
    if report.max_video_length > MAX_VIDEO_LENGTH:
        logger.warning('Longest video has %d frames', report.max_video_length)
    return report


def _majority(answers):
    """Most frequent answer; ties go to the lexicographically smallest."""
    counts = Counter(answers)
    best = max(counts.values())
    return min(a for a, n in counts.items() if n == best)


def majority_baseline(train, evaluation):
    """
    Score answer-prior predictors on `evaluation` after fitting on `train`.
    Only (template id, answer) pairs are used.

    The global predictor always answers the most frequent training answer.
    The per-template predictor answers the most frequent training answer
    of the question's template, falling back to the global one for
    templates absent from training.

    Returns
    -------
    baselines : Baselines
    """
    train, evaluation = list(train), list(evaluation)
    if not train or not evaluation:
        raise ValueError('Both splits must hold questions')
    majority = _majority(r.answer for r in train)
    by_template = defaultdict(list)
    for r in train:
        by_template[r.template_id].append(r.answer)
    template_majority = {t: _majority(answers) for t, answers in by_template.items()}

    hits = Counter()
    totals = Counter()
    fallbacks = 0
    for r in evaluation:
        guess = template_majority.get(r.template_id)
        if guess is None:
            fallbacks += 1
            guess = majority
        for scope in ('all', r.category):
            totals[scope] += 1
            hits[scope, 'global'] += r.answer == majority
            hits[scope, 'template'] += r.answer == guess
    if fallbacks:
        logger.info('%d evaluation question(s) fell back to the global majority answer', fallbacks)

    n = totals['all']
    per_category = OrderedDict(
        (c, (hits[c, 'global'] / float(totals[c]), hits[c, 'template'] / float(totals[c])))
        for c in CATEGORIES if totals[c])
    return Baselines(majority_answer=majority,
                     global_accuracy=hits['all', 'global'] / float(n),
                     per_template_accuracy=hits['all', 'template'] / float(n),
                     per_category=per_category, fallbacks=fallbacks)


def audit_dataset(dataset, train='train'):
    """
    Full report: statistics plus baselines fitted on `train` and scored
    on every other non-empty split.
    """
    report = dataset_stats(dataset)
    fit = dataset.splits[train].questions
    if not fit:
        logger.warning('Split %s has no questions; skipping baselines', train)
        return report
    for name, split in dataset.splits.items():
        if name == train or not split.questions:
            continue
        report.baselines[name] = majority_baseline(fit, split.questions)
    return report


def plot_report(report, output):
    """Category proportions and length histograms, in one figure."""
    import matplotlib
    matplotlib.use('Agg')
    import matplotlib.pyplot as plt
    fig, (ax_cat, ax_q, ax_v) = plt.subplots(1, 3, figsize=(15, 4))
    table = report.category_table()
    table.plot.bar(ax=ax_cat, rot=60)
    ax_cat.set_ylabel('proportion')
    ax_q.bar(list(report.question_lengths), list(report.question_lengths.values()))
    ax_q.set_xlabel('question length (tokens)')
    ax_v.bar(list(report.video_lengths), list(report.video_lengths.values()))
    ax_v.set_xlabel('video length (frames)')
    fig.tight_layout()
    fig.savefig(output)
    plt.close(fig)
    return output
