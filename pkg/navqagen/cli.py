#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
navqagen.cli
------------

Command line surface: ``navqagen gen|audit|exec|oracle|validate|templates``.
Every subcommand returns an exit status instead of calling ``sys.exit``,
so `main` can be driven from tests.
"""

from __future__ import print_function
from argparse import ArgumentParser
import json
import logging
import os
import shutil
import sys

from . import __version__
from .audit import audit_dataset, plot_report
from .errors import (NavQAError, ConfigError, DatasetError, LexiconError, PlacementError,
                     SplitError, TemplateSyntaxError, TrajectoryError)
from .generator import build_dataset
from .io import (MANIFEST, find_house, load_house, load_yaml, manifest_digest, prepare_config,
                 read_dataset, read_video, validate_dataset, write_dataset)
from .oracle import run_oracle
from .program import Invalid, execute
from .scene import Lexicon
from .templates import builtin_templates
from .utils import assert_not_exists, extant_file, ignored_exceptions

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_INVARIANT = 4
EXIT_CONFIG = 5

EXIT_CODES = (
    (DatasetError, EXIT_DATA),
    (IOError, EXIT_DATA),
    (ConfigError, EXIT_CONFIG),
    (SplitError, EXIT_CONFIG),
    (PlacementError, EXIT_CONFIG),
    (LexiconError, EXIT_CONFIG),
    (TemplateSyntaxError, EXIT_CONFIG),
    (TrajectoryError, EXIT_CONFIG),
    (NavQAError, EXIT_CONFIG),
)


###########################
# Subcommands
###########################

def generate(config=None, seed=None, houses=None, out=None, questions_per_video=None,
             no_subsample=False, workers=None, overwrite=False, debug_render=False,
             quiet=False):
    cfg, settings, raw = prepare_config(config, seed=seed, houses=houses, outputpath=out,
                                        questions_per_video=questions_per_video,
                                        subsample=False if no_subsample else None,
                                        workers=workers)
    outputpath = settings['outputpath']
    if os.path.exists(outputpath):
        if overwrite and os.path.exists(os.path.join(outputpath, MANIFEST)):
            logger.warning('Overwriting dataset at %s', outputpath)
            with ignored_exceptions(FileNotFoundError):
                shutil.rmtree(outputpath)
        elif overwrite:
            raise DatasetError('{} exists and does not hold a dataset; '
                               'refusing to overwrite it'.format(outputpath))
        else:
            outputpath = assert_not_exists(outputpath)
            logger.warning('Output path exists, writing to %s instead', outputpath)
    logger.info('Generating %d houses with seed %d', cfg.houses, settings['seed'])
    dataset = build_dataset(cfg, settings['seed'], workers=settings['workers'],
                            progress=not quiet)
    manifest = write_dataset(dataset, outputpath, config_text=raw, debug_render=debug_render)
    logger.info('Wrote %d questions over %d videos to %s', len(dataset.questions),
                len(dataset.videos), outputpath)
    logger.info('Manifest digest: %s', manifest_digest(manifest))
    return EXIT_OK


def audit(dataset, report_out=None, plot=None, train='train'):
    import pandas as pd
    data = read_dataset(dataset)
    if train not in data.splits:
        raise DatasetError('Dataset has no split named {}'.format(train))
    report = audit_dataset(data, train=train)
    print('Questions: {}  Videos: {}'.format(report.n_questions, report.n_videos))
    print('Binary fraction: {:.4f} (reference {:.4f} from counts, {} stated)'.format(
        report.binary_fraction, report.references['binary_fraction_from_counts'],
        report.references['binary_fraction_stated']))
    print('Longest question: {} tokens  Longest video: {} frames'.format(
        report.max_question_length, report.max_video_length))
    with pd.option_context('display.float_format', '{:.4f}'.format):
        print(report.category_table().to_string())
        if report.baselines:
            print(report.baseline_table().to_string(index=False))
    if report_out:
        with open(report_out, 'w') as f:
            json.dump(report.to_dict(), f, indent=2, sort_keys=True)
        logger.info('Report written to %s', report_out)
    if plot:
        plot_report(report, plot)
        logger.info('Plots written to %s', plot)
    return EXIT_OK


def _find_lexicon(video_path):
    directory = os.path.dirname(os.path.abspath(video_path))
    while True:
        candidate = os.path.join(directory, 'lexicon.json')
        if os.path.exists(candidate):
            with open(candidate) as f:
                return Lexicon.from_dict(json.load(f))
        parent = os.path.dirname(directory)
        if parent == directory:
            return prepare_config()[0].lexicon
        directory = parent


def run_exec(gt, template, bindings, house=None):
    templates = {t.id: t for t in builtin_templates()}
    if template not in templates:
        raise ConfigError('No template with id {} (choose 1-{})'.format(template, len(templates)))
    video = read_video(gt)
    scene = load_house(house) if house else find_house(gt)
    if scene.id != video.house_id:
        raise DatasetError('Video {} belongs to {}, not {}'.format(video.video_id,
                                                                   video.house_id, scene.id))
    with open(bindings) as f:
        values = load_yaml(f.read()) or {}
    if not isinstance(values, dict):
        raise DatasetError('{} does not hold a mapping of bindings'.format(bindings))
    values = {str(k): str(v) for k, v in values.items()}
    answer = execute(templates[template].program, video.gt, scene, values, _find_lexicon(gt))
    if isinstance(answer, Invalid):
        print('Invalid: {}'.format(answer.reason))
    else:
        print(answer)
    return EXIT_OK


def oracle(n=1000, seed=0, template=None, quiet=False):
    templates = builtin_templates()
    if template:
        templates = [t for t in templates if t.id in set(template)]
    result = run_oracle(n=n, seed=seed, templates=templates, progress=not quiet)
    print(result)
    return EXIT_OK if result.ok else EXIT_INVARIANT


def validate(dataset):
    violations = validate_dataset(dataset)
    for v in violations:
        print('{}: {}: {}'.format(v.invariant, v.entity, v.message))
    if violations:
        logger.error('%d violation(s) in %s', len(violations), dataset)
        return EXIT_INVARIANT
    print('{}: OK'.format(dataset))
    return EXIT_OK


def export_templates(out=None):
    text = json.dumps([t.to_dict() for t in builtin_templates()], indent=2)
    if out:
        with open(out, 'w') as f:
            f.write(text + '\n')
        logger.info('Wrote %d templates to %s', len(builtin_templates()), out)
    else:
        print(text)
    return EXIT_OK


###########################
# Entry points
###########################

def build_parser():
    p = ArgumentParser(prog='navqagen',
                       description='Question-answering datasets over navigation videos '
                                   'in synthetic houses')
    p.add_argument('--version', action='version', version='%(prog)s v{}'.format(__version__))
    p.add_argument('-v', '--verbose', action='store_true', help='Log debug messages')
    p.add_argument('-q', '--quiet', action='store_true',
                   help='Only log warnings and errors; hide progress bars')
    sp = p.add_subparsers()

    # 'gen' subcommand
    p_gen = sp.add_parser('gen', help='Generate a dataset')
    p_gen.add_argument('-c', '--config', type=extant_file, default=None,
                       help='YAML configuration (defaults to the packaged one)')
    p_gen.add_argument('-s', '--seed', type=int, default=None, help='Master seed')
    p_gen.add_argument('--houses', type=int, default=None, help='Number of houses')
    p_gen.add_argument('-o', '--out', type=str, default=None, help='Output directory')
    p_gen.add_argument('--questions-per-video', type=int, default=None)
    p_gen.add_argument('--no-subsample', action='store_true',
                       help='Keep every frame instead of sub-sampling long videos')
    p_gen.add_argument('-w', '--workers', type=int, default=None,
                       help='Processes generating houses in parallel')
    p_gen.add_argument('--overwrite', action='store_true',
                       help='Replace an existing dataset at the output path')
    p_gen.add_argument('--debug-render', action='store_true',
                       help='Write an ASCII map next to each video')
    p_gen.set_defaults(func=generate)

    # 'audit' subcommand
    p_audit = sp.add_parser('audit', help='Statistics and answer-prior baselines of a dataset')
    p_audit.add_argument('-d', '--dataset', type=extant_file, required=True)
    p_audit.add_argument('-r', '--report-out', type=str, default=None,
                         help='JSON file where to write the full report')
    p_audit.add_argument('-p', '--plot', type=str, default=None,
                         help='Image file where to plot proportions and lengths')
    p_audit.add_argument('--train', type=str, default='train',
                         help='Split the baselines are fitted on')
    p_audit.set_defaults(func=audit)

    # 'exec' subcommand
    p_exec = sp.add_parser('exec', help='Answer one template on one video')
    p_exec.add_argument('-g', '--gt', type=extant_file, required=True,
                        help='Video ground-truth file (.jsonl)')
    p_exec.add_argument('-t', '--template', type=int, required=True, help='Template id')
    p_exec.add_argument('-b', '--bindings', type=extant_file, required=True,
                        help='JSON or YAML mapping of tag keys to values')
    p_exec.add_argument('--house', type=extant_file, default=None,
                        help='House file, if not found under a houses/ directory above GT')
    p_exec.set_defaults(func=run_exec)

    # 'oracle' subcommand
    p_oracle = sp.add_parser('oracle', help='Check the executor against enumeration')
    p_oracle.add_argument('-n', '--n', type=int, default=1000, help='Random worlds')
    p_oracle.add_argument('-s', '--seed', type=int, default=0)
    p_oracle.add_argument('-t', '--template', type=int, action='append', default=None,
                          help='Restrict to this template id (repeatable)')
    p_oracle.set_defaults(func=oracle)

    # 'validate' subcommand
    p_validate = sp.add_parser('validate', help='Schema and invariant check of a dataset')
    p_validate.add_argument('-d', '--dataset', type=extant_file, required=True)
    p_validate.set_defaults(func=validate)

    # 'templates' subcommand
    p_templates = sp.add_parser('templates', help='Export the template table as JSON')
    p_templates.add_argument('-o', '--out', type=str, default=None)
    p_templates.set_defaults(func=export_templates)
    return p


def main(argv=None):
    p = build_parser()
    try:
        cli_args = p.parse_args(sys.argv[1:] if argv is None else argv)
    except SystemExit as e:
        return e.code
    if cli_args.verbose:
        logging.getLogger('navqagen').setLevel(logging.DEBUG)
    elif cli_args.quiet:
        logging.getLogger('navqagen').setLevel(logging.WARNING)
    if not hasattr(cli_args, 'func'):
        p.print_help()
        return EXIT_USAGE

    # Autocall the requested subcommand with the arguments it names
    f_code = cli_args.func.__code__
    f_args = {a: getattr(cli_args, a) for a in f_code.co_varnames[:f_code.co_argcount]
              if hasattr(cli_args, a)}
    try:
        return cli_args.func(**f_args)
    except Exception as e:
        for exc_type, code in EXIT_CODES:
            if isinstance(e, exc_type):
                logger.error('%s', e)
                return code
        raise


def audit_main(argv=None):
    return main(['audit'] + list(sys.argv[1:] if argv is None else argv))


if __name__ == '__main__':
    sys.exit(main())
