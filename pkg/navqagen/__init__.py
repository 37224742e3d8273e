#!/usr/bin/env python
# -*- coding: utf-8 -*-

#################################################
#       navqagen: navigation video QA builder   #
# --------------------------------------------- #
#  Houses, trajectories, templates, datasets    #
#################################################

import logging
import os

logger = logging.getLogger(__name__)
if not os.environ.get('NAVQAGEN_QUIET'):
    class CustomFormatter(logging.Formatter):

        CUSTOM_FORMATS = {
            logging.DEBUG: "DEBUG: %(module)s: %(lineno)d: %(message)s",
            logging.INFO: "%(message)s",
            logging.WARNING: "Warning: %(message)s",
            logging.ERROR: "[!] %(message)s",
            logging.CRITICAL: "CRITICAL: %(message)s",
            100: "%(message)s"
        }

        def format(self, record):
            fmt = self.CUSTOM_FORMATS.get(record.levelno, self._style._fmt)
            return logging.Formatter(fmt).format(record)

    logger.setLevel(logging.INFO)
    handler = logging.StreamHandler()
    handler.setFormatter(CustomFormatter())
    logger.addHandler(handler)

from ._version import __version__
from .scene import Lexicon, House, Room, ObjectInstance, Doorway, validate_house, adjacent_rooms
from .synth import SynthConfig, synth_house
from .trajectory import (Pose, Trajectory, sample_endpoints, shortest_path,
                         path_to_trajectory, subsample_frames)
from .groundtruth import (ViewConfig, FrameGT, TrajectoryGroundTruth, visible_objects,
                          frame_ground_truth, aggregate_gt)
from .templates import builtin_templates, parse_template, realize_text
from .program import execute, Invalid
from .generator import (QARecord, QuotaPlan, candidate_sets, instantiate,
                        generate_for_video, build_dataset)
from .utils import derive_stream

__copyright__ = "navqagen v{}".format(__version__)
