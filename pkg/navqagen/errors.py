#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
navqagen.errors
---------------

Exceptions raised across the package. ``Invalid`` and ``Rejected`` are
values, not errors, and live with the code that produces them.
"""


class NavQAError(Exception):
    """Base class for every navqagen failure."""


class ConfigError(NavQAError, ValueError):
    pass


class LexiconError(NavQAError, ValueError):
    pass


class QuestionTooLong(LexiconError):
    """Realized question text over the token limit."""


class PlacementError(NavQAError, RuntimeError):
    """House synthesis could not place rooms within its retry budget."""


class TrajectoryError(NavQAError):
    pass


class NoPath(TrajectoryError):
    pass


class TooLong(TrajectoryError):
    pass


class TemplateSyntaxError(NavQAError, ValueError):

    def __init__(self, message, text=None, column=None):
        if text is not None and column is not None:
            message = '{} (column {} of {!r})'.format(message, column, text)
        super(TemplateSyntaxError, self).__init__(message)
        self.text = text
        self.column = column


class ProgramTypeError(NavQAError, TypeError):
    pass


class SplitError(NavQAError, ValueError):
    pass


class DatasetError(NavQAError, IOError):
    pass


class SchemaError(DatasetError):

    def __init__(self, message, path=None, line=None):
        where = ''
        if path is not None:
            where = '{}:{}: '.format(path, line) if line is not None else '{}: '.format(path)
        super(SchemaError, self).__init__(where + message)
        self.path = path
        self.line = line
