#!/usr/bin/env python3
# -*- coding: utf-8 -*-
#
# navqagen documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir.

import os
import sys

sys.path.insert(0, os.path.abspath('..'))

# -- General configuration ------------------------------------------------

extensions = ['sphinx.ext.autodoc',
              'sphinx.ext.napoleon',
              'sphinx.ext.viewcode']

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = 'navqagen'
copyright = '2026, navqagen developers'
author = 'navqagen developers'

# The version info is read from the package, without importing it.
_version = {}
with open(os.path.join('..', 'navqagen', '_version.py')) as f:
    exec(f.read(), _version)
version = _version['__version__']
release = version

language = 'en'
exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']
pygments_style = 'sphinx'
todo_include_todos = False

# -- Options for HTML output ----------------------------------------------

html_theme = "sphinx_rtd_theme"
html_static_path = []
htmlhelp_basename = 'navqagendoc'

# -- Options for manual page output ---------------------------------------

man_pages = [
    (master_doc, 'navqagen', 'navqagen Documentation',
     [author], 1)
]
