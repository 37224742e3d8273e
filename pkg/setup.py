#!/usr/bin/env python
# -*- coding: utf-8 -*-

from setuptools import setup, find_packages
import io
import os

HERE = os.path.dirname(os.path.abspath(__file__))


def read(*filenames, **kwargs):
    encoding = kwargs.get('encoding', 'utf-8')
    sep = kwargs.get('sep', '\n')
    buf = []
    for filename in filenames:
        with io.open(os.path.join(HERE, filename), encoding=encoding) as f:
            buf.append(f.read())
    return sep.join(buf)


def version():
    namespace = {}
    exec(read(os.path.join('navqagen', '_version.py')), namespace)
    return namespace['__version__']

long_description = read('README.rst')

setup(
    name='navqagen',
    version=version(),
    license='LGPL',
    description='Desk-scale generator for navigation video question answering datasets',
    long_description=long_description,
    packages=find_packages(exclude=['tests']),
    package_data={'navqagen': ['data/*.yaml']},
    python_requires='>=3.8',
    install_requires=[
        'numpy',
        'ruamel.yaml>=0.17',
        'jinja2',
        'pandas',
        'tqdm',
        'matplotlib',
    ],
    extras_require={
        'test': ['pytest', 'hypothesis'],
    },
    platforms='any',
    classifiers=[
        'Programming Language :: Python',
        'Development Status :: 3 - Alpha',
        'Natural Language :: English',
        'Environment :: Console',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: GNU Library or Lesser General Public License (LGPL)',
        'Operating System :: OS Independent',
        'Topic :: Scientific/Engineering :: Artificial Intelligence',
    ],
    entry_points='''
        [console_scripts]
        navqagen=navqagen.cli:main
        navqaudit=navqagen.cli:audit_main
    ''',
)
