"""
Module CLI - Configuration et exécution des pipelines en lot
"""

from .config import RunConfig, SUBCOMMANDS, DATA_DIR
from .runner import (
    run,
    benchmark,
    build_manifest,
    package_versions,
    HANDLERS,
    EXIT_OK,
    EXIT_USAGE,
    EXIT_INPUT,
    EXIT_NUMERICAL
)

__all__ = [
    'RunConfig',
    'SUBCOMMANDS',
    'DATA_DIR',
    'run',
    'benchmark',
    'build_manifest',
    'package_versions',
    'HANDLERS',
    'EXIT_OK',
    'EXIT_USAGE',
    'EXIT_INPUT',
    'EXIT_NUMERICAL'
]
