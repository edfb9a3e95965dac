"""
Module Grid - Modèle de réseau, lecture des départs et radialité
"""

from .network import (
    Bus,
    Branch,
    Network,
    SwitchConfig,
    PHASES,
    check_config,
    uniform_bus,
    uniform_branch
)
from .topology import (
    adjacency_matrix,
    is_radial,
    enumerate_radial_configs,
    orient,
    RadialTree,
    OrientedBranch,
    MAX_SWITCHES
)
from .feeder_io import parse_feeder, write_feeder

__all__ = [
    'Bus',
    'Branch',
    'Network',
    'SwitchConfig',
    'PHASES',
    'check_config',
    'uniform_bus',
    'uniform_branch',
    'adjacency_matrix',
    'is_radial',
    'enumerate_radial_configs',
    'orient',
    'RadialTree',
    'OrientedBranch',
    'MAX_SWITCHES',
    'parse_feeder',
    'write_feeder'
]
