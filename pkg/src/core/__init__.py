"""
Module Core - Journal, erreurs, aléa reproductible, workers et journée d'exploitation
"""

from .simulation_engine import (
    OperationEngine,
    EventLogger,
    EventType
)
from .errors import (
    GridOptError,
    InputError,
    ParseError,
    TopologyError,
    ValidationError,
    ConfigError,
    CapacityError,
    PreconditionError,
    MissingInputError,
    NumericalError,
    DivergenceError,
    ProgramError,
    SingularityError,
    InfeasibleHourError,
    ReportError,
    UndefinedShareError
)
from .rng import substream
from .workers import WorkerPool, resolve_workers, max_workers

__all__ = [
    'OperationEngine',
    'EventLogger',
    'EventType',
    'GridOptError',
    'InputError',
    'ParseError',
    'TopologyError',
    'ValidationError',
    'ConfigError',
    'CapacityError',
    'PreconditionError',
    'MissingInputError',
    'NumericalError',
    'DivergenceError',
    'ProgramError',
    'SingularityError',
    'InfeasibleHourError',
    'ReportError',
    'UndefinedShareError',
    'substream',
    'WorkerPool',
    'resolve_workers',
    'max_workers'
]
