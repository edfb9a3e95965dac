"""
Module Forecast - Prévision de charge par SVR et optimisation GTA + PSO
"""

from .svr import HyperParams, SVRModel, train_svr, predict, predict_many, rbf_kernel
from .tuning import (
    risk,
    ParamRange,
    GridSpec,
    GTACell,
    grid_risks,
    gta_search,
    Particle,
    Swarm,
    PSOResult,
    pso_search,
    pso_refine,
    TuningConfig,
    TuningReport,
    tune,
    optimize_hyperparams,
    DEFAULT_SPLIT
)
from .sliding import (
    make_windows,
    ForecastPipeline,
    forecast_sliding,
    error_metrics,
    read_series,
    write_series
)
from .synthetic import synthetic_load

__all__ = [
    'HyperParams',
    'SVRModel',
    'train_svr',
    'predict',
    'predict_many',
    'rbf_kernel',
    'risk',
    'ParamRange',
    'GridSpec',
    'GTACell',
    'grid_risks',
    'gta_search',
    'Particle',
    'Swarm',
    'PSOResult',
    'pso_search',
    'pso_refine',
    'TuningConfig',
    'TuningReport',
    'tune',
    'optimize_hyperparams',
    'DEFAULT_SPLIT',
    'make_windows',
    'ForecastPipeline',
    'forecast_sliding',
    'error_metrics',
    'read_series',
    'write_series',
    'synthetic_load'
]
