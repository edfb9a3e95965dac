"""
Module Reconfig - Flux de branche, OPF équilibré relaxé et reconfiguration
"""

from .branch_flow import build_branch_flow, relaxation_gaps, loads_from_network, loads_from_kw
from .power_flow import sweep_power_flow, PowerFlowResult
from .balanced import (
    build_balanced_bfm,
    solve_balanced_opf,
    OPFResultBalanced,
    EXACT_TOL
)
from .reconfigure import (
    evaluate_config,
    reconfigure,
    forecast_loads,
    scaled_loads,
    ConfigEvaluation,
    LoadForecast,
    ReconfigReport,
    DEFAULT_RECONFIG_PARAMS
)

__all__ = [
    'build_branch_flow',
    'relaxation_gaps',
    'loads_from_network',
    'loads_from_kw',
    'sweep_power_flow',
    'PowerFlowResult',
    'build_balanced_bfm',
    'solve_balanced_opf',
    'OPFResultBalanced',
    'EXACT_TOL',
    'evaluate_config',
    'reconfigure',
    'forecast_loads',
    'scaled_loads',
    'ConfigEvaluation',
    'LoadForecast',
    'ReconfigReport',
    'DEFAULT_RECONFIG_PARAMS'
]
