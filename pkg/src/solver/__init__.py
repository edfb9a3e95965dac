"""
Module Solver - Programmes coniques, projections et moteur ADMM
"""

from .cones import (
    project_soc,
    project_soc_batch,
    project_psd,
    project_psd_batch,
    rank1_gap,
    svec,
    smat,
    svec_dim,
    hermitian_embed
)
from .program import ConicProgram, ConeBlock, ProgramBuilder, SOC, PSD
from .admm import ADMMParams, ADMMState, Solution, ADMMSolver, admm_solve

__all__ = [
    'project_soc',
    'project_soc_batch',
    'project_psd',
    'project_psd_batch',
    'rank1_gap',
    'svec',
    'smat',
    'svec_dim',
    'hermitian_embed',
    'ConicProgram',
    'ConeBlock',
    'ProgramBuilder',
    'SOC',
    'PSD',
    'ADMMParams',
    'ADMMState',
    'Solution',
    'ADMMSolver',
    'admm_solve'
]
