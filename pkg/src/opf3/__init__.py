"""
Module OPF3 - OPF triphasé déséquilibré (relaxation SDP par phase)
"""

from .unbalanced import (
    OPF3Result,
    ExactnessReport,
    build_unbalanced_bfm,
    solve_unbalanced_opf,
    line_loss,
    exactness_report,
    no_opf_loss_kwh,
    headroom_map,
    EXACT_TOL,
    DEFAULT_INTERVAL_MIN,
    DEFAULT_HEADROOM_SHARE
)

__all__ = [
    'OPF3Result',
    'ExactnessReport',
    'build_unbalanced_bfm',
    'solve_unbalanced_opf',
    'line_loss',
    'exactness_report',
    'no_opf_loss_kwh',
    'headroom_map',
    'EXACT_TOL',
    'DEFAULT_INTERVAL_MIN',
    'DEFAULT_HEADROOM_SHARE'
]
