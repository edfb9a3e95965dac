"""
Module Analytics - Régression OLS/FGLS, statistiques et visualisation
"""

from .regression import (
    RegressionData,
    RegressionFit,
    normalize_minmax,
    ols_fit,
    fgls_fit,
    fit,
    dominant_variable,
    compare_scaling,
    read_regression_csv,
    write_fit_report,
    synthetic_regression
)
from .statistics import ConfidenceInterval, Visualizer

__all__ = [
    'RegressionData',
    'RegressionFit',
    'normalize_minmax',
    'ols_fit',
    'fgls_fit',
    'fit',
    'dominant_variable',
    'compare_scaling',
    'read_regression_csv',
    'write_fit_report',
    'synthetic_regression',
    'ConfidenceInterval',
    'Visualizer'
]
