"""
Module Uncertainty - Modélisation des erreurs de prévision (GSM, GMM, GAEM, η)
"""

from .gmm import (
    GMMModel,
    EMConfig,
    normal_model,
    log_likelihood,
    free_parameters,
    mdl_score,
    initial_model,
    em_fit,
    fit_single_gaussian,
    sample,
    mixture_cdf,
    mixture_pdf,
    mixture_quantile,
    moment_match,
    project,
    model_to_json,
    model_from_json,
    save_model,
    load_model
)
from .gaem import GAEMConfig, GAEMResult, crossover, mutate, gaem_search, gaem_fit, mdl_scan
from .eta import envelopes, residual_deviation, eta_ratio, DEFAULT_BINS

__all__ = [
    'GMMModel',
    'EMConfig',
    'normal_model',
    'log_likelihood',
    'free_parameters',
    'mdl_score',
    'initial_model',
    'em_fit',
    'fit_single_gaussian',
    'sample',
    'mixture_cdf',
    'mixture_pdf',
    'mixture_quantile',
    'moment_match',
    'project',
    'model_to_json',
    'model_from_json',
    'save_model',
    'load_model',
    'GAEMConfig',
    'GAEMResult',
    'crossover',
    'mutate',
    'gaem_search',
    'gaem_fit',
    'mdl_scan',
    'envelopes',
    'residual_deviation',
    'eta_ratio',
    'DEFAULT_BINS'
]
