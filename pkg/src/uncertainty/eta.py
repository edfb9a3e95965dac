"""
Ratio de déviation résiduelle η entre la densité ajustée et l'enveloppe
de l'histogramme des erreurs observées.
"""

from typing import Tuple

import numpy as np

from .gmm import GMMModel, mixture_pdf
from ..core.errors import ConfigError, PreconditionError

DEFAULT_BINS = 100
MIN_BINS = 10
MIN_SAMPLES = 100


def envelopes(fitted: GMMModel, data, bins: int = DEFAULT_BINS
              ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Enveloppes observée et ajustée sur bins intervalles égaux entre min et max

    Returns:
        (centres, enveloppe observée, enveloppe ajustée), toutes deux d'aire 1
    """
    if bins < MIN_BINS:
        raise ConfigError(f"{bins} intervalles (minimum {MIN_BINS})")
    data = np.asarray(data, dtype=float).ravel()
    if len(data) < MIN_SAMPLES:
        raise PreconditionError(f"{len(data)} échantillons (minimum {MIN_SAMPLES})")
    lo, hi = float(data.min()), float(data.max())
    if hi <= lo:
        hi = lo + 1.0
    observed, edges = np.histogram(data, bins=bins, range=(lo, hi), density=True)
    centers = 0.5 * (edges[:-1] + edges[1:])
    width = edges[1] - edges[0]
    density = mixture_pdf(fitted, centers)
    area = density.sum() * width
    fitted_env = density / area if area > 0 else density
    return centers, observed, fitted_env


def residual_deviation(fitted_env, observed_env) -> float:
    """Σ(∇_d − ∇_org)² / Σ∇_org² × 100"""
    fitted_env = np.asarray(fitted_env, dtype=float)
    observed_env = np.asarray(observed_env, dtype=float)
    denom = float(np.sum(observed_env ** 2))
    if denom == 0:
        raise PreconditionError("enveloppe observée nulle")
    return float(np.sum((fitted_env - observed_env) ** 2) / denom * 100.0)


def eta_ratio(fitted: GMMModel, data, bins: int = DEFAULT_BINS) -> float:
    """
    η en pourcentage pour un modèle 1-D

    Raises:
        ConfigError: moins de 10 intervalles
        PreconditionError: moins de 100 échantillons
    """
    _, observed, fitted_env = envelopes(fitted, data, bins)
    return residual_deviation(fitted_env, observed)
