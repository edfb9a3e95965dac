"""
Générateur de charge synthétique : sinusoïde journalière, tendance
hebdomadaire et bruit multiplicatif.
"""

import numpy as np
import pandas as pd

from ..core.rng import substream


def synthetic_load(days: int = 14, resolution_min: int = 60, base_kw: float = 1000.0,
                   daily_amplitude: float = 0.25, weekly_amplitude: float = 0.08,
                   noise: float = 0.03, seed: int = 0,
                   start: str = "2024-06-03T00:00:00") -> pd.Series:
    """
    Série de charge (kW) indexée par horodatage

    Args:
        days: Nombre de jours
        resolution_min: Pas de temps (min)
        base_kw: Niveau moyen
        daily_amplitude: Amplitude relative du cycle journalier
        weekly_amplitude: Amplitude relative du cycle hebdomadaire
        noise: Écart-type relatif du bruit
        seed: Graine racine
    """
    steps_per_day = 24 * 60 // resolution_min
    n = days * steps_per_day
    t_hours = np.arange(n) * resolution_min / 60.0
    daily = daily_amplitude * np.sin(2 * np.pi * (t_hours - 9.0) / 24.0)
    weekly = weekly_amplitude * np.sin(2 * np.pi * t_hours / (24.0 * 7.0))
    rng = substream(seed, "forecast/synthetic")
    level = base_kw * (1.0 + daily + weekly)
    values = level * (1.0 + noise * rng.standard_normal(n))
    index = pd.date_range(start=start, periods=n, freq=f"{resolution_min}min")
    return pd.Series(values, index=index, name='value')
