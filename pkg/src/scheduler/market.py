"""
Module Scheduler - Données de marché et prévisions horaires

Ce module implémente:
- Les prix horaires (day-ahead, temps réel, réserve renouvelable, revente)
- Les prévisions horaires de production renouvelable et de charge avec
  leurs modèles d'erreur
- Les paramètres de probabilité des contraintes en chance
- La lecture/écriture des CSV de prix et de prévisions
- Une journée synthétique "vent la nuit / soleil le jour"
"""

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd

from ..core.errors import ConfigError, MissingInputError, ParseError, ValidationError
from ..core.rng import substream
from ..uncertainty.gmm import GMMModel, project

PRICE_COLUMNS = ['hour', 'rho_da', 'rho_rt', 'rho_r', 'rho_s']
FORECAST_COLUMNS = ['hour', 'g_r', 'g_dl']
QUANTILE_SOURCES = ('mixture', 'normal')


@dataclass
class MarketPrices:
    """Prix horaires en $/kWh : ϱ_DA, ϱ_RT, ϱ_R, ϱ_s"""
    rho_da: np.ndarray
    rho_rt: np.ndarray
    rho_r: np.ndarray
    rho_s: np.ndarray

    def __post_init__(self):
        for name in ('rho_da', 'rho_rt', 'rho_r', 'rho_s'):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float).ravel())
        n = len(self.rho_da)
        if any(len(a) != n for a in (self.rho_rt, self.rho_r, self.rho_s)) or n == 0:
            raise ValidationError("séries de prix de longueurs différentes")
        ordered = ((self.rho_s < self.rho_r) & (self.rho_r < self.rho_da)
                   & (self.rho_da < self.rho_rt))
        if not ordered.all():
            hour = int(np.argmin(ordered))
            raise ValidationError(f"heure {hour}: ordre ϱ_s < ϱ_R < ϱ_DA < ϱ_RT non respecté")

    @property
    def horizon(self) -> int:
        return len(self.rho_da)

    def at(self, t: int) -> Tuple[float, float, float, float]:
        """(ϱ_DA, ϱ_RT, ϱ_R, ϱ_s) pour l'heure t"""
        return (float(self.rho_da[t]), float(self.rho_rt[t]),
                float(self.rho_r[t]), float(self.rho_s[t]))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'hour': np.arange(self.horizon), 'rho_da': self.rho_da,
                             'rho_rt': self.rho_rt, 'rho_r': self.rho_r, 'rho_s': self.rho_s})


@dataclass
class ForecastInputs:
    """
    Prévisions horaires (kWh) et modèles d'erreur relative

    error_model_r est un GMM sur G_err1, soit 1-D (commun à toutes les
    heures), soit de dimension T (une coordonnée par heure).
    error_model_l est le couple (μ₂, σ₂²) de l'erreur de charge G_err2.
    """
    g_r_forecast: np.ndarray
    g_dl_forecast: np.ndarray
    error_model_r: GMMModel
    error_model_l: Tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        self.g_r_forecast = np.asarray(self.g_r_forecast, dtype=float).ravel()
        self.g_dl_forecast = np.asarray(self.g_dl_forecast, dtype=float).ravel()
        if len(self.g_r_forecast) != len(self.g_dl_forecast):
            raise ValidationError("prévisions renouvelable/charge de longueurs différentes")
        if np.any(self.g_r_forecast < 0) or np.any(self.g_dl_forecast < 0):
            raise ValidationError("prévisions négatives")
        if self.error_model_r.dim not in (1, self.horizon):
            raise ValidationError(
                f"modèle d'erreur de dimension {self.error_model_r.dim} pour {self.horizon} heures")
        mean, var = self.error_model_l
        if var < 0:
            raise ValidationError(f"variance d'erreur de charge négative: {var}")
        self.error_model_l = (float(mean), float(var))

    @property
    def horizon(self) -> int:
        return len(self.g_dl_forecast)

    @property
    def load_error_std(self) -> float:
        return float(np.sqrt(self.error_model_l[1]))

    def renewable_error(self, t: int) -> GMMModel:
        """Modèle 1-D de l'erreur renouvelable à l'heure t"""
        if self.error_model_r.dim == 1:
            return self.error_model_r
        w = np.zeros(self.horizon)
        w[t] = 1.0
        return project(self.error_model_r, w)

    def with_error_model(self, model: GMMModel) -> 'ForecastInputs':
        return replace(self, error_model_r=model)

    def check_prices(self, prices: MarketPrices):
        if prices.horizon != self.horizon:
            raise ValidationError(
                f"horizon des prix ({prices.horizon}) différent des prévisions ({self.horizon})")


@dataclass
class ChanceParams:
    """
    Probabilités des contraintes en chance

    Attributes:
        gamma: Pr(G_DL ≤ G_DA + G_W) ≥ γ
        alpha: Pr(ρ·G_R1 ≤ G_W) ≥ α
        renewable_share: ρ
        r1_fraction: Part du renouvelable affectée au niveau poste (G_R1)
        quantile_source: "mixture" (quantile exact du GMM) ou "normal"
            (Φ⁻¹ sur les moments du GMM)
    """
    gamma: float = 0.97
    alpha: float = 0.95
    renewable_share: float = 0.9
    r1_fraction: float = 0.975
    quantile_source: str = 'mixture'

    def __post_init__(self):
        for name in ('gamma', 'alpha'):
            value = getattr(self, name)
            if not 0.5 <= value < 1:
                raise ConfigError(f"{name} hors de [0.5, 1): {value}")
        if not 0 < self.renewable_share < 1:
            raise ConfigError(f"renewable_share hors de ]0, 1[: {self.renewable_share}")
        if not 0 < self.r1_fraction <= 1:
            raise ConfigError(f"r1_fraction hors de ]0, 1]: {self.r1_fraction}")
        if self.quantile_source not in QUANTILE_SOURCES:
            raise ConfigError(f"source de quantile inconnue: {self.quantile_source}")


@dataclass
class ScheduleOptions:
    """
    Options de résolution horaire

    da_max None : borne supérieure prise au-delà de la charge la plus
    probable (μ₂ + 6σ₂), zone où acheter davantage ne peut que coûter.
    """
    use_ca: bool = True
    n_samples: int = 2000
    seed: int = 0
    grid_points: int = 200
    search_tol: float = 1e-3
    da_min: float = 0.0
    da_max: Optional[float] = None
    gw_max: Optional[float] = None
    workers: Optional[int] = 1

    def __post_init__(self):
        if self.n_samples < 1 or self.grid_points < 3:
            raise ConfigError("n_samples ≥ 1 et grid_points ≥ 3 requis")
        if self.da_min < 0 or (self.da_max is not None and self.da_max < 0):
            raise ConfigError("bornes day-ahead négatives")
        if self.search_tol <= 0:
            raise ConfigError(f"tolérance de recherche invalide: {self.search_tol}")

    def without_ca(self) -> 'ScheduleOptions':
        return replace(self, use_ca=False)


def _read_table(path: Union[str, Path], columns) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise MissingInputError(str(path))
    try:
        df = pd.read_csv(path, comment='#', dtype=str, keep_default_na=False)
    except pd.errors.ParserError as e:
        raise ParseError(str(path), 0, str(e))
    if list(df.columns) != columns:
        raise ParseError(str(path), 1, f"en-tête attendu {','.join(columns)}")
    out = {}
    for col in columns:
        values = []
        for row, raw in enumerate(df[col], start=2):
            try:
                value = float(raw)
            except (TypeError, ValueError):
                raise ParseError(str(path), row, f"{col} invalide {raw!r}")
            if not np.isfinite(value):
                raise ParseError(str(path), row, f"{col} non fini")
            values.append(value)
        out[col] = np.array(values)
    hours = out['hour']
    if len(hours) == 0 or np.any(np.diff(hours) != 1):
        raise ParseError(str(path), 2, "heures non consécutives")
    return pd.DataFrame(out)


def read_prices(path: Union[str, Path]) -> MarketPrices:
    """Lit un CSV hour,rho_da,rho_rt,rho_r,rho_s"""
    df = _read_table(path, PRICE_COLUMNS)
    return MarketPrices(df['rho_da'].values, df['rho_rt'].values,
                        df['rho_r'].values, df['rho_s'].values)


def write_prices(prices: MarketPrices, path: Union[str, Path]):
    prices.to_frame().to_csv(path, index=False)


def read_forecasts(path: Union[str, Path]) -> Tuple[np.ndarray, np.ndarray]:
    """Lit un CSV hour,g_r,g_dl et rend (G_f^R, G_f^DL)"""
    df = _read_table(path, FORECAST_COLUMNS)
    if (df[['g_r', 'g_dl']] < 0).any().any():
        raise ValidationError(f"{path}: prévisions négatives")
    return df['g_r'].values, df['g_dl'].values


def write_forecasts(g_r, g_dl, path: Union[str, Path]):
    pd.DataFrame({'hour': np.arange(len(g_dl)), 'g_r': g_r, 'g_dl': g_dl}).to_csv(
        path, index=False)


def default_renewable_error() -> GMMModel:
    """Erreur relative renouvelable trimodale"""
    return GMMModel([0.6, 0.25, 0.15], [[0.0], [-0.12], [0.1]],
                    [[[0.05 ** 2]], [[0.06 ** 2]], [[0.04 ** 2]]])


def synthetic_day(seed: int = 0, peak_load_kwh: float = 1000.0,
                  wind_kwh: float = 900.0, solar_kwh: float = 600.0,
                  ) -> Tuple[MarketPrices, np.ndarray, np.ndarray]:
    """
    Journée de 24 h : vent fort la nuit (surplus), pic solaire à midi,
    creux renouvelable en début d'après-midi, pointe de charge le soir

    Returns:
        (prix, G_f^R, G_f^DL)
    """
    rng = substream(seed, "scheduler/synthetic")
    hours = np.arange(24)
    load = peak_load_kwh * (0.55 + 0.3 * np.exp(-((hours - 19) / 3.0) ** 2)
                            + 0.15 * np.exp(-((hours - 9) / 2.5) ** 2))
    load *= 1.0 + 0.02 * rng.standard_normal(24)
    wind = wind_kwh * np.where((hours < 6) | (hours >= 22), 1.0, 0.15)
    solar = solar_kwh * np.clip(np.sin(np.pi * (hours - 6) / 12.0), 0, None)
    # Passage nuageux : 13 h et 14 h sans surplus
    solar[13:15] *= 0.2
    renewable = wind + solar
    rho_da = 0.06 + 0.03 * np.exp(-((hours - 18) / 3.0) ** 2) + 0.01 * np.sin(np.pi * hours / 12)
    prices = MarketPrices(rho_da=rho_da, rho_rt=1.6 * rho_da,
                          rho_r=0.6 * rho_da, rho_s=0.3 * rho_da)
    return prices, renewable, load
