"""
Module Forecast - Prévision à fenêtre glissante

Ce module implémente:
- Le pipeline autorégressif : fenêtres de retards différenciées par
  rapport au dernier niveau et normalisées par l'échelle des incréments
- La prévision récursive à plusieurs pas pour chaque origine admissible
- Les métriques MAPE / NRMSE
- La lecture/écriture des séries temporelles (timestamp ISO-8601)
"""

import warnings
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd
from dateutil import parser as date_parser

from .svr import HyperParams, SVRModel, train_svr, predict_many
from ..core.errors import InputError, MissingInputError, ParseError

DEFAULT_TRAIN_SHARE = 5.0 / 6.0


def make_windows(values: np.ndarray, window: int, scale: float = 1.0,
                 differenced: bool = True) -> Tuple[np.ndarray, np.ndarray]:
    """
    Paires (fenêtre, cible) : pour chaque t ≥ window,
    x = (s[t−w:t] − s[t−1]) / scale, y = (s[t] − s[t−1]) / scale
    """
    values = np.asarray(values, dtype=float)
    n = len(values)
    if window < 1 or n <= window:
        raise InputError(f"fenêtre {window} incompatible avec {n} échantillons")
    idx = np.arange(window, n)
    windows = np.stack([values[t - window:t] for t in idx])
    if not differenced:
        return windows, values[idx]
    last = windows[:, -1:]
    return (windows - last) / scale, (values[idx] - last[:, 0]) / scale


class ForecastPipeline:
    """
    Prévisionneur SVR sur fenêtres de retards
    """

    def __init__(self, window: int, hyper: HyperParams, differenced: bool = True):
        """
        Args:
            window: Nombre d'échantillons passés utilisés comme caractéristiques
            hyper: Hyper-paramètres de la SVR
            differenced: Caractéristiques relatives au dernier niveau
        """
        if window < 1:
            raise InputError(f"fenêtre invalide: {window}")
        self.window = window
        self.hyper = hyper
        self.differenced = differenced
        self.scale = 1.0
        self.model: Optional[SVRModel] = None

    @classmethod
    def from_model(cls, model: SVRModel) -> 'ForecastPipeline':
        """Pipeline sur fenêtres brutes autour d'un modèle déjà entraîné"""
        pipeline = cls(model.n_features, model.hyper, differenced=False)
        pipeline.model = model
        return pipeline

    @property
    def fitted(self) -> bool:
        return self.model is not None

    def training_set(self, values) -> Tuple[np.ndarray, np.ndarray]:
        values = np.asarray(values, dtype=float)
        if self.differenced:
            steps = np.diff(values)
            spread = float(np.std(steps)) if len(steps) else 0.0
            self.scale = spread if spread > 0 else 1.0
        return make_windows(values, self.window, self.scale, self.differenced)

    def fit(self, values) -> 'ForecastPipeline':
        x, y = self.training_set(values)
        self.model = train_svr(x, y, self.hyper)
        return self

    def predict_path(self, history, horizon: int) -> np.ndarray:
        """Prévision récursive des horizon pas suivant history"""
        if not self.fitted:
            raise InputError("pipeline non entraîné")
        buf = list(np.asarray(history, dtype=float)[-self.window:])
        if len(buf) < self.window:
            raise InputError("historique plus court que la fenêtre")
        out = []
        for _ in range(horizon):
            w = np.array(buf[-self.window:])
            if self.differenced:
                step = predict_many(self.model, ((w - w[-1]) / self.scale).reshape(1, -1))[0]
                nxt = w[-1] + step * self.scale
            else:
                nxt = predict_many(self.model, w.reshape(1, -1))[0]
            out.append(float(nxt))
            buf.append(float(nxt))
        return np.array(out)


def forecast_sliding(m_or_pipeline: Union[SVRModel, ForecastPipeline],
                     series: pd.Series, horizon: int = 1,
                     window: Optional[int] = None,
                     start: Optional[int] = None) -> pd.DataFrame:
    """
    Prévisions à horizon pas pour chaque origine admissible

    Un pipeline non entraîné est ajusté sur les start premiers échantillons
    (par défaut 5/6 de la série) ; les origines couvrent alors la suite.

    Args:
        m_or_pipeline: Modèle SVR (fenêtres brutes) ou ForecastPipeline
        series: Série indexée par horodatage
        horizon: Nombre de pas prévus par origine
        window: Taille de fenêtre (doit égaler celle du pipeline si fournie)
        start: Indice de la première origine

    Returns:
        DataFrame origin,horizon_step,predicted,actual

    Raises:
        InputError: fenêtre ≥ longueur de la série
    """
    pipeline = (ForecastPipeline.from_model(m_or_pipeline)
                if isinstance(m_or_pipeline, SVRModel) else m_or_pipeline)
    window = window or pipeline.window
    if window != pipeline.window:
        raise InputError(f"fenêtre {window} différente de celle du pipeline ({pipeline.window})")
    if horizon < 1:
        raise InputError(f"horizon invalide: {horizon}")
    values = np.asarray(series, dtype=float)
    n = len(values)
    if window >= n:
        raise InputError(f"fenêtre {window} ≥ longueur de la série ({n})")

    if not pipeline.fitted:
        train_end = start if start is not None else int(n * DEFAULT_TRAIN_SHARE)
        if train_end <= window + 1:
            raise InputError("trop peu d'échantillons d'entraînement")
        pipeline.fit(values[:train_end])
        start = train_end
    start = max(window, start if start is not None else window)

    index = series.index if isinstance(series, pd.Series) else pd.RangeIndex(n)
    rows = []
    for origin in range(start, n - horizon + 1):
        path = pipeline.predict_path(values[:origin], horizon)
        for step in range(1, horizon + 1):
            rows.append({
                'origin': index[origin - 1],
                'horizon_step': step,
                'predicted': path[step - 1],
                'actual': values[origin + step - 1]
            })
    return pd.DataFrame(rows, columns=['origin', 'horizon_step', 'predicted', 'actual'])


def error_metrics(pred, actual) -> Tuple[float, float, int]:
    """
    MAPE et NRMSE (normalisé par l'étendue des valeurs réelles), en %

    Returns:
        (mape, nrmse, nombre de termes MAPE ignorés car actual = 0)
    """
    pred = np.asarray(pred, dtype=float)
    actual = np.asarray(actual, dtype=float)
    if pred.shape != actual.shape or len(actual) == 0:
        raise InputError("prévisions et valeurs réelles de tailles différentes")
    nonzero = actual != 0
    skipped = int((~nonzero).sum())
    if skipped:
        warnings.warn(f"{skipped} valeurs réelles nulles ignorées dans le MAPE")
    mape = (float(np.mean(np.abs((pred[nonzero] - actual[nonzero]) / actual[nonzero]))) * 100
            if nonzero.any() else float('nan'))
    rmse = float(np.sqrt(np.mean((pred - actual) ** 2)))
    spread = float(actual.max() - actual.min())
    if spread > 0:
        nrmse = rmse / spread * 100
    else:
        level = float(np.mean(np.abs(actual)))
        nrmse = rmse / level * 100 if level > 0 else (0.0 if rmse == 0 else float('nan'))
    return mape, nrmse, skipped


def read_series(path: Union[str, Path]) -> pd.Series:
    """
    Lit un CSV timestamp,value (horodatages ISO-8601)

    Raises:
        MissingInputError, ParseError
    """
    path = Path(path)
    if not path.exists():
        raise MissingInputError(str(path))
    df = pd.read_csv(path, comment='#', dtype=str)
    if list(df.columns) != ['timestamp', 'value']:
        raise ParseError(str(path), 1, "en-tête attendu timestamp,value")
    stamps, values = [], []
    for row, rec in enumerate(df.itertuples(index=False), start=2):
        try:
            stamps.append(date_parser.isoparse(rec.timestamp.strip()))
        except (ValueError, AttributeError):
            raise ParseError(str(path), row, f"horodatage invalide {rec.timestamp!r}")
        try:
            values.append(float(rec.value))
        except (TypeError, ValueError):
            raise ParseError(str(path), row, f"valeur invalide {rec.value!r}")
        if not np.isfinite(values[-1]):
            raise ParseError(str(path), row, "valeur non finie")
    return pd.Series(values, index=pd.DatetimeIndex(stamps), name='value')


def write_series(series: pd.Series, path: Union[str, Path]):
    """Écrit une série au format timestamp,value"""
    pd.DataFrame({'timestamp': [pd.Timestamp(t).isoformat() for t in series.index],
                  'value': series.values}).to_csv(path, index=False)
