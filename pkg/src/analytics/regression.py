"""
Module Analytics - Régression linéaire multivariée (OLS / FGLS)

Ce module implémente:
- La normalisation min-max des données
- L'estimation par moindres carrés ordinaires (OLS)
- L'estimation par moindres carrés généralisés faisables (FGLS) :
  OLS, régression de log(e² + plancher) sur X, puis WLS de poids 1/σ̂²
- L'identification de la variable dominante et la comparaison
  original / normalisé des erreurs quadratiques
- La lecture du CSV t,y,x1..xk et l'écriture du rapport JSON
"""

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import pandas as pd
import statsmodels.api as sm

from ..core.errors import MissingInputError, ParseError, SingularityError, ValidationError
from ..core.rng import substream

LOG_FLOOR = 1e-12
CONDITION_LIMIT = 1e12
METHODS = ('OLS', 'FGLS')


@dataclass
class RegressionData:
    """Réponse Y_t et variables explicatives X_t^i"""
    y: np.ndarray
    x: np.ndarray
    labels: List[str] = field(default_factory=list)

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float).ravel()
        self.x = np.asarray(self.x, dtype=float)
        if self.x.ndim == 1:
            self.x = self.x.reshape(-1, 1)
        if len(self.y) != len(self.x):
            raise ValidationError(f"longueurs différentes: y={len(self.y)}, X={len(self.x)}")
        if not (np.all(np.isfinite(self.y)) and np.all(np.isfinite(self.x))):
            raise ValidationError("valeurs non finies dans les données de régression")
        if not self.labels:
            self.labels = [f"x{i + 1}" for i in range(self.x.shape[1])]
        if len(self.labels) != self.x.shape[1]:
            raise ValidationError("nombre d'étiquettes différent du nombre de colonnes")

    @property
    def n_obs(self) -> int:
        return len(self.y)

    def design(self) -> np.ndarray:
        """Matrice [1, X]"""
        return sm.add_constant(self.x, has_constant='add')

    def normalized(self) -> 'RegressionData':
        """Y et X ramenés dans [0, 1] colonne par colonne"""
        y = normalize_minmax(self.y.reshape(-1, 1)).ravel()
        return RegressionData(y, normalize_minmax(self.x), list(self.labels))

    def to_frame(self) -> pd.DataFrame:
        df = pd.DataFrame(self.x, columns=self.labels)
        df.insert(0, 'y', self.y)
        df.insert(0, 't', np.arange(self.n_obs))
        return df


@dataclass
class RegressionFit:
    """
    Coefficients estimés et erreur quadratique

    squared_error est la somme des carrés des résidus sur l'échelle de Y ;
    weighted_squared_error la pondère par les poids normalisés (égales en OLS)
    """
    method: str
    coefficients: Dict[str, float]
    intercept: float
    squared_error: float
    weighted_squared_error: float
    weights: np.ndarray
    fitted: np.ndarray
    residuals: np.ndarray

    def to_dict(self) -> Dict:
        return {
            'method': self.method,
            'intercept': self.intercept,
            'coefficients': dict(self.coefficients),
            'squared_error': self.squared_error,
            'weighted_squared_error': self.weighted_squared_error,
            'n_obs': int(len(self.fitted))
        }


def normalize_minmax(data):
    """
    (v − min) / (max − min) par colonne ; une colonne constante devient 0

    Args:
        data: Tableau 1-D/2-D ou DataFrame

    Returns:
        Même type que l'entrée
    """
    if isinstance(data, pd.DataFrame):
        return pd.DataFrame(normalize_minmax(data.values), index=data.index,
                            columns=data.columns)
    arr = np.asarray(data, dtype=float)
    flat = arr.ndim == 1
    arr2 = arr.reshape(-1, 1) if flat else arr
    lo = arr2.min(axis=0)
    span = arr2.max(axis=0) - lo
    constant = span == 0
    if constant.any():
        warnings.warn(f"{int(constant.sum())} colonne(s) constante(s) ramenée(s) à 0")
    out = np.where(constant, 0.0, (arr2 - lo) / np.where(constant, 1.0, span))
    return out.ravel() if flat else out


def _check_rank(design: np.ndarray):
    rank = np.linalg.matrix_rank(design)
    if rank < design.shape[1]:
        raise SingularityError(f"X de rang {rank} < {design.shape[1]} colonnes")
    if np.linalg.cond(design) > CONDITION_LIMIT:
        raise SingularityError("X mal conditionnée")


def _make_fit(method: str, d: RegressionData, params: np.ndarray,
              weights: np.ndarray) -> RegressionFit:
    design = d.design()
    fitted = design @ params
    resid = d.y - fitted
    w = weights / weights.mean()
    return RegressionFit(
        method=method,
        coefficients={label: float(b) for label, b in zip(d.labels, params[1:])},
        intercept=float(params[0]),
        squared_error=float(np.sum(resid ** 2)),
        weighted_squared_error=float(np.sum(w * resid ** 2)),
        weights=w,
        fitted=fitted,
        residuals=resid
    )


def ols_fit(d: RegressionData) -> RegressionFit:
    """
    Moindres carrés ordinaires avec constante

    Raises:
        SingularityError: X de rang déficient
    """
    design = d.design()
    _check_rank(design)
    res = sm.OLS(d.y, design).fit()
    return _make_fit('OLS', d, np.asarray(res.params), np.ones(d.n_obs))


def fgls_fit(d: RegressionData) -> RegressionFit:
    """
    FGLS en deux étapes à fonction de variance log-linéaire

    1. OLS, résidus e
    2. OLS de log(e² + 1e-12) sur [1, X] ; σ̂² = exp(valeurs ajustées)
    3. WLS de poids 1/σ̂²

    Raises:
        SingularityError: X de rang déficient
    """
    design = d.design()
    _check_rank(design)
    stage1 = sm.OLS(d.y, design).fit()
    skedastic = sm.OLS(np.log(stage1.resid ** 2 + LOG_FLOOR), design).fit()
    sigma2 = np.exp(skedastic.fittedvalues)
    weights = 1.0 / sigma2
    stage3 = sm.WLS(d.y, design, weights=weights).fit()
    return _make_fit('FGLS', d, np.asarray(stage3.params), weights)


def fit(d: RegressionData, method: str = 'FGLS') -> RegressionFit:
    if method not in METHODS:
        raise ValidationError(f"méthode inconnue: {method}")
    return ols_fit(d) if method == 'OLS' else fgls_fit(d)


def dominant_variable(fit_result: RegressionFit) -> str:
    """Étiquette du plus grand |coefficient| (première en cas d'égalité)"""
    labels = list(fit_result.coefficients)
    values = np.abs([fit_result.coefficients[k] for k in labels])
    return labels[int(np.argmax(values))]


def compare_scaling(d: RegressionData) -> pd.DataFrame:
    """
    Erreurs quadratiques OLS / FGLS sur données originales et normalisées

    Returns:
        DataFrame method,scaling,squared_error,weighted_squared_error,dominant
    """
    rows = []
    for scaling, data in (('original', d), ('normalized', d.normalized())):
        for method in METHODS:
            res = fit(data, method)
            rows.append({'method': method, 'scaling': scaling,
                         'squared_error': res.squared_error,
                         'weighted_squared_error': res.weighted_squared_error,
                         'dominant': dominant_variable(res)})
    return pd.DataFrame(rows)


def read_regression_csv(path: Union[str, Path]) -> RegressionData:
    """Lit un CSV t,y,x1..xk"""
    path = Path(path)
    if not path.exists():
        raise MissingInputError(str(path))
    try:
        df = pd.read_csv(path, comment='#')
    except pd.errors.ParserError as e:
        raise ParseError(str(path), 0, str(e))
    cols = list(df.columns)
    if len(cols) < 3 or cols[:2] != ['t', 'y']:
        raise ParseError(str(path), 1, "en-tête attendu t,y,x1..xk")
    bad = df.apply(pd.to_numeric, errors='coerce').isna().any(axis=1)
    if bad.any():
        raise ParseError(str(path), int(np.argmax(bad.values)) + 2, "valeur non numérique")
    return RegressionData(df['y'].values, df[cols[2:]].values, cols[2:])


def write_fit_report(fits: List[RegressionFit], path: Union[str, Path],
                     extra: Optional[Dict] = None):
    """Rapport JSON {fits: [...], ...}"""
    report = {'fits': [f.to_dict() for f in fits]}
    if fits:
        report['dominant'] = {f.method: dominant_variable(f) for f in fits}
    report.update(extra or {})
    Path(path).write_text(json.dumps(report, indent=2), encoding='utf-8')


def synthetic_regression(n: int = 500, seed: int = 0, heteroscedastic: bool = True,
                         noise: float = 0.05) -> RegressionData:
    """
    Jeu de type consommation HVAC à 5 variables : température extérieure,
    humidité, occupation, ensoleillement, consigne ; la consigne (x4)
    porte le plus grand coefficient

    Avec heteroscedastic, l'écart-type du bruit croît avec la température.
    """
    rng = substream(seed, "analytics/synthetic")
    x = rng.uniform(0.0, 1.0, size=(n, 5))
    beta = np.array([0.08, 0.03, 0.12, 0.05, 0.17])
    scale = noise * (0.1 + 3.0 * x[:, 0] ** 2) if heteroscedastic else np.full(n, noise)
    y = 0.2 + x @ beta + scale * rng.standard_normal(n)
    labels = ['outdoor_temp', 'humidity', 'occupancy', 'setpoint', 'solar']
    # Colonnes 4 et 5 échangées : la consigne est la 4e variable
    x = x[:, [0, 1, 2, 4, 3]]
    return RegressionData(y, x, labels)
