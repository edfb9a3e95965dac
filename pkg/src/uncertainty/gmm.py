"""
Module Uncertainty - Mélanges gaussiens et algorithme EM

Ce module implémente:
- Le modèle GMM (poids, moyennes, covariances) et sa validation
- La log-vraisemblance stabilisée (log-sum-exp)
- L'ajustement EM à K composantes (initialisation de type k-means++,
  covariances à valeurs propres planchers, ré-ensemencement des
  composantes vides)
- Le critère MDL, l'échantillonnage, la CDF et les quantiles d'un
  mélange 1-D, l'appariement des moments et la projection wᵀX
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp
from scipy.stats import multivariate_normal, norm

from ..core.errors import ConfigError, PreconditionError, ValidationError, MissingInputError
from ..core.rng import substream
from ..core.simulation_engine import EventLogger, EventType

WEIGHT_TOL = 1e-9
EMPTY_MASS = 1e-8


def as_samples(data) -> np.ndarray:
    """Données (M,) ou (M, q) -> (M, q)"""
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data.reshape(-1, 1)
    if data.ndim != 2 or len(data) == 0:
        raise ValidationError(f"échantillons de forme invalide {data.shape}")
    return data


def covariance_floor(data: np.ndarray, relative: float) -> float:
    """Plancher des valeurs propres : relative × variance moyenne des données"""
    var = float(np.mean(np.var(data, axis=0)))
    return relative * (var if var > 0 else 1.0)


def floor_covariance(cov: np.ndarray, floor: float) -> np.ndarray:
    """Valeurs propres ramenées au-dessus du plancher"""
    cov = 0.5 * (cov + cov.T)
    w, v = np.linalg.eigh(cov)
    if w.min() >= floor:
        return cov
    w = np.maximum(w, floor)
    return (v * w) @ v.T


@dataclass
class GMMModel:
    """Mélange gaussien : poids ε_n, moyennes μ_n, covariances Σ_n"""
    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float).ravel()
        self.means = np.asarray(self.means, dtype=float).reshape(len(self.weights), -1)
        q = self.means.shape[1]
        self.covariances = np.asarray(self.covariances, dtype=float).reshape(
            len(self.weights), q, q)
        self.validate()

    def validate(self):
        if len(self.weights) == 0:
            raise ValidationError("mélange sans composante")
        if np.any(self.weights < 0) or abs(self.weights.sum() - 1.0) > WEIGHT_TOL:
            raise ValidationError(f"poids invalides (somme {self.weights.sum()})")
        for n, cov in enumerate(self.covariances):
            if not np.allclose(cov, cov.T, atol=1e-10):
                raise ValidationError(f"covariance {n} non symétrique")
            if np.linalg.eigvalsh(cov).min() < -1e-12:
                raise ValidationError(f"covariance {n} non PSD")

    @property
    def k(self) -> int:
        return len(self.weights)

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    def copy(self) -> 'GMMModel':
        return GMMModel(self.weights.copy(), self.means.copy(), self.covariances.copy())

    def component_std(self) -> np.ndarray:
        """Écarts-types des composantes (modèle 1-D)"""
        return np.sqrt(self.covariances[:, 0, 0])

    def to_dict(self) -> Dict:
        return {
            'k': self.k,
            'weights': self.weights.tolist(),
            'means': self.means.tolist(),
            'covariances': self.covariances.tolist()
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'GMMModel':
        try:
            model = cls(data['weights'], data['means'], data['covariances'])
        except (KeyError, TypeError, ValueError) as e:
            raise ValidationError(f"modèle GMM invalide: {e}")
        if int(data.get('k', model.k)) != model.k:
            raise ValidationError("k incohérent avec le nombre de poids")
        return model

    def get_summary(self) -> Dict:
        return {'k': self.k, 'dim': self.dim, 'weights': self.weights.round(4).tolist()}


def normal_model(mean: float, variance: float) -> GMMModel:
    """Gaussienne 1-D vue comme un mélange à une composante"""
    return GMMModel([1.0], [[mean]], [[[variance]]])


def component_log_density(data, m: GMMModel) -> np.ndarray:
    """log(ε_n) + log p(x_m | θ_n), matrice (M, k)"""
    x = as_samples(data)
    out = np.empty((len(x), m.k))
    for n in range(m.k):
        out[:, n] = np.log(m.weights[n]) if m.weights[n] > 0 else -np.inf
        if m.weights[n] > 0:
            out[:, n] += multivariate_normal.logpdf(x, m.means[n], m.covariances[n],
                                                    allow_singular=True)
    return out


def log_likelihood(data, m: GMMModel) -> float:
    """Σ_m log Σ_n ε_n p(x_m | θ_n)"""
    return float(logsumexp(component_log_density(data, m), axis=1).sum())


def free_parameters(k: int, q: int) -> int:
    """ν = (k − 1) + k·q + k·q(q + 1)/2"""
    return (k - 1) + k * q + k * q * (q + 1) // 2


def mdl_score(m: GMMModel, data) -> float:
    """−L + (ν/2)·log M ; plus petit = meilleur"""
    x = as_samples(data)
    return -log_likelihood(x, m) + 0.5 * free_parameters(m.k, m.dim) * np.log(len(x))


@dataclass
class EMConfig:
    """Paramètres EM (tolérance sur la log-vraisemblance moyenne par échantillon)"""
    max_iter: int = 500
    loglik_tol: float = 1e-8
    covariance_floor: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.max_iter < 1:
            raise ConfigError(f"max_iter invalide: {self.max_iter}")
        if not (self.loglik_tol > 0 and self.covariance_floor > 0):
            raise ConfigError("tolérances EM doivent être > 0")


def _seed_means(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Initialisation de type k-means++ (tirage proportionnel à D²)"""
    centers = [x[rng.integers(len(x))]]
    for _ in range(1, k):
        d2 = np.min([np.sum((x - c) ** 2, axis=1) for c in centers], axis=0)
        total = d2.sum()
        if total <= 0:
            centers.append(x[rng.integers(len(x))])
        else:
            centers.append(x[rng.choice(len(x), p=d2 / total)])
    return np.array(centers)


def initial_model(data, k: int, seed: int = 0) -> GMMModel:
    """Modèle initial : centres k-means++, covariance des données, poids égaux"""
    x = as_samples(data)
    rng = substream(seed, "uncertainty/em-init", k)
    cov = np.atleast_2d(np.cov(x, rowvar=False, bias=True))
    cov = floor_covariance(cov, covariance_floor(x, 1e-6))
    return GMMModel(np.full(k, 1.0 / k), _seed_means(x, k, rng), np.repeat(cov[None], k, axis=0))


def em_step(x: np.ndarray, m: GMMModel, floor: float,
            rng: Optional[np.random.Generator] = None,
            logger: Optional[EventLogger] = None, iteration: int = 0) -> GMMModel:
    """Une itération E puis M"""
    log_r = component_log_density(x, m)
    log_r -= logsumexp(log_r, axis=1, keepdims=True)
    resp = np.exp(log_r)
    mass = resp.sum(axis=0)
    M, q = x.shape

    weights = mass / M
    means = np.empty((m.k, q))
    covs = np.empty((m.k, q, q))
    data_cov = None
    for n in range(m.k):
        if mass[n] < EMPTY_MASS:
            # Composante vide : ré-ensemencée sur une donnée tirée au hasard
            rng = rng or substream(0, "uncertainty/reseed")
            if data_cov is None:
                data_cov = floor_covariance(np.atleast_2d(np.cov(x, rowvar=False, bias=True)),
                                            floor)
            means[n] = x[rng.integers(M)]
            covs[n] = data_cov
            weights[n] = 1.0 / m.k
            if logger is not None:
                logger.log_event(iteration, EventType.COMPONENT_RESEEDED, n, "em",
                                 float(mass[n]))
            continue
        means[n] = resp[:, n] @ x / mass[n]
        diff = x - means[n]
        covs[n] = floor_covariance((resp[:, n, None] * diff).T @ diff / mass[n], floor)
    weights = weights / weights.sum()
    return GMMModel(weights, means, covs)


def em_fit(data, k: int, cfg: Optional[EMConfig] = None,
           init: Optional[GMMModel] = None,
           logger: Optional[EventLogger] = None) -> Tuple[GMMModel, List[float]]:
    """
    Ajustement EM à k composantes

    Args:
        data: Échantillons (M,) ou (M, q)
        k: Nombre de composantes
        cfg: Paramètres EM
        init: Modèle de départ (sinon initialisation k-means++)
        logger: Journal d'événements

    Returns:
        (modèle, trace des log-vraisemblances, non décroissante)

    Raises:
        PreconditionError: moins de 5k échantillons
    """
    cfg = cfg or EMConfig()
    x = as_samples(data)
    if k < 1:
        raise ConfigError(f"k invalide: {k}")
    if len(x) < 5 * k:
        raise PreconditionError(f"{len(x)} échantillons pour k={k} (minimum {5 * k})")
    floor = covariance_floor(x, cfg.covariance_floor)
    model = init.copy() if init is not None else initial_model(x, k, cfg.seed)
    model = GMMModel(model.weights, model.means,
                     np.array([floor_covariance(c, floor) for c in model.covariances]))
    rng = substream(cfg.seed, "uncertainty/reseed", k)

    trace = [log_likelihood(x, model)]
    for it in range(1, cfg.max_iter + 1):
        model = em_step(x, model, floor, rng, logger, it)
        trace.append(log_likelihood(x, model))
        if logger is not None:
            logger.log_event(it, EventType.EM_ITERATION, k, "em", trace[-1])
        if abs(trace[-1] - trace[-2]) <= cfg.loglik_tol * len(x):
            break
    return model, trace


def fit_single_gaussian(data, cfg: Optional[EMConfig] = None) -> GMMModel:
    """Gaussienne unique (moyenne et covariance empiriques biaisées)"""
    return em_fit(data, 1, cfg or EMConfig(max_iter=1))[0]


def sample(m: GMMModel, n: int, seed: int = 0,
           rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """
    n tirages : composante selon les poids puis tirage gaussien

    Le générateur rng, s'il est fourni, remplace le sous-flux dérivé de seed.

    Returns:
        (n,) pour un modèle 1-D, (n, q) sinon
    """
    if n < 1:
        raise ConfigError(f"n invalide: {n}")
    rng = rng if rng is not None else substream(seed, "uncertainty/sample")
    comps = rng.choice(m.k, size=n, p=m.weights)
    z = rng.standard_normal((n, m.dim))
    out = np.empty((n, m.dim))
    for c in range(m.k):
        mask = comps == c
        if mask.any():
            out[mask] = m.means[c] + z[mask] @ _psd_root(m.covariances[c]).T
    return out[:, 0] if m.dim == 1 else out


def _psd_root(cov: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(cov)
    return v * np.sqrt(np.maximum(w, 0.0))


def _check_1d(m: GMMModel):
    if m.dim != 1:
        raise ConfigError(f"modèle de dimension {m.dim}, 1 attendue")


def mixture_cdf(m: GMMModel, x) -> Union[float, np.ndarray]:
    """CDF d'un mélange 1-D"""
    _check_1d(m)
    x_arr = np.asarray(x, dtype=float)
    std = m.component_std()
    total = np.zeros_like(x_arr)
    for w, mu, s in zip(m.weights, m.means[:, 0], std):
        if s > 0:
            total = total + w * norm.cdf((x_arr - mu) / s)
        else:
            total = total + w * (x_arr >= mu)
    return float(total) if np.ndim(x) == 0 else total


def mixture_pdf(m: GMMModel, x) -> Union[float, np.ndarray]:
    """
    Densité d'un mélange 1-D

    Une composante de variance nulle est une masse ponctuelle : densité
    nulle hors de sa moyenne, infinie sur celle-ci.
    """
    _check_1d(m)
    x_arr = np.asarray(x, dtype=float)
    total = np.zeros_like(x_arr)
    for w, mu, s in zip(m.weights, m.means[:, 0], m.component_std()):
        if s > 0:
            total = total + w * norm.pdf(x_arr, mu, s)
        elif w > 0:
            total = total + np.where(x_arr == mu, np.inf, 0.0)
    return float(total) if np.ndim(x) == 0 else total


def mixture_quantile(m: GMMModel, p: float) -> float:
    """
    Quantile d'un mélange 1-D (recherche de racine de CDF(x) − p)

    Raises:
        ConfigError: p hors de ]0, 1[ ou modèle multidimensionnel
    """
    _check_1d(m)
    if not 0 < p < 1:
        raise ConfigError(f"probabilité invalide: {p}")
    std = np.maximum(m.component_std(), 1e-12)
    if m.k == 1:
        return float(m.means[0, 0] + std[0] * norm.ppf(p))
    lo = float(np.min(m.means[:, 0] - 40 * std))
    hi = float(np.max(m.means[:, 0] + 40 * std))
    return float(brentq(lambda v: mixture_cdf(m, v) - p, lo, hi, xtol=1e-14, rtol=1e-15,
                        maxiter=500))


def moment_match(m: GMMModel) -> Tuple[np.ndarray, np.ndarray]:
    """Moyenne et covariance du mélange"""
    mean = m.weights @ m.means
    cov = np.zeros((m.dim, m.dim))
    for w, mu, c in zip(m.weights, m.means, m.covariances):
        d = (mu - mean)[:, None]
        cov += w * (c + d @ d.T)
    return mean, cov


def project(m: GMMModel, w) -> GMMModel:
    """Mélange 1-D de wᵀX"""
    w = np.asarray(w, dtype=float).ravel()
    if len(w) != m.dim:
        raise ConfigError(f"vecteur de projection de dimension {len(w)} pour {m.dim}")
    means = m.means @ w
    variances = np.array([w @ c @ w for c in m.covariances])
    return GMMModel(m.weights.copy(), means[:, None], variances[:, None, None])


def model_to_json(m: GMMModel) -> str:
    """Sérialise le modèle : {k, weights, means, covariances}"""
    return json.dumps(m.to_dict(), indent=2)


def model_from_json(text: str) -> GMMModel:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(f"JSON invalide ({e})")
    if not isinstance(data, dict):
        raise ValidationError("objet JSON attendu pour un modèle GMM")
    return GMMModel.from_dict(data)


def save_model(m: GMMModel, path: Union[str, Path]):
    Path(path).write_text(model_to_json(m), encoding="utf-8")


def load_model(path: Union[str, Path]) -> GMMModel:
    path = Path(path)
    if not path.exists():
        raise MissingInputError(str(path))
    return model_from_json(path.read_text(encoding="utf-8"))
