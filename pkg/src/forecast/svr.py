"""
Module Forecast - Régression à vecteurs de support (ε-SVR)

Ce module implémente:
- Le dual ε-insensible à 2n variables résolu par ascension de coordonnées
  par paires (SMO), sélection de la paire de violation maximale
- Le noyau RBF k(u, v) = exp(−γ‖u − v‖²)
- La prédiction Σ coef_i·k(sv_i, x) + b

Dual : min ½βᵀQβ + pᵀβ, yᵀβ = 0, 0 ≤ β ≤ C avec
    y = (+1…+1, −1…−1), p = (ε − t, ε + t), Q_ab = y_a y_b K(a mod n, b mod n)
coef_i = β_i − β_{i+n}.
"""

from dataclasses import dataclass
from typing import Dict, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from ..core.errors import InputError, ConfigError

KKT_TOL = 1e-3
MAX_ITER = 100000
TAU = 1e-12


@dataclass(frozen=True)
class HyperParams:
    """Triplet (γ, C, ε)"""
    gamma: float
    c: float
    epsilon: float

    def __post_init__(self):
        values = (self.gamma, self.c, self.epsilon)
        if not all(np.isfinite(v) for v in values):
            raise ConfigError(f"hyper-paramètres non finis: {values}")
        if self.gamma <= 0 or self.c <= 0:
            raise ConfigError("gamma et C doivent être > 0")
        if self.epsilon < 0:
            raise ConfigError("epsilon doit être ≥ 0")

    def as_dict(self) -> Dict[str, float]:
        return {'gamma': self.gamma, 'c': self.c, 'epsilon': self.epsilon}


@dataclass
class SVRModel:
    """Modèle entraîné (vecteurs de support, coefficients duaux, biais)"""
    support_vectors: np.ndarray
    dual_coeffs: np.ndarray
    bias: float
    hyper: HyperParams
    n_features: int
    iterations: int = 0
    max_violation: float = 0.0
    converged: bool = True

    def get_stats(self) -> Dict:
        return {
            'support_vectors': len(self.dual_coeffs),
            'bias': self.bias,
            'iterations': self.iterations,
            'max_violation': self.max_violation,
            'converged': self.converged
        }


def rbf_kernel(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    """Matrice de noyau RBF entre deux ensembles de points"""
    return np.exp(-gamma * cdist(a, b, 'sqeuclidean'))


def _as_features(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    return x


def train_svr(x: Sequence, y: Sequence, h: HyperParams,
              tol: float = KKT_TOL, max_iter: int = MAX_ITER) -> SVRModel:
    """
    Entraîne une ε-SVR par SMO

    Args:
        x: Vecteurs de caractéristiques (n, d)
        y: Cibles (n,)
        h: Hyper-paramètres
        tol: Violation KKT maximale admise à la sortie
        max_iter: Nombre maximal de paires mises à jour

    Returns:
        SVRModel (max_violation = écart m(β) − M(β) à la sortie)

    Raises:
        InputError: données vides, tailles incohérentes ou non finies
    """
    x = _as_features(x)
    t = np.asarray(y, dtype=float).ravel()
    n = len(t)
    if n < 2 or x.shape[0] != n:
        raise InputError(f"données d'entraînement invalides ({x.shape[0]} x, {n} y)")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(t))):
        raise InputError("caractéristiques ou cibles non finies")

    kernel = rbf_kernel(x, x, h.gamma)
    c = h.c
    sign = np.concatenate([np.ones(n), -np.ones(n)])
    p = np.concatenate([h.epsilon - t, h.epsilon + t])
    beta = np.zeros(2 * n)
    grad = p.copy()
    diag = np.ones(2 * n)

    def q_column(a: int) -> np.ndarray:
        row = kernel[a % n]
        return sign[a] * sign * np.concatenate([row, row])

    it = 0
    violation = 0.0
    while True:
        minus_yg = -sign * grad
        up = ((sign > 0) & (beta < c)) | ((sign < 0) & (beta > 0))
        low = ((sign > 0) & (beta > 0)) | ((sign < 0) & (beta < c))
        if not up.any() or not low.any():
            violation = 0.0
            break
        i = int(np.flatnonzero(up)[np.argmax(minus_yg[up])])
        j = int(np.flatnonzero(low)[np.argmin(minus_yg[low])])
        violation = float(minus_yg[i] - minus_yg[j])
        if violation <= tol or it >= max_iter:
            break
        it += 1

        q_i, q_j = q_column(i), q_column(j)
        old_i, old_j = beta[i], beta[j]
        if sign[i] != sign[j]:
            quad = max(diag[i] + diag[j] + 2.0 * q_i[j], TAU)
            delta = (-grad[i] - grad[j]) / quad
            diff = beta[i] - beta[j]
            beta[i] += delta
            beta[j] += delta
            if diff > 0:
                if beta[j] < 0:
                    beta[j] = 0.0
                    beta[i] = diff
            else:
                if beta[i] < 0:
                    beta[i] = 0.0
                    beta[j] = -diff
            if diff > 0:
                if beta[i] > c:
                    beta[i] = c
                    beta[j] = c - diff
            else:
                if beta[j] > c:
                    beta[j] = c
                    beta[i] = c + diff
        else:
            quad = max(diag[i] + diag[j] - 2.0 * q_i[j], TAU)
            delta = (grad[i] - grad[j]) / quad
            total = beta[i] + beta[j]
            beta[i] -= delta
            beta[j] += delta
            if total > c:
                if beta[i] > c:
                    beta[i] = c
                    beta[j] = total - c
            else:
                if beta[j] < 0:
                    beta[j] = 0.0
                    beta[i] = total
            if total > c:
                if beta[j] > c:
                    beta[j] = c
                    beta[i] = total - c
            else:
                if beta[i] < 0:
                    beta[i] = 0.0
                    beta[j] = total

        grad += q_i * (beta[i] - old_i) + q_j * (beta[j] - old_j)

    bias = -_compute_rho(beta, grad, sign, c)
    coeffs = beta[:n] - beta[n:]
    keep = np.abs(coeffs) > 0
    return SVRModel(
        support_vectors=x[keep].copy(),
        dual_coeffs=coeffs[keep].copy(),
        bias=float(bias),
        hyper=h,
        n_features=x.shape[1],
        iterations=it,
        max_violation=max(violation, 0.0),
        converged=violation <= tol
    )


def _compute_rho(beta: np.ndarray, grad: np.ndarray, sign: np.ndarray, c: float) -> float:
    """Seuil ρ (b = −ρ) moyenné sur les variables libres"""
    yg = sign * grad
    at_upper = beta >= c
    at_lower = beta <= 0
    free = ~at_upper & ~at_lower
    if free.any():
        return float(yg[free].mean())
    ub_mask = (at_upper & (sign < 0)) | (at_lower & (sign > 0))
    lb_mask = (at_upper & (sign > 0)) | (at_lower & (sign < 0))
    ub = yg[ub_mask].min() if ub_mask.any() else np.inf
    lb = yg[lb_mask].max() if lb_mask.any() else -np.inf
    return float((ub + lb) / 2.0)


def predict_many(m: SVRModel, x) -> np.ndarray:
    """Prédictions pour un lot de vecteurs (n, d)"""
    x = _as_features(x)
    if x.shape[1] != m.n_features:
        raise InputError(f"dimension {x.shape[1]} au lieu de {m.n_features}")
    if len(m.dual_coeffs) == 0:
        return np.full(x.shape[0], m.bias)
    return rbf_kernel(x, m.support_vectors, m.hyper.gamma) @ m.dual_coeffs + m.bias


def predict(m: SVRModel, x) -> float:
    """
    Prédiction pour un vecteur de caractéristiques

    Raises:
        InputError: dimension différente de celle de l'entraînement
    """
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != m.n_features:
        raise InputError(f"dimension {x.shape[0]} au lieu de {m.n_features}")
    return float(predict_many(m, x.reshape(1, -1))[0])
