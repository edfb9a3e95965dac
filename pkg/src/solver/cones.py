"""
Module Solver - Projections sur les cônes

Ce module implémente:
- La projection euclidienne sur le cône du second ordre ‖u‖ ≤ t
- La projection sur le cône des matrices semi-définies positives
  (réelles symétriques ou hermitiennes via le plongement réel)
- Le ratio de rang λ₂/λ₁ d'une matrice hermitienne
- svec/smat : vectorisation isométrique des blocs (hors diagonale × √2)
"""

from typing import Tuple

import numpy as np

from ..core.errors import ProgramError

SQRT2 = np.sqrt(2.0)


def project_soc(t: float, u) -> Tuple[float, np.ndarray]:
    """
    Projection de (t, u) sur {‖u‖ ≤ t}

    Returns:
        (t', u') projeté
    """
    u = np.asarray(u, dtype=float)
    t_out, u_out = project_soc_batch(np.array([float(t)]), u.reshape(1, -1))
    return float(t_out[0]), u_out[0]


def project_soc_batch(t: np.ndarray, u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Projection ligne par ligne d'un lot de points (t_i, u_i)

    Args:
        t: Vecteur (m,)
        u: Matrice (m, k)
    """
    t = np.asarray(t, dtype=float)
    u = np.asarray(u, dtype=float)
    norm = np.linalg.norm(u, axis=1)
    t_out = t.copy()
    u_out = u.copy()

    polar = norm <= -t
    t_out[polar] = 0.0
    u_out[polar] = 0.0

    outside = (norm > np.abs(t)) & ~polar
    if np.any(outside):
        alpha = 0.5 * (t[outside] + norm[outside])
        t_out[outside] = alpha
        u_out[outside] = u[outside] * (alpha / norm[outside])[:, None]
    return t_out, u_out


def hermitian_embed(m: np.ndarray) -> np.ndarray:
    """Plongement réel [[Re, -Im], [Im, Re]] d'une matrice (ou d'un lot)"""
    re, im = m.real, m.imag
    top = np.concatenate([re, -im], axis=-1)
    bottom = np.concatenate([im, re], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def _check_square(m: np.ndarray):
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise ProgramError(f"matrice non carrée: {m.shape}")


def _psd_real(stack: np.ndarray) -> np.ndarray:
    sym = 0.5 * (stack + np.swapaxes(stack, -1, -2))
    w, v = np.linalg.eigh(sym)
    w = np.maximum(w, 0.0)
    return (v * w[..., None, :]) @ np.swapaxes(v, -1, -2)


def project_psd_batch(stack: np.ndarray) -> np.ndarray:
    """
    Projection de Frobenius d'un lot de matrices (m, n, n) sur le cône PSD
    """
    stack = np.asarray(stack)
    _check_square(stack)
    if np.iscomplexobj(stack):
        n = stack.shape[-1]
        herm = 0.5 * (stack + np.conj(np.swapaxes(stack, -1, -2)))
        proj = _psd_real(hermitian_embed(herm))
        return proj[..., :n, :n] + 1j * proj[..., n:, :n]
    return _psd_real(stack.astype(float))


def project_psd(m) -> np.ndarray:
    """
    Matrice PSD la plus proche au sens de Frobenius (valeurs propres
    négatives ramenées à 0)

    Raises:
        ProgramError: matrice non carrée
    """
    m = np.asarray(m)
    _check_square(m)
    return project_psd_batch(m[None, ...])[0]


def rank1_gap(m) -> float:
    """
    Ratio λ₂/λ₁ (deuxième / plus grande valeur propre), 0 pour la matrice nulle
    """
    m = np.asarray(m)
    _check_square(m)
    if m.shape[0] < 2:
        return 0.0
    if np.iscomplexobj(m):
        m = 0.5 * (m + m.conj().T)
        w = np.linalg.eigvalsh(hermitian_embed(m))[::-2]
    else:
        w = np.linalg.eigvalsh(0.5 * (m + m.T))[::-1]
    scale = max(abs(w[0]), abs(w[-1]))
    if scale <= 1e-14:
        return 0.0
    return float(max(w[1], 0.0) / w[0]) if w[0] > 0 else 0.0


def rank1_gap_batch(stack: np.ndarray) -> np.ndarray:
    """rank1_gap sur un lot (m, n, n)"""
    return np.array([rank1_gap(m) for m in np.asarray(stack)])


def svec_dim(n: int, hermitian: bool = False) -> int:
    """Longueur de svec pour un bloc n×n"""
    off = n * (n - 1) // 2
    return n + (2 * off if hermitian else off)


def psd_size(dim: int, hermitian: bool = False) -> int:
    """Inverse de svec_dim"""
    for n in range(1, dim + 1):
        if svec_dim(n, hermitian) == dim:
            return n
        if svec_dim(n, hermitian) > dim:
            break
    raise ProgramError(f"longueur svec {dim} incompatible avec un bloc carré")


def svec(m) -> np.ndarray:
    """
    Vectorisation : diagonale, puis hors-diagonale (i < j, ordre ligne)
    multipliée par √2 ; pour un bloc hermitien, chaque terme hors
    diagonale donne (√2·Re, √2·Im). ‖svec(M)‖₂ = ‖M‖_F.
    """
    m = np.asarray(m)
    _check_square(m)
    n = m.shape[0]
    iu = np.triu_indices(n, k=1)
    diag = np.real(np.diag(m))
    off = m[iu]
    if np.iscomplexobj(m):
        pairs = np.stack([off.real, off.imag], axis=1).ravel()
        return np.concatenate([diag, SQRT2 * pairs])
    return np.concatenate([diag, SQRT2 * off])


def smat(v, n: int, hermitian: bool = False) -> np.ndarray:
    """Inverse de svec"""
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != svec_dim(n, hermitian):
        raise ProgramError(f"svec de longueur {v.shape[-1]} pour un bloc {n}×{n}")
    iu = np.triu_indices(n, k=1)
    if hermitian:
        m = np.zeros((n, n), dtype=complex)
        pairs = v[n:].reshape(-1, 2) / SQRT2
        off = pairs[:, 0] + 1j * pairs[:, 1]
        m[iu] = off
        m = m + m.conj().T
    else:
        m = np.zeros((n, n))
        m[iu] = v[n:] / SQRT2
        m = m + m.T
    m[np.diag_indices(n)] = v[:n]
    return m


def smat_batch(vs: np.ndarray, n: int, hermitian: bool = False) -> np.ndarray:
    """smat appliqué à chaque ligne de vs"""
    vs = np.asarray(vs, dtype=float)
    iu = np.triu_indices(n, k=1)
    m = np.zeros((vs.shape[0], n, n), dtype=complex if hermitian else float)
    if hermitian:
        pairs = vs[:, n:].reshape(vs.shape[0], -1, 2) / SQRT2
        m[:, iu[0], iu[1]] = pairs[..., 0] + 1j * pairs[..., 1]
        m = m + np.conj(np.swapaxes(m, -1, -2))
    else:
        m[:, iu[0], iu[1]] = vs[:, n:] / SQRT2
        m = m + np.swapaxes(m, -1, -2)
    idx = np.arange(n)
    m[:, idx, idx] = vs[:, :n]
    return m


def svec_batch(stack: np.ndarray) -> np.ndarray:
    """svec appliqué à chaque matrice d'un lot (m, n, n)"""
    stack = np.asarray(stack)
    n = stack.shape[-1]
    iu = np.triu_indices(n, k=1)
    idx = np.arange(n)
    diag = np.real(stack[:, idx, idx])
    off = stack[:, iu[0], iu[1]]
    if np.iscomplexobj(stack):
        pairs = np.stack([off.real, off.imag], axis=-1).reshape(stack.shape[0], -1)
        return np.concatenate([diag, SQRT2 * pairs], axis=1)
    return np.concatenate([diag, SQRT2 * off], axis=1)


def project_psd_svec_batch(vs: np.ndarray, n: int, hermitian: bool = False) -> np.ndarray:
    """Projection PSD exprimée dans les coordonnées svec"""
    mats = smat_batch(vs, n, hermitian)
    return svec_batch(project_psd_batch(mats))
