"""
Module Solver - Moteur ADMM

Ce module implémente:
- Les paramètres (pénalité, tolérances, itérations) et l'état ADMM
- La résolution d'un ConicProgram par séparation en copies locales
  (une copie « boîte » par variable, une copie par appartenance à un cône)
  et copie de consensus soumise aux égalités
- Le suivi des résidus primal/dual et l'adaptation de la pénalité
- Le diagnostic de rang 1 des blocs PSD à la sortie

Itération (λ non normalisé) :
    x ← Π_K(E z − λ/ρ)
    z ← argmin ½zᵀQz + cᵀz − λᵀEz + ρ/2‖x − Ez‖²  s.c.  Az = b
    λ ← λ + ρ (x − E z)
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .program import ConicProgram, ConeBlock, SOC, PSD
from .cones import project_soc_batch, project_psd_svec_batch, smat, rank1_gap
from ..core.errors import ConfigError, DivergenceError, ProgramError
from ..core.simulation_engine import EventLogger, EventType
from ..core.workers import WorkerPool

CHUNK_MIN = 256


@dataclass
class ADMMParams:
    """Paramètres ADMM (pénalité ρ, tolérances, itérations max)"""
    penalty: float = 1.0
    eps_abs: float = 1e-4
    eps_rel: float = 1e-3
    max_iter: int = 5000
    adaptive: bool = True
    adapt_every: int = 25
    log_every: int = 100

    def __post_init__(self):
        if not self.penalty > 0:
            raise ConfigError(f"pénalité ADMM invalide: {self.penalty}")
        if not (self.eps_abs > 0 and self.eps_rel > 0):
            raise ConfigError("tolérances ADMM doivent être > 0")
        if self.max_iter < 1:
            raise ConfigError(f"max_iter invalide: {self.max_iter}")
        if self.adapt_every < 1:
            raise ConfigError(f"adapt_every invalide: {self.adapt_every}")

    def with_overrides(self, **overrides) -> 'ADMMParams':
        values = {**self.__dict__, **{k: v for k, v in overrides.items() if v is not None}}
        return ADMMParams(**values)


@dataclass
class ADMMState:
    """Itérés courants d'une résolution"""
    x: np.ndarray
    z: np.ndarray
    lam: np.ndarray
    penalty: float
    iter: int = 0
    primal_residual: float = float('inf')
    dual_residual: float = float('inf')


@dataclass
class Solution:
    """Résultat d'une résolution ADMM (valeurs issues de la copie de consensus)"""
    values: Dict[str, np.ndarray]
    z: np.ndarray
    objective: float
    converged: bool
    iterations: int
    max_rank1_gap: float
    primal_residual: float
    dual_residual: float
    primal_threshold: float
    dual_threshold: float
    penalty: float
    cone_values: List[np.ndarray] = field(default_factory=list)
    trace: Optional[pd.DataFrame] = None

    def get_stats(self) -> Dict:
        return {
            'objective': self.objective,
            'converged': self.converged,
            'iterations': self.iterations,
            'primal_residual': self.primal_residual,
            'dual_residual': self.dual_residual,
            'max_rank1_gap': self.max_rank1_gap,
            'penalty': self.penalty
        }


class _ConeGroup:
    """Blocs de même signature projetés ensemble"""

    def __init__(self, kind: str, size: int, hermitian: bool,
                 members: List[int], index_matrix: np.ndarray, offset: int):
        self.kind = kind
        self.size = size
        self.hermitian = hermitian
        self.members = members
        self.index = index_matrix
        self.offset = offset
        self.width = index_matrix.shape[1]

    @property
    def length(self) -> int:
        return self.index.size

    def project(self, v: np.ndarray) -> np.ndarray:
        if self.kind == SOC:
            t, u = project_soc_batch(v[:, 0], v[:, 1:])
            return np.column_stack([t, u])
        return project_psd_svec_batch(v, self.size, self.hermitian)


def _group_cones(cones: List[ConeBlock], n: int) -> Tuple[List[_ConeGroup], np.ndarray]:
    groups: Dict[Tuple, List[int]] = {}
    for k, cone in enumerate(cones):
        groups.setdefault(cone.signature(), []).append(k)

    result = []
    offset = n
    selections = [np.arange(n)]
    for sig in sorted(groups, key=lambda s: (s[0], s[1], s[2], s[3])):
        members = groups[sig]
        index = np.array([cones[k].indices for k in members], dtype=int)
        result.append(_ConeGroup(sig[0], sig[2], sig[3], members, index, offset))
        selections.append(index.ravel())
        offset += index.size
    return result, np.concatenate(selections)


class ADMMSolver:
    """
    Résolution ADMM d'un ConicProgram
    """

    def __init__(self, prog: ConicProgram, params: Optional[ADMMParams] = None,
                 logger: Optional[EventLogger] = None, workers: int = 1,
                 label: str = "admm"):
        prog.validate()
        self.prog = prog
        self.params = params or ADMMParams()
        self.logger = logger
        self.label = label
        self.pool = WorkerPool(workers, kind="thread")
        self.groups, self.selection = _group_cones(prog.cones, prog.n)
        # Nombre de copies par variable
        self.copies = np.bincount(self.selection, minlength=prog.n).astype(float)
        self._factor = None
        self._factor_rho = None

    def _factorize(self, rho: float):
        prog = self.prog
        n, m = prog.n, prog.m
        diag = sp.diags(prog.q + rho * self.copies)
        if m == 0:
            self._factor = None
            self._diag = prog.q + rho * self.copies
            self._factor_rho = rho
            return
        kkt = sp.bmat([[diag, prog.A.T], [prog.A, None]], format='csc')
        try:
            self._factor = spla.splu(kkt)
        except RuntimeError as e:
            raise ProgramError(f"système KKT singulier: {e}")
        self._factor_rho = rho

    def _z_update(self, rhs: np.ndarray) -> np.ndarray:
        prog = self.prog
        if prog.m == 0:
            return rhs / self._diag
        sol = self._factor.solve(np.concatenate([rhs, prog.b]))
        return sol[:prog.n]

    def _project(self, v: np.ndarray) -> np.ndarray:
        prog = self.prog
        out = np.empty_like(v)
        out[:prog.n] = np.clip(v[:prog.n], prog.lb, prog.ub)
        for group in self.groups:
            block = v[group.offset:group.offset + group.length].reshape(-1, group.width)
            rows = block.shape[0]
            if self.pool.workers > 1 and rows >= 2 * CHUNK_MIN:
                bounds = np.array_split(np.arange(rows), min(self.pool.workers,
                                                             rows // CHUNK_MIN))
                parts = self.pool.map(lambda idx: group.project(block[idx]), bounds)
                projected = np.vstack(parts)
            else:
                projected = group.project(block)
            out[group.offset:group.offset + group.length] = projected.ravel()
        return out

    def _log(self, it: int, event: EventType, value: float, extra: Dict):
        if self.logger is not None:
            self.logger.log_event(it, event, self.label, "admm", value, extra)

    def solve(self, z0: Optional[np.ndarray] = None) -> Solution:
        """
        Lance les itérations jusqu'à convergence ou max_iter

        Raises:
            DivergenceError: itéré non fini
            ProgramError: système KKT singulier
        """
        prog, params = self.prog, self.params
        sel = self.selection
        rho = params.penalty
        n_copies = len(sel)

        if z0 is None:
            z = np.clip(np.zeros(prog.n), prog.lb, prog.ub)
        else:
            z = np.asarray(z0, dtype=float).copy()
            if z.shape != (prog.n,):
                raise ProgramError(f"point initial de dimension {z.shape}")
        lam = np.zeros(n_copies)
        state = ADMMState(x=z[sel].copy(), z=z, lam=lam, penalty=rho)
        self._factorize(rho)

        trace = []
        sqrt_n = np.sqrt(n_copies)
        eps_pri = eps_dual = float('inf')
        converged = False

        for it in range(1, params.max_iter + 1):
            ez = state.z[sel]
            x = self._project(ez - state.lam / rho)

            rhs = (rho * np.bincount(sel, weights=x, minlength=prog.n)
                   + np.bincount(sel, weights=state.lam, minlength=prog.n)
                   - prog.c)
            z_new = self._z_update(rhs)
            ez_new = z_new[sel]
            diff = x - ez_new
            lam = state.lam + rho * diff

            if not (np.all(np.isfinite(z_new)) and np.all(np.isfinite(x))
                    and np.all(np.isfinite(lam))):
                self._log(it, EventType.WARNING, None, {'message': 'itéré non fini'})
                raise DivergenceError(it)

            r = float(np.linalg.norm(diff))
            s = float(rho * np.linalg.norm(ez_new - ez))
            eps_pri = sqrt_n * params.eps_abs + params.eps_rel * max(
                np.linalg.norm(x), np.linalg.norm(ez_new))
            eps_dual = sqrt_n * params.eps_abs + params.eps_rel * np.linalg.norm(lam)

            state.x, state.z, state.lam = x, z_new, lam
            state.iter, state.primal_residual, state.dual_residual = it, r, s
            objective = prog.objective(z_new)
            trace.append((it, r, s, objective))

            if it % params.log_every == 0:
                self._log(it, EventType.ADMM_ITERATION, objective,
                          {'primal_residual': r, 'dual_residual': s, 'penalty': rho})

            if r <= eps_pri and s <= eps_dual:
                converged = True
                break

            if params.adaptive and it % params.adapt_every == 0:
                new_rho = rho
                if r > 10.0 * s:
                    new_rho = rho * 2.0
                elif s > 10.0 * r:
                    new_rho = rho / 2.0
                if new_rho != rho:
                    self._log(it, EventType.ADMM_RHO_UPDATE, new_rho, {'previous': rho})
                    rho = new_rho
                    state.penalty = rho
                    self._factorize(rho)

        self._log(state.iter, EventType.ADMM_ITERATION, prog.objective(state.z),
                  {'primal_residual': state.primal_residual,
                   'dual_residual': state.dual_residual,
                   'penalty': rho, 'converged': converged})

        cone_values = self._cone_values(state.x)
        gaps = [rank1_gap(smat(cone_values[k], cone.size, cone.hermitian))
                for k, cone in enumerate(prog.cones) if cone.kind == PSD]

        return Solution(
            values={name: state.z[idx] for name, idx in prog.blocks.items()},
            z=state.z,
            objective=prog.objective(state.z),
            converged=converged,
            iterations=state.iter,
            max_rank1_gap=float(max(gaps)) if gaps else 0.0,
            primal_residual=state.primal_residual,
            dual_residual=state.dual_residual,
            primal_threshold=float(eps_pri),
            dual_threshold=float(eps_dual),
            penalty=rho,
            cone_values=cone_values,
            trace=pd.DataFrame(trace, columns=['iter', 'primal_residual',
                                               'dual_residual', 'objective'])
        )

    def _cone_values(self, x: np.ndarray) -> List[np.ndarray]:
        values: List[Optional[np.ndarray]] = [None] * len(self.prog.cones)
        for group in self.groups:
            block = x[group.offset:group.offset + group.length].reshape(-1, group.width)
            for row, k in enumerate(group.members):
                values[k] = block[row].copy()
        return values


def admm_solve(prog: ConicProgram, params: Optional[ADMMParams] = None,
               logger: Optional[EventLogger] = None, workers: int = 1,
               z0: Optional[np.ndarray] = None, label: str = "admm") -> Solution:
    """
    Résout un programme conique par ADMM

    Args:
        prog: Programme à résoudre
        params: Paramètres ADMM (défauts: ρ=1, eps_abs=1e-4, eps_rel=1e-3, 5000 it.)
        logger: Journal d'événements optionnel
        workers: Threads pour les projections par blocs
        z0: Point initial optionnel de la copie de consensus

    Returns:
        Solution (converged indique si les deux résidus sont sous leurs seuils)
    """
    return ADMMSolver(prog, params, logger, workers, label).solve(z0)
