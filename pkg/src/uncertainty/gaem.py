"""
Module Uncertainty - EM assisté par algorithme génétique (GAEM)

Ce module implémente:
- Une population de mélanges candidats de tailles k variées
- La sélection par tournoi sur le critère MDL
- Le croisement par échange de composantes entières
- La mutation (perturbation, insertion ou suppression de composante)
- Le raffinement de chaque enfant par quelques itérations EM
- L'élitisme : le meilleur MDL ne remonte jamais d'une génération à l'autre
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from .gmm import (GMMModel, EMConfig, as_samples, covariance_floor, em_fit,
                  floor_covariance, initial_model, mdl_score)
from ..core.errors import ConfigError, PreconditionError
from ..core.rng import substream
from ..core.simulation_engine import EventLogger, EventType
from ..core.workers import WorkerPool


@dataclass
class GAEMConfig:
    """Paramètres de l'algorithme génétique"""
    population_size: int = 50
    crossover_prob: float = 0.8
    mutation_prob: float = 0.08
    k_min: int = 1
    k_max: int = 6
    em_steps_per_child: int = 5
    generations: int = 40
    seed: int = 0
    tournament_size: int = 2
    polish: EMConfig = field(default_factory=EMConfig)

    def __post_init__(self):
        if self.population_size < 2:
            raise ConfigError(f"population trop petite: {self.population_size}")
        if not (0 <= self.crossover_prob <= 1 and 0 <= self.mutation_prob <= 1):
            raise ConfigError("probabilités de croisement/mutation hors de [0, 1]")
        if self.k_min < 1 or self.k_max < self.k_min:
            raise ConfigError(f"intervalle de k invalide: [{self.k_min}, {self.k_max}]")
        if self.em_steps_per_child < 1 or self.generations < 0 or self.tournament_size < 1:
            raise ConfigError("paramètres GAEM invalides")


@dataclass
class GAEMResult:
    """Meilleur modèle et trace des générations"""
    model: GMMModel
    mdl: float
    trace: pd.DataFrame
    population_k: List[int]

    @property
    def k(self) -> int:
        return self.model.k

    def fit_report(self) -> pd.DataFrame:
        """Trace generation,best_mdl,best_k"""
        return self.trace[['generation', 'best_mdl', 'best_k']].copy()

    def get_summary(self) -> dict:
        return {
            'k': self.model.k,
            'mdl': self.mdl,
            'generations': int(self.trace['generation'].max()) if len(self.trace) else 0,
            'population_k': sorted(set(self.population_k))
        }


def _refine(task: Tuple[np.ndarray, GMMModel, int, int]) -> Tuple[GMMModel, float]:
    """Quelques itérations EM puis score MDL"""
    x, child, steps, seed = task
    model, _ = em_fit(x, child.k, EMConfig(max_iter=steps, seed=seed), init=child)
    return model, mdl_score(model, x)


def _tournament(scores: np.ndarray, size: int, rng: np.random.Generator) -> int:
    picks = rng.integers(len(scores), size=size)
    return int(picks[np.argmin(scores[picks])])


def _assemble(weights, means, covs) -> GMMModel:
    weights = np.asarray(weights, dtype=float)
    return GMMModel(weights / weights.sum(), np.asarray(means), np.asarray(covs))


def crossover(a: GMMModel, b: GMMModel, rng: np.random.Generator,
              k_min: int, k_max: int) -> Tuple[GMMModel, GMMModel]:
    """
    Échange de composantes : chaque enfant garde une partie des composantes
    d'un parent et reçoit le reste de l'autre parent
    """
    cut_a = int(rng.integers(0, a.k + 1))
    cut_b = int(rng.integers(0, b.k + 1))
    children = []
    for head, tail, ch, ct in ((a, b, cut_a, cut_b), (b, a, cut_b, cut_a)):
        idx_head = list(range(ch))
        idx_tail = list(range(ct, tail.k))
        weights = list(head.weights[idx_head]) + list(tail.weights[idx_tail])
        means = list(head.means[idx_head]) + list(tail.means[idx_tail])
        covs = list(head.covariances[idx_head]) + list(tail.covariances[idx_tail])
        if len(weights) < k_min or len(weights) > k_max or sum(weights) <= 0:
            children.append(head.copy())
            continue
        children.append(_assemble(weights, means, covs))
    return children[0], children[1]


def mutate(m: GMMModel, x: np.ndarray, rng: np.random.Generator,
           k_min: int, k_max: int, floor: float) -> GMMModel:
    """Perturbation d'une moyenne, insertion ou suppression d'une composante"""
    ops = ['perturb']
    if m.k < k_max:
        ops.append('insert')
    if m.k > k_min:
        ops.append('delete')
    op = ops[int(rng.integers(len(ops)))]

    weights, means, covs = m.weights.copy(), m.means.copy(), m.covariances.copy()
    if op == 'perturb':
        n = int(rng.integers(m.k))
        spread = np.sqrt(np.maximum(np.diag(covs[n]), floor))
        means[n] = means[n] + spread * rng.standard_normal(m.dim)
        return _assemble(weights, means, covs)
    if op == 'insert':
        data_cov = floor_covariance(np.atleast_2d(np.cov(x, rowvar=False, bias=True)), floor)
        new_w = 1.0 / (m.k + 1)
        weights = np.append(weights * (1 - new_w), new_w)
        means = np.vstack([means, x[rng.integers(len(x))]])
        covs = np.concatenate([covs, data_cov[None] / (m.k + 1)])
        return _assemble(weights, means, covs)
    drop = int(np.argmin(weights))
    keep = [i for i in range(m.k) if i != drop]
    return _assemble(weights[keep], means[keep], covs[keep])


def gaem_search(data, cfg: Optional[GAEMConfig] = None,
                logger: Optional[EventLogger] = None,
                workers: Optional[int] = 1) -> GAEMResult:
    """
    Recherche génétique du mélange de MDL minimal

    Args:
        data: Échantillons (M,) ou (M, q)
        cfg: Paramètres GAEM
        logger: Journal (une entrée par génération)
        workers: Workers pour le raffinement EM des enfants

    Returns:
        GAEMResult (modèle élite après polissage EM complet)

    Raises:
        PreconditionError: moins de 5·k_max échantillons
    """
    cfg = cfg or GAEMConfig()
    x = as_samples(data)
    if len(x) < 5 * cfg.k_max:
        raise PreconditionError(f"{len(x)} échantillons pour k_max={cfg.k_max}")
    floor = covariance_floor(x, cfg.polish.covariance_floor)
    pool = WorkerPool(workers, kind="thread")
    span = cfg.k_max - cfg.k_min + 1

    seeds = [initial_model(x, cfg.k_min + i % span, cfg.seed * 1000 + i)
             for i in range(cfg.population_size)]
    refined = pool.map(_refine, [(x, s, cfg.em_steps_per_child, cfg.seed) for s in seeds])
    population = [m for m, _ in refined]
    scores = np.array([s for _, s in refined])

    rows = []

    def record(gen: int):
        best = int(np.argmin(scores))
        rows.append({'generation': gen, 'best_mdl': float(scores[best]),
                     'best_k': population[best].k, 'mean_mdl': float(scores.mean())})
        if logger is not None:
            logger.log_event(gen, EventType.GAEM_GENERATION, population[best].k, "gaem",
                             float(scores[best]))

    record(0)
    for gen in range(1, cfg.generations + 1):
        rng = substream(cfg.seed, "uncertainty/gaem", gen)
        children = []
        while len(children) < cfg.population_size:
            a = population[_tournament(scores, cfg.tournament_size, rng)]
            b = population[_tournament(scores, cfg.tournament_size, rng)]
            if rng.random() < cfg.crossover_prob:
                c1, c2 = crossover(a, b, rng, cfg.k_min, cfg.k_max)
            else:
                c1, c2 = a.copy(), b.copy()
            for child in (c1, c2):
                if rng.random() < cfg.mutation_prob:
                    child = mutate(child, x, rng, cfg.k_min, cfg.k_max, floor)
                children.append(child)
        children = children[:cfg.population_size]
        refined = pool.map(_refine, [(x, c, cfg.em_steps_per_child, cfg.seed) for c in children])

        # (μ + λ) : parents et enfants concourent pour la génération suivante
        merged = population + [m for m, _ in refined]
        merged_scores = np.concatenate([scores, [s for _, s in refined]])
        order = np.argsort(merged_scores, kind='mergesort')[:cfg.population_size]
        population = [merged[i] for i in order]
        scores = merged_scores[order]
        record(gen)

    best = int(np.argmin(scores))
    elite = population[best]
    polished, _ = em_fit(x, elite.k, cfg.polish, init=elite)
    polished_mdl = mdl_score(polished, x)
    if polished_mdl > scores[best]:
        polished, polished_mdl = elite, float(scores[best])

    return GAEMResult(model=polished, mdl=float(polished_mdl),
                      trace=pd.DataFrame(rows), population_k=[m.k for m in population])


def gaem_fit(data, cfg: Optional[GAEMConfig] = None,
             logger: Optional[EventLogger] = None, workers: Optional[int] = 1) -> GMMModel:
    """Modèle élite de la recherche GAEM"""
    return gaem_search(data, cfg, logger, workers).model


def mdl_scan(data, k_values, cfg: Optional[EMConfig] = None) -> pd.DataFrame:
    """
    Ajustement EM pour chaque k et score MDL (référence de sélection de k)

    Returns:
        DataFrame k,loglik,mdl trié par k
    """
    x = as_samples(data)
    rows = []
    for k in k_values:
        model, trace = em_fit(x, int(k), cfg)
        rows.append({'k': int(k), 'loglik': trace[-1], 'mdl': mdl_score(model, x)})
    return pd.DataFrame(rows)
