"""
Module Forecast - Optimisation des hyper-paramètres en deux étapes

Ce module implémente:
- Le risque de validation (NRMSE chronologique) d'un triplet (γ, C, ε)
- GTA : parcours exhaustif d'une grille (phase Map parallèle) puis
  sélection des meilleures cellules et de leur voisinage (phase Reduce)
- PSO : raffinement par essaim dans les cellules retenues
  ν ← ν + φ₁θ₁(η_i − α) + φ₂θ₂(η_g − α),  α ← α + ν
"""

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .svr import HyperParams, train_svr, predict_many, _as_features
from ..core.errors import CapacityError, ConfigError, InputError
from ..core.rng import substream
from ..core.simulation_engine import EventLogger, EventType
from ..core.workers import WorkerPool

DEFAULT_SPLIT = 1.0 / 6.0
MAX_GRID_CELLS = 10 ** 6
PARAM_NAMES = ('gamma', 'c', 'epsilon')


def risk(x, y, h: HyperParams, split: float = DEFAULT_SPLIT) -> float:
    """
    Risque de validation : entraînement sur la première fraction (1 − split),
    RMSE sur la suite rapportée à l'écart-type des cibles de validation
    (RMSE brute si ces cibles sont constantes)

    Raises:
        ConfigError: split hors de ]0, 1[
        InputError: moins de 2 points d'entraînement ou de validation vide
    """
    if not 0 < split < 1:
        raise ConfigError(f"split invalide: {split}")
    x = _as_features(x)
    y = np.asarray(y, dtype=float).ravel()
    n = len(y)
    n_val = int(round(n * split))
    n_train = n - n_val
    if n_train < 2 or n_val < 1:
        raise InputError(f"découpage dégénéré: {n_train} entraînement, {n_val} validation")
    model = train_svr(x[:n_train], y[:n_train], h)
    pred = predict_many(model, x[n_train:])
    actual = y[n_train:]
    rmse = float(np.sqrt(np.mean((pred - actual) ** 2)))
    spread = float(np.std(actual))
    return rmse / spread if spread > 0 else rmse


@dataclass(frozen=True)
class ParamRange:
    """Bornes et nombre de pas d'un hyper-paramètre"""
    lower: float
    upper: float
    steps: int
    log: bool = True

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ConfigError(f"bornes invalides [{self.lower}, {self.upper}]")
        if self.steps < 2:
            raise ConfigError(f"au moins 2 pas requis ({self.steps})")
        if self.log and self.lower <= 0:
            raise ConfigError("échelle log: borne inférieure > 0 requise")

    def to_coord(self, value: float) -> float:
        return float(np.log10(value)) if self.log else float(value)

    def from_coord(self, coord: float) -> float:
        return float(10.0 ** coord) if self.log else float(coord)

    def coords(self) -> np.ndarray:
        return np.linspace(self.to_coord(self.lower), self.to_coord(self.upper), self.steps)

    def points(self) -> np.ndarray:
        return np.array([self.from_coord(c) for c in self.coords()])


@dataclass(frozen=True)
class GridSpec:
    """Grille de recherche (γ, C, ε)"""
    gamma: ParamRange = ParamRange(2.0 ** -10, 2.0 ** 4, 8)
    c: ParamRange = ParamRange(2.0 ** -2, 2.0 ** 10, 8)
    epsilon: ParamRange = ParamRange(1e-3, 1e-1, 8)

    def ranges(self) -> Tuple[ParamRange, ParamRange, ParamRange]:
        return (self.gamma, self.c, self.epsilon)

    @property
    def size(self) -> int:
        return self.gamma.steps * self.c.steps * self.epsilon.steps

    def hyper_at(self, index: Tuple[int, int, int]) -> HyperParams:
        values = [r.points()[i] for r, i in zip(self.ranges(), index)]
        return HyperParams(*values)

    @classmethod
    def from_dict(cls, data: Dict) -> 'GridSpec':
        kwargs = {}
        for name in PARAM_NAMES:
            if name in data:
                spec = data[name]
                kwargs[name] = ParamRange(float(spec['lower']), float(spec['upper']),
                                          int(spec['steps']), bool(spec.get('log', True)))
        return cls(**kwargs)


@dataclass
class GTACell:
    """
    Cellule retenue par GTA : centre, risque et bornes locales exprimées
    dans les coordonnées de la grille d'origine
    """
    index: Tuple[int, int, int]
    center: HyperParams
    risk: float
    lower: np.ndarray
    upper: np.ndarray
    grid: GridSpec = field(default_factory=GridSpec)

    def contains(self, h: HyperParams, grid: Optional[GridSpec] = None) -> bool:
        grid = grid or self.grid
        coords = [r.to_coord(v) for r, v in
                  zip(grid.ranges(), (h.gamma, h.c, h.epsilon))]
        return all(lo - 1e-12 <= c <= hi + 1e-12
                   for c, lo, hi in zip(coords, self.lower, self.upper))


def _risk_task(task) -> float:
    x, y, h, split = task
    return risk(x, y, h, split)


def grid_risks(x, y, g: GridSpec, split: float = DEFAULT_SPLIT,
               workers: Optional[int] = None) -> pd.DataFrame:
    """
    Phase Map : risque en chaque point de la grille

    Returns:
        DataFrame (i_gamma, i_c, i_epsilon, gamma, c, epsilon, risk) dans l'ordre
        lexicographique des indices
    """
    if g.size > MAX_GRID_CELLS:
        raise CapacityError(f"grille de {g.size} cellules (max {MAX_GRID_CELLS})")
    x = _as_features(x)
    y = np.asarray(y, dtype=float).ravel()
    indices = list(itertools.product(*(range(r.steps) for r in g.ranges())))
    hypers = [g.hyper_at(idx) for idx in indices]
    risks = WorkerPool(workers, kind="process").map(
        _risk_task, [(x, y, h, split) for h in hypers])
    return pd.DataFrame([{
        'i_gamma': idx[0], 'i_c': idx[1], 'i_epsilon': idx[2],
        'gamma': h.gamma, 'c': h.c, 'epsilon': h.epsilon, 'risk': r
    } for idx, h, r in zip(indices, hypers, risks)])


def gta_search(x, y, g: GridSpec, keep: int = 1, split: float = DEFAULT_SPLIT,
               workers: Optional[int] = None,
               logger: Optional[EventLogger] = None) -> List[GTACell]:
    """
    Parcours exhaustif de la grille et sélection des keep meilleures cellules

    Args:
        x, y: Données d'apprentissage
        g: Grille
        keep: Nombre de cellules retenues
        split: Fraction de validation
        workers: Processus pour la phase Map

    Returns:
        Cellules triées par (risque, indice), bornes = ±1 pas autour du centre

    Raises:
        CapacityError: grille de plus de 10⁶ cellules
    """
    if keep < 1:
        raise ConfigError(f"keep doit être ≥ 1 ({keep})")
    table = grid_risks(x, y, g, split, workers)
    if logger is not None:
        for n, row in table.iterrows():
            logger.log_event(n, EventType.GRID_CELL_EVALUATED,
                             (int(row.i_gamma), int(row.i_c), int(row.i_epsilon)),
                             "gta", float(row.risk),
                             {'gamma': row.gamma, 'c': row.c, 'epsilon': row.epsilon})

    ordered = table.assign(order=np.arange(len(table))).sort_values(
        ['risk', 'order'], kind='mergesort')
    cells = []
    coords = [r.coords() for r in g.ranges()]
    for _, row in ordered.head(keep).iterrows():
        idx = (int(row.i_gamma), int(row.i_c), int(row.i_epsilon))
        lower = np.array([coords[d][max(idx[d] - 1, 0)] for d in range(3)])
        upper = np.array([coords[d][min(idx[d] + 1, len(coords[d]) - 1)] for d in range(3)])
        cells.append(GTACell(idx, g.hyper_at(idx), float(row.risk), lower, upper, g))
    return cells


@dataclass
class Particle:
    """Particule : position α, vitesse ν, meilleure position personnelle η_i"""
    position: np.ndarray
    velocity: np.ndarray
    best_position: np.ndarray
    best_risk: float
    lower: np.ndarray
    upper: np.ndarray


@dataclass
class Swarm:
    """Essaim et meilleure position globale η_g"""
    particles: List[Particle]
    global_best: np.ndarray
    global_risk: float
    phi1: float = 2.0
    phi2: float = 2.0


@dataclass
class PSOResult:
    """Résultat du raffinement : meilleur triplet et trajectoire du risque global"""
    best: HyperParams
    risk: float
    trace: List[float] = field(default_factory=list)
    swarm: Optional[Swarm] = None


def _to_hyper(coords: np.ndarray, g: GridSpec) -> HyperParams:
    return HyperParams(*(r.from_coord(c) for r, c in zip(g.ranges(), coords)))


def pso_search(x, y, cells: Sequence[GTACell], swarm_size: int = 10, iters: int = 10,
               seed: int = 0, grid: Optional[GridSpec] = None,
               phi1: float = 2.0, phi2: float = 2.0, split: float = DEFAULT_SPLIT,
               init_positions: Optional[Sequence[HyperParams]] = None,
               workers: Optional[int] = None,
               logger: Optional[EventLogger] = None) -> PSOResult:
    """
    Essaim particulaire dans les cellules GTA (coordonnées de la grille,
    log10 pour les axes logarithmiques)

    Sans grid explicite, la grille est celle portée par les cellules.

    L'itération 1 est l'évaluation des positions initiales ; vitesse
    initiale nulle, bornée à 20 % de la largeur de cellule ; positions
    ramenées dans leur cellule.

    Raises:
        InputError: aucune cellule
        ConfigError: swarm_size < 2, iters < 1 ou cellules de grilles différentes
    """
    if not cells:
        raise InputError("aucune cellule à raffiner")
    if grid is None:
        grid = cells[0].grid
        if any(cell.grid != grid for cell in cells[1:]):
            raise ConfigError("cellules issues de grilles différentes")
    if swarm_size < 2:
        raise ConfigError(f"swarm_size doit être ≥ 2 ({swarm_size})")
    if iters < 1:
        raise ConfigError(f"iters doit être ≥ 1 ({iters})")
    x = _as_features(x)
    y = np.asarray(y, dtype=float).ravel()
    pool = WorkerPool(workers, kind="process")
    rng = substream(seed, "pso/init")

    positions = []
    bounds = []
    for k in range(swarm_size):
        cell = cells[k % len(cells)]
        bounds.append((cell.lower, cell.upper))
        if init_positions is not None:
            h = init_positions[k % len(init_positions)]
            pos = np.array([r.to_coord(v) for r, v in
                            zip(grid.ranges(), (h.gamma, h.c, h.epsilon))])
            positions.append(np.clip(pos, cell.lower, cell.upper))
        else:
            positions.append(rng.uniform(cell.lower, cell.upper))

    def evaluate(points: List[np.ndarray]) -> List[float]:
        return pool.map(_risk_task, [(x, y, _to_hyper(p, grid), split) for p in points])

    risks = evaluate(positions)
    particles = [Particle(pos.copy(), np.zeros(3), pos.copy(), r, lo, hi)
                 for pos, r, (lo, hi) in zip(positions, risks, bounds)]
    best_k = int(np.argmin([p.best_risk for p in particles]))
    swarm = Swarm(particles, particles[best_k].best_position.copy(),
                  particles[best_k].best_risk, phi1, phi2)
    trace = [swarm.global_risk]
    if logger is not None:
        logger.log_event(1, EventType.PSO_ITERATION, "pso", "pso", swarm.global_risk)

    for it in range(2, iters + 1):
        step_rng = substream(seed, "pso/step", it)
        for p in swarm.particles:
            theta1 = step_rng.uniform(0.0, 1.0, size=3)
            theta2 = step_rng.uniform(0.0, 1.0, size=3)
            p.velocity = (p.velocity
                          + phi1 * theta1 * (p.best_position - p.position)
                          + phi2 * theta2 * (swarm.global_best - p.position))
            vmax = 0.2 * (p.upper - p.lower)
            p.velocity = np.clip(p.velocity, -vmax, vmax)
            p.position = np.clip(p.position + p.velocity, p.lower, p.upper)

        risks = evaluate([p.position for p in swarm.particles])
        for p, r in zip(swarm.particles, risks):
            if r < p.best_risk:
                p.best_risk = r
                p.best_position = p.position.copy()
        best_k = int(np.argmin([p.best_risk for p in swarm.particles]))
        if swarm.particles[best_k].best_risk < swarm.global_risk:
            swarm.global_risk = swarm.particles[best_k].best_risk
            swarm.global_best = swarm.particles[best_k].best_position.copy()
        trace.append(swarm.global_risk)
        if logger is not None:
            logger.log_event(it, EventType.PSO_ITERATION, "pso", "pso", swarm.global_risk)

    return PSOResult(_to_hyper(swarm.global_best, grid), swarm.global_risk, trace, swarm)


def pso_refine(x, y, cells: Sequence[GTACell], swarm_size: int = 10, iters: int = 10,
               seed: int = 0, **kwargs) -> HyperParams:
    """Raffinement PSO ; renvoie le meilleur triplet global"""
    return pso_search(x, y, cells, swarm_size, iters, seed, **kwargs).best


@dataclass
class TuningConfig:
    """Configuration de la recherche en deux étapes"""
    keep: int = 1
    swarm_size: int = 10
    iters: int = 10
    seed: int = 0
    skip_pso: bool = False
    split: float = DEFAULT_SPLIT
    phi1: float = 2.0
    phi2: float = 2.0
    workers: Optional[int] = None

    def __post_init__(self):
        if self.keep < 1:
            raise ConfigError(f"keep doit être ≥ 1 ({self.keep})")
        if not 0 < self.split < 1:
            raise ConfigError(f"split invalide: {self.split}")


@dataclass
class TuningReport:
    """Résultat de optimize_hyperparams (cellules GTA, PSO éventuel)"""
    best: HyperParams
    risk: float
    cells: List[GTACell]
    pso: Optional[PSOResult] = None

    def get_summary(self) -> Dict:
        return {
            **self.best.as_dict(),
            'risk': self.risk,
            'gta_best_risk': self.cells[0].risk,
            'pso_iterations': len(self.pso.trace) if self.pso else 0
        }


def tune(x, y, g: GridSpec, cfg: Optional[TuningConfig] = None,
         logger: Optional[EventLogger] = None) -> TuningReport:
    """GTA puis PSO (ou GTA seul si cfg.skip_pso)"""
    cfg = cfg or TuningConfig()
    cells = gta_search(x, y, g, cfg.keep, cfg.split, cfg.workers, logger)
    if cfg.skip_pso:
        return TuningReport(cells[0].center, cells[0].risk, cells)
    result = pso_search(x, y, cells, cfg.swarm_size, cfg.iters, cfg.seed, grid=g,
                        phi1=cfg.phi1, phi2=cfg.phi2, split=cfg.split,
                        workers=cfg.workers, logger=logger)
    if result.risk <= cells[0].risk:
        return TuningReport(result.best, result.risk, cells, result)
    return TuningReport(cells[0].center, cells[0].risk, cells, result)


def optimize_hyperparams(x, y, g: GridSpec, cfg: Optional[TuningConfig] = None,
                         logger: Optional[EventLogger] = None) -> HyperParams:
    """
    Composition gta_search → pso_refine (centre de la meilleure cellule
    GTA si cfg.skip_pso)
    """
    return tune(x, y, g, cfg, logger).best
