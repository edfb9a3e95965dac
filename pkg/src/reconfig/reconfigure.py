"""
Module Reconfig - Reconfiguration du réseau

Ce module implémente:
- L'évaluation d'une configuration (construction + résolution OPF)
- Les charges de la fenêtre de reconfiguration, mises à l'échelle du pic
  de demande prévu par la SVR
- La reconfiguration par énumération parallèle des configurations
  radiales et réduction déterministe (argmin, départage lexicographique)
"""

import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from .balanced import BALANCED_PHASE, build_balanced_bfm, solve_balanced_opf
from ..forecast.sliding import ForecastPipeline
from ..forecast.svr import HyperParams
from ..grid.network import Network, SwitchConfig
from ..grid.topology import enumerate_radial_configs, is_radial
from ..solver.admm import ADMMParams
from ..core.errors import GridOptError, ReportError, ValidationError
from ..core.simulation_engine import EventLogger, EventType
from ..core.workers import WorkerPool

DEFAULT_RECONFIG_PARAMS = ADMMParams(max_iter=20000)

Loads = Optional[Dict[int, Tuple[float, float]]]


@dataclass
class ConfigEvaluation:
    """Résultat d'une configuration (loss_kw = nan si non faisable)"""
    config: SwitchConfig
    loss_kw: float
    feasible: bool
    converged: bool = False
    tightness: float = float('nan')
    iterations: int = 0
    reason: str = ""

    def sort_key(self) -> Tuple:
        return (self.loss_kw, self.config.open_switches())


@dataclass
class ReconfigReport:
    """Rapport de reconfiguration"""
    best: ConfigEvaluation
    baseline: ConfigEvaluation
    evaluations: List[ConfigEvaluation]
    workers: int
    wall_time: float = 0.0

    @property
    def reduction_pct(self) -> float:
        base = self.baseline.loss_kw
        if not self.baseline.feasible or base <= 0:
            return 0.0
        return 100.0 * (base - self.best.loss_kw) / base

    def to_frame(self) -> pd.DataFrame:
        """Tableau config_id,open_switches,loss_kw,feasible"""
        return pd.DataFrame([{
            'config_id': ev.config.encoding(),
            'open_switches': ev.config.label(),
            'loss_kw': ev.loss_kw,
            'feasible': ev.feasible
        } for ev in self.evaluations],
            columns=['config_id', 'open_switches', 'loss_kw', 'feasible'])

    def get_summary(self) -> Dict:
        return {
            'baseline_config': self.baseline.config.encoding(),
            'baseline_open': self.baseline.config.label(),
            'baseline_loss_kw': self.baseline.loss_kw,
            'best_config': self.best.config.encoding(),
            'best_open': self.best.config.label(),
            'best_loss_kw': self.best.loss_kw,
            'reduction_pct': self.reduction_pct,
            'candidates': len(self.evaluations),
            'feasible': sum(1 for ev in self.evaluations if ev.feasible),
            'wall_time': self.wall_time,
            'workers': self.workers
        }


@dataclass
class LoadForecast:
    """Charges (kW, kvar) par barre pour la fenêtre de reconfiguration"""
    loads: Dict[int, Tuple[float, float]]
    factor: float
    peak_kw: float = float('nan')
    path: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def get_summary(self) -> Dict:
        return {
            'load_scale': self.factor,
            'forecast_peak_kw': self.peak_kw,
            'forecast_steps': int(len(self.path)),
            'load_kw': float(sum(p for p, _ in self.loads.values()))
        }


def scaled_loads(net: Network, factor: float) -> LoadForecast:
    """
    Charges nominales de la phase équilibrée multipliées par factor

    Raises:
        ValidationError: facteur négatif ou non fini
    """
    if not np.isfinite(factor) or factor < 0:
        raise ValidationError(f"facteur de charge invalide: {factor}")
    loads = {b.id: (b.p(BALANCED_PHASE) * factor, b.q(BALANCED_PHASE) * factor)
             for b in net.buses}
    return LoadForecast(loads, float(factor))


def forecast_loads(net: Network, series, hyper: HyperParams, window: int = 24,
                   horizon: int = 24) -> LoadForecast:
    """
    Prévoit la demande totale du départ et met les charges à l'échelle du pic

    La série est la demande totale (kW) ; le pipeline SVR est entraîné sur
    toute la série puis prolongé de horizon pas. Le rapport pic prévu /
    charge nominale totale multiplie chaque charge de barre.

    Args:
        net: Réseau
        series: Demande totale observée (kW)
        hyper: Hyper-paramètres de la SVR
        window: Fenêtre de retards
        horizon: Longueur de la fenêtre de reconfiguration (pas)

    Raises:
        ValidationError: charge nominale nulle, horizon vide ou pic prévu négatif
    """
    if horizon < 1:
        raise ValidationError(f"horizon invalide: {horizon}")
    nominal = sum(b.p(BALANCED_PHASE) for b in net.buses)
    if nominal <= 0:
        raise ValidationError("charge nominale nulle, mise à l'échelle impossible")
    values = np.asarray(series, dtype=float)
    path = ForecastPipeline(window, hyper).fit(values).predict_path(values, horizon)
    peak = float(np.max(path))
    forecast = scaled_loads(net, peak / nominal)
    forecast.peak_kw = peak
    forecast.path = path
    return forecast


def evaluate_config(net: Network, cfg: SwitchConfig, loads: Loads = None,
                    params: Optional[ADMMParams] = None) -> ConfigEvaluation:
    """
    Construit et résout l'OPF d'une configuration ; une configuration non
    radiale, divergente ou non convergée est marquée non faisable
    """
    params = params or DEFAULT_RECONFIG_PARAMS
    if not is_radial(net, cfg):
        return ConfigEvaluation(cfg, float('nan'), False, reason="non radiale")
    try:
        result = solve_balanced_opf(build_balanced_bfm(net, cfg, loads), params)
    except GridOptError as e:
        return ConfigEvaluation(cfg, float('nan'), False, reason=str(e))
    if not result.converged:
        return ConfigEvaluation(cfg, float('nan'), False, False,
                                result.relaxation_tightness, result.iterations,
                                reason="ADMM non convergé")
    return ConfigEvaluation(cfg, result.total_loss, True, True,
                            result.relaxation_tightness, result.iterations)


def _evaluate_task(task) -> ConfigEvaluation:
    net, cfg, loads, params = task
    return evaluate_config(net, cfg, loads, params)


def reconfigure(net: Network, forecast_loads: Loads = None,
                params: Optional[ADMMParams] = None, workers: Optional[int] = None,
                logger: Optional[EventLogger] = None) -> ReconfigReport:
    """
    Énumère les configurations radiales, les évalue en parallèle et
    retient celle de pertes minimales

    Args:
        net: Réseau
        forecast_loads: Charges prévues (kW, kvar) par barre, tenues constantes sur la fenêtre
        params: Paramètres ADMM
        workers: Nombre de processus
        logger: Journal d'événements

    Raises:
        ReportError: aucune configuration faisable
    """
    start = time.perf_counter()
    params = params or DEFAULT_RECONFIG_PARAMS
    pool = WorkerPool(workers, kind="process")
    configs = enumerate_radial_configs(net)
    evaluations = pool.map(_evaluate_task, [(net, cfg, forecast_loads, params)
                                            for cfg in configs])

    if logger is not None:
        for n, ev in enumerate(evaluations):
            event = EventType.CONFIG_EVALUATED if ev.feasible else EventType.CONFIG_REJECTED
            logger.log_event(n, event, ev.config.encoding(), "reconfig",
                             ev.loss_kw, {'open_switches': ev.config.label(),
                                          'tightness': ev.tightness,
                                          'iterations': ev.iterations,
                                          'reason': ev.reason})

    feasible = [ev for ev in evaluations if ev.feasible]
    if not feasible:
        raise ReportError("aucune configuration faisable")
    best = min(feasible, key=ConfigEvaluation.sort_key)

    base_cfg = net.base_config()
    baseline = next((ev for ev in evaluations if ev.config == base_cfg), None)
    if baseline is None:
        baseline = evaluate_config(net, base_cfg, forecast_loads, params)

    return ReconfigReport(best, baseline, evaluations, pool.workers,
                          time.perf_counter() - start)
