"""
Module Core - Journée d'exploitation à deux niveaux

Ce module implémente:
- Un processus SimPy au poste source qui suit le planning horaire
  (achat day-ahead, renouvelable affecté)
- Un processus SimPy au départ qui, à chaque intervalle de dispatch,
  met les charges à l'échelle du profil horaire, résout l'OPF triphasé
  avec une réserve égale à une part du renouvelable planifié, et cumule
  pertes et coût f_fee
- Le coût total f_sub + β·f_fee et les pertes avec / sans OPF
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from .errors import ConfigError, ValidationError
from .simulation_engine import EventLogger, EventType, OperationEngine
from ..grid.network import Network, SwitchConfig
from ..opf3.unbalanced import (DEFAULT_HEADROOM_SHARE, DEFAULT_INTERVAL_MIN,
                               build_unbalanced_bfm, exactness_report, line_loss,
                               no_opf_loss_kwh, solve_unbalanced_opf)
from ..scheduler.chance import Schedule, total_cost
from ..scheduler.market import MarketPrices
from ..solver.admm import ADMMParams


@dataclass
class OperationReport:
    """Bilan de la journée"""
    intervals: pd.DataFrame
    f_sub: float
    f_fee: float
    beta: float

    @property
    def total_cost(self) -> float:
        return total_cost(self.f_sub, self.f_fee, self.beta)

    @property
    def loss_kwh(self) -> float:
        return float(self.intervals['loss_kwh'].sum())

    @property
    def loss_no_opf_kwh(self) -> float:
        return float(self.intervals['loss_no_opf_kwh'].sum())

    def get_summary(self) -> Dict:
        return {
            'f_sub': self.f_sub,
            'f_fee': self.f_fee,
            'beta': self.beta,
            'total_cost': self.total_cost,
            'loss_kwh': self.loss_kwh,
            'loss_no_opf_kwh': self.loss_no_opf_kwh,
            'intervals': len(self.intervals),
            'all_converged': bool(self.intervals['converged'].all()) if len(self.intervals) else True
        }


class OperationDay:
    """
    Simulation de la journée : planning horaire au poste, OPF au départ
    """

    def __init__(self, network: Network, schedule: Schedule, prices: MarketPrices,
                 load_shape: Optional[Sequence[float]] = None,
                 interval_min: float = DEFAULT_INTERVAL_MIN,
                 headroom_share: float = DEFAULT_HEADROOM_SHARE,
                 beta: float = 1.0,
                 params: Optional[ADMMParams] = None,
                 logger: Optional[EventLogger] = None,
                 renewable_buses: Optional[List[int]] = None,
                 cfg: Optional[SwitchConfig] = None,
                 hours: Optional[Sequence[int]] = None,
                 seed: int = 0):
        """
        Args:
            network: Départ (charges nominales)
            schedule: Planning day-ahead
            prices: Prix horaires (ϱ_RT valorise les pertes)
            load_shape: Facteur de charge horaire (défaut: G_f^DL / moyenne)
            interval_min: Pas de dispatch (min)
            headroom_share: Part du renouvelable planifié laissée au départ
            beta: Poids du coût départ dans le coût total
            params: Paramètres ADMM
            logger: Journal (défaut: celui du moteur)
            renewable_buses: Barres recevant la réserve (défaut: toutes sauf slack)
            cfg: Configuration des interrupteurs
            hours: Heures simulées (défaut: toute la journée)
            seed: Graine du moteur
        """
        if interval_min <= 0 or 60 % interval_min != 0:
            raise ConfigError(f"pas de dispatch invalide: {interval_min} min")
        if not 0 <= headroom_share <= 1:
            raise ConfigError(f"part de réserve hors de [0, 1]: {headroom_share}")
        if beta <= 0:
            raise ConfigError(f"β doit être > 0: {beta}")
        if prices.horizon != schedule.horizon:
            raise ValidationError("horizon des prix différent du planning")

        self.network = network
        self.schedule = schedule
        self.prices = prices
        self.interval_min = float(interval_min)
        self.headroom_share = headroom_share
        self.beta = beta
        self.params = params
        self.cfg = cfg or network.base_config()
        self.hours = list(hours) if hours is not None else list(range(schedule.horizon))
        self.engine = OperationEngine(seed)
        self.logger = logger or self.engine.logger

        if load_shape is None:
            g_dl = np.array([d.g_dl for d in schedule.decisions])
            mean = g_dl.mean()
            load_shape = g_dl / mean if mean > 0 else np.ones_like(g_dl)
        self.load_shape = np.asarray(load_shape, dtype=float)
        if len(self.load_shape) != schedule.horizon or np.any(self.load_shape < 0):
            raise ValidationError("profil de charge invalide")

        if renewable_buses is None:
            renewable_buses = [b.id for b in network.buses if not b.is_slack]
        for bus in renewable_buses:
            network.bus(bus)
        self.renewable_buses = list(renewable_buses)
        self.rows: List[Dict] = []

    def _load_factor(self, minute: float) -> float:
        """Profil horaire interpolé au milieu de chaque heure, périodique"""
        T = len(self.load_shape)
        centers = np.arange(T) + 0.5
        return float(np.interp(minute / 60.0, centers, self.load_shape, period=T))

    def _headroom(self, hour: int) -> Dict[int, float]:
        d = self.schedule.decision(hour)
        g_w = d.g_w if d.feasible else 0.0
        total_kw = self.headroom_share * g_w
        share = total_kw / len(self.renewable_buses) if self.renewable_buses else 0.0
        return {bus: share for bus in self.renewable_buses}

    def _substation(self, env):
        for hour in self.hours:
            if env.now < hour * 60:
                yield env.timeout(hour * 60 - env.now)
            d = self.schedule.decision(hour)
            if d.feasible:
                self.logger.log_event(env.now, EventType.HOUR_SCHEDULED, hour, "substation",
                                      d.g_da, {'g_w': d.g_w, 'cost': d.cost})
            else:
                self.logger.log_event(env.now, EventType.HOUR_INFEASIBLE, hour, "substation")

    def _feeder(self, env):
        steps = int(60 / self.interval_min)
        for hour in self.hours:
            if env.now < hour * 60:
                yield env.timeout(hour * 60 - env.now)
            headroom = self._headroom(hour)
            price = float(self.prices.rho_rt[hour])
            for _ in range(steps):
                minute = env.now
                net = self.network.scaled(self._load_factor(minute + self.interval_min / 2))
                prog = build_unbalanced_bfm(net, None, headroom, price, self.cfg,
                                            self.interval_min)
                res = solve_unbalanced_opf(prog, self.params)
                loss = line_loss(res)
                row = {
                    'minute': minute,
                    'hour': hour,
                    'loss_kwh': loss,
                    'loss_no_opf_kwh': no_opf_loss_kwh(net, None, self.cfg, self.interval_min),
                    'fee_cost': price * loss,
                    'headroom_kw': sum(headroom.values()),
                    'max_gap': exactness_report(res).max_gap,
                    'converged': res.converged,
                    'iterations': res.iterations
                }
                self.rows.append(row)
                self.logger.log_event(minute, EventType.INTERVAL_DISPATCHED, hour, "feeder",
                                      loss, {'fee_cost': row['fee_cost']})
                yield env.timeout(self.interval_min)

    def run(self) -> OperationReport:
        """Déroule la journée et rend le bilan"""
        self.engine.reset()
        self.rows = []
        env = self.engine.env
        env.process(self._substation(env))
        env.process(self._feeder(env))
        if self.hours:
            self.engine.run((max(self.hours) + 1) * 60)

        intervals = pd.DataFrame(self.rows)
        f_sub = float(sum(self.schedule.decision(h).cost for h in self.hours
                          if self.schedule.decision(h).feasible))
        f_fee = float(intervals['fee_cost'].sum()) if len(intervals) else 0.0
        return OperationReport(intervals=intervals, f_sub=f_sub, f_fee=f_fee, beta=self.beta)
