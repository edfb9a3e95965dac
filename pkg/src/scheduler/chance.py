"""
Module Scheduler - Planification day-ahead sous contraintes en chance

Ce module implémente:
- La reformulation déterministe des contraintes en chance (quantile de la
  charge et du renouvelable)
- La résolution horaire : achat day-ahead minimisant le coût moyen
  échantillonné (grille puis recherche bornée, avec revente des surplus
  en action corrective)
- L'assemblage de la journée, le coût total deux niveaux et les parts
  temps réel / day-ahead
- La validation Monte-Carlo des probabilités obtenues et leurs bornes
  binomiales
- La comparaison des modèles d'erreur (GSM / GMM / GAEM)
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from scipy.optimize import minimize_scalar
from scipy.stats import norm

from .market import ChanceParams, ForecastInputs, MarketPrices, ScheduleOptions
from ..analytics.statistics import ConfidenceInterval
from ..core.errors import (ConfigError, InfeasibleHourError, MissingInputError, ParseError,
                           PreconditionError, UndefinedShareError, ValidationError)
from ..core.rng import substream
from ..core.simulation_engine import EventLogger, EventType
from ..core.workers import WorkerPool
from ..uncertainty.gmm import GMMModel, mixture_quantile, moment_match, sample

BALANCE_TOL = 1e-9
SCHEDULE_COLUMNS = ['hour', 'g_da', 'g_w', 'g_rt', 'delta', 'cost']


def _normal_quantile(p: float) -> float:
    if not 0 < p < 1:
        raise ConfigError(f"probabilité hors de ]0, 1[: {p}")
    return float(norm.ppf(p))


def renewable_error_quantile(model: GMMModel, p: float, source: str = 'mixture') -> float:
    """Quantile p de l'erreur relative renouvelable"""
    if source == 'normal':
        mean, cov = moment_match(model)
        return float(mean[0] + np.sqrt(cov[0, 0]) * _normal_quantile(p))
    _normal_quantile(p)
    return mixture_quantile(model, p)


def deterministic_bounds(inp: ForecastInputs, cp: ChanceParams, t: int) -> Tuple[float, float]:
    """
    Bornes déterministes équivalentes aux contraintes en chance

    G_W + G_DA ≥ G_f^DL·(1 + μ₂ + Φ⁻¹(γ)·σ₂)
    G_W ≥ ρ·r1·G_f^R·(1 + q_α(G_err1))⁺

    Returns:
        (borne sur G_W + G_DA, borne sur G_W) en kWh

    Raises:
        ConfigError: γ ou α hors de ]0, 1[
    """
    g_dl = float(inp.g_dl_forecast[t])
    g_r1 = cp.r1_fraction * float(inp.g_r_forecast[t])
    mu2, _ = inp.error_model_l
    load_bound = g_dl * (1.0 + mu2 + _normal_quantile(cp.gamma) * inp.load_error_std)
    q = renewable_error_quantile(inp.renewable_error(t), cp.alpha, cp.quantile_source)
    gw_min = cp.renewable_share * g_r1 * max(1.0 + q, 0.0)
    return load_bound, gw_min


@dataclass
class HourDecision:
    """Décision d'une heure"""
    hour: int
    g_da: float
    g_w: float
    g_rt: float
    delta: int
    cost: float
    g_dl: float
    lower: float
    upper: float
    load_bound: float
    gw_min: float
    status: str = 'ok'
    message: str = ''

    @property
    def feasible(self) -> bool:
        return self.status == 'ok'


def draw_scenarios(inp: ForecastInputs, cp: ChanceParams, t: int, n: int,
                   rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """
    n réalisations (charge L, renouvelable poste R1) de l'heure t

    L = G_f^DL·(1 + e2), R1 = r1·G_f^R·(1 + e1)⁺
    """
    mu2, _ = inp.error_model_l
    e2 = mu2 + inp.load_error_std * rng.standard_normal(n)
    e1 = sample(inp.renewable_error(t), n, rng=rng)
    load = float(inp.g_dl_forecast[t]) * (1.0 + e2)
    r1 = cp.r1_fraction * float(inp.g_r_forecast[t]) * np.maximum(1.0 + e1, 0.0)
    return load, r1


def expected_cost(g_da, load: np.ndarray, r1: np.ndarray,
                  prices: Tuple[float, float, float, float], use_ca: bool) -> np.ndarray:
    """
    Coût moyen échantillonné pour un ou plusieurs achats day-ahead

    coût = ϱ_DA·G_DA + ϱ_R·R1 + ϱ_RT·(G_RT)⁺ − [CA]·ϱ_s·(−G_RT)⁺,
    G_RT = L − G_DA − R1
    """
    rho_da, rho_rt, rho_r, rho_s = prices
    g = np.atleast_1d(np.asarray(g_da, dtype=float))[:, None]
    rt = load[None, :] - g - r1[None, :]
    cost = rho_da * g + rho_r * r1[None, :] + rho_rt * np.maximum(rt, 0.0)
    if use_ca:
        cost = cost - rho_s * np.maximum(-rt, 0.0)
    return cost.mean(axis=1)


def _minimize_interval(lo: float, hi: float, load: np.ndarray, r1: np.ndarray,
                       prices, opts: ScheduleOptions) -> Tuple[float, float]:
    """Grille, recherche bornée puis ajustement sur les points de rupture"""
    f = lambda g: float(expected_cost(g, load, r1, prices, opts.use_ca)[0])
    if hi - lo <= opts.search_tol:
        return lo, f(lo)
    grid = np.linspace(lo, hi, opts.grid_points)
    values = expected_cost(grid, load, r1, prices, opts.use_ca)
    i = int(np.argmin(values))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    res = minimize_scalar(f, bounds=(a, b), method='bounded',
                          options={'xatol': opts.search_tol})

    # Le coût est affine par morceaux et convexe : l'optimum est un point
    # de rupture L − R1 ou une borne de l'intervalle
    breaks = load - r1
    breaks = breaks[(breaks >= a) & (breaks <= b)]
    candidates = np.unique(np.concatenate([[lo, hi, a, b, float(res.x), grid[i]], breaks]))
    cand_values = expected_cost(candidates, load, r1, prices, opts.use_ca)
    j = int(np.argmin(cand_values))
    return float(candidates[j]), float(cand_values[j])


def solve_hour(inp: ForecastInputs, prices: MarketPrices, cp: ChanceParams,
               bounds: Optional[Tuple[float, float]], t: int,
               use_ca: bool = True, n_samples: int = 2000, seed: int = 0,
               opts: Optional[ScheduleOptions] = None) -> HourDecision:
    """
    Achat day-ahead de l'heure t minimisant le coût moyen

    Args:
        inp: Prévisions et modèles d'erreur
        prices: Prix horaires
        cp: Paramètres des contraintes en chance
        bounds: (borne G_W + G_DA, borne G_W), recalculées si None
        t: Heure
        use_ca: Revente des surplus au prix ϱ_s
        n_samples: Nombre de tirages d'erreur
        seed: Graine racine (sous-flux par heure)
        opts: Options complètes (prioritaires sur use_ca/n_samples/seed)

    Returns:
        HourDecision

    Raises:
        InfeasibleHourError: intervalle admissible de G_DA vide
    """
    opts = opts or ScheduleOptions(use_ca=use_ca, n_samples=n_samples, seed=seed)
    load_bound, gw_min = bounds if bounds is not None else deterministic_bounds(inp, cp, t)
    g_dl = float(inp.g_dl_forecast[t])
    g_r = float(inp.g_r_forecast[t])
    r1_model = inp.renewable_error(t)
    mean_err = float(moment_match(r1_model)[0][0])
    g_w = max(gw_min, cp.r1_fraction * g_r * max(1.0 + mean_err, 0.0))
    if opts.gw_max is not None:
        if gw_min > opts.gw_max:
            raise InfeasibleHourError(t, 'chance_renewable', gw_min, opts.gw_max)
        g_w = min(g_w, opts.gw_max)

    lo = max(opts.da_min, load_bound - g_w)
    if opts.da_max is not None:
        hi = opts.da_max
    else:
        mu2, _ = inp.error_model_l
        hi = max(lo, g_dl * (1.0 + mu2 + 6.0 * inp.load_error_std))
    if lo > hi:
        constraint = 'chance_load' if load_bound - g_w >= opts.da_min else 'da_min'
        raise InfeasibleHourError(t, constraint, lo, hi)

    rng = substream(opts.seed, "scheduler/hour", t)
    load, r1 = draw_scenarios(inp, cp, t, opts.n_samples, rng)
    g_da, cost = _minimize_interval(lo, hi, load, r1, prices.at(t), opts)
    g_rt = g_dl - g_da - g_w
    return HourDecision(hour=t, g_da=g_da, g_w=g_w, g_rt=g_rt,
                        delta=int(g_da + g_w <= g_dl + BALANCE_TOL), cost=cost, g_dl=g_dl,
                        lower=lo, upper=hi, load_bound=load_bound, gw_min=gw_min)


def _hour_task(task) -> HourDecision:
    inp, prices, cp, opts, t = task
    try:
        return solve_hour(inp, prices, cp, None, t, opts=opts)
    except InfeasibleHourError as e:
        d = e.detail
        return HourDecision(hour=t, g_da=float('nan'), g_w=float('nan'), g_rt=float('nan'),
                            delta=0, cost=float('nan'), g_dl=float(inp.g_dl_forecast[t]),
                            lower=d['lower'], upper=d['upper'], load_bound=float('nan'),
                            gw_min=float('nan'), status='infeasible', message=e.constraint)


@dataclass
class Schedule:
    """Planning de la journée"""
    decisions: List[HourDecision]
    use_ca: bool
    params: ChanceParams = field(default_factory=ChanceParams)

    @property
    def horizon(self) -> int:
        return len(self.decisions)

    @property
    def feasible(self) -> bool:
        return all(d.feasible for d in self.decisions)

    @property
    def infeasible_hours(self) -> List[int]:
        return [d.hour for d in self.decisions if not d.feasible]

    @property
    def f_sub(self) -> float:
        """Σ coûts horaires des heures résolues"""
        return float(sum(d.cost for d in self.decisions if d.feasible))

    def hourly_costs(self) -> np.ndarray:
        return np.array([d.cost for d in self.decisions])

    def decision(self, t: int) -> HourDecision:
        return self.decisions[t]

    def to_frame(self) -> pd.DataFrame:
        """hour,g_da,g_w,g_rt,delta,cost"""
        return pd.DataFrame([{c: getattr(d, c) for c in SCHEDULE_COLUMNS}
                             for d in self.decisions], columns=SCHEDULE_COLUMNS)

    def status_frame(self) -> pd.DataFrame:
        return pd.DataFrame([{'hour': d.hour, 'status': d.status, 'constraint': d.message,
                              'lower': d.lower, 'upper': d.upper} for d in self.decisions])

    def get_summary(self) -> Dict:
        return {
            'f_sub': self.f_sub,
            'use_ca': self.use_ca,
            'gamma': self.params.gamma,
            'alpha': self.params.alpha,
            'feasible_hours': self.horizon - len(self.infeasible_hours),
            'infeasible_hours': self.infeasible_hours,
            'total_da_kwh': float(np.nansum([d.g_da for d in self.decisions])),
            'total_rt_kwh': float(np.nansum([d.g_rt for d in self.decisions]))
        }


def schedule_day(inp: ForecastInputs, prices: MarketPrices, cp: ChanceParams,
                 opts: Optional[ScheduleOptions] = None,
                 logger: Optional[EventLogger] = None) -> Schedule:
    """
    Planning des T heures, résolues indépendamment

    Une heure infaisable n'interrompt pas la journée : elle est marquée
    "infeasible" dans le planning et journalisée.
    """
    opts = opts or ScheduleOptions()
    inp.check_prices(prices)
    pool = WorkerPool(opts.workers, kind="process")
    decisions = pool.map(_hour_task, [(inp, prices, cp, opts, t) for t in range(inp.horizon)])
    if logger is not None:
        for d in decisions:
            if d.feasible:
                logger.log_event(d.hour, EventType.HOUR_SCHEDULED, d.hour, "scheduler", d.cost,
                                 {'g_da': d.g_da, 'g_w': d.g_w, 'delta': d.delta})
            else:
                logger.log_event(d.hour, EventType.HOUR_INFEASIBLE, d.hour, "scheduler", None,
                                 {'constraint': d.message, 'lower': d.lower, 'upper': d.upper})
    return Schedule(decisions=decisions, use_ca=opts.use_ca, params=cp)


def total_cost(sub: Union[Schedule, float], fee_cost: float, beta: float = 1.0) -> float:
    """
    Coût d'exploitation deux niveaux : f_sub + β·f_fee

    Raises:
        ConfigError: β ≤ 0
    """
    if beta <= 0:
        raise ConfigError(f"β doit être > 0: {beta}")
    f_sub = sub.f_sub if isinstance(sub, Schedule) else float(sub)
    return f_sub + beta * float(fee_cost)


def rt_share(schedule: Schedule, t: int) -> Tuple[float, float]:
    """
    (G_RT / G_DL × 100, (G_DA + G_W) / G_DL × 100)

    Raises:
        UndefinedShareError: charge prévue nulle
    """
    d = schedule.decision(t)
    if d.g_dl <= 0:
        raise UndefinedShareError(f"heure {t}: charge nulle, part indéfinie")
    return d.g_rt / d.g_dl * 100.0, (d.g_da + d.g_w) / d.g_dl * 100.0


def monte_carlo_validate(schedule: Schedule, inp: ForecastInputs, cp: ChanceParams,
                         n: int = 100_000, seed: int = 0,
                         per_hour: bool = False):
    """
    Fréquences empiriques des deux contraintes en chance

    Les tirages sont indépendants de ceux de la planification.

    Returns:
        (γ empirique, α empirique), ou DataFrame par heure si per_hour

    Raises:
        PreconditionError: n < 10⁴
    """
    if n < 10_000:
        raise PreconditionError(f"{n} tirages (minimum 10000)")
    rows = []
    for d in schedule.decisions:
        if not d.feasible:
            continue
        rng = substream(seed, "scheduler/validate", d.hour)
        load, r1 = draw_scenarios(inp, cp, d.hour, n, rng)
        rows.append({'hour': d.hour,
                     'load_ok': float(np.mean(load <= d.g_da + d.g_w)),
                     'renewable_ok': float(np.mean(cp.renewable_share * r1 <= d.g_w))})
    frame = pd.DataFrame(rows, columns=['hour', 'load_ok', 'renewable_ok'])
    if per_hour:
        return frame
    if frame.empty:
        return float('nan'), float('nan')
    return float(frame['load_ok'].mean()), float(frame['renewable_ok'].mean())


def validation_bounds(table: pd.DataFrame, n: int, cp: ChanceParams,
                      confidence: float = 0.95) -> Tuple[pd.DataFrame, Dict]:
    """
    Bornes binomiales d'un tableau par heure de monte_carlo_validate

    Args:
        table: Colonnes hour, load_ok, renewable_ok
        n: Tirages par heure
        cp: Niveaux γ et α visés
        confidence: Niveau des bornes de Clopper-Pearson

    Returns:
        (tableau complété de load_lower et renewable_lower, résumé) ; le
        résumé compare les fréquences moyennes aux niveaux visés diminués
        d'une marge de 3σ binomiale
    """
    out = table.copy()
    for col, bound in (('load_ok', 'load_lower'), ('renewable_ok', 'renewable_lower')):
        out[bound] = [ConfidenceInterval.binomial_lower_bound(int(round(p * n)), n, confidence)
                      for p in out[col]]
    if out.empty:
        return out, {'confidence': confidence, 'gamma_met': False, 'alpha_met': False}
    gamma_slack = ConfidenceInterval.binomial_slack(cp.gamma, n)
    alpha_slack = ConfidenceInterval.binomial_slack(cp.alpha, n)
    summary = {
        'confidence': confidence,
        'load_lower_min': float(out['load_lower'].min()),
        'renewable_lower_min': float(out['renewable_lower'].min()),
        'gamma_slack': gamma_slack,
        'alpha_slack': alpha_slack,
        'gamma_met': bool(out['load_ok'].mean() >= cp.gamma - gamma_slack),
        'alpha_met': bool(out['renewable_ok'].mean() >= cp.alpha - alpha_slack)
    }
    return out, summary


def compare_error_models(inp: ForecastInputs, prices: MarketPrices, cp: ChanceParams,
                         models: Dict[str, GMMModel],
                         opts: Optional[ScheduleOptions] = None) -> pd.DataFrame:
    """
    Coût de la journée pour chaque modèle d'erreur renouvelable

    Returns:
        DataFrame model,f_sub,mean_rt_share,feasible_hours
    """
    rows = []
    for name, model in models.items():
        sched = schedule_day(inp.with_error_model(model), prices, cp, opts)
        shares = [rt_share(sched, d.hour)[0] for d in sched.decisions
                  if d.feasible and d.g_dl > 0]
        rows.append({'model': name, 'f_sub': sched.f_sub,
                     'mean_rt_share': float(np.mean(shares)) if shares else float('nan'),
                     'feasible_hours': sched.horizon - len(sched.infeasible_hours)})
    return pd.DataFrame(rows, columns=['model', 'f_sub', 'mean_rt_share', 'feasible_hours'])


def write_schedule(schedule: Schedule, path: Union[str, Path]):
    """Écrit le CSV hour,g_da,g_w,g_rt,delta,cost"""
    schedule.to_frame().to_csv(path, index=False)


def read_schedule(path: Union[str, Path], inp: ForecastInputs,
                  cp: Optional[ChanceParams] = None, use_ca: bool = True) -> Schedule:
    """
    Relit un CSV hour,g_da,g_w,g_rt,delta,cost ; les charges prévues
    viennent de inp (une ligne vide de g_da marque une heure infaisable)
    """
    path = Path(path)
    if not path.exists():
        raise MissingInputError(str(path))
    df = pd.read_csv(path, comment='#')
    if list(df.columns) != SCHEDULE_COLUMNS:
        raise ParseError(str(path), 1, f"en-tête attendu {','.join(SCHEDULE_COLUMNS)}")
    if len(df) != inp.horizon:
        raise ValidationError(f"{path}: {len(df)} heures pour un horizon de {inp.horizon}")
    decisions = []
    for t, rec in enumerate(df.itertuples(index=False)):
        feasible = np.isfinite(rec.g_da)
        decisions.append(HourDecision(
            hour=int(rec.hour), g_da=float(rec.g_da), g_w=float(rec.g_w), g_rt=float(rec.g_rt),
            delta=int(rec.delta) if feasible else 0, cost=float(rec.cost),
            g_dl=float(inp.g_dl_forecast[t]), lower=float('nan'), upper=float('nan'),
            load_bound=float('nan'), gw_min=float('nan'),
            status='ok' if feasible else 'infeasible'))
    return Schedule(decisions=decisions, use_ca=use_ca, params=cp or ChanceParams())
