"""
Module OPF3 - OPF triphasé déséquilibré relaxé en SDP

Ce module implémente:
- La construction du programme : par phase et par branche, un bloc
  hermitien 2×2 [[v_parent, S], [S*, l]] contraint PSD (contrainte de
  rang relâchée), bilans linéaires par phase, injections de contrôle
  bornées par la réserve G_R2
- La résolution ADMM, les pertes (kWh) et le coût f_fee = ρ_RT × pertes
- Le rapport d'exactitude (ratio λ₂/λ₁ par bloc)
"""

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple, Union

import numpy as np
import pandas as pd

from ..grid.network import Network, SwitchConfig
from ..grid.topology import orient
from ..reconfig.branch_flow import build_branch_flow, phase_arrays
from ..reconfig.power_flow import sweep_power_flow
from ..solver.program import ConicProgram, PSD
from ..solver.admm import ADMMParams, admm_solve, Solution
from ..solver.cones import smat, rank1_gap
from ..core.errors import ConfigError, PreconditionError
from ..core.simulation_engine import EventLogger

EXACT_TOL = 1e-3
DEFAULT_INTERVAL_MIN = 5.0
DEFAULT_HEADROOM_SHARE = 0.025

BranchKey = Tuple[int, int]
# {bus: {phase: (kW, kvar)}}
PhaseLoadsKW = Dict[int, Dict[str, Tuple[float, float]]]


@dataclass
class OPF3Result:
    """Résultat de l'OPF triphasé (clés (branche, phase) et (barre, phase))"""
    phases: str
    flows: Dict[Tuple[BranchKey, str], complex]
    currents: Dict[Tuple[BranchKey, str], float]
    voltages: Dict[Tuple[int, str], float]
    resistance: Dict[Tuple[BranchKey, str], float]
    blocks: Dict[Tuple[BranchKey, str], np.ndarray]
    base_kva: float
    interval_hours: float
    price: float
    injections: Dict[Tuple[int, str], complex] = field(default_factory=dict)
    children: Dict[BranchKey, int] = field(default_factory=dict)
    converged: bool = True
    iterations: int = 0
    solution: Optional[Solution] = None

    @property
    def loss_pu(self) -> float:
        return float(sum(self.resistance[k] * self.currents[k] for k in self.currents))

    @property
    def line_loss_kwh(self) -> float:
        return line_loss(self)

    @property
    def fee_cost(self) -> float:
        return self.price * self.line_loss_kwh

    @property
    def gaps(self) -> Dict[Tuple[BranchKey, str], float]:
        return {k: rank1_gap(m) for k, m in self.blocks.items()}

    @property
    def exact(self) -> bool:
        return all(g <= EXACT_TOL for g in self.gaps.values())

    def to_frame(self) -> pd.DataFrame:
        """
        Tableau bus,phase,v2,branch_P,branch_Q,l,rank1_gap (branche amont
        de chaque barre, vide pour la slack)
        """
        upstream = {(self.children[key], ph): (key, ph) for key, ph in self.flows}
        gaps = self.gaps
        rows = []
        for (bus, ph), v2 in sorted(self.voltages.items()):
            k = upstream.get((bus, ph))
            if k is not None:
                s = self.flows[k]
                rows.append({'bus': bus, 'phase': ph, 'v2': v2, 'branch_P': s.real,
                             'branch_Q': s.imag, 'l': self.currents[k],
                             'rank1_gap': gaps[k]})
            else:
                rows.append({'bus': bus, 'phase': ph, 'v2': v2, 'branch_P': np.nan,
                             'branch_Q': np.nan, 'l': np.nan, 'rank1_gap': np.nan})
        return pd.DataFrame(rows, columns=['bus', 'phase', 'v2', 'branch_P',
                                           'branch_Q', 'l', 'rank1_gap'])

    def get_summary(self) -> Dict:
        gaps = self.gaps
        return {
            'line_loss_kwh': self.line_loss_kwh,
            'fee_cost': self.fee_cost,
            'exact': self.exact,
            'max_rank1_gap': max(gaps.values()) if gaps else 0.0,
            'converged': self.converged,
            'iterations': self.iterations
        }


@dataclass
class ExactnessReport:
    """Ratios λ₂/λ₁ par bloc (branche, phase)"""
    table: pd.DataFrame
    max_gap: float
    exact: bool


def headroom_map(net: Network, headroom: Union[float, Dict[int, float]]) -> Dict[int, float]:
    """
    Réserve (pu) par barre : un scalaire s'applique à chaque barre non
    slack, un dictionnaire {barre: kW} aux seules barres listées
    """
    if isinstance(headroom, dict):
        for bus, g in headroom.items():
            if g < 0:
                raise ConfigError(f"réserve négative à la barre {bus}")
            net.bus(bus)
        return {bus: g / net.base_kva for bus, g in headroom.items()}
    if headroom < 0:
        raise ConfigError(f"réserve négative: {headroom}")
    return {b.id: headroom / net.base_kva for b in net.buses if not b.is_slack}


def build_unbalanced_bfm(net: Network, loads: Optional[PhaseLoadsKW] = None,
                         headroom: Union[float, Dict[int, float]] = 0.0,
                         price: float = 0.0, cfg: Optional[SwitchConfig] = None,
                         interval_min: float = DEFAULT_INTERVAL_MIN) -> ConicProgram:
    """
    Programme SDP relaxé du flux de branche triphasé

    Args:
        net: Réseau (radial dans la configuration cfg)
        loads: Charges par barre et phase (kW, kvar) ; None = charges du réseau
        headroom: Réserve G_R2 (kW), scalaire ou par barre
        price: Prix temps réel ρ_RT ($/kWh)
        cfg: Configuration (défaut: configuration initiale)
        interval_min: Durée de l'intervalle de dispatch (min)

    Raises:
        PreconditionError: réseau non radial
        ConfigError: réserve négative
    """
    if interval_min <= 0:
        raise ConfigError(f"intervalle invalide: {interval_min}")
    cfg = cfg or net.base_config()
    tree = orient(net, cfg)
    phases = net.phases()
    per_phase = {}
    for ph in phases:
        if loads is None:
            per_phase[ph] = {b.id: (b.p(ph) / net.base_kva, b.q(ph) / net.base_kva)
                             for b in net.buses}
        else:
            per_phase[ph] = {bus: (vals.get(ph, (0.0, 0.0))[0] / net.base_kva,
                                   vals.get(ph, (0.0, 0.0))[1] / net.base_kva)
                             for bus, vals in loads.items()}
    prog = build_branch_flow(net, tree, phases, per_phase, PSD,
                             headroom_map(net, headroom))
    prog.meta.update({'price': float(price), 'interval_hours': interval_min / 60.0,
                      'config': cfg.encoding()})
    return prog


def solve_unbalanced_opf(prog: ConicProgram, params: Optional[ADMMParams] = None,
                         logger: Optional[EventLogger] = None,
                         workers: int = 1) -> OPF3Result:
    """
    Résout le programme triphasé et extrait flux, tensions et blocs PSD

    Raises:
        DivergenceError: propagée depuis le moteur ADMM
    """
    if 'price' not in prog.meta:
        raise PreconditionError("programme non issu de build_unbalanced_bfm")
    sol = admm_solve(prog, params, logger, workers, label="opf3")
    keys = prog.meta['branches']
    buses = prog.meta['buses']
    control = prog.meta['control_buses']

    flows, currents, voltages, resistance, injections = {}, {}, {}, {}, {}
    for ph in prog.meta['phases']:
        P, Q, l, v, _ = phase_arrays(prog, sol.values, ph)
        L_idx = prog.blocks[f'l_{ph}']
        for n, key in enumerate(keys):
            flows[(key, ph)] = complex(P[n], Q[n])
            currents[(key, ph)] = float(l[n])
            resistance[(key, ph)] = float(prog.c[L_idx[n]])
        for n, bus in enumerate(buses):
            voltages[(bus, ph)] = float(v[n])
        gp, gq = sol.values[f'gp_{ph}'], sol.values[f'gq_{ph}']
        for n, bus in enumerate(control):
            injections[(bus, ph)] = complex(gp[n], gq[n])

    by_edge = {(p, c): key for key, p, c in zip(keys, prog.meta['parents'], prog.meta['children'])}
    blocks = {}
    for k, cone in enumerate(prog.cones):
        ph, edge = cone.label.split(':')
        parent, child = (int(s) for s in edge.split('-'))
        key = by_edge[(parent, child)]
        blocks[(key, ph)] = smat(sol.cone_values[k], cone.size, cone.hermitian)

    return OPF3Result(
        phases=prog.meta['phases'],
        flows=flows,
        currents=currents,
        voltages=voltages,
        resistance=resistance,
        blocks=blocks,
        base_kva=prog.meta['base_kva'],
        interval_hours=prog.meta['interval_hours'],
        price=prog.meta['price'],
        injections=injections,
        children=dict(zip(keys, prog.meta['children'])),
        converged=sol.converged,
        iterations=sol.iterations,
        solution=sol
    )


def line_loss(result: OPF3Result) -> float:
    """Pertes Σ r·l sur branches et phases, intégrées sur l'intervalle (kWh)"""
    return result.loss_pu * result.base_kva * result.interval_hours


def exactness_report(result: OPF3Result) -> ExactnessReport:
    """Ratio λ₂/λ₁ par (branche, phase), maximum global et indicateur d'exactitude"""
    rows = [{'branch': f"{key[0]}-{key[1]}", 'phase': ph, 'gap': rank1_gap(m)}
            for (key, ph), m in sorted(result.blocks.items())]
    table = pd.DataFrame(rows, columns=['branch', 'phase', 'gap'])
    max_gap = float(table['gap'].max()) if len(table) else 0.0
    return ExactnessReport(table, max_gap, max_gap <= EXACT_TOL)


def no_opf_loss_kwh(net: Network, loads: Optional[PhaseLoadsKW] = None,
                    cfg: Optional[SwitchConfig] = None,
                    interval_min: float = DEFAULT_INTERVAL_MIN) -> float:
    """
    Pertes sans OPF (réserve nulle) par écoulement de charge exact, phase par phase
    """
    cfg = cfg or net.base_config()
    total_pu = 0.0
    for ph in net.phases():
        phase_loads = None
        if loads is not None:
            phase_loads = {bus: vals.get(ph, (0.0, 0.0)) for bus, vals in loads.items()}
        pf = sweep_power_flow(net, cfg, phase_loads, phase=ph)
        total_pu += pf.loss_pu
    return total_pu * net.base_kva * interval_min / 60.0
