"""
Écoulement de charge exact (balayage aval/amont des équations DistFlow)
sur une configuration radiale. Sert de référence sans OPF et de
validation des solutions relaxées.
"""

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from ..grid.network import Network, SwitchConfig
from ..grid.topology import orient

BranchKey = Tuple[int, int]


@dataclass
class PowerFlowResult:
    """Résultat du balayage (pu, pertes en kW)"""
    v: Dict[int, float]
    P: Dict[BranchKey, float]
    Q: Dict[BranchKey, float]
    l: Dict[BranchKey, float]
    loss_pu: float
    loss_kw: float
    converged: bool
    iterations: int


def sweep_power_flow(net: Network, cfg: SwitchConfig,
                     loads: Optional[Dict[int, Tuple[float, float]]] = None,
                     phase: str = 'a',
                     injections: Optional[Dict[int, Tuple[float, float]]] = None,
                     v_slack: Optional[float] = None,
                     tol: float = 1e-10, max_iter: int = 100) -> PowerFlowResult:
    """
    Balayage aval/amont

    Args:
        net: Réseau
        cfg: Configuration radiale
        loads: Charges (kW, kvar) par barre ; None = charges de la phase du réseau
        phase: Phase dont on lit impédances et charges
        injections: Injections (kW, kvar) retranchées des charges
        v_slack: Tension au carré imposée à la slack (défaut: 1.0 ramenée dans ses bornes)
        tol: Critère d'arrêt sur la variation des tensions
        max_iter: Nombre maximal de balayages

    Returns:
        PowerFlowResult (converged False si le balayage diverge)
    """
    tree = orient(net, cfg)
    base = net.base_kva
    if loads is None:
        loads = {b.id: (b.p(phase), b.q(phase)) for b in net.buses}
    injections = injections or {}
    p = {b.id: (loads.get(b.id, (0.0, 0.0))[0] - injections.get(b.id, (0.0, 0.0))[0]) / base
         for b in net.buses}
    q = {b.id: (loads.get(b.id, (0.0, 0.0))[1] - injections.get(b.id, (0.0, 0.0))[1]) / base
         for b in net.buses}

    v = {}
    for bus in tree.order:
        if tree.parent[bus] is None:
            b = net.bus(bus)
            v[bus] = float(np.clip(1.0 if v_slack is None else v_slack, b.v_min, b.v_max))
    for bus in tree.order:
        if bus not in v:
            v[bus] = v[tree.parent[bus]]

    branches = list(tree.branches)
    P = {ob.key: 0.0 for ob in branches}
    Q = {ob.key: 0.0 for ob in branches}
    L = {ob.key: 0.0 for ob in branches}
    by_child = {ob.child: ob for ob in branches}
    converged = False
    it = 0

    for it in range(1, max_iter + 1):
        change = 0.0
        # Balayage amont : flux depuis les feuilles
        for ob in reversed(branches):
            key = ob.key
            r, x = ob.branch.r_phase(phase), ob.branch.x_phase(phase)
            p_down = p[ob.child] + sum(P[by_child[c].key] for c in tree.children[ob.child])
            q_down = q[ob.child] + sum(Q[by_child[c].key] for c in tree.children[ob.child])
            l_prev = (P[key] ** 2 + Q[key] ** 2) / v[ob.parent]
            new_p = p_down + r * l_prev
            new_q = q_down + x * l_prev
            change = max(change, abs(new_p - P[key]), abs(new_q - Q[key]))
            P[key], Q[key] = new_p, new_q
            L[key] = (new_p ** 2 + new_q ** 2) / v[ob.parent]

        # Balayage aval : tensions
        for ob in branches:
            key = ob.key
            r, x = ob.branch.r_phase(phase), ob.branch.x_phase(phase)
            new_v = v[ob.parent] - 2.0 * (r * P[key] + x * Q[key]) + (r * r + x * x) * L[key]
            change = max(change, abs(new_v - v[ob.child]))
            v[ob.child] = new_v
        if not all(np.isfinite(val) and val > 0 for val in v.values()):
            break
        if change <= tol:
            converged = True
            break

    loss = sum(ob.branch.r_phase(phase) * L[ob.key] for ob in branches)
    return PowerFlowResult(v, P, Q, L, float(loss), float(loss * base), converged, it)
