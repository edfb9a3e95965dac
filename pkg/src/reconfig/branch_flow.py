"""
Module Reconfig - Construction du modèle de flux de branche

Ce module implémente la mise en équations DistFlow d'une configuration
radiale orientée depuis la slack, commune aux deux études :
- équilibrée (une phase équivalente, relaxation SOC de |S|² ≤ v·l)
- triphasée découplée (un bloc PSD 2×2 [[v, S], [S*, l]] par branche et phase)

Pour la branche k = (i → j) et la phase φ :
    P_k − r_k l_k − Σ_{j→m} P_m + gp_j = p_j
    Q_k − x_k l_k − Σ_{j→m} Q_m + gq_j = q_j
    v_j = v_i − 2(r_k P_k + x_k Q_k) + (r_k² + x_k²) l_k
Objectif : Σ r_k l_k (pu).
"""

from typing import Dict, List, Optional, Tuple

import numpy as np

from ..grid.network import Network
from ..grid.topology import RadialTree
from ..solver.program import ProgramBuilder, ConicProgram, SOC, PSD
from ..solver.cones import SQRT2

# (p, q) en pu par barre
PhaseLoads = Dict[int, Tuple[float, float]]


def loads_from_network(net: Network, phase: str) -> PhaseLoads:
    """Charges (pu) d'une phase lues dans le réseau"""
    return {b.id: (b.p(phase) / net.base_kva, b.q(phase) / net.base_kva)
            for b in net.buses}


def loads_from_kw(net: Network, loads_kw: Dict[int, Tuple[float, float]]) -> PhaseLoads:
    """Conversion kW/kvar -> pu (barres absentes à charge nulle)"""
    return {b.id: (loads_kw.get(b.id, (0.0, 0.0))[0] / net.base_kva,
                   loads_kw.get(b.id, (0.0, 0.0))[1] / net.base_kva)
            for b in net.buses}


def build_branch_flow(net: Network, tree: RadialTree, phases: str,
                      loads: Dict[str, PhaseLoads], cone: str,
                      headroom: Optional[Dict[int, float]] = None) -> ConicProgram:
    """
    Programme conique DistFlow sur l'arbre orienté

    Args:
        net: Réseau
        tree: Configuration radiale orientée
        phases: Phases modélisées (ex: "a" ou "abc")
        loads: Charges pu par phase puis par barre
        cone: SOC (équilibré) ou PSD (triphasé)
        headroom: Borne G_R2 (pu) des injections de contrôle par barre

    Returns:
        ConicProgram ; meta décrit l'indexation des blocs
    """
    headroom = {bus: g for bus, g in (headroom or {}).items() if g > 0}
    bus_order = list(tree.order)
    branches = list(tree.branches)
    slacks = [b for b in bus_order if tree.parent[b] is None]
    control_buses = [b for b in bus_order if b in headroom and tree.parent[b] is not None]
    upstream = {ob.child: k for k, ob in enumerate(branches)}
    downstream: Dict[int, List[int]] = {b: [] for b in bus_order}
    for k, ob in enumerate(branches):
        downstream[ob.parent].append(k)

    pb = ProgramBuilder()
    pb.meta.update({
        'phases': phases,
        'cone': cone,
        'buses': bus_order,
        'branches': [ob.key for ob in branches],
        'parents': [ob.parent for ob in branches],
        'children': [ob.child for ob in branches],
        'slacks': slacks,
        'control_buses': control_buses,
        'base_kva': net.base_kva
    })

    for ph in phases:
        nb = len(branches)
        P = pb.add_variable(f'P_{ph}', nb)
        Q = pb.add_variable(f'Q_{ph}', nb)
        L = pb.add_variable(f'l_{ph}', nb, lb=0.0)
        V = pb.add_variable(f'v_{ph}', len(bus_order))
        P0 = pb.add_variable(f'p0_{ph}', len(slacks))
        Q0 = pb.add_variable(f'q0_{ph}', len(slacks))
        GP = pb.add_variable(f'gp_{ph}', len(control_buses), lb=0.0)
        GQ = pb.add_variable(f'gq_{ph}', len(control_buses), lb=0.0)
        vidx = {bus: V[n] for n, bus in enumerate(bus_order)}

        for n, bus in enumerate(bus_order):
            b = net.bus(bus)
            pb.set_bounds(V[n], b.v_min, b.v_max)
        for n, bus in enumerate(control_buses):
            pb.set_bounds(GP[n], 0.0, headroom[bus])
            pb.set_bounds(GQ[n], 0.0, headroom[bus])
        control_index = {bus: n for n, bus in enumerate(control_buses)}

        for k, ob in enumerate(branches):
            br = ob.branch
            r, x = br.r_phase(ph), br.x_phase(ph)
            pb.set_bounds(L[k], 0.0, br.i_max)
            pb.add_cost(L[k], r)

        phase_loads = loads[ph]
        for bus in bus_order:
            p_load, q_load = phase_loads.get(bus, (0.0, 0.0))
            if tree.parent[bus] is None:
                s = slacks.index(bus)
                row_p = {P0[s]: 1.0}
                row_q = {Q0[s]: 1.0}
            else:
                k = upstream[bus]
                br = branches[k].branch
                row_p = {P[k]: 1.0, L[k]: -br.r_phase(ph)}
                row_q = {Q[k]: 1.0, L[k]: -br.x_phase(ph)}
                if bus in control_index:
                    row_p[GP[control_index[bus]]] = 1.0
                    row_q[GQ[control_index[bus]]] = 1.0
            for m in downstream[bus]:
                row_p[P[m]] = row_p.get(P[m], 0.0) - 1.0
                row_q[Q[m]] = row_q.get(Q[m], 0.0) - 1.0
            pb.add_equality(row_p, p_load, f"bilan_P_{ph}_{bus}")
            pb.add_equality(row_q, q_load, f"bilan_Q_{ph}_{bus}")

        for k, ob in enumerate(branches):
            br = ob.branch
            r, x = br.r_phase(ph), br.x_phase(ph)
            pb.add_equality({vidx[ob.child]: 1.0, vidx[ob.parent]: -1.0,
                             P[k]: 2.0 * r, Q[k]: 2.0 * x, L[k]: -(r * r + x * x)},
                            0.0, f"chute_{ph}_{ob.parent}_{ob.child}")

        # Copies auxiliaires portant les cônes
        if cone == SOC:
            aux = pb.add_variable(f'cone_{ph}', 4 * len(branches))
            for k, ob in enumerate(branches):
                t, u1, u2, u3 = aux[4 * k:4 * k + 4]
                vi = vidx[ob.parent]
                pb.add_equality({t: 1.0, vi: -1.0, L[k]: -1.0}, 0.0)
                pb.add_equality({u1: 1.0, P[k]: -2.0}, 0.0)
                pb.add_equality({u2: 1.0, Q[k]: -2.0}, 0.0)
                pb.add_equality({u3: 1.0, vi: -1.0, L[k]: 1.0}, 0.0)
                pb.add_cone(SOC, (t, u1, u2, u3), label=f"{ph}:{ob.parent}-{ob.child}")
        else:
            aux = pb.add_variable(f'cone_{ph}', 4 * len(branches))
            for k, ob in enumerate(branches):
                a, b, c, d = aux[4 * k:4 * k + 4]
                pb.add_equality({a: 1.0, vidx[ob.parent]: -1.0}, 0.0)
                pb.add_equality({b: 1.0, L[k]: -1.0}, 0.0)
                pb.add_equality({c: 1.0, P[k]: -SQRT2}, 0.0)
                pb.add_equality({d: 1.0, Q[k]: -SQRT2}, 0.0)
                pb.add_cone(PSD, (a, b, c, d), size=2, hermitian=True,
                            label=f"{ph}:{ob.parent}-{ob.child}")

    return pb.build()


def relaxation_gaps(P: np.ndarray, Q: np.ndarray, l: np.ndarray, v_parent: np.ndarray,
                    delta: float = 1e-6) -> np.ndarray:
    """|l·v − |S|²| / max(l·v, δ) par branche"""
    lv = l * v_parent
    return np.abs(lv - (P ** 2 + Q ** 2)) / np.maximum(lv, delta)


def phase_arrays(prog: ConicProgram, z_values: Dict[str, np.ndarray], ph: str):
    """(P, Q, l, v par barre, v du parent par branche) pour une phase"""
    buses = prog.meta['buses']
    pos = {bus: n for n, bus in enumerate(buses)}
    v = z_values[f'v_{ph}']
    v_parent = np.array([v[pos[p]] for p in prog.meta['parents']])
    return (z_values[f'P_{ph}'], z_values[f'Q_{ph}'], z_values[f'l_{ph}'],
            v, v_parent)
