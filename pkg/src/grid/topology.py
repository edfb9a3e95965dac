"""
Module Grid - Topologie et radialité

Ce module implémente:
- La matrice d'adjacence d'une configuration d'interrupteurs
- Le test de radialité (forêt couvrante, un arbre par barre slack)
- L'énumération des configurations radiales admissibles
- L'orientation parent -> enfant d'une configuration radiale
"""

import itertools
from dataclasses import dataclass
from typing import List, Dict, Tuple, Optional

import numpy as np
import networkx as nx

from .network import Network, SwitchConfig, Branch, check_config
from ..core.errors import CapacityError, PreconditionError

MAX_SWITCHES = 30


def build_graph(net: Network, cfg: SwitchConfig) -> nx.Graph:
    """Graphe non orienté des branches fermées"""
    graph = nx.Graph()
    graph.add_nodes_from(b.id for b in net.buses)
    for br in net.closed_branches(cfg):
        graph.add_edge(br.from_bus, br.to_bus, branch=br)
    return graph


def adjacency_matrix(net: Network, cfg: SwitchConfig) -> np.ndarray:
    """
    Matrice d'adjacence 0/1 symétrique, diagonale nulle, indexée dans
    l'ordre des barres du réseau
    """
    n = net.n_buses
    adj = np.zeros((n, n), dtype=int)
    for br in net.closed_branches(cfg):
        i, j = net.index(br.from_bus), net.index(br.to_bus)
        adj[i, j] = 1
        adj[j, i] = 1
    return adj


def is_radial(net: Network, cfg: SwitchConfig) -> bool:
    """
    Radialité : nombre de branches fermées = N - d et chaque barre reliée
    à une barre slack (forêt couvrante, un arbre par slack)
    """
    closed = net.closed_branches(cfg)
    slacks = net.slack_ids()
    if len(closed) != net.n_buses - len(slacks):
        return False

    graph = nx.Graph()
    graph.add_nodes_from(b.id for b in net.buses)
    graph.add_edges_from((br.from_bus, br.to_bus) for br in closed)
    for component in nx.connected_components(graph):
        n_slack = sum(1 for s in slacks if s in component)
        if n_slack != 1:
            return False
    return True


def enumerate_radial_configs(net: Network) -> List[SwitchConfig]:
    """
    Toutes les configurations radiales, ordre lexicographique sur les
    clés d'interrupteurs triées (ouvert < fermé)

    Raises:
        CapacityError: plus de MAX_SWITCHES interrupteurs
    """
    keys = net.switchable_keys()
    if len(keys) > MAX_SWITCHES:
        raise CapacityError(
            f"{len(keys)} interrupteurs: au-delà de la garde ({MAX_SWITCHES})"
        )
    configs = []
    for states in itertools.product((False, True), repeat=len(keys)):
        cfg = SwitchConfig(dict(zip(keys, states)))
        if is_radial(net, cfg):
            configs.append(cfg)
    return configs


@dataclass(frozen=True)
class OrientedBranch:
    """Branche fermée orientée de la barre parent vers la barre enfant"""
    parent: int
    child: int
    branch: Branch

    @property
    def key(self) -> Tuple[int, int]:
        return self.branch.key


@dataclass(frozen=True)
class RadialTree:
    """
    Configuration radiale orientée depuis les slacks : branches dans
    l'ordre BFS, parent de chaque barre non slack, enfants de chaque barre
    """
    order: Tuple[int, ...]
    branches: Tuple[OrientedBranch, ...]
    parent: Dict[int, Optional[int]]
    children: Dict[int, Tuple[int, ...]]

    def upstream_branch(self, bus_id: int) -> Optional[OrientedBranch]:
        for ob in self.branches:
            if ob.child == bus_id:
                return ob
        return None


def orient(net: Network, cfg: SwitchConfig) -> RadialTree:
    """
    Oriente une configuration radiale (parcours en largeur depuis chaque slack)

    Raises:
        PreconditionError: configuration non radiale
    """
    check_config(net, cfg)
    if not is_radial(net, cfg):
        raise PreconditionError(f"configuration non radiale (ouverts: {cfg.label()})")

    graph = build_graph(net, cfg)
    order: List[int] = []
    oriented: List[OrientedBranch] = []
    parent: Dict[int, Optional[int]] = {}
    children: Dict[int, List[int]] = {b.id: [] for b in net.buses}
    for slack in net.slack_ids():
        parent[slack] = None
        order.append(slack)
        for u, v in nx.bfs_edges(graph, slack, sort_neighbors=sorted):
            oriented.append(OrientedBranch(u, v, graph.edges[u, v]['branch']))
            parent[v] = u
            children[u].append(v)
            order.append(v)
    return RadialTree(tuple(order), tuple(oriented), parent,
                      {k: tuple(v) for k, v in children.items()})
