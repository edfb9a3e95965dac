#!/usr/bin/env python3
"""
Tests unitaires pour le module Grid (modèle, lecture des départs, radialité)
"""

import sys
import tempfile
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.core import (CapacityError, ConfigError, MissingInputError, ParseError,
                      PreconditionError, TopologyError, ValidationError)
from src.grid import (
    Network, SwitchConfig, adjacency_matrix, enumerate_radial_configs, is_radial,
    orient, parse_feeder, uniform_branch, uniform_bus, write_feeder
)
from src.grid.topology import MAX_SWITCHES

FEEDER_DIR = Path(__file__).parent.parent / "data" / "feeders" / "ieee123"

BUS_HEADER = "id,phases,p_a,q_a,p_b,q_b,p_c,q_c,vmin2,vmax2,slack\n"
BRANCH_HEADER = "from,to,r_a,x_a,r_b,x_b,r_c,x_c,imax2,switchable,closed\n"


def triangle() -> Network:
    """Trois barres, trois branches manœuvrables"""
    buses = [uniform_bus(1, is_slack=True, v_min=1.0, v_max=1.0),
             uniform_bus(2, 10.0, 5.0),
             uniform_bus(3, 10.0, 5.0)]
    branches = [uniform_branch(1, 2, 0.01, 0.02, switchable=True),
                uniform_branch(2, 3, 0.01, 0.02, switchable=True),
                uniform_branch(1, 3, 0.01, 0.02, switchable=True, closed=False)]
    return Network(tuple(buses), tuple(branches))


def test_bundled_feeder():
    """Test de lecture du départ 123 barres"""
    print("Test: Départ 123 barres...")

    net = parse_feeder(FEEDER_DIR / "buses.csv", FEEDER_DIR / "branches.csv")
    summary = net.get_summary()
    assert summary['buses'] == 123, f"{summary['buses']} barres"
    assert summary['slack'] == [149]
    assert summary['switchable'] == 4
    base = net.base_config()
    assert base.open_switches() == net.switchable_keys(), "Liaisons de secours fermées"
    assert is_radial(net, base), "Configuration initiale non radiale"
    all_closed = SwitchConfig({key: True for key in net.switchable_keys()})
    assert not is_radial(net, all_closed), "Liaisons fermées déclarées radiales"
    assert enumerate_radial_configs(net) == [base]

    tree = orient(net, base)
    assert tree.order[0] == 149
    assert len(tree.branches) == 122
    assert tree.parent[1] == 149

    sectionalized = parse_feeder(FEEDER_DIR / "buses.csv",
                                 FEEDER_DIR / "branches_sectionalized.csv")
    assert sectionalized.get_summary()['switchable'] == 8
    assert is_radial(sectionalized, sectionalized.base_config())
    assert len(enumerate_radial_configs(sectionalized)) > 1

    print(f"  ✓ {summary['buses']} barres, {summary['branches']} branches, "
          f"{summary['switchable']} liaisons de secours")
    print(f"  ✓ Charge totale {summary['load_kw']:.1f} kW")


class UnionFind:
    """Ensembles disjoints (compression de chemin)"""

    def __init__(self, items):
        self.parent = {i: i for i in items}

    def find(self, i):
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True


def radial_by_union_find(net: Network, cfg: SwitchConfig) -> bool:
    """Forêt couvrante sans cycle, un arbre par slack"""
    uf = UnionFind([b.id for b in net.buses])
    for br in net.closed_branches(cfg):
        if not uf.union(br.from_bus, br.to_bus):
            return False
    roots = {}
    for b in net.buses:
        roots.setdefault(uf.find(b.id), []).append(b.is_slack)
    return all(sum(flags) == 1 for flags in roots.values())


def test_radiality_random_graphs():
    """Test: is_radial coïncide avec un union-find sur des graphes aléatoires"""
    print("Test: Radialité sur graphes aléatoires...")

    rng = np.random.default_rng(2024)
    checked, radial = 0, 0
    for _ in range(200):
        n = int(rng.integers(3, 9))
        n_slack = int(rng.integers(1, 3))
        buses = [uniform_bus(i, 1.0, 0.5, is_slack=i < n_slack) for i in range(n)]
        edges = {(int(rng.integers(0, i)), i) for i in range(n_slack, n)}
        for _ in range(int(rng.integers(0, n))):
            a, b = sorted(int(v) for v in rng.choice(n, size=2, replace=False))
            if (a, b) not in edges and (b, a) not in edges:
                edges.add((a, b))
        edges = sorted(edges)
        switch = rng.random(len(edges)) < 0.6
        branches = [uniform_branch(a, b, 0.01, 0.01, switchable=bool(s))
                    for (a, b), s in zip(edges, switch)]
        try:
            net = Network(tuple(buses), tuple(branches))
        except TopologyError:
            continue
        keys = net.switchable_keys()
        for _ in range(5):
            cfg = SwitchConfig({k: bool(rng.random() < 0.5) for k in keys})
            expected = radial_by_union_find(net, cfg)
            assert is_radial(net, cfg) == expected, \
                f"désaccord sur {[br.key for br in net.branches]}, {cfg.encoding()}"
            checked += 1
            radial += expected

    assert checked > 500 and 0 < radial < checked
    print(f"  ✓ {checked} configurations, {radial} radiales, accord complet")


def test_radiality():
    """Test du critère de radialité et de l'énumération"""
    print("Test: Radialité...")

    net = triangle()
    all_closed = SwitchConfig({(1, 2): True, (2, 3): True, (1, 3): True})
    assert not is_radial(net, all_closed), "Boucle déclarée radiale"
    island = SwitchConfig({(1, 2): True, (2, 3): False, (1, 3): False})
    assert not is_radial(net, island), "Barre isolée déclarée radiale"

    configs = enumerate_radial_configs(net)
    assert [c.encoding() for c in configs] == ['011', '101', '110']

    adj = adjacency_matrix(net, net.base_config())
    assert np.array_equal(adj, adj.T) and np.all(np.diag(adj) == 0)
    assert adj.sum() == 4

    try:
        orient(net, all_closed)
        assert False, "configuration maillée orientée"
    except PreconditionError:
        pass
    try:
        net.closed_branches(SwitchConfig({(1, 2): True}))
        assert False, "configuration incomplète acceptée"
    except ConfigError:
        pass

    print(f"  ✓ {len(configs)} configurations radiales (ordre lexicographique)")


def test_switch_guard():
    """Test de la garde sur le nombre d'interrupteurs"""
    print("Test: Garde combinatoire...")

    n = MAX_SWITCHES + 1
    buses = [uniform_bus(0, is_slack=True)] + [uniform_bus(i) for i in range(1, n + 1)]
    branches = [uniform_branch(i - 1, i, 0.01, 0.01, switchable=True) for i in range(1, n + 1)]
    try:
        enumerate_radial_configs(Network(tuple(buses), tuple(branches)))
        assert False, "énumération au-delà de la garde"
    except CapacityError:
        pass

    print(f"  ✓ Refus au-delà de {MAX_SWITCHES} interrupteurs")


def test_network_validation():
    """Test des invariants du modèle de réseau"""
    print("Test: Validation du réseau...")

    try:
        Network((uniform_bus(1, is_slack=True), uniform_bus(1)), ())
        assert False, "identifiant dupliqué accepté"
    except ValidationError:
        pass
    try:
        Network((uniform_bus(1, is_slack=True),), (uniform_branch(1, 9, 0.01, 0.01),))
        assert False, "branche vers une barre inexistante acceptée"
    except TopologyError:
        pass
    try:
        Network((uniform_bus(1),), ())
        assert False, "réseau sans slack accepté"
    except ValidationError:
        pass
    try:
        Network((uniform_bus(1, is_slack=True), uniform_bus(2), uniform_bus(3)),
                (uniform_branch(1, 2, 0.01, 0.01),))
        assert False, "barre non alimentable acceptée"
    except TopologyError:
        pass
    try:
        Network((uniform_bus(1, is_slack=True), uniform_bus(2), uniform_bus(3, is_slack=True)),
                (uniform_branch(1, 2, 0.01, 0.01), uniform_branch(2, 3, 0.01, 0.01)))
        assert False, "deux slacks reliées par des branches fixes acceptées"
    except TopologyError:
        pass
    two_feeders = Network(
        (uniform_bus(1, is_slack=True), uniform_bus(2), uniform_bus(3, is_slack=True)),
        (uniform_branch(1, 2, 0.01, 0.01),
         uniform_branch(2, 3, 0.01, 0.01, switchable=True, closed=False)))
    assert is_radial(two_feeders, two_feeders.base_config())

    net = triangle().scaled(2.0)
    assert net.bus(2).p('a') == 20.0

    print("  ✓ Doublons, extrémités, slack, îlots")


def test_parse_errors():
    """Test des erreurs de lecture avec numéro de ligne"""
    print("Test: Erreurs de lecture...")

    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        buses = tmp / "buses.csv"
        branches = tmp / "branches.csv"
        buses.write_text(BUS_HEADER
                         + "1,abc,0,0,0,0,0,0,1,1,1\n"
                         + "2,abc,1O,0,0,0,0,0,0.81,1.21,0\n", encoding='utf-8')
        branches.write_text(BRANCH_HEADER
                            + "1,2,0.01,0.02,0.01,0.02,0.01,0.02,9,0,1\n", encoding='utf-8')
        try:
            parse_feeder(buses, branches)
            assert False, "valeur invalide acceptée"
        except ParseError as e:
            assert e.row == 3, f"ligne {e.row} au lieu de 3"

        buses.write_text(BUS_HEADER
                         + "# barre source\n"
                         + "1,abc,0,0,0,0,0,0,1,1,1\n"
                         + "2,abc,10,5,10,5,10,5,0.81,1.21,0\n", encoding='utf-8')
        branches.write_text(BRANCH_HEADER
                            + "1,2,0.01,0.02,0.01,0.02,0.01,0.02,9,0,yes\n", encoding='utf-8')
        try:
            parse_feeder(buses, branches)
            assert False, "drapeau invalide accepté"
        except ParseError as e:
            assert e.row == 2

        try:
            parse_feeder(tmp / "absent.csv", branches)
            assert False, "fichier absent accepté"
        except MissingInputError:
            pass

    print("  ✓ ParseError porte le numéro de ligne du fichier")


def test_write_feeder():
    """Test de l'écriture d'un départ"""
    print("Test: Écriture d'un départ...")

    net = triangle()
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        write_feeder(net, tmp / "buses.csv", tmp / "branches.csv")
        again = parse_feeder(tmp / "buses.csv", tmp / "branches.csv")
    assert again.get_summary() == net.get_summary()
    assert again.base_config() == net.base_config()

    print("  ✓ Relecture identique")


def run_all_tests():
    """Exécute tous les tests"""
    print("\n" + "="*60)
    print("  TESTS MODULE GRID")
    print("="*60 + "\n")

    try:
        test_bundled_feeder()
        print()
        test_radiality()
        print()
        test_radiality_random_graphs()
        print()
        test_switch_guard()
        print()
        test_network_validation()
        print()
        test_parse_errors()
        print()
        test_write_feeder()
        print()

        print("="*60)
        print("  ✓ TOUS LES TESTS RÉUSSIS")
        print("="*60 + "\n")
        return True

    except AssertionError as e:
        print(f"\n✗ ÉCHEC: {e}\n")
        return False
    except Exception as e:
        print(f"\n✗ ERREUR: {e}\n")
        import traceback
        traceback.print_exc()
        return False


if __name__ == '__main__':
    success = run_all_tests()
    sys.exit(0 if success else 1)
