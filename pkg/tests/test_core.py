#!/usr/bin/env python3
"""
Tests unitaires pour le module Core
"""

import sys
from pathlib import Path

import numpy as np

# Ajout du répertoire racine au PYTHONPATH
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.core import (
    EventLogger, EventType, OperationEngine, WorkerPool, resolve_workers, substream,
    ConfigError, InputError, NumericalError, ParseError, MissingInputError,
    DivergenceError, InfeasibleHourError
)
from src.core.operation import OperationDay
from src.grid import Network, uniform_bus, uniform_branch
from src.scheduler import (ChanceParams, ForecastInputs, ScheduleOptions, default_renewable_error,
                           schedule_day, synthetic_day)
from src.solver import ADMMParams


def _square(x):
    return x * x


def test_error_hierarchy():
    """Test de la hiérarchie des erreurs"""
    print("Test: Hiérarchie des erreurs...")

    assert issubclass(ParseError, InputError)
    assert issubclass(MissingInputError, InputError)
    assert issubclass(DivergenceError, NumericalError)
    assert issubclass(InfeasibleHourError, NumericalError)

    err = ParseError("buses.csv", 7, "valeur invalide")
    report = err.to_dict()
    assert report['type'] == 'ParseError'
    assert report['detail'] == {'path': 'buses.csv', 'row': 7}
    assert "ligne 7" in report['error']

    print("  ✓ Familles entrée / numérique")
    print("  ✓ to_dict sérialisable")


def test_substreams():
    """Test des sous-flux aléatoires nommés"""
    print("Test: Sous-flux aléatoires...")

    a = substream(3, "scheduler/hour", 5).standard_normal(4)
    b = substream(3, "scheduler/hour", 5).standard_normal(4)
    c = substream(3, "scheduler/hour", 6).standard_normal(4)
    d = substream(4, "scheduler/hour", 5).standard_normal(4)

    assert np.array_equal(a, b), "Même clé, tirages différents"
    assert not np.array_equal(a, c), "Heures différentes, tirages identiques"
    assert not np.array_equal(a, d), "Graines différentes, tirages identiques"

    print("  ✓ Déterminisme par (graine, nom, indices)")


def test_worker_pool():
    """Test du pool de workers"""
    print("Test: Pool de workers...")

    items = list(range(20))
    serial = WorkerPool(1).map(_square, items)
    threaded = WorkerPool(3, kind="thread").map(_square, items)
    assert serial == [i * i for i in items]
    assert threaded == serial, "Ordre des résultats non préservé"

    try:
        WorkerPool(0)
        assert False, "workers=0 accepté"
    except ConfigError:
        pass
    try:
        WorkerPool(2, kind="gpu")
        assert False, "type de pool inconnu accepté"
    except ConfigError:
        pass

    assert resolve_workers(5) == 5
    print("  ✓ Résultats ordonnés, série = parallèle")


def test_event_logger():
    """Test du journal d'événements"""
    print("Test: Journal d'événements...")

    logger = EventLogger()
    logger.log_event(1, EventType.EM_ITERATION, "em", "uncertainty", -12.5, {'k': 2})
    logger.log_event(2, EventType.EM_ITERATION, "em", "uncertainty", -11.0, {'k': 2})
    logger.log_event(0, EventType.HOUR_SCHEDULED, 3, "scheduler", 400.0)

    assert logger.count(EventType.EM_ITERATION) == 2
    df = logger.get_dataframe(EventType.EM_ITERATION)
    assert len(df) == 2 and list(df['value']) == [-12.5, -11.0]
    summary = logger.get_summary()
    assert summary['total_events'] == 3
    assert summary['hour_scheduled'] == 1

    logger.clear()
    assert logger.get_dataframe().empty

    print("  ✓ Filtrage par type")
    print("  ✓ Résumé par type")


def test_operation_engine():
    """Test du moteur SimPy"""
    print("Test: Moteur d'exploitation...")

    engine = OperationEngine(random_seed=1)
    ticks = []

    def clock(env):
        while True:
            ticks.append(env.now)
            yield env.timeout(15)

    engine.env.process(clock(engine.env))
    engine.run(60)
    assert ticks == [0, 15, 30, 45], f"Horloge inattendue: {ticks}"

    engine.reset()
    assert engine.env.now == 0
    print("  ✓ Pas de 15 min sur une heure")


def _small_feeder() -> Network:
    buses = [uniform_bus(0, phases='abc', v_min=1.0, v_max=1.0, is_slack=True),
             uniform_bus(1, 20.0, 10.0, phases='abc'),
             uniform_bus(2, 15.0, 7.0, phases='abc')]
    branches = [uniform_branch(0, 1, 0.002, 0.004, i_max=9.0),
                uniform_branch(1, 2, 0.003, 0.005, i_max=9.0)]
    return Network(tuple(buses), tuple(branches))


def test_operation_day():
    """Test de la journée d'exploitation à deux niveaux"""
    print("Test: Journée d'exploitation...")

    prices, g_r, g_dl = synthetic_day(seed=0)
    inp = ForecastInputs(g_r, g_dl, default_renewable_error(), (0.0, 0.03 ** 2))
    cp = ChanceParams()
    schedule = schedule_day(inp, prices, cp, ScheduleOptions(n_samples=300))

    day = OperationDay(_small_feeder(), schedule, prices, interval_min=30,
                       params=ADMMParams(eps_abs=1e-5, eps_rel=1e-4, max_iter=20000),
                       hours=[18, 19])
    report = day.run()

    assert len(report.intervals) == 4, "2 heures x 2 intervalles attendus"
    assert list(report.intervals['minute']) == [18 * 60, 18 * 60 + 30, 19 * 60, 19 * 60 + 30]
    assert (report.intervals['loss_kwh'] >= 0).all()
    expected_sub = schedule.decision(18).cost + schedule.decision(19).cost
    assert abs(report.f_sub - expected_sub) < 1e-9
    assert abs(report.total_cost - (report.f_sub + report.f_fee)) < 1e-9
    assert day.logger.count(EventType.INTERVAL_DISPATCHED) == 4

    try:
        OperationDay(_small_feeder(), schedule, prices, interval_min=7)
        assert False, "pas de 7 min accepté"
    except ConfigError:
        pass

    print(f"  ✓ {len(report.intervals)} intervalles, pertes {report.loss_kwh:.4f} kWh")
    print("  ✓ Coût total = f_sub + β·f_fee")


def run_all_tests():
    """Exécute tous les tests"""
    print("\n" + "="*60)
    print("  TESTS MODULE CORE")
    print("="*60 + "\n")

    try:
        test_error_hierarchy()
        print()
        test_substreams()
        print()
        test_worker_pool()
        print()
        test_event_logger()
        print()
        test_operation_engine()
        print()
        test_operation_day()
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
