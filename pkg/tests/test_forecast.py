#!/usr/bin/env python3
"""
Tests unitaires pour le module Forecast (SVR, GTA + PSO, fenêtres glissantes)
"""

import sys
import tempfile
import warnings
from pathlib import Path

import numpy as np
import pandas as pd

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.core import ConfigError, EventLogger, EventType, InputError, ParseError
from src.forecast import (
    ForecastPipeline, GridSpec, HyperParams, ParamRange, TuningConfig, error_metrics,
    forecast_sliding, grid_risks, gta_search, make_windows, predict, predict_many,
    pso_search, read_series, synthetic_load, train_svr, tune, write_series
)

SMALL_GRID = GridSpec(gamma=ParamRange(0.01, 1.0, 3),
                      c=ParamRange(1.0, 100.0, 3),
                      epsilon=ParamRange(0.001, 0.1, 2))


def _sine(n: int = 60):
    x = np.linspace(0, 2 * np.pi, n).reshape(-1, 1)
    return x, np.sin(x).ravel()


def test_svr_fit():
    """Test de l'entraînement SMO"""
    print("Test: Entraînement SVR...")

    x, y = _sine()
    model = train_svr(x, y, HyperParams(gamma=1.0, c=10.0, epsilon=0.01))
    assert model.converged, "SMO non convergé"
    assert model.max_violation <= 1e-3
    residual = np.abs(predict_many(model, x) - y).max()
    assert residual < 0.1, f"Erreur d'entraînement {residual:.3f}"
    assert abs(predict(model, [np.pi / 2]) - 1.0) < 0.1

    stats = model.get_stats()
    assert stats['support_vectors'] == len(model.dual_coeffs)

    print(f"  ✓ {stats['support_vectors']} vecteurs de support, violation KKT "
          f"{model.max_violation:.2e}")


def test_svr_wide_tube():
    """Test: ε plus large que l'étendue des cibles → aucun vecteur de support"""
    print("Test: Tube ε large...")

    x = np.arange(10, dtype=float).reshape(-1, 1)
    y = 0.1 * np.sin(x).ravel()
    model = train_svr(x, y, HyperParams(gamma=0.5, c=1.0, epsilon=1.0))
    assert len(model.dual_coeffs) == 0
    pred = predict_many(model, x)
    assert np.allclose(pred, pred[0]), "Prédiction non constante"

    print("  ✓ Modèle constant")


def test_svr_errors():
    """Test des erreurs de la SVR"""
    print("Test: Erreurs SVR...")

    for bad in [(0.0, 1.0, 0.1), (1.0, -1.0, 0.1), (1.0, 1.0, -0.1), (np.nan, 1.0, 0.1)]:
        try:
            HyperParams(*bad)
            assert False, f"hyper-paramètres {bad} acceptés"
        except ConfigError:
            pass

    x, y = _sine(20)
    model = train_svr(x, y, HyperParams(1.0, 1.0, 0.05))
    try:
        predict(model, [1.0, 2.0])
        assert False, "dimension incorrecte acceptée"
    except InputError:
        pass
    try:
        train_svr(x[:5], y[:4], HyperParams(1.0, 1.0, 0.05))
        assert False, "tailles incohérentes acceptées"
    except InputError:
        pass

    print("  ✓ ConfigError / InputError")


def test_windows():
    """Test de la construction des fenêtres"""
    print("Test: Fenêtres de retards...")

    values = np.arange(10, dtype=float)
    x, y = make_windows(values, 3, differenced=False)
    assert x.shape == (7, 3) and np.array_equal(x[0], [0, 1, 2]) and y[0] == 3

    x, y = make_windows(values, 3)
    assert np.array_equal(x[0], [-2, -1, 0]) and y[0] == 1.0

    try:
        make_windows(values, 10)
        assert False, "fenêtre ≥ longueur acceptée"
    except InputError:
        pass

    print("  ✓ (s[t−w:t] − s[t−1], s[t] − s[t−1])")


def test_sliding_forecast():
    """Test des prévisions glissantes sur une série synthétique"""
    print("Test: Prévisions glissantes...")

    series = synthetic_load(days=6, seed=1)
    pipeline = ForecastPipeline(24, HyperParams(0.05, 20.0, 0.01))
    frame = forecast_sliding(pipeline, series, horizon=1)
    assert list(frame.columns) == ['origin', 'horizon_step', 'predicted', 'actual']
    assert len(frame) == 144 - 120

    mape, nrmse, skipped = error_metrics(frame['predicted'], frame['actual'])
    assert skipped == 0
    assert mape < 15.0, f"MAPE {mape:.2f} %"

    frame3 = forecast_sliding(pipeline, series, horizon=3, start=120)
    assert len(frame3) == (144 - 3 + 1 - 120) * 3
    assert set(frame3['horizon_step']) == {1, 2, 3}

    print(f"  ✓ MAPE {mape:.2f} %, NRMSE {nrmse:.2f} %")


def test_error_metrics():
    """Test des métriques d'erreur"""
    print("Test: MAPE / NRMSE...")

    mape, nrmse, skipped = error_metrics([1.1, 1.8, 3.0], [1.0, 2.0, 3.0])
    assert abs(mape - 100 * (0.1 + 0.1 + 0.0) / 3) < 1e-9
    assert skipped == 0

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        mape, _, skipped = error_metrics([0.5, 2.0], [0.0, 2.0])
    assert skipped == 1 and mape == 0.0
    assert len(caught) == 1

    print("  ✓ Valeurs réelles nulles ignorées avec avertissement")


def test_gta_search():
    """Test de la recherche exhaustive sur grille"""
    print("Test: GTA...")

    x, y = make_windows(synthetic_load(days=3, seed=2).values, 6, scale=50.0)
    logger = EventLogger()
    cells = gta_search(x, y, SMALL_GRID, keep=2, logger=logger)
    table = grid_risks(x, y, SMALL_GRID)

    assert len(cells) == 2
    assert cells[0].risk <= cells[1].risk
    assert abs(cells[0].risk - table['risk'].min()) < 1e-12
    assert logger.count(EventType.GRID_CELL_EVALUATED) == SMALL_GRID.size
    assert cells[0].contains(cells[0].center, SMALL_GRID)

    parallel = gta_search(x, y, SMALL_GRID, keep=2, workers=2)
    assert [c.index for c in parallel] == [c.index for c in cells], \
        "Résultat dépendant du nombre de workers"

    print(f"  ✓ Meilleure cellule {cells[0].index}, risque {cells[0].risk:.4f}")


def test_pso_refinement():
    """Test du raffinement PSO"""
    print("Test: PSO...")

    x, y = make_windows(synthetic_load(days=3, seed=2).values, 6, scale=50.0)
    cells = gta_search(x, y, SMALL_GRID, keep=2)
    result = pso_search(x, y, cells, swarm_size=4, iters=5, seed=3, grid=SMALL_GRID)

    assert len(result.trace) == 5
    assert all(b <= a for a, b in zip(result.trace, result.trace[1:])), \
        "Risque global croissant"
    assert any(c.contains(result.best, SMALL_GRID) for c in cells)

    again = pso_search(x, y, cells, swarm_size=4, iters=5, seed=3, grid=SMALL_GRID)
    assert again.trace == result.trace, "PSO non reproductible"

    report = tune(x, y, SMALL_GRID, TuningConfig(keep=2, swarm_size=4, iters=3, seed=3))
    assert report.risk <= cells[0].risk
    skip = tune(x, y, SMALL_GRID, TuningConfig(keep=1, skip_pso=True))
    assert skip.best == cells[0].center and skip.pso is None

    try:
        pso_search(x, y, [], swarm_size=4)
        assert False, "aucune cellule acceptée"
    except InputError:
        pass

    print(f"  ✓ Risque {result.trace[0]:.4f} → {result.trace[-1]:.4f}")


def test_pso_linear_grid():
    """Test: raffinement sur grille linéaire sans grille explicite"""
    print("Test: PSO sur grille linéaire...")

    linear = GridSpec(gamma=ParamRange(0.05, 0.5, 3, log=False),
                      c=ParamRange(5.0, 50.0, 3, log=False),
                      epsilon=ParamRange(0.005, 0.05, 2, log=False))
    x, y = make_windows(synthetic_load(days=3, seed=2).values, 6, scale=50.0)
    cells = gta_search(x, y, linear, keep=2)
    assert all(cell.grid == linear for cell in cells)

    result = pso_search(x, y, cells, swarm_size=4, iters=4, seed=5)
    explicit = pso_search(x, y, cells, swarm_size=4, iters=4, seed=5, grid=linear)
    assert result.trace == explicit.trace and result.best == explicit.best
    assert any(cell.contains(result.best) for cell in cells)
    for r, value in zip(linear.ranges(), (result.best.gamma, result.best.c, result.best.epsilon)):
        assert r.lower - 1e-12 <= value <= r.upper + 1e-12, f"{value} hors de [{r.lower}, {r.upper}]"

    mixed = cells[:1] + gta_search(x, y, SMALL_GRID, keep=1)
    try:
        pso_search(x, y, mixed, swarm_size=4, iters=2)
        assert False, "cellules de grilles différentes acceptées"
    except ConfigError:
        pass

    print(f"  ✓ γ={result.best.gamma:.3f}, C={result.best.c:.2f}, ε={result.best.epsilon:.4f}")


def test_series_io():
    """Test de lecture des séries"""
    print("Test: Lecture de séries...")

    series = synthetic_load(days=1)
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "load.csv"
        write_series(series, path)
        again = read_series(path)
        assert len(again) == 24
        assert np.allclose(again.values, series.values)
        assert isinstance(again.index, pd.DatetimeIndex)

        bad = Path(tmp) / "bad.csv"
        bad.write_text("timestamp,value\n2024-06-03T00:00:00,1.0\nhier,2.0\n", encoding='utf-8')
        try:
            read_series(bad)
            assert False, "horodatage invalide accepté"
        except ParseError as e:
            assert e.row == 3

    print("  ✓ Horodatages ISO-8601, ParseError avec ligne")


def run_all_tests():
    """Exécute tous les tests"""
    print("\n" + "="*60)
    print("  TESTS MODULE FORECAST")
    print("="*60 + "\n")

    try:
        test_svr_fit()
        print()
        test_svr_wide_tube()
        print()
        test_svr_errors()
        print()
        test_windows()
        print()
        test_sliding_forecast()
        print()
        test_error_metrics()
        print()
        test_gta_search()
        print()
        test_pso_refinement()
        print()
        test_pso_linear_grid()
        print()
        test_series_io()
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
