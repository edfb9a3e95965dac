#!/usr/bin/env python3
"""
Tests unitaires pour le module Uncertainty (EM, GAEM, MDL, η)
"""

import sys
import tempfile
from pathlib import Path

import numpy as np
from scipy.stats import norm

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.core import (ConfigError, EventLogger, EventType, MissingInputError,
                      PreconditionError, ValidationError)
from src.core.rng import substream
from src.uncertainty import (
    EMConfig, GAEMConfig, GMMModel, crossover, em_fit, eta_ratio, fit_single_gaussian,
    gaem_search, load_model, mdl_scan, mdl_score, mixture_cdf, mixture_pdf, mixture_quantile,
    model_from_json, moment_match, mutate, normal_model, project, sample, save_model
)


def bimodal(n: int = 1000) -> np.ndarray:
    """Deux modes bien séparés (60 % / 40 %)"""
    rng = np.random.default_rng(0)
    return np.concatenate([rng.normal(-3.0, 0.5, int(0.6 * n)),
                           rng.normal(2.0, 1.0, n - int(0.6 * n))])


def test_em_monotone():
    """Test: la log-vraisemblance EM ne décroît pas"""
    print("Test: EM...")

    data = bimodal()
    logger = EventLogger()
    model, trace = em_fit(data, 2, logger=logger)
    tol = 1e-8 * abs(trace[0])
    assert all(b >= a - tol for a, b in zip(trace, trace[1:])), "Log-vraisemblance décroissante"
    assert logger.count(EventType.EM_ITERATION) == len(trace) - 1

    means = sorted(model.means[:, 0])
    assert abs(means[0] + 3.0) < 0.2 and abs(means[1] - 2.0) < 0.2
    assert abs(model.weights.sum() - 1.0) < 1e-9

    single = fit_single_gaussian(data)
    assert abs(single.means[0, 0] - data.mean()) < 1e-9
    assert mdl_score(model, data) < mdl_score(single, data)

    try:
        em_fit(data[:9], 2)
        assert False, "trop peu d'échantillons accepté"
    except PreconditionError:
        pass

    print(f"  ✓ {len(trace) - 1} itérations, moyennes {means[0]:.2f} / {means[1]:.2f}")


def test_mdl_scan():
    """Test de la sélection de k par MDL"""
    print("Test: Balayage MDL...")

    table = mdl_scan(bimodal(), [1, 2, 3])
    assert list(table.columns) == ['k', 'loglik', 'mdl']
    best_k = int(table.loc[table['mdl'].idxmin(), 'k'])
    assert best_k == 2, f"k retenu {best_k}"

    print(f"  ✓ k = {best_k}")


def test_gaem():
    """Test de la recherche génétique"""
    print("Test: GAEM...")

    data = bimodal(600)
    cfg = GAEMConfig(population_size=8, generations=5, k_max=4, seed=1)
    logger = EventLogger()
    result = gaem_search(data, cfg, logger=logger)

    best = result.trace['best_mdl'].tolist()
    assert len(best) == cfg.generations + 1
    assert all(b <= a + 1e-9 for a, b in zip(best, best[1:])), "MDL élite croissant"
    assert result.mdl <= best[-1] + 1e-9
    assert logger.count(EventType.GAEM_GENERATION) == cfg.generations + 1
    assert cfg.k_min <= result.k <= cfg.k_max
    assert result.mdl < mdl_score(fit_single_gaussian(data), data)

    again = gaem_search(data, cfg, workers=2)
    assert abs(again.mdl - result.mdl) < 1e-9, "GAEM non reproductible"

    try:
        GAEMConfig(k_min=3, k_max=2)
        assert False, "intervalle de k vide accepté"
    except ConfigError:
        pass

    print(f"  ✓ k = {result.k}, MDL {best[0]:.1f} → {result.mdl:.1f}")


def test_genetic_operators():
    """Test: croisement et mutation respectent [k_min, k_max]"""
    print("Test: Opérateurs génétiques...")

    data = bimodal(200).reshape(-1, 1)
    a = GMMModel([0.5, 0.5], [[-3.0], [2.0]], [[[0.25]], [[1.0]]])
    b = GMMModel([0.2, 0.3, 0.5], [[-1.0], [0.0], [1.0]], [[[1.0]], [[1.0]], [[1.0]]])
    rng = substream(5, "test/ga")
    for _ in range(50):
        c1, c2 = crossover(a, b, rng, 1, 3)
        for child in (c1, c2, mutate(c1, data, rng, 1, 3, 1e-6)):
            assert 1 <= child.k <= 3
            assert abs(child.weights.sum() - 1.0) < 1e-9

    print("  ✓ Poids normalisés, k borné")


def test_quantiles_and_moments():
    """Test des quantiles, de l'échantillonnage et des projections"""
    print("Test: Quantiles et moments...")

    assert abs(mixture_quantile(normal_model(0.0, 1.0), 0.975) - 1.959964) < 1e-5
    m = GMMModel([0.6, 0.4], [[-3.0], [2.0]], [[[0.25]], [[1.0]]])
    for p in (0.05, 0.5, 0.95):
        assert abs(mixture_cdf(m, mixture_quantile(m, p)) - p) < 1e-9
    try:
        mixture_quantile(m, 1.0)
        assert False, "p = 1 accepté"
    except ConfigError:
        pass

    draws = sample(m, 20000, seed=3)
    assert abs(draws.mean() - (0.6 * -3.0 + 0.4 * 2.0)) < 0.05

    m2 = GMMModel([0.5, 0.5], [[0.0, 1.0], [2.0, 3.0]],
                  [np.eye(2), 2.0 * np.eye(2)])
    mean, cov = moment_match(m2)
    assert np.allclose(mean, [1.0, 2.0])
    assert np.allclose(cov, [[2.5, 1.0], [1.0, 2.5]])
    proj = project(m2, [1.0, -1.0])
    assert proj.dim == 1 and np.allclose(proj.means[:, 0], [-1.0, -1.0])
    assert np.allclose(proj.covariances[:, 0, 0], [2.0, 4.0])

    print("  ✓ CDF(quantile(p)) = p, moments du mélange")


def test_point_mass_component():
    """Test: composante de variance nulle dans la CDF et la densité"""
    print("Test: Masse ponctuelle...")

    m = GMMModel([0.5, 0.5], [[0.0], [2.0]], [[[1.0]], [[0.0]]])
    grid = np.linspace(-4.0, 4.0, 81)
    density = mixture_pdf(m, grid)
    away = grid != 2.0
    assert not np.any(np.isnan(density)), "densité nan"
    assert np.allclose(density[away], 0.5 * norm.pdf(grid[away]))
    assert np.isinf(mixture_pdf(m, 2.0))
    assert mixture_pdf(m, 3.0) == 0.5 * norm.pdf(3.0)

    assert abs(mixture_cdf(m, 1.999) - 0.5 * norm.cdf(1.999)) < 1e-12
    assert abs(mixture_cdf(m, 2.0) - (0.5 * norm.cdf(2.0) + 0.5)) < 1e-12

    print("  ✓ Densité nulle hors de la masse, saut de CDF en 2")


def test_eta_ratio():
    """Test du ratio de déviation η"""
    print("Test: Ratio η...")

    data = sample(normal_model(0.0, 1.0), 5000, seed=7)
    good = eta_ratio(normal_model(0.0, 1.0), data)
    bad = eta_ratio(normal_model(3.0, 1.0), data)
    assert good < 5.0, f"η = {good:.2f} % pour le vrai modèle"
    assert bad > 50.0 and bad > good

    try:
        eta_ratio(normal_model(0.0, 1.0), data, bins=5)
        assert False, "5 intervalles acceptés"
    except ConfigError:
        pass
    try:
        eta_ratio(normal_model(0.0, 1.0), data[:50])
        assert False, "50 échantillons acceptés"
    except PreconditionError:
        pass

    print(f"  ✓ η = {good:.2f} % (vrai modèle), {bad:.1f} % (modèle décalé)")


def test_model_io():
    """Test de la sérialisation JSON des modèles"""
    print("Test: Modèles JSON...")

    m = GMMModel([0.6, 0.4], [[-3.0], [2.0]], [[[0.25]], [[1.0]]])
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "model.json"
        save_model(m, path)
        again = load_model(path)
        assert np.allclose(again.weights, m.weights) and np.allclose(again.means, m.means)
        try:
            load_model(Path(tmp) / "absent.json")
            assert False, "modèle absent accepté"
        except MissingInputError:
            pass

    for text in ('{"k": 3, "weights": [1.0], "means": [[0.0]], "covariances": [[[1.0]]]}',
                 '{"weights": [0.7, 0.7], "means": [[0.0], [1.0]], '
                 '"covariances": [[[1.0]], [[1.0]]]}',
                 '[1, 2]'):
        try:
            model_from_json(text)
            assert False, f"modèle invalide accepté: {text}"
        except ValidationError:
            pass

    print("  ✓ k, poids et forme validés à la lecture")


def run_all_tests():
    """Exécute tous les tests"""
    print("\n" + "="*60)
    print("  TESTS MODULE UNCERTAINTY")
    print("="*60 + "\n")

    try:
        test_em_monotone()
        print()
        test_mdl_scan()
        print()
        test_gaem()
        print()
        test_genetic_operators()
        print()
        test_quantiles_and_moments()
        print()
        test_point_mass_component()
        print()
        test_eta_ratio()
        print()
        test_model_io()
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
