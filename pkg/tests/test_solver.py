#!/usr/bin/env python3
"""
Tests unitaires pour le module Solver (cônes, programmes, ADMM)
"""

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.core import ConfigError, EventLogger, EventType, ProgramError
from src.solver import (
    ADMMParams, ProgramBuilder, SOC, PSD, admm_solve, project_psd, project_soc,
    rank1_gap, smat, svec, svec_dim
)


def test_soc_projection():
    """Test de la projection sur le cône du second ordre"""
    print("Test: Projection SOC...")

    t, u = project_soc(5.0, [3.0, 4.0])
    assert t == 5.0 and np.allclose(u, [3.0, 4.0]), "Point intérieur modifié"

    t, u = project_soc(0.0, [3.0, 4.0])
    assert abs(t - 2.5) < 1e-12 and np.allclose(u, [1.5, 2.0])
    assert np.linalg.norm(u) <= t + 1e-12

    t, u = project_soc(-5.0, [3.0, 4.0])
    assert t == 0.0 and np.allclose(u, 0.0), "Cône polaire non ramené à 0"

    print("  ✓ Intérieur, extérieur, polaire")


def test_psd_projection():
    """Test de la projection PSD et du ratio de rang"""
    print("Test: Projection PSD...")

    proj = project_psd(np.diag([1.0, -1.0]))
    assert np.allclose(proj, np.diag([1.0, 0.0]))

    rng = np.random.default_rng(0)
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    herm = a + a.conj().T
    proj = project_psd(herm)
    assert np.allclose(proj, proj.conj().T)
    assert np.linalg.eigvalsh(proj).min() >= -1e-10

    v = np.array([1.0, 2.0 - 1.0j, 0.5j])
    assert rank1_gap(np.outer(v, v.conj())) < 1e-10, "Matrice de rang 1 mal détectée"
    assert abs(rank1_gap(np.eye(2)) - 1.0) < 1e-12
    assert rank1_gap(np.zeros((3, 3))) == 0.0

    try:
        project_psd(np.ones((2, 3)))
        assert False, "matrice non carrée acceptée"
    except ProgramError:
        pass

    print("  ✓ Valeurs propres négatives ramenées à 0")
    print("  ✓ λ₂/λ₁ = 0 pour un bloc de rang 1")


def test_svec_isometry():
    """Test de la vectorisation isométrique"""
    print("Test: svec / smat...")

    m = np.array([[2.0, 1.0 + 1.0j], [1.0 - 1.0j, 3.0]])
    v = svec(m)
    assert len(v) == svec_dim(2, hermitian=True) == 4
    assert abs(np.linalg.norm(v) - np.linalg.norm(m)) < 1e-12
    assert np.allclose(smat(v, 2, hermitian=True), m)

    print("  ✓ ‖svec(M)‖ = ‖M‖_F")


def test_program_builder():
    """Test de la construction de programmes"""
    print("Test: ProgramBuilder...")

    pb = ProgramBuilder()
    x = pb.add_variable('x', 2)
    pb.add_equality({x[0]: 1.0, x[1]: 1.0}, 2.0, "somme")
    prog = pb.build()
    assert prog.n == 2 and prog.m == 1
    assert prog.row_labels == ["somme"]

    try:
        pb.set_bounds(x[0], 1.0, 0.0)
        assert False, "bornes vides acceptées"
    except ProgramError:
        pass
    try:
        pb.add_variable('x')
        assert False, "variable dupliquée acceptée"
    except ProgramError:
        pass
    try:
        pb.add_cone(PSD, [0, 1], size=2)
        pb.build()
        assert False, "bloc PSD de mauvaise taille accepté"
    except ProgramError:
        pass

    print("  ✓ Dimensions validées à la construction")


def test_admm_quadratic():
    """Test ADMM: min ½(x² + y²) s.c. x + y = 2"""
    print("Test: ADMM quadratique...")

    pb = ProgramBuilder()
    x = pb.add_variable('x', 2)
    pb.add_quadratic(x[0], 1.0)
    pb.add_quadratic(x[1], 1.0)
    pb.add_equality({x[0]: 1.0, x[1]: 1.0}, 2.0)
    sol = admm_solve(pb.build(), ADMMParams(eps_abs=1e-8, eps_rel=1e-8, max_iter=5000))

    assert sol.converged, "ADMM non convergé"
    assert np.allclose(sol.values['x'], [1.0, 1.0], atol=1e-4)
    assert abs(sol.objective - 1.0) < 1e-4
    assert sol.primal_residual <= sol.primal_threshold
    assert sol.dual_residual <= sol.dual_threshold

    print(f"  ✓ Solution {sol.values['x']} en {sol.iterations} itérations")


def test_admm_bounds_and_soc():
    """Test ADMM: min t s.c. ‖(u₁, u₂)‖ ≤ t, u₁ = 3, u₂ = 4, t ≤ 10"""
    print("Test: ADMM avec cône SOC...")

    pb = ProgramBuilder()
    t = pb.add_variable('t', 1, lb=0.0, ub=10.0)
    u = pb.add_variable('u', 2)
    pb.set_cost(t[0], 1.0)
    pb.add_equality({u[0]: 1.0}, 3.0)
    pb.add_equality({u[1]: 1.0}, 4.0)
    pb.add_cone(SOC, [t[0], u[0], u[1]])
    logger = EventLogger()
    sol = admm_solve(pb.build(), ADMMParams(eps_abs=1e-6, eps_rel=1e-6, max_iter=20000),
                     logger=logger)

    assert sol.converged
    assert abs(sol.values['t'][0] - 5.0) < 1e-2, f"t = {sol.values['t'][0]}"
    assert logger.count(EventType.ADMM_ITERATION) >= 1
    assert list(sol.trace.columns) == ['iter', 'primal_residual', 'dual_residual', 'objective']

    print(f"  ✓ t = {sol.values['t'][0]:.4f}")


def test_admm_iteration_cap():
    """Test: max_iter atteint sans convergence"""
    print("Test: Plafond d'itérations...")

    pb = ProgramBuilder()
    t = pb.add_variable('t', 1)
    u = pb.add_variable('u', 2)
    pb.set_cost(t[0], 1.0)
    pb.add_equality({u[0]: 1.0}, 3.0)
    pb.add_equality({u[1]: 1.0}, 4.0)
    pb.add_cone(SOC, [t[0], u[0], u[1]])
    sol = admm_solve(pb.build(), ADMMParams(max_iter=1))
    assert not sol.converged and sol.iterations == 1

    try:
        ADMMParams(penalty=0.0)
        assert False, "pénalité nulle acceptée"
    except ConfigError:
        pass
    params = ADMMParams().with_overrides(max_iter=7, eps_abs=None)
    assert params.max_iter == 7 and params.eps_abs == 1e-4

    print("  ✓ converged = False, itérations = max_iter")


def run_all_tests():
    """Exécute tous les tests"""
    print("\n" + "="*60)
    print("  TESTS MODULE SOLVER")
    print("="*60 + "\n")

    try:
        test_soc_projection()
        print()
        test_psd_projection()
        print()
        test_svec_isometry()
        print()
        test_program_builder()
        print()
        test_admm_quadratic()
        print()
        test_admm_bounds_and_soc()
        print()
        test_admm_iteration_cap()
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
