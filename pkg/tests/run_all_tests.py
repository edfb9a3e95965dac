#!/usr/bin/env python3
"""
Script de test global - exécute les fichiers de test module par module,
des couches basses (core, solver, grid) vers le CLI

Usage: python tests/run_all_tests.py [module ...]
"""

import sys
import subprocess
import time
from pathlib import Path

MODULES = [
    "core",
    "solver",
    "grid",
    "forecast",
    "reconfig",
    "opf3",
    "uncertainty",
    "scheduler",
    "analytics",
    "cli"
]


def run_test_file(test_path: Path) -> bool:
    """Exécute un fichier de test dans un processus séparé"""
    result = subprocess.run([sys.executable, str(test_path)],
                            cwd=Path(__file__).parent.parent)
    return result.returncode == 0


def main(selected=None) -> bool:
    """
    Exécute les tests des modules demandés (tous par défaut)

    Returns:
        True si tous les fichiers réussissent
    """
    print("\n" + "="*60)
    print("  EXÉCUTION DE TOUS LES TESTS")
    print("="*60 + "\n")

    tests_dir = Path(__file__).parent
    modules = [m for m in MODULES if not selected or m in selected]
    unknown = set(selected or ()) - set(MODULES)
    if unknown:
        print(f"⚠ Modules inconnus ignorés: {', '.join(sorted(unknown))}\n")

    results = {}
    for module in modules:
        test_path = tests_dir / f"test_{module}.py"
        if not test_path.exists():
            print(f"⚠ {test_path.name} introuvable\n")
            results[module] = (False, 0.0)
            continue
        print(f"Exécution de {test_path.name}...")
        start = time.perf_counter()
        success = run_test_file(test_path)
        results[module] = (success, time.perf_counter() - start)
        if not success:
            print(f"✗ {test_path.name} a échoué\n")

    print("\n" + "="*60)
    print("  RÉSUMÉ DES TESTS")
    print("="*60 + "\n")

    passed = sum(1 for ok, _ in results.values() if ok)
    for module, (ok, elapsed) in results.items():
        status = "✓ RÉUSSI" if ok else "✗ ÉCHOUÉ"
        print(f"  test_{module + '.py':20s} {status:10s} {elapsed:7.1f} s")

    print(f"\n  Total: {passed}/{len(results)} fichiers réussis")
    print("="*60 + "\n")

    return passed == len(results)


if __name__ == '__main__':
    success = main(sys.argv[1:])
    sys.exit(0 if success else 1)
