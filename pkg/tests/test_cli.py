#!/usr/bin/env python3
"""
Tests unitaires pour le module CLI (exécution en lot, manifeste, codes de sortie)
"""

import json
import sys
import tempfile
from pathlib import Path

import pandas as pd

sys.path.insert(0, str(Path(__file__).parent.parent))

from main import main
from src.cli import EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, RunConfig, run
from src.cli.runner import HANDLERS
from src.core import ConfigError
from src.forecast import synthetic_load, write_series
from src.grid import Network, uniform_branch, uniform_bus, write_feeder

QUICK_SCHEDULE = {'n_samples': 200, 'mc_samples': 10000}


def write_loop_feeder(folder: Path, i_max: float = 100.0):
    """Boucle à deux interrupteurs (voir tests de reconfiguration)"""
    buses = [uniform_bus(0, is_slack=True, v_min=1.0, v_max=1.0)]
    buses += [uniform_bus(i, 300.0, 150.0) for i in (1, 2, 3)]
    branches = [uniform_branch(0, 1, 0.01, 0.02, i_max=i_max),
                uniform_branch(1, 2, 0.01, 0.02, i_max=i_max),
                uniform_branch(0, 3, 0.01, 0.02, i_max=i_max, switchable=True),
                uniform_branch(2, 3, 0.01, 0.02, i_max=i_max, switchable=True, closed=False)]
    folder.mkdir(parents=True, exist_ok=True)
    write_feeder(Network(tuple(buses), tuple(branches)),
                 folder / "buses.csv", folder / "branches.csv")
    return {'bus_file': str(folder / "buses.csv"),
            'branch_file': str(folder / "branches.csv")}


def test_schedule_run():
    """Test: planning complet, artefacts et manifeste"""
    print("Test: gridopt schedule...")

    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "schedule"
        cfg = RunConfig(subcommand='schedule', out=str(out), options=QUICK_SCHEDULE)
        status, summary = run(cfg)
        assert status == EXIT_OK, f"code {status}: {summary}"
        for name in ("schedule.csv", "schedule_no_ca.csv", "hour_status.csv",
                     "summary.json", "manifest.json"):
            assert (out / name).exists(), f"{name} absent"
        assert summary['f_sub'] <= summary['f_sub_no_ca']

        manifest = json.loads((out / "manifest.json").read_text(encoding='utf-8'))
        assert manifest['exit_status'] == EXIT_OK
        assert manifest['seed'] == 0 and manifest['workers'] == 1
        assert "schedule.csv" in manifest['artifacts']
        assert 'numpy' in manifest['versions']
        assert manifest['config']['options'] == QUICK_SCHEDULE

    print(f"  ✓ f_sub = {summary['f_sub']:.2f} $, manifeste écrit")


def test_input_errors():
    """Test: entrée absente ou mal formée → code 2 et error.json"""
    print("Test: Erreurs d'entrée...")

    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        out = tmp / "missing"
        cfg = RunConfig(subcommand='schedule', out=str(out),
                        inputs={'prices': str(tmp / "absent.csv")}, options=QUICK_SCHEDULE)
        status, summary = run(cfg)
        assert status == EXIT_INPUT
        assert summary['type'] == 'MissingInputError'
        error = json.loads((out / "error.json").read_text(encoding='utf-8'))
        assert error['type'] == 'MissingInputError'
        manifest = json.loads((out / "manifest.json").read_text(encoding='utf-8'))
        assert manifest['exit_status'] == EXIT_INPUT
        assert manifest['inputs']['prices']['sha256'] is None

        forecasts = tmp / "forecasts.csv"
        forecasts.write_text("hour,g_r,g_dl\n0,10,20\n1,10,x\n", encoding='utf-8')
        cfg = RunConfig(subcommand='schedule', out=str(tmp / "parse"),
                        inputs={'forecasts': str(forecasts)}, options=QUICK_SCHEDULE)
        status, summary = run(cfg)
        assert status == EXIT_INPUT
        assert summary['type'] == 'ParseError' and summary['detail']['row'] == 3

    try:
        RunConfig(subcommand='schedule', tolerances={'rho': 2.0})
        assert False, "tolérance inconnue acceptée"
    except ConfigError:
        pass

    print("  ✓ MissingInputError / ParseError → code 2")


def test_validate_run():
    """Test: validation d'un planning relu depuis schedule.csv"""
    print("Test: gridopt validate...")

    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        status, _ = run(RunConfig(subcommand='schedule', out=str(tmp / "schedule"),
                                  options=QUICK_SCHEDULE))
        assert status == EXIT_OK
        cfg = RunConfig(subcommand='validate', out=str(tmp / "validate"),
                        inputs={'schedule': str(tmp / "schedule" / "schedule.csv")},
                        options={'mc_samples': 20000})
        status, summary = run(cfg)
        assert status == EXIT_OK, f"code {status}: {summary}"
        assert summary['empirical_gamma'] >= summary['gamma'] - 0.005
        assert summary['empirical_alpha'] >= summary['alpha'] - 0.005
        assert isinstance(summary['gamma_met'], bool) and summary['gamma_slack'] > 0
        assert 0 < summary['load_lower_min'] <= summary['empirical_gamma']
        table = pd.read_csv(tmp / "validate" / "validation.csv")
        assert (table['load_lower'] <= table['load_ok']).all()
        report = json.loads((tmp / "validate" / "validation.json").read_text(encoding='utf-8'))
        assert report['confidence'] == 0.95 and 'renewable_lower_min' in report
        gamma_hat = summary['empirical_gamma']

        status, summary = run(RunConfig(subcommand='validate', out=str(tmp / "none")))
        assert status == EXIT_INPUT and summary['type'] == 'MissingInputError'

    print(f"  ✓ γ empirique {gamma_hat:.4f}")


def test_fit_errors_run():
    """Test: ajustement GSM / GMM / GAEM sur échantillons synthétiques"""
    print("Test: gridopt fit-errors...")

    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "fit"
        cfg = RunConfig(subcommand='fit-errors', out=str(out),
                        options={'samples': 400, 'k': 2,
                                 'gaem': {'population_size': 6, 'generations': 2, 'k_max': 3}})
        status, summary = run(cfg)
        assert status == EXIT_OK, f"code {status}: {summary}"
        assert set(summary['eta_pct']) == {'gsm', 'gmm', 'gaem'}
        assert summary['k']['gsm'] == 1 and summary['k']['gmm'] == 2
        for name in ("model_gsm.json", "model_gmm.json", "model_gaem.json", "fit_report.csv"):
            assert (out / name).exists(), f"{name} absent"

    print(f"  ✓ η (%) : {summary['eta_pct']}")


def test_reconfig_determinism():
    """Test: rapport de reconfiguration identique pour 1 et 2 workers"""
    print("Test: Déterminisme multi-workers...")

    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        inputs = write_loop_feeder(tmp / "feeder")
        reports = []
        for workers in (1, 2):
            out = tmp / f"w{workers}"
            status, summary = run(RunConfig(subcommand='reconfig', inputs=inputs,
                                            out=str(out), workers=workers))
            assert status == EXIT_OK, f"code {status}: {summary}"
            reports.append((out / "reconfig.csv").read_bytes())
        assert reports[0] == reports[1], "reconfig.csv dépend du nombre de workers"

        manifest = json.loads((tmp / "w2" / "manifest.json").read_text(encoding='utf-8'))
        assert manifest['workers'] == 2
        assert len(manifest['inputs']['bus_file']['sha256']) == 64

    print("  ✓ reconfig.csv identique octet par octet")


def test_numerical_error():
    """Test: aucune configuration faisable → code 3"""
    print("Test: Échec numérique...")

    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        inputs = write_loop_feeder(tmp / "feeder", i_max=0.01)
        out = tmp / "out"
        status, summary = run(RunConfig(subcommand='reconfig', inputs=inputs, out=str(out),
                                        tolerances={'max_iter': 500}))
        assert status == EXIT_NUMERICAL, f"code {status}"
        assert summary['type'] == 'ReportError'
        assert (out / "error.json").exists()

    print("  ✓ ReportError → code 3")


def test_reconfig_forecast_loads():
    """Test: une série de demande doublée double le pic prévu et accroît les pertes"""
    print("Test: Reconfiguration sur charges prévues...")

    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        inputs = write_loop_feeder(tmp / "feeder")
        base = synthetic_load(days=4, base_kw=450.0, seed=3)
        results = {}
        for factor in (1.0, 2.0):
            series = tmp / f"demand_{factor:g}.csv"
            write_series(base * factor, series)
            out = tmp / f"x{factor:g}"
            status, summary = run(RunConfig(subcommand='reconfig', out=str(out),
                                            inputs={**inputs, 'series': str(series)},
                                            options={'window': 24, 'horizon': 12}))
            assert status == EXIT_OK, f"code {status}: {summary}"
            assert summary['forecast_steps'] == 12
            results[factor] = summary

        ratio = results[2.0]['forecast_peak_kw'] / results[1.0]['forecast_peak_kw']
        assert abs(ratio - 2.0) < 1e-6, f"rapport des pics {ratio}"
        assert abs(results[2.0]['load_scale'] / results[1.0]['load_scale'] - 2.0) < 1e-6
        assert results[2.0]['best_loss_kw'] > 2.0 * results[1.0]['best_loss_kw']

        status, nominal = run(RunConfig(subcommand='reconfig', inputs=inputs,
                                        out=str(tmp / "nominal")))
        assert status == EXIT_OK and nominal['load_scale'] == 1.0
        status, half = run(RunConfig(subcommand='reconfig', inputs=inputs,
                                     out=str(tmp / "half"), options={'load_scale': 0.5}))
        assert status == EXIT_OK
        assert half['best_loss_kw'] < nominal['best_loss_kw']
        assert abs(half['load_kw'] - 0.5 * nominal['load_kw']) < 1e-9

    print(f"  ✓ Pertes {results[1.0]['best_loss_kw']:.3f} → "
          f"{results[2.0]['best_loss_kw']:.3f} kW")


def test_benchmark_identical():
    """Test: rapports identiques quel que soit le nombre de workers du banc"""
    print("Test: gridopt benchmark...")

    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        inputs = write_loop_feeder(tmp / "feeder")
        out = tmp / "bench"
        status, summary = run(RunConfig(subcommand='benchmark', inputs=inputs, out=str(out),
                                        options={'target': 'reconfig'}))
        assert status == EXIT_OK, f"code {status}: {summary}"
        assert summary['identical']
        workers = [row['workers'] for row in summary['timings']]
        assert {1, 2, 4} <= set(workers)
        one = (out / "benchmark" / "workers_1" / "reconfig.csv").read_bytes()
        four = (out / "benchmark" / "workers_4" / "reconfig.csv").read_bytes()
        assert one == four, "reconfig.csv diffère entre 1 et 4 workers"
        assert (out / "benchmark.csv").exists()

        status, summary = run(RunConfig(subcommand='benchmark', out=str(tmp / "loop"),
                                        options={'target': 'benchmark'}))
        assert status == EXIT_INPUT and summary['type'] == 'ConfigError'

    print(f"  ✓ {len(workers)} exécutions, CSV identiques")


def test_unexpected_error():
    """Test: exception hors hiérarchie → code 3 et error.json"""
    print("Test: Erreur inattendue...")

    def broken(cfg, out, logger):
        raise RuntimeError("panne du gestionnaire")

    original = HANDLERS['regress']
    HANDLERS['regress'] = broken
    try:
        with tempfile.TemporaryDirectory() as tmp:
            out = Path(tmp) / "broken"
            status, summary = run(RunConfig(subcommand='regress', out=str(out)))
            assert status == EXIT_NUMERICAL
            assert summary['type'] == 'RuntimeError'
            error = json.loads((out / "error.json").read_text(encoding='utf-8'))
            assert error['error'] == "panne du gestionnaire"
            assert 'RuntimeError' in error['detail']
            manifest = json.loads((out / "manifest.json").read_text(encoding='utf-8'))
            assert manifest['exit_status'] == EXIT_NUMERICAL
    finally:
        HANDLERS['regress'] = original

    print("  ✓ RuntimeError → code 3, error.json écrit")


def test_regress_run():
    """Test: régression sur le jeu synthétique"""
    print("Test: gridopt regress...")

    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "regress"
        status, summary = run(RunConfig(subcommand='regress', out=str(out),
                                        options={'n': 1000}))
        assert status == EXIT_OK
        assert set(summary) == {'OLS', 'FGLS'}
        report = json.loads((out / "regression.json").read_text(encoding='utf-8'))
        assert report['dominant']['FGLS'] == 'setpoint'
        assert (out / "scaling.csv").exists()

    print("  ✓ regression.json, scaling.csv")


def test_main_usage():
    """Test du point d'entrée : usage, configuration JSON"""
    print("Test: main()...")

    for argv in (['inconnu'], ['schedule', '--workers', '0'], []):
        try:
            main(argv)
            assert False, f"usage invalide accepté: {argv}"
        except SystemExit as e:
            assert e.code == EXIT_USAGE

    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        bad = tmp / "bad.json"
        bad.write_text('{"subcommand": "schedule", "colour": 1}', encoding='utf-8')
        assert main(['schedule', '--config', str(bad)]) == EXIT_INPUT

        good = tmp / "regress.json"
        good.write_text(json.dumps({'subcommand': 'regress', 'out': str(tmp / "ignored"),
                                    'options': {'n': 100}}), encoding='utf-8')
        assert main(['regress', '--config', str(good), '--out', str(tmp / "cli")]) == EXIT_OK
        assert (tmp / "cli" / "manifest.json").exists()
        assert not (tmp / "ignored").exists()

    print("  ✓ Codes 1 (usage), 2 (configuration), 0 (succès)")


def run_all_tests():
    """Exécute tous les tests"""
    print("\n" + "="*60)
    print("  TESTS MODULE CLI")
    print("="*60 + "\n")

    try:
        test_schedule_run()
        print()
        test_input_errors()
        print()
        test_validate_run()
        print()
        test_fit_errors_run()
        print()
        test_reconfig_determinism()
        print()
        test_numerical_error()
        print()
        test_reconfig_forecast_loads()
        print()
        test_benchmark_identical()
        print()
        test_unexpected_error()
        print()
        test_regress_run()
        print()
        test_main_usage()
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
