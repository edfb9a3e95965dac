"""
Module CLI - Exécution des pipelines et émission des rapports

Ce module implémente:
- Un gestionnaire par sous-commande (lecture des entrées, calcul,
  écriture des CSV/JSON)
- Le manifeste d'exécution (empreintes des entrées, graine,
  versions, durée, configuration)
- La traduction des erreurs en codes de sortie et en error.json
- Le banc de mesure multi-workers
"""

import hashlib
import json
import platform
import time
import traceback
from pathlib import Path
from typing import Callable, Dict, List, Tuple

import numpy as np
import pandas as pd

from .config import DATA_DIR, RunConfig
from ..core.errors import GridOptError, InputError, NumericalError
from ..core.simulation_engine import EventLogger, EventType
from ..core.workers import max_workers
from ..grid.feeder_io import parse_feeder
from ..solver.admm import ADMMParams

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_NUMERICAL = 3

DEFAULT_FEEDER = DATA_DIR / "feeders" / "ieee123"
VERSION_PACKAGES = ('numpy', 'scipy', 'pandas', 'networkx', 'statsmodels', 'simpy')

Artifacts = List[Path]
Handler = Callable[[RunConfig, Path, EventLogger], Tuple[Dict, Artifacts]]


def _write_json(path: Path, data) -> Path:
    path.write_text(json.dumps(data, indent=2, default=_json_default), encoding='utf-8')
    return path


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    return str(obj)


def _write_csv(path: Path, frame: pd.DataFrame) -> Path:
    frame.to_csv(path, index=False, float_format='%.10g')
    return path


def _admm_params(cfg: RunConfig, base: ADMMParams = None) -> ADMMParams:
    base = base or ADMMParams()
    return base.with_overrides(**cfg.tolerances)


def _feeder(cfg: RunConfig):
    bus_file = cfg.input_path('bus_file', DEFAULT_FEEDER / "buses.csv")
    branch_file = cfg.input_path('branch_file', DEFAULT_FEEDER / "branches.csv")
    return parse_feeder(bus_file, branch_file,
                        base_kv=cfg.option('base_kv', 4.16),
                        base_kva=cfg.option('base_kva', 1000.0))


def _series(cfg: RunConfig):
    from ..forecast import read_series, synthetic_load
    path = cfg.input_path('series')
    if path is not None:
        return read_series(path)
    return synthetic_load(days=cfg.option('days', 14), seed=cfg.seed)


def _hyper(cfg: RunConfig):
    from ..forecast import HyperParams
    h = cfg.option('hyper', {'gamma': 0.05, 'c': 20.0, 'epsilon': 0.01})
    return HyperParams(float(h['gamma']), float(h['c']), float(h['epsilon']))


def _tuning(cfg: RunConfig, values: np.ndarray, window: int, logger: EventLogger):
    from ..forecast import ForecastPipeline, GridSpec, TuningConfig, tune
    pipeline = ForecastPipeline(window, _hyper(cfg))
    x, y = pipeline.training_set(values)
    grid = GridSpec.from_dict(cfg.option('grid', {}))
    tcfg = TuningConfig(keep=cfg.option('keep', 1), swarm_size=cfg.option('swarm_size', 10),
                        iters=cfg.option('iters', 10), seed=cfg.seed,
                        skip_pso=cfg.option('skip_pso', False), workers=cfg.workers)
    return tune(x, y, grid, tcfg, logger)


def handle_forecast(cfg: RunConfig, out: Path, logger: EventLogger):
    from ..forecast import ForecastPipeline, error_metrics, forecast_sliding
    from ..forecast.sliding import DEFAULT_TRAIN_SHARE
    series = _series(cfg)
    window = int(cfg.option('window', 24))
    horizon = int(cfg.option('horizon', 1))
    values = np.asarray(series, dtype=float)
    train_end = int(len(values) * DEFAULT_TRAIN_SHARE)
    hyper = _hyper(cfg)
    if cfg.option('tune', False):
        hyper = _tuning(cfg, values[:train_end], window, logger).best
    pipeline = ForecastPipeline(window, hyper).fit(values[:train_end])
    frame = forecast_sliding(pipeline, series, horizon, start=train_end)
    first = frame[frame['horizon_step'] == 1]
    mape, nrmse, skipped = error_metrics(first['predicted'], first['actual'])
    summary = {'mape': mape, 'nrmse': nrmse, 'skipped_zero_actuals': skipped,
               'window': window, 'horizon': horizon, **hyper.as_dict(),
               'train_samples': train_end, 'origins': int(len(first))}
    artifacts = [_write_csv(out / "forecast.csv", frame),
                 _write_json(out / "forecast.json", summary)]
    if cfg.visualize:
        from ..analytics import Visualizer
        artifacts.append(Path(Visualizer(str(out / "figures")).plot_forecast(frame)))
    return summary, artifacts


def handle_tune(cfg: RunConfig, out: Path, logger: EventLogger):
    from ..forecast.sliding import DEFAULT_TRAIN_SHARE
    values = np.asarray(_series(cfg), dtype=float)
    window = int(cfg.option('window', 24))
    report = _tuning(cfg, values[:int(len(values) * DEFAULT_TRAIN_SHARE)], window, logger)
    cells = pd.DataFrame([{'i_gamma': c.index[0], 'i_c': c.index[1], 'i_epsilon': c.index[2],
                           **c.center.as_dict(), 'risk': c.risk} for c in report.cells])
    trace = report.pso.trace if report.pso else []
    summary = report.get_summary()
    artifacts = [_write_csv(out / "gta_cells.csv", cells),
                 _write_csv(out / "pso_trace.csv",
                            pd.DataFrame({'iteration': np.arange(1, len(trace) + 1),
                                          'global_best_risk': trace})),
                 _write_json(out / "tuning.json", summary)]
    if cfg.visualize and trace:
        from ..analytics import Visualizer
        artifacts.append(Path(Visualizer(str(out / "figures")).plot_pso_trace(trace)))
    return summary, artifacts


def _reconfig_loads(cfg: RunConfig, net):
    """Charges prévues si une série est fournie, sinon nominales × load_scale"""
    from ..forecast import read_series
    from ..reconfig import forecast_loads, scaled_loads
    path = cfg.input_path('series')
    if path is None:
        return scaled_loads(net, float(cfg.option('load_scale', 1.0)))
    forecast = forecast_loads(net, read_series(path), _hyper(cfg),
                              int(cfg.option('window', 24)),
                              int(cfg.option('horizon', 24)))
    scale = float(cfg.option('load_scale', 1.0))
    if scale != 1.0:
        peak, path_kw = forecast.peak_kw, forecast.path
        forecast = scaled_loads(net, forecast.factor * scale)
        forecast.peak_kw, forecast.path = peak * scale, path_kw * scale
    return forecast


def handle_reconfig(cfg: RunConfig, out: Path, logger: EventLogger):
    from ..reconfig import DEFAULT_RECONFIG_PARAMS, reconfigure
    net = _feeder(cfg)
    loads = _reconfig_loads(cfg, net)
    report = reconfigure(net, loads.loads, _admm_params(cfg, DEFAULT_RECONFIG_PARAMS),
                         cfg.workers, logger)
    summary = {**report.get_summary(), **loads.get_summary()}
    artifacts = [_write_csv(out / "reconfig.csv", report.to_frame()),
                 _write_json(out / "reconfig.json", summary)]
    return summary, artifacts


def handle_opf3(cfg: RunConfig, out: Path, logger: EventLogger):
    from ..opf3 import build_unbalanced_bfm, exactness_report, no_opf_loss_kwh, \
        solve_unbalanced_opf
    net = _feeder(cfg)
    interval = float(cfg.option('interval_min', 5.0))
    headroom = cfg.option('headroom_kw', 0.0)
    if isinstance(headroom, dict):
        headroom = {int(k): float(v) for k, v in headroom.items()}
    prog = build_unbalanced_bfm(net, None, headroom, float(cfg.option('price', 0.1)),
                                None, interval)
    result = solve_unbalanced_opf(prog, _admm_params(cfg), logger, cfg.workers)
    report = exactness_report(result)
    summary = {**result.get_summary(),
               'loss_no_opf_kwh': no_opf_loss_kwh(net, None, None, interval)}
    artifacts = [_write_csv(out / "opf3.csv", result.to_frame()),
                 _write_csv(out / "exactness.csv", report.table),
                 _write_json(out / "opf3.json", summary)]
    if result.solution is not None and result.solution.trace is not None:
        artifacts.append(_write_csv(out / "admm_trace.csv", result.solution.trace))
        if cfg.visualize:
            from ..analytics import Visualizer
            artifacts.append(Path(Visualizer(str(out / "figures")).plot_admm_convergence(
                result.solution.trace)))
    return summary, artifacts


def _error_samples(cfg: RunConfig) -> np.ndarray:
    from ..core.errors import ParseError, MissingInputError
    from ..uncertainty import sample
    from ..scheduler import default_renewable_error
    path = cfg.input_path('errors')
    if path is None:
        return sample(default_renewable_error(), int(cfg.option('samples', 2000)), cfg.seed)
    if not path.exists():
        raise MissingInputError(str(path))
    df = pd.read_csv(path, comment='#')
    if 'error' not in df.columns:
        raise ParseError(str(path), 1, "colonne 'error' attendue")
    values = pd.to_numeric(df['error'], errors='coerce')
    if values.isna().any():
        raise ParseError(str(path), int(values.isna().values.argmax()) + 2, "erreur non numérique")
    return values.values


def handle_fit_errors(cfg: RunConfig, out: Path, logger: EventLogger):
    from ..uncertainty import (EMConfig, GAEMConfig, em_fit, eta_ratio, fit_single_gaussian,
                               gaem_search, mdl_score, save_model)
    data = _error_samples(cfg)
    k = int(cfg.option('k', 3))
    gsm = fit_single_gaussian(data)
    gmm, _ = em_fit(data, k, EMConfig(seed=cfg.seed), logger=logger)
    gaem_opts = dict(cfg.option('gaem', {}))
    gaem = gaem_search(data, GAEMConfig(seed=cfg.seed, **gaem_opts), logger, cfg.workers)
    models = {'gsm': gsm, 'gmm': gmm, 'gaem': gaem.model}
    eta = {name: eta_ratio(m, data) for name, m in models.items()}
    summary = {'samples': int(len(data)),
               'eta_pct': eta,
               'mdl': {name: mdl_score(m, data) for name, m in models.items()},
               'k': {name: m.k for name, m in models.items()}}
    artifacts = []
    for name, m in models.items():
        path = out / f"model_{name}.json"
        save_model(m, path)
        artifacts.append(path)
    artifacts += [_write_csv(out / "fit_report.csv", gaem.fit_report()),
                  _write_json(out / "fit_errors.json", summary)]
    if cfg.visualize:
        from ..analytics import Visualizer
        from ..uncertainty import mixture_pdf
        grid = np.linspace(data.min(), data.max(), 400)
        dens = {name.upper(): mixture_pdf(m, grid) for name, m in models.items()}
        artifacts.append(Path(Visualizer(str(out / "figures")).plot_gmm_fit(data, dens, grid)))
    return summary, artifacts


def _schedule_inputs(cfg: RunConfig):
    from ..scheduler import (ChanceParams, ForecastInputs, default_renewable_error,
                             read_forecasts, read_prices, synthetic_day)
    from ..uncertainty import load_model
    prices_path = cfg.input_path('prices')
    forecasts_path = cfg.input_path('forecasts')
    if prices_path is None or forecasts_path is None:
        prices, g_r, g_dl = synthetic_day(cfg.seed)
    if prices_path is not None:
        prices = read_prices(prices_path)
    if forecasts_path is not None:
        g_r, g_dl = read_forecasts(forecasts_path)
    model_path = cfg.input_path('error_model')
    model = load_model(model_path) if model_path is not None else default_renewable_error()
    load_err = cfg.option('load_error', [0.0, 0.03 ** 2])
    inp = ForecastInputs(g_r, g_dl, model, (float(load_err[0]), float(load_err[1])))
    cp = ChanceParams(gamma=cfg.gamma, alpha=cfg.alpha, renewable_share=cfg.rho,
                      r1_fraction=cfg.option('r1_fraction', 0.975),
                      quantile_source=cfg.option('quantile_source', 'mixture'))
    return prices, inp, cp


def _schedule_options(cfg: RunConfig):
    from ..scheduler import ScheduleOptions
    return ScheduleOptions(use_ca=cfg.option('use_ca', True),
                           n_samples=int(cfg.option('n_samples', 2000)),
                           seed=cfg.seed, da_max=cfg.option('da_max'),
                           workers=cfg.workers)


def handle_schedule(cfg: RunConfig, out: Path, logger: EventLogger):
    from ..scheduler import monte_carlo_validate, schedule_day, total_cost, write_schedule
    prices, inp, cp = _schedule_inputs(cfg)
    opts = _schedule_options(cfg)
    sched = schedule_day(inp, prices, cp, opts, logger)
    no_ca = schedule_day(inp, prices, cp, opts.without_ca())
    n_mc = int(cfg.option('mc_samples', 100_000))
    gamma_hat, alpha_hat = monte_carlo_validate(sched, inp, cp, n_mc, cfg.seed + 1)
    fee = float(cfg.option('fee_cost', 0.0))
    summary = {**sched.get_summary(),
               'f_sub_no_ca': no_ca.f_sub,
               'total_cost': total_cost(sched, fee, cfg.beta),
               'validation': {'empirical_gamma': gamma_hat, 'empirical_alpha': alpha_hat,
                              'samples': n_mc}}
    path = out / "schedule.csv"
    write_schedule(sched, path)
    artifacts = [path, _write_csv(out / "schedule_no_ca.csv", no_ca.to_frame()),
                 _write_csv(out / "hour_status.csv", sched.status_frame()),
                 _write_json(out / "summary.json", summary)]
    if cfg.visualize:
        from ..analytics import Visualizer
        artifacts.append(Path(Visualizer(str(out / "figures")).plot_hourly_costs(
            sched.to_frame(), no_ca.to_frame())))
    return summary, artifacts


def handle_validate(cfg: RunConfig, out: Path, logger: EventLogger):
    from ..core.errors import MissingInputError
    from ..scheduler import monte_carlo_validate, read_schedule, validation_bounds
    prices, inp, cp = _schedule_inputs(cfg)
    path = cfg.input_path('schedule')
    if path is None:
        raise MissingInputError("inputs.schedule")
    sched = read_schedule(path, inp, cp)
    n_mc = int(cfg.option('mc_samples', 100_000))
    table = monte_carlo_validate(sched, inp, cp, n_mc, cfg.seed, per_hour=True)
    gamma_hat, alpha_hat = monte_carlo_validate(sched, inp, cp, n_mc, cfg.seed)
    table, bounds = validation_bounds(table, n_mc, cp, float(cfg.option('confidence', 0.95)))
    summary = {'empirical_gamma': gamma_hat, 'empirical_alpha': alpha_hat,
               'gamma': cp.gamma, 'alpha': cp.alpha, 'samples': n_mc, **bounds}
    artifacts = [_write_csv(out / "validation.csv", table),
                 _write_json(out / "validation.json", summary)]
    return summary, artifacts


def handle_regress(cfg: RunConfig, out: Path, logger: EventLogger):
    from ..analytics import (compare_scaling, fgls_fit, ols_fit, read_regression_csv,
                             synthetic_regression, write_fit_report)
    path = cfg.input_path('regression')
    data = read_regression_csv(path) if path is not None else \
        synthetic_regression(int(cfg.option('n', 500)), cfg.seed)
    table = compare_scaling(data)
    if cfg.option('normalize', True):
        data = data.normalized()
    fits = [ols_fit(data), fgls_fit(data)]
    report_path = out / "regression.json"
    write_fit_report(fits, report_path)
    summary = {f.method: f.to_dict() for f in fits}
    return summary, [report_path, _write_csv(out / "scaling.csv", table)]


def handle_operate(cfg: RunConfig, out: Path, logger: EventLogger):
    from ..core.operation import OperationDay
    from ..scheduler import schedule_day
    prices, inp, cp = _schedule_inputs(cfg)
    sched = schedule_day(inp, prices, cp, _schedule_options(cfg), logger)
    net = _feeder(cfg)
    day = OperationDay(net, sched, prices,
                       interval_min=float(cfg.option('interval_min', 60.0)),
                       headroom_share=float(cfg.option('headroom_share', 0.025)),
                       beta=cfg.beta, params=_admm_params(cfg), logger=logger,
                       hours=cfg.option('hours'), seed=cfg.seed)
    report = day.run()
    summary = report.get_summary()
    if len(report.intervals):
        from ..analytics import ConfidenceInterval
        saved = (report.intervals['loss_no_opf_kwh'] - report.intervals['loss_kwh']).to_numpy()
        mean, lower, upper = ConfidenceInterval.calculate_ci(saved)
        summary['saved_kwh_per_interval'] = {'mean': mean, 'ci95': [lower, upper]}
    artifacts = [_write_csv(out / "intervals.csv", report.intervals),
                 _write_json(out / "operation.json", summary)]
    if cfg.visualize and len(report.intervals):
        from ..analytics import Visualizer
        artifacts.append(Path(Visualizer(str(out / "figures")).plot_line_loss(report.intervals)))
    return summary, artifacts


HANDLERS: Dict[str, Handler] = {
    'forecast': handle_forecast,
    'tune': handle_tune,
    'reconfig': handle_reconfig,
    'opf3': handle_opf3,
    'fit-errors': handle_fit_errors,
    'schedule': handle_schedule,
    'validate': handle_validate,
    'regress': handle_regress,
    'operate': handle_operate,
}


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(1 << 16), b''):
            digest.update(chunk)
    return digest.hexdigest()


def package_versions() -> Dict[str, str]:
    versions = {'python': platform.python_version()}
    for name in VERSION_PACKAGES:
        try:
            module = __import__(name)
            versions[name] = getattr(module, '__version__', 'unknown')
        except ImportError:
            versions[name] = 'absent'
    return versions


def build_manifest(cfg: RunConfig, wall_time: float, artifacts: Artifacts,
                   status: int) -> Dict:
    """Manifeste suffisant pour rejouer l'exécution"""
    inputs = {}
    for role, raw in sorted(cfg.inputs.items()):
        path = Path(raw)
        inputs[role] = {'path': str(path),
                        'sha256': _sha256(path) if path.is_file() else None}
    return {
        'subcommand': cfg.subcommand,
        'seed': cfg.seed,
        'workers': cfg.workers,
        'inputs': inputs,
        'versions': package_versions(),
        'wall_time': wall_time,
        'exit_status': status,
        'artifacts': sorted(Path(a).name for a in artifacts),
        'config': cfg.to_dict()
    }


def _csv_digest(artifacts: Artifacts) -> str:
    """Empreinte commune des rapports CSV d'une exécution"""
    digest = hashlib.sha256()
    for path in sorted(p for p in artifacts if Path(p).suffix == '.csv'):
        digest.update(Path(path).name.encode('utf-8'))
        digest.update(Path(path).read_bytes())
    return digest.hexdigest()


def benchmark(cfg: RunConfig, logger: EventLogger = None) -> pd.DataFrame:
    """
    Exécute le pipeline cible à 1, 2, 4 et max workers

    Returns:
        DataFrame workers,wall_time,speedup,digest,identical ; identical
        compare les CSV produits à ceux de l'exécution à 1 worker
    """
    target = cfg.option('target', 'reconfig')
    if target not in HANDLERS or target == 'benchmark':
        from ..core.errors import ConfigError
        raise ConfigError(f"pipeline de benchmark inconnu: {target}")
    counts = sorted({1, 2, 4, max_workers()})
    rows = []
    base_out = Path(cfg.out) / "benchmark"
    for n in counts:
        run_cfg = cfg.with_overrides(subcommand=target, workers=n,
                                     out=str(base_out / f"workers_{n}"))
        out = run_cfg.prepare_output()
        start = time.perf_counter()
        _, artifacts = HANDLERS[target](run_cfg, out, logger or EventLogger())
        rows.append({'workers': n, 'wall_time': time.perf_counter() - start,
                     'digest': _csv_digest(artifacts)})
    frame = pd.DataFrame(rows, columns=['workers', 'wall_time', 'digest'])
    frame['speedup'] = frame['wall_time'].iloc[0] / frame['wall_time']
    frame['identical'] = frame['digest'] == frame['digest'].iloc[0]
    return frame[['workers', 'wall_time', 'speedup', 'digest', 'identical']]


def handle_benchmark(cfg: RunConfig, out: Path, logger: EventLogger):
    frame = benchmark(cfg, logger)
    summary = {'target': cfg.option('target', 'reconfig'),
               'identical': bool(frame['identical'].all()),
               'timings': frame.to_dict(orient='records')}
    artifacts = [_write_csv(out / "benchmark.csv", frame),
                 _write_json(out / "benchmark.json", summary)]
    if cfg.visualize:
        from ..analytics import Visualizer
        artifacts.append(Path(Visualizer(str(out / "figures")).plot_comparison(
            {f"{int(r.workers)} w": r.wall_time for r in frame.itertuples()}, 'wall_time')))
    return summary, artifacts


HANDLERS['benchmark'] = handle_benchmark


def run(cfg: RunConfig, logger: EventLogger = None) -> Tuple[int, Dict]:
    """
    Exécute une sous-commande, écrit les artefacts et le manifeste

    Returns:
        (code de sortie, résumé ou contenu de error.json)
    """
    logger = logger or EventLogger()
    start = time.perf_counter()
    artifacts: Artifacts = []
    try:
        out = cfg.prepare_output()
    except GridOptError as e:
        return EXIT_INPUT, e.to_dict()

    try:
        summary, artifacts = HANDLERS[cfg.subcommand](cfg, out, logger)
        status = EXIT_OK
    except InputError as e:
        summary, status = e.to_dict(), EXIT_INPUT
    except NumericalError as e:
        summary, status = e.to_dict(), EXIT_NUMERICAL
    except Exception as e:
        summary = {'error': str(e), 'type': type(e).__name__,
                   'detail': traceback.format_exc(limit=-3)}
        status = EXIT_NUMERICAL
        logger.log_event(0, EventType.WARNING, cfg.subcommand, "cli", None,
                         {'unexpected': type(e).__name__})
    if status != EXIT_OK:
        artifacts = [_write_json(out / "error.json", summary)]

    _write_json(out / "manifest.json",
                build_manifest(cfg, time.perf_counter() - start, artifacts, status))
    return status, summary
