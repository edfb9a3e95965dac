"""
Module Scheduler - Planification day-ahead sous contraintes en chance
"""

from .market import (
    MarketPrices,
    ForecastInputs,
    ChanceParams,
    ScheduleOptions,
    read_prices,
    write_prices,
    read_forecasts,
    write_forecasts,
    default_renewable_error,
    synthetic_day
)
from .chance import (
    renewable_error_quantile,
    deterministic_bounds,
    HourDecision,
    draw_scenarios,
    expected_cost,
    solve_hour,
    Schedule,
    schedule_day,
    total_cost,
    rt_share,
    monte_carlo_validate,
    validation_bounds,
    compare_error_models,
    write_schedule,
    read_schedule
)

__all__ = [
    'MarketPrices',
    'ForecastInputs',
    'ChanceParams',
    'ScheduleOptions',
    'read_prices',
    'write_prices',
    'read_forecasts',
    'write_forecasts',
    'default_renewable_error',
    'synthetic_day',
    'renewable_error_quantile',
    'deterministic_bounds',
    'HourDecision',
    'draw_scenarios',
    'expected_cost',
    'solve_hour',
    'Schedule',
    'schedule_day',
    'total_cost',
    'rt_share',
    'monte_carlo_validate',
    'validation_bounds',
    'compare_error_models',
    'write_schedule',
    'read_schedule'
]
