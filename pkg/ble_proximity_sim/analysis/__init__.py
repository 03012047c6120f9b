from ble_proximity_sim.analysis.availability import (
    AvailabilityReport, DEFAULT_SESSIONS, DEFAULT_TRIALS, MonteCarloEstimate, Rounding,
    UsageModel, availability_report, locked_waking_fraction, monte_carlo_simultaneous_locked,
    pairwise_miss_fraction, unlocked_hours_per_day, usage_schedule,
)

__all__ = [
    'AvailabilityReport', 'DEFAULT_SESSIONS', 'DEFAULT_TRIALS', 'MonteCarloEstimate', 'Rounding',
    'UsageModel', 'availability_report', 'locked_waking_fraction', 'monte_carlo_simultaneous_locked',
    'pairwise_miss_fraction', 'unlocked_hours_per_day', 'usage_schedule',
]
