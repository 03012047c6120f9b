"""
Availability arithmetic: how much of the waking day two locked iOS devices
spend unable to detect each other.

The analytic chain is monthly usage -> unlocked hours per day -> locked
fraction of the waking day -> fraction of the waking day both devices are
locked (independence gives the square). The Monte Carlo estimate draws
lock/unlock days and measures the joint-locked fraction directly.

The joint figure is a time fraction, not a per-encounter probability of
never detecting each other.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from ble_proximity_sim.core.errors import ModelValidationError
from ble_proximity_sim.core.types import AppState, Micros, StateSchedule, seconds_to_us

logger = logging.getLogger(__name__)

HOURS_PER_DAY = 24.0
PUBLISHED_ROUNDING_MINUTES = 5
DEFAULT_SESSIONS = 40
DEFAULT_TRIALS = 100_000
_BATCH_SIZE = 2_000


class Rounding(Enum):
    EXACT = 'exact'
    # Presentational: nearest 5 minutes, as in the published figure
    PUBLISHED = 'published'


@dataclass(frozen=True)
class UsageModel:
    usage_hours_per_month: float = 37.0
    days_per_month: float = 30.0
    sleep_hours_per_day: float = 8.0

    def __post_init__(self):
        for name in ('usage_hours_per_month', 'days_per_month', 'sleep_hours_per_day'):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ModelValidationError(f"{name} must be a positive number, got {value!r}")
        if self.waking_hours <= 0:
            raise ModelValidationError("sleep_hours_per_day leaves no waking window")
        if self.usage_hours_per_month / self.days_per_month >= self.waking_hours:
            raise ModelValidationError("daily usage must be shorter than the waking window")

    @property
    def waking_hours(self) -> float:
        return HOURS_PER_DAY - self.sleep_hours_per_day


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    stderr: float
    trials: int

    def within(self, target: float, sigmas: float = 3.0) -> bool:
        return abs(self.mean - target) <= sigmas * self.stderr


def unlocked_hours_per_day(m: UsageModel, rounding: Rounding = Rounding.EXACT) -> float:
    hours = m.usage_hours_per_month / m.days_per_month
    if rounding is Rounding.PUBLISHED:
        steps = round(hours * 60 / PUBLISHED_ROUNDING_MINUTES)
        hours = steps * PUBLISHED_ROUNDING_MINUTES / 60
    return hours


def locked_waking_fraction(unlocked_per_day: float, sleep_hours: float) -> float:
    waking = HOURS_PER_DAY - sleep_hours
    if waking <= 0:
        raise ModelValidationError("sleep_hours leaves no waking window")
    if not 0 <= unlocked_per_day <= waking:
        raise ModelValidationError(
            f"unlocked time {unlocked_per_day} h must lie within the {waking} h waking window")
    return (waking - unlocked_per_day) / waking


def pairwise_miss_fraction(locked_fraction: float) -> float:
    """Expected share of waking time both devices are locked, assuming independence"""
    if not 0.0 <= locked_fraction <= 1.0:
        raise ModelValidationError(f"locked fraction must lie in [0, 1], got {locked_fraction}")
    return locked_fraction * locked_fraction


def _session_starts(rng: np.random.Generator, n: int, sessions: int,
                    waking: float, unlocked: float) -> np.ndarray:
    """
    Start times of ``sessions`` disjoint sessions per row, on a circle of
    circumference ``waking``. A random rotation makes every instant equally
    likely to be covered.
    """
    length = unlocked / sessions
    gaps = np.sort(rng.uniform(0.0, waking - unlocked, size=(n, sessions)), axis=1)
    starts = gaps + np.arange(sessions) * length
    offset = rng.uniform(0.0, waking, size=(n, 1))
    return (starts + offset) % waking


def monte_carlo_simultaneous_locked(m: UsageModel, trials: int, rng: np.random.Generator,
                                    sessions: int = DEFAULT_SESSIONS, correlated: bool = False,
                                    rounding: Rounding = Rounding.PUBLISHED) -> MonteCarloEstimate:
    """
    Fraction of the waking window during which two devices are both locked.

    Each trial draws two daily schedules whose unlocked time is split into
    ``sessions`` equal sessions placed uniformly at random. With
    ``correlated`` both devices share one schedule, which bounds the joint
    figure from above by the single-device locked fraction.
    """
    if trials < 1:
        raise ModelValidationError("trials must be >= 1")
    if sessions < 1:
        raise ModelValidationError("sessions must be >= 1")

    waking = m.waking_hours
    unlocked = unlocked_hours_per_day(m, rounding)
    if unlocked == 0:
        return MonteCarloEstimate(1.0, 0.0, trials)
    length = unlocked / sessions

    results = np.empty(trials)
    for begin in range(0, trials, _BATCH_SIZE):
        n = min(_BATCH_SIZE, trials - begin)
        first = _session_starts(rng, n, sessions, waking, unlocked)
        second = first if correlated else _session_starts(rng, n, sessions, waking, unlocked)
        # circular overlap of every session pair, both wrap directions
        d = (second[:, None, :] - first[:, :, None]) % waking
        overlap = np.maximum(0.0, length - d) + np.maximum(0.0, length - (waking - d))
        either_unlocked = 2 * unlocked - overlap.sum(axis=(1, 2))
        results[begin:begin + n] = 1.0 - either_unlocked / waking

    mean = float(results.mean())
    stderr = float(results.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    logger.info(f"Monte Carlo over {trials} trials: {mean:.6f} +/- {stderr:.6f}")
    return MonteCarloEstimate(mean, stderr, trials)


def usage_schedule(m: UsageModel, rng: np.random.Generator, sessions: int = DEFAULT_SESSIONS,
                   rounding: Rounding = Rounding.PUBLISHED,
                   unlocked_state: AppState = AppState.FOREGROUND) -> StateSchedule:
    """
    One simulated waking day as an app-state schedule: ``unlocked_state``
    during phone sessions, Locked otherwise. Time 0 is the start of the
    waking window.
    """
    waking = m.waking_hours
    unlocked = unlocked_hours_per_day(m, rounding)
    if unlocked == 0:
        return StateSchedule.constant(AppState.LOCKED)
    length = unlocked / sessions
    window_us = seconds_to_us(waking * 3600)

    spans: List[Tuple[float, float]] = []
    for start in _session_starts(rng, 1, sessions, waking, unlocked)[0]:
        end = start + length
        if end <= waking:
            spans.append((start, end))
        else:
            spans.extend([(start, waking), (0.0, end - waking)])

    boundaries: List[Tuple[Micros, AppState]] = []
    for start, end in spans:
        boundaries.append((seconds_to_us(round(start * 3600, 6)), unlocked_state))
        boundaries.append((seconds_to_us(round(end * 3600, 6)), AppState.LOCKED))
    # a session starting where another ends wins the shared instant
    boundaries.sort(key=lambda b: (b[0], b[1] is not AppState.LOCKED))

    segments: List[Tuple[Micros, AppState]] = [(0, AppState.LOCKED)]
    for t, state in boundaries:
        if t >= window_us:
            continue
        if t == segments[-1][0]:
            segments[-1] = (t, state)
        else:
            segments.append((t, state))
    # collapse runs left by zero-length gaps
    collapsed: List[Tuple[Micros, AppState]] = []
    for t, state in segments:
        if collapsed and collapsed[-1][1] is state:
            continue
        collapsed.append((t, state))
    return StateSchedule(tuple(collapsed))


def format_hours(hours: float) -> str:
    minutes = round(hours * 60)
    return f"{minutes // 60} h {minutes % 60:02d} m"


def format_percent(fraction: float) -> str:
    return f"{round(fraction * 100)}%"


@dataclass(frozen=True)
class AvailabilityReport:
    model: UsageModel
    unlocked_exact: float
    unlocked_published: float
    locked_fraction: float
    miss_fraction: float
    locked_fraction_exact: float
    miss_fraction_exact: float
    monte_carlo: Optional[MonteCarloEstimate]

    def lines(self) -> List[str]:
        m = self.model
        out = [
            f"Usage model: {m.usage_hours_per_month:g} h/month, {m.days_per_month:g} days/month, "
            f"{m.sleep_hours_per_day:g} h sleep",
            f"Unlocked per day:        {self.unlocked_exact:.6f} h exact, "
            f"{self.unlocked_published:.6f} h rounded to 5 min ({format_hours(self.unlocked_published)})",
            f"Locked waking fraction:  {self.locked_fraction:.6f} ({format_percent(self.locked_fraction)})",
            f"Pairwise miss fraction:  {self.miss_fraction:.6f} ({format_percent(self.miss_fraction)})",
            f"Un-rounded chain:        locked {self.locked_fraction_exact:.6f}, "
            f"miss {self.miss_fraction_exact:.6f}",
        ]
        if self.monte_carlo is not None:
            mc = self.monte_carlo
            verdict = 'consistent' if mc.within(self.miss_fraction) else 'INCONSISTENT'
            out.append(
                f"Monte Carlo ({mc.trials} trials): {mc.mean:.6f} +/- {mc.stderr:.6f} "
                f"({verdict} with {self.miss_fraction:.6f} at 3 sigma)")
        out.append("Miss fraction is the share of waking time both devices are locked, "
                   "not a per-encounter probability.")
        return out


def availability_report(m: UsageModel, trials: int = DEFAULT_TRIALS, seed: int = 0,
                        sessions: int = DEFAULT_SESSIONS) -> AvailabilityReport:
    """Exact, published-rounding and simulated availability figures for one usage model"""
    unlocked_exact = unlocked_hours_per_day(m, Rounding.EXACT)
    unlocked_published = unlocked_hours_per_day(m, Rounding.PUBLISHED)
    locked = locked_waking_fraction(unlocked_published, m.sleep_hours_per_day)
    locked_exact = locked_waking_fraction(unlocked_exact, m.sleep_hours_per_day)
    estimate = None
    if trials > 0:
        estimate = monte_carlo_simultaneous_locked(m, trials, np.random.default_rng(seed), sessions)
    return AvailabilityReport(
        model=m,
        unlocked_exact=unlocked_exact,
        unlocked_published=unlocked_published,
        locked_fraction=locked,
        miss_fraction=pairwise_miss_fraction(locked),
        locked_fraction_exact=locked_exact,
        miss_fraction_exact=pairwise_miss_fraction(locked_exact),
        monte_carlo=estimate,
    )
