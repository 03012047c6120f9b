import itertools
from pathlib import Path
from typing import Optional

import numpy as np
import pytest

from ble_proximity_sim.core.types import (
    AppState, DeviceConfig, MacPolicy, PlatformKind, StateSchedule, US_PER_SECOND,
    stable_id_from_name,
)
from ble_proximity_sim.platform.behavior import default_behavior_table
from ble_proximity_sim.simengine.scenario import ProximityInterval, Scenario

REPO_ROOT = Path(__file__).resolve().parent.parent
EXAMPLE_SCENARIO = REPO_ROOT / 'scenario.toml'

S = US_PER_SECOND


def make_device(name, platform=PlatformKind.ANDROID_LIKE, state=AppState.FOREGROUND,
                mac_policy=None, **timing):
    return DeviceConfig(
        device_id=stable_id_from_name(name),
        platform=platform,
        mac_policy=mac_policy or MacPolicy.fixed(),
        schedule=StateSchedule.constant(state),
        name=name,
        **timing,
    )


def all_in_range(devices, start, end):
    ids = sorted(d.device_id for d in devices)
    return ProximityInterval(start, end, frozenset(itertools.combinations(ids, 2)))


def random_scenario(rng: np.random.Generator, max_devices: int = 4, device_count: Optional[int] = None,
                    platform: Optional[PlatformKind] = None) -> Scenario:
    """A small scenario with random platforms, state changes, MAC policies and proximity"""
    duration = int(rng.integers(10, 90)) * S
    states = list(AppState)
    devices = []
    count = device_count if device_count is not None else int(rng.integers(2, max_devices + 1))
    for i in range(count):
        starts = sorted({0, *(int(t) for t in rng.integers(1, duration, size=int(rng.integers(0, 3))))})
        schedule = StateSchedule(tuple((t, states[int(rng.integers(0, 3))]) for t in starts))
        rotating = rng.random() < 0.5
        devices.append(DeviceConfig(
            device_id=stable_id_from_name(f"random-{i}"),
            platform=platform or (PlatformKind.IOS_LIKE if rng.random() < 0.5 else PlatformKind.ANDROID_LIKE),
            mac_policy=MacPolicy.rotating(int(rng.integers(1, 20)) * S) if rotating else MacPolicy.fixed(),
            schedule=schedule,
            name=f"random-{i}",
        ))

    ids = sorted(d.device_id for d in devices)
    all_pairs = list(itertools.combinations(ids, 2))
    proximity = []
    for _ in range(int(rng.integers(1, 4))):
        start = int(rng.integers(0, duration - S))
        end = int(rng.integers(start + 1, duration + 1))
        pairs = {pair for pair in all_pairs if rng.random() < 0.6} or {all_pairs[0]}
        proximity.append(ProximityInterval(start, end, frozenset(pairs)))

    return Scenario(
        duration=duration,
        devices=tuple(devices),
        proximity=tuple(proximity),
        seed=int(rng.integers(0, 2**32)),
        log_unconfirmed=bool(rng.random() < 0.3),
    )


@pytest.fixture
def table():
    return default_behavior_table()


@pytest.fixture
def write_config(tmp_path):
    def _write(text: str, name: str = 'scenario.toml') -> Path:
        path = tmp_path / name
        path.write_text(text)
        return path
    return _write
