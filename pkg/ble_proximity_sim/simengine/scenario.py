"""
Scenario and detection-log containers for the simulation engine
"""

import bisect
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from ble_proximity_sim.core.errors import ScenarioValidationError
from ble_proximity_sim.core.types import (
    AppState, DEFAULT_APP_SERVICE, DeviceConfig, Detection, Micros, ServiceId,
    StableId, StateSchedule, canonical_pair,
)
from ble_proximity_sim.platform.behavior import DEFAULT_CONNECT_LATENCY

Pair = Tuple[StableId, StableId]


def state_at(schedule: StateSchedule, t: Micros) -> AppState:
    """App state in force at ``t``; a boundary belongs to the new segment"""
    return schedule.state_at(t)


@dataclass(frozen=True)
class ProximityInterval:
    """Device pairs within radio range during [start, end)"""
    start: Micros
    end: Micros
    pairs: FrozenSet[Pair]

    def __post_init__(self):
        if not 0 <= self.start < self.end:
            raise ScenarioValidationError(f"proximity interval [{self.start}, {self.end}) is empty or negative")
        try:
            pairs = frozenset(canonical_pair(a, b) for a, b in self.pairs)
        except ValueError as e:
            raise ScenarioValidationError(str(e)) from e
        object.__setattr__(self, 'pairs', pairs)


@dataclass(frozen=True)
class Scenario:
    duration: Micros
    devices: Tuple[DeviceConfig, ...]
    proximity: Tuple[ProximityInterval, ...] = ()
    app_service: ServiceId = DEFAULT_APP_SERVICE
    seed: int = 0
    connect_latency: Micros = DEFAULT_CONNECT_LATENCY
    loss_probability: float = 0.0
    log_unconfirmed: bool = False
    _coverage: Dict[Pair, Tuple[Tuple[Micros, Micros], ...]] = field(
        init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'devices', tuple(sorted(self.devices, key=lambda d: d.device_id)))
        object.__setattr__(self, 'proximity', tuple(self.proximity))
        self._validate()
        object.__setattr__(self, '_coverage', self._merge_coverage())

    def _validate(self) -> None:
        if self.duration <= 0:
            raise ScenarioValidationError("scenario duration must be > 0")
        if not 0 <= self.seed < (1 << 64):
            raise ScenarioValidationError(f"seed must fit in 64 bits: {self.seed}")
        if self.connect_latency < 0:
            raise ScenarioValidationError("connect_latency must be >= 0")
        if not 0.0 <= self.loss_probability <= 1.0:
            raise ScenarioValidationError("loss_probability must lie in [0, 1]")

        ids = [d.device_id for d in self.devices]
        if len(set(ids)) != len(ids):
            raise ScenarioValidationError("device ids must be unique within a scenario")
        known = set(ids)
        for interval in self.proximity:
            if interval.end > self.duration:
                raise ScenarioValidationError(
                    f"proximity interval [{interval.start}, {interval.end}) extends past the scenario end")
            for a, b in interval.pairs:
                for device_id in (a, b):
                    if device_id not in known:
                        raise ScenarioValidationError(f"proximity pair references unknown device {device_id}")

    def _merge_coverage(self) -> Dict[Pair, Tuple[Tuple[Micros, Micros], ...]]:
        spans: Dict[Pair, List[Tuple[Micros, Micros]]] = {}
        for interval in self.proximity:
            for pair in interval.pairs:
                spans.setdefault(pair, []).append((interval.start, interval.end))
        merged = {}
        for pair, items in spans.items():
            items.sort()
            out: List[List[Micros]] = []
            for start, end in items:
                if out and start <= out[-1][1]:
                    out[-1][1] = max(out[-1][1], end)
                else:
                    out.append([start, end])
            merged[pair] = tuple((s, e) for s, e in out)
        return merged

    def device(self, device_id: StableId) -> Optional[DeviceConfig]:
        for dev in self.devices:
            if dev.device_id == device_id:
                return dev
        return None

    def _span_at(self, pair: Pair, t: Micros) -> Optional[Tuple[Micros, Micros]]:
        spans = self._coverage.get(pair)
        if not spans:
            return None
        i = bisect.bisect_right(spans, (t, float('inf'))) - 1
        if i >= 0 and spans[i][0] <= t < spans[i][1]:
            return spans[i]
        return None

    def in_range(self, a: StableId, b: StableId, t: Micros) -> bool:
        return self._span_at(canonical_pair(a, b), t) is not None

    def contact_window(self, a: StableId, b: StableId, t: Micros) -> Micros:
        """Remaining contiguous co-presence from ``t``; 0 when out of range"""
        span = self._span_at(canonical_pair(a, b), t)
        return span[1] - t if span else 0

    def co_presence(self, a: StableId, b: StableId) -> Micros:
        """Total time the pair spends in range over the whole scenario"""
        return sum(end - start for start, end in self._coverage.get(canonical_pair(a, b), ()))

    def pairs(self) -> Iterable[Pair]:
        return sorted(self._coverage)


@dataclass(frozen=True)
class DetectionLog:
    detections: Tuple[Detection, ...]
    seed: Optional[int] = None
    duration: Optional[Micros] = None

    def __post_init__(self):
        detections = tuple(self.detections)
        keys = [d.sort_key for d in detections]
        if any(b < a for a, b in zip(keys, keys[1:])):
            raise ValueError("detections must be ordered by (timestamp, scanner, observed_mac)")
        object.__setattr__(self, 'detections', detections)

    def __len__(self) -> int:
        return len(self.detections)

    def __iter__(self):
        return iter(self.detections)

    @property
    def resolved(self) -> Tuple[Detection, ...]:
        return tuple(d for d in self.detections if d.resolved_id is not None)
