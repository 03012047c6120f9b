"""
Domain types shared by every module of the simulator

Time is an integer count of simulated microseconds (``Micros``); there is no
wall clock anywhere in the model. Identifiers and service ids are 128-bit
UUIDs, MAC addresses are 48-bit integers rendered as colon-separated hex.
"""

from __future__ import annotations

import bisect
import re
import uuid
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from enum import Enum
from types import MappingProxyType
from typing import Dict, FrozenSet, Mapping, Optional, Tuple, Union

import networkx as nx
import numpy as np

Micros = int
StableId = uuid.UUID
ServiceId = uuid.UUID

US_PER_SECOND = 1_000_000

# Namespace for name-derived device ids
DEVICE_NAMESPACE = uuid.UUID('3f1c6b0e-5d4a-4c8e-9a51-7b2d0e6f9c13')

# Shared custom service every app instance advertises
DEFAULT_APP_SERVICE = uuid.UUID('8a3e0f52-6c1d-4b7a-9e24-d15c0b7f4e61')

_DURATION_UNITS = {
    'us': Decimal(1),
    'ms': Decimal(1_000),
    's': Decimal(US_PER_SECOND),
    'm': Decimal(60 * US_PER_SECOND),
    'h': Decimal(3600 * US_PER_SECOND),
}
_DURATION_RE = re.compile(r'^\s*([0-9]+(?:\.[0-9]*)?|\.[0-9]+)\s*(us|ms|s|m|h)?\s*$')
_MAC_RE = re.compile(r'^[0-9a-fA-F]{2}(?::[0-9a-fA-F]{2}){5}$')


def seconds_to_us(seconds: Union[int, float, Decimal]) -> Micros:
    """Convert seconds to integer microseconds (round half to even)"""
    return int((Decimal(str(seconds)) * US_PER_SECOND).to_integral_value())


def us_to_seconds(value: Micros) -> float:
    return value / US_PER_SECOND


def format_seconds(value: Micros) -> str:
    """Exact decimal rendering of a microsecond count, e.g. ``12.500000``"""
    sign = '-' if value < 0 else ''
    value = abs(value)
    return f"{sign}{value // US_PER_SECOND}.{value % US_PER_SECOND:06d}"


def parse_duration(value: Union[str, int, float]) -> Micros:
    """
    Parse a duration into microseconds.

    Numbers are seconds; strings may carry a ``us``/``ms``/``s``/``m``/``h``
    suffix (bare strings are seconds).

    Raises:
        ValueError: on negative, non-numeric or fractional-microsecond input
    """
    if isinstance(value, bool):
        raise ValueError(f"not a duration: {value!r}")
    if isinstance(value, (int, float)):
        amount, unit = Decimal(str(value)), 's'
        if amount < 0:
            raise ValueError(f"negative duration: {value!r}")
    elif isinstance(value, str):
        match = _DURATION_RE.match(value)
        if not match:
            raise ValueError(f"not a duration: {value!r}")
        try:
            amount = Decimal(match.group(1))
        except InvalidOperation as e:
            raise ValueError(f"not a duration: {value!r}") from e
        unit = match.group(2) or 's'
    else:
        raise ValueError(f"not a duration: {value!r}")

    micros = amount * _DURATION_UNITS[unit]
    if micros != micros.to_integral_value():
        raise ValueError(f"duration finer than one microsecond: {value!r}")
    return int(micros)


def stable_id_from_name(name: str) -> StableId:
    """Deterministic identifier for a named device"""
    return uuid.uuid5(DEVICE_NAMESPACE, name)


def parse_uuid(text: str) -> uuid.UUID:
    """Parse a hyphenated UUID, rejecting other renderings"""
    parsed = uuid.UUID(text)
    if str(parsed) != text.lower():
        raise ValueError(f"not a hyphenated uuid: {text!r}")
    return parsed


class PlatformKind(Enum):
    ANDROID_LIKE = 'android'
    IOS_LIKE = 'ios'

    @property
    def label(self) -> str:
        return 'Android' if self is PlatformKind.ANDROID_LIKE else 'iOS'


class AppState(Enum):
    FOREGROUND = 'foreground'
    BACKGROUND = 'background'
    LOCKED = 'locked'

    @property
    def label(self) -> str:
        return {'foreground': 'FG', 'background': 'BG', 'locked': 'L'}[self.value]

    @classmethod
    def parse(cls, text: str) -> 'AppState':
        """Accept either the value (``locked``) or the short label (``L``)"""
        for state in cls:
            if text.lower() in (state.value, state.label.lower()):
                return state
        raise ValueError(f"unknown app state: {text!r}")


@dataclass(frozen=True, order=True)
class MacAddress:
    value: int

    def __post_init__(self):
        if not 0 <= self.value < (1 << 48):
            raise ValueError(f"MAC address out of 48-bit range: {self.value:#x}")

    def __str__(self) -> str:
        raw = f"{self.value:012x}"
        return ':'.join(raw[i:i + 2] for i in range(0, 12, 2))

    @classmethod
    def parse(cls, text: str) -> 'MacAddress':
        if not _MAC_RE.match(text):
            raise ValueError(f"not a MAC address: {text!r}")
        return cls(int(text.replace(':', ''), 16))

    @classmethod
    def random(cls, rng: np.random.Generator) -> 'MacAddress':
        """Draw a locally-administered unicast address (46 random bits)"""
        value = int(rng.integers(0, 1 << 48, dtype=np.int64))
        value |= 1 << 41     # locally administered
        value &= ~(1 << 40)  # unicast
        return cls(value)

    @property
    def is_locally_administered(self) -> bool:
        return bool((self.value >> 40) & 0x02)


class MacMode(Enum):
    FIXED = 'fixed'
    ROTATING_RANDOM = 'rotating'


@dataclass(frozen=True)
class MacPolicy:
    mode: MacMode = MacMode.FIXED
    rotation_period: Optional[Micros] = None

    def __post_init__(self):
        if self.mode is MacMode.ROTATING_RANDOM:
            if self.rotation_period is None or self.rotation_period <= 0:
                raise ValueError("rotation_period must be > 0 for a rotating MAC policy")
        elif self.rotation_period is not None:
            raise ValueError("rotation_period is only valid for a rotating MAC policy")

    @classmethod
    def fixed(cls) -> 'MacPolicy':
        return cls(MacMode.FIXED)

    @classmethod
    def rotating(cls, period: Micros) -> 'MacPolicy':
        return cls(MacMode.ROTATING_RANDOM, period)


@dataclass(frozen=True)
class StateSchedule:
    """Piecewise-constant app state; each segment holds until the next starts"""

    segments: Tuple[Tuple[Micros, AppState], ...]
    _starts: Tuple[Micros, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        segments = tuple((int(start), state) for start, state in self.segments)
        if not segments:
            raise ValueError("schedule needs at least one segment")
        if segments[0][0] != 0:
            raise ValueError("first schedule segment must start at 0")
        starts = tuple(start for start, _ in segments)
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("schedule segments must be strictly increasing in start time")
        object.__setattr__(self, 'segments', segments)
        object.__setattr__(self, '_starts', starts)

    @classmethod
    def constant(cls, state: AppState) -> 'StateSchedule':
        return cls(((0, state),))

    def state_at(self, t: Micros) -> AppState:
        if t < 0:
            raise ValueError(f"negative time: {t}")
        return self.segments[bisect.bisect_right(self._starts, t) - 1][1]


@dataclass(frozen=True)
class DeviceConfig:
    device_id: StableId
    platform: PlatformKind
    mac_policy: MacPolicy
    schedule: StateSchedule
    adv_interval: Micros = 1 * US_PER_SECOND
    scan_interval: Micros = 5 * US_PER_SECOND
    scan_window: Micros = 2 * US_PER_SECOND
    name: str = ''
    initial_mac: Optional[MacAddress] = None

    def __post_init__(self):
        if self.adv_interval <= 0:
            raise ValueError(f"{self.display_name}: adv_interval must be > 0")
        if not 0 < self.scan_window <= self.scan_interval:
            raise ValueError(f"{self.display_name}: need 0 < scan_window <= scan_interval")

    @property
    def display_name(self) -> str:
        return self.name or str(self.device_id)

    def scan_window_open(self, t: Micros) -> bool:
        """Scan windows are [k*scan_interval, k*scan_interval + scan_window)"""
        return t % self.scan_interval < self.scan_window


@dataclass(frozen=True)
class AdvPacket:
    timestamp: Micros
    # Simulator bookkeeping; the detection rule never reads it
    sender_device: StableId
    sender_mac: MacAddress
    primary_services: FrozenSet[ServiceId]
    overflow_services: FrozenSet[ServiceId]
    degraded: bool = False

    def __post_init__(self):
        if self.primary_services & self.overflow_services:
            raise ValueError("a service cannot sit in both the primary and overflow payload")
        if self.degraded and self.primary_services:
            raise ValueError("a degraded advertisement carries no services in the primary payload")


@dataclass(frozen=True)
class Detection:
    timestamp: Micros
    scanner: StableId
    observed_mac: MacAddress
    service_confirmed: bool
    resolved_id: Optional[StableId] = None

    def __post_init__(self):
        if self.resolved_id is not None and not self.service_confirmed:
            raise ValueError("resolved_id requires a confirmed service")

    @property
    def sort_key(self) -> Tuple[Micros, StableId, MacAddress]:
        return (self.timestamp, self.scanner, self.observed_mac)


def canonical_pair(x: StableId, y: StableId) -> Tuple[StableId, StableId]:
    """Order an unordered pair of distinct identifiers"""
    if x == y:
        raise ValueError(f"self-pair is not a valid contact: {x}")
    return (x, y) if x < y else (y, x)


@dataclass(frozen=True, order=True)
class ContactInterval:
    a: StableId
    b: StableId
    start: Micros
    end: Micros

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError("contact pair must be stored canonically (a < b)")
        if not self.start < self.end:
            raise ValueError("contact interval must have start < end")

    @property
    def pair(self) -> Tuple[StableId, StableId]:
        return (self.a, self.b)

    @property
    def duration(self) -> Micros:
        return self.end - self.start


@dataclass(frozen=True)
class SocialGraph:
    """Undirected graph over stable ids, weighted by total contact time"""

    nodes: FrozenSet[StableId] = frozenset()
    edges: Mapping[Tuple[StableId, StableId], Micros] = field(default_factory=dict)

    def __post_init__(self):
        nodes = frozenset(self.nodes)
        for (a, b), weight in self.edges.items():
            if a == b:
                raise ValueError(f"self-edge on {a}")
            if (a, b) != canonical_pair(a, b):
                raise ValueError(f"edge ({a}, {b}) is not canonical")
            if a not in nodes or b not in nodes:
                raise ValueError(f"edge ({a}, {b}) references a missing node")
            if weight <= 0:
                raise ValueError(f"edge ({a}, {b}) has non-positive weight")
        object.__setattr__(self, 'nodes', nodes)
        object.__setattr__(self, 'edges', MappingProxyType(dict(sorted(self.edges.items()))))

    @property
    def total_weight(self) -> Micros:
        return sum(self.edges.values())

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(sorted(self.nodes))
        for (a, b), weight in self.edges.items():
            graph.add_edge(a, b, weight=us_to_seconds(weight))
        return graph

    def degree(self) -> Dict[StableId, int]:
        return dict(self.to_networkx().degree())
