"""
Platform- and state-dependent BLE behavior

The behavior table is data: what each (platform, app state) puts in its
advertisement and what it can scan, decode and connect to. The default
calibration reproduces the detection matrix measured on handsets, where the
only failing combination is two locked iOS devices.
"""

import hashlib
import json
import logging
from dataclasses import dataclass, replace
from enum import Enum
from itertools import product
from typing import Any, Dict, Mapping, Optional, Tuple

import numpy as np

from ble_proximity_sim.core.types import (
    AdvPacket, AppState, DeviceConfig, MacAddress, Micros, PlatformKind,
    ServiceId, StableId,
)

logger = logging.getLogger(__name__)

ConfigKey = Tuple[PlatformKind, AppState]
ALL_CONFIGS: Tuple[ConfigKey, ...] = tuple(product(PlatformKind, AppState))

DEFAULT_CONNECT_LATENCY: Micros = 2_000_000


class Placement(Enum):
    PRIMARY = 'primary'
    OVERFLOW = 'overflow'
    NONE = 'none'


@dataclass(frozen=True)
class AdvertiseRule:
    """Where the app service id lands in the advertisement"""
    placement: Placement = Placement.PRIMARY
    degraded: bool = False

    def __post_init__(self):
        if self.degraded and self.placement is Placement.PRIMARY:
            raise ValueError("a degraded advertisement cannot carry the service in the primary payload")


@dataclass(frozen=True)
class ScanCapability:
    can_scan: bool = True
    decodes_primary: bool = True
    decodes_overflow: bool = True
    can_connect: bool = True

    def __post_init__(self):
        if not self.can_scan and (self.decodes_primary or self.decodes_overflow or self.can_connect):
            raise ValueError("a device that cannot scan cannot decode or connect")


@dataclass(frozen=True)
class BehaviorTable:
    advertise_rule: Mapping[ConfigKey, AdvertiseRule]
    scan_rule: Mapping[ConfigKey, ScanCapability]

    def __post_init__(self):
        for key in ALL_CONFIGS:
            if key not in self.advertise_rule or key not in self.scan_rule:
                platform, state = key
                raise ValueError(f"behavior table has no rule for {platform.value}/{state.value}")

    def advertise(self, platform: PlatformKind, state: AppState) -> AdvertiseRule:
        return self.advertise_rule[(platform, state)]

    def scan(self, platform: PlatformKind, state: AppState) -> ScanCapability:
        return self.scan_rule[(platform, state)]

    def with_overrides(self, overrides: Mapping[str, Mapping[str, Mapping[str, Any]]]) -> 'BehaviorTable':
        """
        Apply ``{platform: {state: {key: value}}}`` overrides from a config file.

        Keys: ``advertise`` (primary/overflow/none), ``degraded``, ``can_scan``,
        ``decodes_primary``, ``decodes_overflow``, ``can_connect``.

        Raises:
            ValueError: on unknown platforms, states or keys, or if the result
                violates a rule invariant
        """
        advertise = dict(self.advertise_rule)
        scan = dict(self.scan_rule)
        for platform_name, states in overrides.items():
            platform = PlatformKind(platform_name)
            for state_name, values in states.items():
                key = (platform, AppState.parse(state_name))
                adv_changes, scan_changes = {}, {}
                for name, value in values.items():
                    if name == 'advertise':
                        adv_changes['placement'] = Placement(value)
                    elif name == 'degraded':
                        adv_changes['degraded'] = _as_bool(name, value)
                    elif name in ('can_scan', 'decodes_primary', 'decodes_overflow', 'can_connect'):
                        scan_changes[name] = _as_bool(name, value)
                    else:
                        raise ValueError(f"unknown behavior key '{name}'")
                advertise[key] = replace(advertise[key], **adv_changes)
                scan[key] = replace(scan[key], **scan_changes)
        return BehaviorTable(advertise, scan)

    def calibration_hash(self) -> str:
        """SHA-256 over a canonical rendering of every rule"""
        canonical = {
            f"{platform.value}/{state.value}": {
                'advertise': self.advertise_rule[(platform, state)].placement.value,
                'degraded': self.advertise_rule[(platform, state)].degraded,
                **{k: getattr(self.scan_rule[(platform, state)], k)
                   for k in ('can_scan', 'decodes_primary', 'decodes_overflow', 'can_connect')},
            }
            for platform, state in ALL_CONFIGS
        }
        blob = json.dumps(canonical, sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(blob.encode('utf-8')).hexdigest()


def _as_bool(name: str, value: Any) -> bool:
    if not isinstance(value, bool):
        raise ValueError(f"behavior key '{name}' expects true/false, got {value!r}")
    return value


def default_behavior_table() -> BehaviorTable:
    """
    Calibrated behavior: a locked iOS device moves its service id to the
    overflow area and degrades the packet, and a locked iOS scanner cannot
    read overflow adverts. Everything else advertises and decodes normally.
    """
    full_scan = ScanCapability()
    advertise: Dict[ConfigKey, AdvertiseRule] = {}
    scan: Dict[ConfigKey, ScanCapability] = {}

    for state in AppState:
        advertise[(PlatformKind.ANDROID_LIKE, state)] = AdvertiseRule(Placement.PRIMARY)
        scan[(PlatformKind.ANDROID_LIKE, state)] = full_scan

    advertise[(PlatformKind.IOS_LIKE, AppState.FOREGROUND)] = AdvertiseRule(Placement.PRIMARY)
    advertise[(PlatformKind.IOS_LIKE, AppState.BACKGROUND)] = AdvertiseRule(Placement.OVERFLOW)
    advertise[(PlatformKind.IOS_LIKE, AppState.LOCKED)] = AdvertiseRule(Placement.OVERFLOW, degraded=True)
    scan[(PlatformKind.IOS_LIKE, AppState.FOREGROUND)] = full_scan
    scan[(PlatformKind.IOS_LIKE, AppState.BACKGROUND)] = full_scan
    scan[(PlatformKind.IOS_LIKE, AppState.LOCKED)] = ScanCapability(decodes_overflow=False)

    return BehaviorTable(advertise, scan)


def compose_advertisement(table: BehaviorTable, dev: DeviceConfig, state: AppState,
                          mac: MacAddress, t: Micros, app_service: ServiceId) -> AdvPacket:
    """Build the packet ``dev`` transmits at ``t`` while in ``state``"""
    if t < 0:
        raise ValueError(f"negative timestamp: {t}")
    rule = table.advertise(dev.platform, state)
    service = frozenset({app_service})
    return AdvPacket(
        timestamp=t,
        sender_device=dev.device_id,
        sender_mac=mac,
        primary_services=service if rule.placement is Placement.PRIMARY else frozenset(),
        overflow_services=service if rule.placement is Placement.OVERFLOW else frozenset(),
        degraded=rule.degraded,
    )


def can_decode(cap: ScanCapability, packet: AdvPacket, app_service: ServiceId) -> bool:
    """Whether a scanner with ``cap`` recognises the app service in ``packet``"""
    if not cap.can_scan:
        return False
    in_primary = app_service in packet.primary_services and cap.decodes_primary
    in_overflow = app_service in packet.overflow_services and cap.decodes_overflow
    return in_primary or in_overflow


def resolve_identifier(scanner_cap: ScanCapability, advertiser: DeviceConfig,
                       contact_window: Micros, connect_latency: Micros = DEFAULT_CONNECT_LATENCY,
                       loss_probability: float = 0.0,
                       rng: Optional[np.random.Generator] = None) -> Optional[StableId]:
    """
    Read the advertiser's stable id from the shared service characteristic.

    The caller must already have decoded the advertiser's app service. The
    read succeeds when the scanner can connect and the remaining contact
    window covers the connection latency; with ``loss_probability`` > 0 it
    additionally fails with that probability, drawn from ``rng``.
    """
    if not scanner_cap.can_connect or contact_window < connect_latency:
        return None
    if loss_probability > 0.0:
        if rng is None:
            raise ValueError("a random stream is required when loss_probability > 0")
        if rng.random() < loss_probability:
            logger.debug(f"Identifier read from {advertiser.display_name} lost")
            return None
    return advertiser.device_id
