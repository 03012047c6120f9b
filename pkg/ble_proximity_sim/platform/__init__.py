from ble_proximity_sim.platform.behavior import (
    ALL_CONFIGS, AdvertiseRule, BehaviorTable, DEFAULT_CONNECT_LATENCY, Placement,
    ScanCapability, can_decode, compose_advertisement, default_behavior_table,
    resolve_identifier,
)
from ble_proximity_sim.platform.handsets import DEFAULT_ROTATION_PERIOD, HANDSETS, Handset, get_handset
from ble_proximity_sim.platform.mac import next_mac

__all__ = [
    'ALL_CONFIGS', 'AdvertiseRule', 'BehaviorTable', 'DEFAULT_CONNECT_LATENCY', 'Placement',
    'ScanCapability', 'can_decode', 'compose_advertisement', 'default_behavior_table',
    'resolve_identifier', 'DEFAULT_ROTATION_PERIOD', 'HANDSETS', 'Handset', 'get_handset',
    'next_mac',
]
