"""
Replay a detection log against the scenario that produced it
"""

from dataclasses import dataclass
from typing import List

from ble_proximity_sim.core.types import Detection
from ble_proximity_sim.platform.behavior import BehaviorTable, can_decode, compose_advertisement
from ble_proximity_sim.simengine.scenario import DetectionLog, Scenario


@dataclass(frozen=True)
class ReplayViolation:
    detection: Detection
    reason: str


def _check(scenario: Scenario, table: BehaviorTable, detection: Detection) -> str:
    t = detection.timestamp
    if not 0 <= t < scenario.duration:
        return 'outside the scenario timeline'
    scanner = scenario.device(detection.scanner)
    if scanner is None:
        return 'unknown scanner'
    if not scanner.scan_window_open(t):
        return 'outside a scan window'

    if detection.resolved_id is not None:
        advertiser = scenario.device(detection.resolved_id)
        if advertiser is None:
            return 'resolved to an unknown device'
        candidates = [advertiser]
    else:
        candidates = [d for d in scenario.devices if d.device_id != scanner.device_id]
    in_range = [d for d in candidates if scenario.in_range(scanner.device_id, d.device_id, t)]
    if not in_range:
        return 'outside every proximity interval'

    cap = table.scan(scanner.platform, scanner.schedule.state_at(t))
    if not cap.can_scan:
        return 'scanner cannot scan in its current state'
    if detection.resolved_id is not None and not cap.can_connect:
        return 'scanner cannot connect to read the identifier'

    decodable = [
        d for d in in_range
        if can_decode(cap, compose_advertisement(table, d, d.schedule.state_at(t), detection.observed_mac,
                                                 t, scenario.app_service), scenario.app_service)
    ]
    if detection.service_confirmed and not decodable:
        return 'no in-range advertiser is decodable'
    return ''


def verify_log(scenario: Scenario, table: BehaviorTable, log: DetectionLog) -> List[ReplayViolation]:
    """Every detection that the scenario and behavior table cannot account for"""
    violations = []
    for detection in log:
        reason = _check(scenario, table, detection)
        if reason:
            violations.append(ReplayViolation(detection, reason))
    return violations
