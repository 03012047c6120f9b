"""
Discrete-event engine: advertisement events against periodic scan windows
"""

import heapq
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from ble_proximity_sim.core.types import (
    AdvPacket, DeviceConfig, Detection, MacAddress, Micros, StableId,
)
from ble_proximity_sim.platform.behavior import (
    BehaviorTable, can_decode, compose_advertisement, resolve_identifier,
)
from ble_proximity_sim.platform.mac import next_mac
from ble_proximity_sim.simengine.scenario import DetectionLog, Scenario
from ble_proximity_sim.utils.logging import LoggerMixin

# Advertising delay added to every event, inclusive bounds
MAX_ADV_JITTER: Micros = 10_000


@dataclass(order=True)
class AdvEvent:
    """One scheduled advertisement; ties resolve by device id"""
    time: Micros
    device_id: StableId
    index: int = field(compare=False)


@dataclass
class _DeviceRuntime:
    config: DeviceConfig
    jitter_rng: np.random.Generator
    mac_rng: np.random.Generator
    mac: MacAddress
    last_rotation: Micros = 0
    adv_count: int = 0

    def jittered(self, index: int) -> Micros:
        return index * self.config.adv_interval + int(self.jitter_rng.integers(0, MAX_ADV_JITTER + 1))

    def mac_at(self, t: Micros) -> MacAddress:
        rotated = next_mac(self.config.mac_policy, self.mac, t - self.last_rotation, self.mac_rng)
        if rotated is not self.mac:
            self.mac = rotated
            self.last_rotation = t
        return self.mac


class SimulationEngine(LoggerMixin):
    """Runs one scenario over one event queue; output depends only on inputs"""

    def __init__(self, scenario: Scenario, table: BehaviorTable):
        self.scenario = scenario
        self.table = table
        self.adv_counts: Dict[StableId, int] = {}

    def _build_runtimes(self) -> List[_DeviceRuntime]:
        # Independent jitter and MAC streams per device, so changing a MAC
        # policy never perturbs advertisement timing
        root = np.random.SeedSequence(self.scenario.seed)
        device_seeds = root.spawn(len(self.scenario.devices) + 1)
        self._loss_rng = np.random.default_rng(device_seeds[-1])

        runtimes = []
        for dev, seed_seq in zip(self.scenario.devices, device_seeds):
            jitter_seq, mac_seq = seed_seq.spawn(2)
            mac_rng = np.random.default_rng(mac_seq)
            mac = dev.initial_mac or MacAddress.random(mac_rng)
            runtimes.append(_DeviceRuntime(dev, np.random.default_rng(jitter_seq), mac_rng, mac))
        return runtimes

    def run(self) -> DetectionLog:
        scenario = self.scenario
        runtimes = self._build_runtimes()
        by_id = {rt.config.device_id: rt for rt in runtimes}

        queue: List[AdvEvent] = []
        for rt in runtimes:
            first = rt.jittered(0)
            if first < scenario.duration:
                heapq.heappush(queue, AdvEvent(first, rt.config.device_id, 0))

        detections: List[Detection] = []
        while queue:
            event = heapq.heappop(queue)
            advertiser = by_id[event.device_id]
            t = event.time

            state = advertiser.config.schedule.state_at(t)
            packet = compose_advertisement(
                self.table, advertiser.config, state, advertiser.mac_at(t), t, scenario.app_service)
            advertiser.adv_count += 1

            for scanner in runtimes:
                if scanner is advertiser:
                    continue
                detection = self._observe(scanner.config, advertiser.config, packet)
                if detection is not None:
                    detections.append(detection)

            following = advertiser.jittered(event.index + 1)
            if following < scenario.duration:
                heapq.heappush(queue, AdvEvent(following, event.device_id, event.index + 1))

        detections.sort(key=lambda d: d.sort_key)
        self.adv_counts = {rt.config.device_id: rt.adv_count for rt in runtimes}
        self.logger.info(
            f"Simulated {len(runtimes)} devices for {scenario.duration / 1e6:g}s "
            f"(seed {scenario.seed}): {sum(self.adv_counts.values())} adverts, "
            f"{len(detections)} detections")
        return DetectionLog(tuple(detections), seed=scenario.seed, duration=scenario.duration)

    def _observe(self, scanner: DeviceConfig, advertiser: DeviceConfig,
                 packet: AdvPacket) -> Optional[Detection]:
        scenario = self.scenario
        t = packet.timestamp
        if not scenario.in_range(scanner.device_id, advertiser.device_id, t):
            return None
        if not scanner.scan_window_open(t):
            return None

        cap = self.table.scan(scanner.platform, scanner.schedule.state_at(t))
        if can_decode(cap, packet, scenario.app_service):
            resolved = resolve_identifier(
                cap, advertiser,
                contact_window=scenario.contact_window(scanner.device_id, advertiser.device_id, t),
                connect_latency=scenario.connect_latency,
                loss_probability=scenario.loss_probability,
                rng=self._loss_rng,
            )
            self.logger.debug(f"t={t} {scanner.display_name} decoded {packet.sender_mac} -> {resolved}")
            return Detection(t, scanner.device_id, packet.sender_mac, True, resolved)

        if scenario.log_unconfirmed and cap.can_scan:
            return Detection(t, scanner.device_id, packet.sender_mac, False, None)
        return None


def run(scenario: Scenario, table: BehaviorTable) -> DetectionLog:
    """Simulate ``scenario`` under ``table`` and return the ordered detection log"""
    return SimulationEngine(scenario, table).run()
