"""
From raw detections to merged contact intervals
"""

from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, NamedTuple, Optional, Tuple

from ble_proximity_sim.core.types import (
    ContactInterval, Micros, StableId, US_PER_SECOND, canonical_pair,
)
from ble_proximity_sim.simengine.scenario import DetectionLog, Scenario

DEFAULT_SCAN_INTERVAL: Micros = 5 * US_PER_SECOND
DEFAULT_GAP_TOLERANCE: Micros = 2 * DEFAULT_SCAN_INTERVAL
DEFAULT_ATOM_LENGTH: Micros = DEFAULT_SCAN_INTERVAL

# (a, b, t) -> latest instant a contact of the pair seen at t may extend to
Horizon = Callable[[StableId, StableId, Micros], Micros]


class Sighting(NamedTuple):
    timestamp: Micros
    scanner: StableId
    peer: StableId


def resolved_sightings(log: DetectionLog) -> List[Sighting]:
    """Identified sightings only; MAC-only detections are dropped"""
    sightings = [
        Sighting(d.timestamp, d.scanner, d.resolved_id)
        for d in log if d.resolved_id is not None
    ]
    sightings.sort(key=lambda s: s.timestamp)
    return sightings


def scenario_horizon(scenario: Scenario) -> Horizon:
    """Extend no further than the end of the pair's current proximity span"""
    def horizon(a: StableId, b: StableId, t: Micros) -> Micros:
        return t + scenario.contact_window(a, b, t)
    return horizon


def log_horizon(log: DetectionLog) -> Optional[Horizon]:
    """Extend no further than the simulated duration recorded in the log"""
    if log.duration is None:
        return None
    duration = log.duration
    return lambda a, b, t: duration


def _merge_pair(times: List[Micros], gap_tolerance: Micros, atom_length: Micros,
                limit: Optional[Callable[[Micros], Micros]] = None) -> List[Tuple[Micros, Micros]]:
    chains: List[List[Micros]] = []
    for t in times:
        if chains and t - chains[-1][1] <= gap_tolerance:
            chains[-1][1] = t
        else:
            chains.append([t, t])

    spans: List[List[Micros]] = []
    for start, end in chains:
        if end == start:
            end = start + atom_length
            if limit is not None:
                end = max(start + 1, min(end, limit(start)))
        # an extended lone sighting may run into the next chain
        if spans and start <= spans[-1][1]:
            spans[-1][1] = max(spans[-1][1], end)
        else:
            spans.append([start, end])
    return [(start, end) for start, end in spans]


def aggregate_contacts(sightings: Iterable[Sighting],
                       gap_tolerance: Micros = DEFAULT_GAP_TOLERANCE,
                       min_duration: Micros = 0,
                       atom_length: Micros = DEFAULT_ATOM_LENGTH,
                       horizon: Optional[Horizon] = None) -> List[ContactInterval]:
    """
    Merge sightings of each unordered pair into contact intervals.

    Consecutive sightings at most ``gap_tolerance`` apart share an interval
    spanning first to last sighting. An interval with a single instant is
    widened to ``atom_length``, but never past ``horizon`` when one is given.
    Intervals shorter than ``min_duration`` are dropped. Output is sorted by
    pair, then start; intervals of one pair are disjoint.
    """
    if gap_tolerance < 0 or min_duration < 0:
        raise ValueError("gap_tolerance and min_duration must be >= 0")
    if atom_length <= 0:
        raise ValueError("atom_length must be > 0")

    by_pair: Dict[Tuple[StableId, StableId], List[Micros]] = defaultdict(list)
    for sighting in sightings:
        by_pair[canonical_pair(sighting.scanner, sighting.peer)].append(sighting.timestamp)

    intervals = []
    for a, b in sorted(by_pair):
        limit = (lambda t, a=a, b=b: horizon(a, b, t)) if horizon is not None else None
        for start, end in _merge_pair(sorted(by_pair[(a, b)]), gap_tolerance, atom_length, limit):
            if end - start >= min_duration:
                intervals.append(ContactInterval(a, b, start, end))
    return intervals


@dataclass(frozen=True)
class IdentityFragmentation:
    observed_macs: int
    resolved_peers: int

    @property
    def macs_per_peer(self) -> float:
        return self.observed_macs / self.resolved_peers if self.resolved_peers else float('nan')


def identity_fragmentation(log: DetectionLog) -> Dict[StableId, IdentityFragmentation]:
    """Per scanner: how many addresses it saw versus how many devices they belonged to"""
    macs: Dict[StableId, set] = defaultdict(set)
    peers: Dict[StableId, set] = defaultdict(set)
    for d in log:
        macs[d.scanner].add(d.observed_mac)
        if d.resolved_id is not None:
            peers[d.scanner].add(d.resolved_id)
    return {
        scanner: IdentityFragmentation(len(macs[scanner]), len(peers[scanner]))
        for scanner in sorted(macs)
    }
